#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "stereosnn/error.hpp"
#include "stereosnn/metrics.hpp"

using namespace stereosnn;

namespace {

Topology topo() {
  TopologyParams p;
  p.retina_width = 8;
  p.retina_height = 2;
  p.d_max = 6;
  return Topology::build(p);
}

NeuronId neuron_with_d(const Topology& t, Population pop, int d, int y = 0) {
  const int xl = d >= 0 ? 0 : -d;
  return t.id_of(pop, NeuronCoord::from_pair(xl, xl + d, y));
}

DisparityTrace band_trace(Timestamp window, std::vector<std::optional<std::pair<double, double>>> bands) {
  DisparityTrace tr;
  tr.window = window;
  for (std::size_t i = 0; i < bands.size(); ++i) {
    TraceWindow w;
    w.t_center = window_center(i, window);
    if (bands[i]) {
      w.n_joints = 1;
      w.d_min = bands[i]->first;
      w.d_max = bands[i]->second;
      w.d_mean = 0.5 * (w.d_min + w.d_max);
    }
    tr.windows.push_back(w);
  }
  return tr;
}

}  // namespace

TEST(CenterOfMass, Examples) {
  RateMatrix r(Population::Disparity, IdRange{0, 3}, 1'000'000, 3);
  r.add_spike(0, 0);
  for (int k = 0; k < 3; ++k) r.add_spike(1, 0);
  r.add_spike(2, 1);
  const std::vector<int> d{2, 4, -3};
  const auto c = center_of_mass(r, d);
  ASSERT_EQ(c.com.size(), 3u);
  EXPECT_DOUBLE_EQ(*c.com[0], 3.5);
  EXPECT_DOUBLE_EQ(*c.com[1], -3.0);
  EXPECT_FALSE(c.com[2].has_value());
  EXPECT_THROW(center_of_mass(r, std::vector<int>{1}), ConfigError);
}

TEST(CenterOfMass, HomogeneousAndInsideHull) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng() % 10;
    RateMatrix a(Population::Disparity, IdRange{0, n}, 50'000, 1);
    RateMatrix b(Population::Disparity, IdRange{0, n}, 50'000, 1);
    std::vector<int> d(n);
    int lo = 1000, hi = -1000;
    for (std::size_t k = 0; k < n; ++k) {
      d[k] = static_cast<int>(rng() % 21) - 10;
      const int c = static_cast<int>(rng() % 4);
      for (int s = 0; s < c; ++s) {
        a.add_spike(k, 0);
        for (int m = 0; m < 3; ++m) b.add_spike(k, 0);
      }
      if (c > 0) lo = std::min(lo, d[k]), hi = std::max(hi, d[k]);
    }
    const auto ca = center_of_mass(a, d), cb = center_of_mass(b, d);
    ASSERT_EQ(ca.com[0].has_value(), lo <= hi);
    if (!ca.com[0]) continue;
    EXPECT_NEAR(*ca.com[0], *cb.com[0], 1e-12);
    EXPECT_GE(*ca.com[0], lo);
    EXPECT_LE(*ca.com[0], hi);
  }
}

TEST(Rmse, Fixtures) {
  using O = std::optional<double>;
  const std::vector<O> x{1.0, 2.0, 3.0, 4.0, 5.0};
  EXPECT_DOUBLE_EQ(rmse(x, x), 0.0);
  std::vector<O> off;
  for (auto v : x) off.push_back(*v + 1.0);
  EXPECT_DOUBLE_EQ(rmse(x, off), 1.0);
  // Hand-set errors 0.5, -1, 2, 0, -0.5 -> sqrt((0.25+1+4+0+0.25)/5).
  const std::vector<O> y{1.5, 1.0, 5.0, 4.0, 4.5};
  EXPECT_DOUBLE_EQ(rmse(x, y), std::sqrt(5.5 / 5.0));
  EXPECT_DOUBLE_EQ(rmse(y, x), rmse(x, y));
  // Undefined windows on either side are skipped.
  const std::vector<O> gaps{1.5, std::nullopt, 5.0, std::nullopt, std::nullopt};
  EXPECT_DOUBLE_EQ(rmse(x, gaps), std::sqrt((0.25 + 4.0) / 2.0));
  EXPECT_THROW(rmse(std::vector<O>{std::nullopt}, std::vector<O>{1.0}), ConfigError);
}

TEST(Rmse, AgainstTrace) {
  auto gt = band_trace(50'000, {std::pair{1.0, 3.0}, std::nullopt, std::pair{0.0, 0.0}});
  ComTrace c;
  c.window = 50'000;
  c.com = {3.0, 7.0, 1.0};  // errors 1, skipped, 1
  EXPECT_DOUBLE_EQ(rmse(c, gt), 1.0);
  c.window = 10;
  EXPECT_THROW(rmse(c, gt), ConfigError);
}

TEST(Labels, BandBoundaries) {
  const auto t = topo();
  const auto gt = band_trace(50'000, {std::pair{1.0, 3.0}});
  SpikeRecord r;
  for (int d : {2, 2, 4, 5, 0, -1}) {
    r.spikes.push_back({100, neuron_with_d(t, Population::Disparity, d), Population::Disparity});
  }
  const auto c = label_spikes(r, t, gt, 1.0, Population::Disparity);
  EXPECT_EQ(c.windows[0].td, 4u);  // 2, 2, 4, 0
  EXPECT_EQ(c.windows[0].fd, 2u);  // 5, -1
  EXPECT_THROW(label_spikes(r, t, gt, -1.0, Population::Disparity), ConfigError);
  EXPECT_THROW(label_spikes(r, t, gt, 1.0, Population::RetinaLeft), ConfigError);
}

TEST(Labels, PartitionCoveredWindows) {
  const auto t = topo();
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::optional<std::pair<double, double>>> bands;
    for (int i = 0; i < 10; ++i) {
      if (rng() % 4 == 0) {
        bands.push_back(std::nullopt);
      } else {
        const double a = static_cast<double>(rng() % 7) - 3;
        bands.push_back(std::pair{a, a + static_cast<double>(rng() % 3)});
      }
    }
    const auto gt = band_trace(50'000, bands);
    SpikeRecord r;
    std::size_t covered = 0;
    const auto range = t.range(Population::Disparity);
    for (int k = 0; k < 300; ++k) {
      const Timestamp at = static_cast<Timestamp>(rng() % 600'000);
      r.spikes.push_back({at, static_cast<NeuronId>(range.first + rng() % range.count),
                          Population::Disparity});
      const auto w = static_cast<std::size_t>(at / 50'000);
      covered += w < 10 && bands[w].has_value();
    }
    // A few C spikes that must be ignored by the D labelling.
    r.spikes.push_back({10, t.range(Population::CoincExc).first, Population::CoincExc});
    const auto c = label_spikes(r, t, gt, 0.5, Population::Disparity);
    EXPECT_EQ(c.total_td() + c.total_fd(), covered);
    for (std::size_t i = 0; i < 10; ++i) {
      if (!bands[i]) {
        EXPECT_EQ(c.windows[i].td + c.windows[i].fd, 0u);
      }
    }
  }
}

TEST(Pcd, Modes) {
  SpikeLabelCounts c;
  c.windows = {{3, 1}, {0, 4}};
  EXPECT_DOUBLE_EQ(pcd(c, PcdMode::Global), 0.375);
  EXPECT_DOUBLE_EQ(pcd(c, PcdMode::PerWindowMean), 0.375);
  c.windows = {{5, 5}, {0, 0}, {2, 2}};
  EXPECT_DOUBLE_EQ(pcd(c, PcdMode::Global), 0.5);
  EXPECT_DOUBLE_EQ(pcd(c, PcdMode::PerWindowMean), 0.5);
  c.windows = {{7, 0}};
  EXPECT_DOUBLE_EQ(pcd(c), 1.0);
  c.windows = {{0, 0}};
  EXPECT_THROW(pcd(c), ConfigError);
  EXPECT_THROW(pcd(c, PcdMode::PerWindowMean), ConfigError);
  EXPECT_EQ(pcd_mode_from_string(to_string(PcdMode::PerWindowMean)), PcdMode::PerWindowMean);
  EXPECT_THROW(pcd_mode_from_string("median"), ConfigError);
}

TEST(Pcd, InvariantUnderWindowRelabelling) {
  // Same spikes, same TD/FD status, regrouped into different windows.
  SpikeLabelCounts a, b;
  a.windows = {{2, 1}, {4, 3}, {1, 0}};
  b.windows = {{7, 4}};
  EXPECT_DOUBLE_EQ(pcd(a), pcd(b));
}

TEST(Energy, ZeroAndLinear) {
  const EnergyCoefficients k;
  EXPECT_DOUBLE_EQ(estimate_energy_uw(EnergyCounts{}, k, 1'000'000), 0.0);
  const EnergyCounts one{100, 50, 2000};
  const EnergyCounts two{200, 100, 4000};
  EXPECT_DOUBLE_EQ(estimate_energy_uw(two, k, 1'000'000), 2 * estimate_energy_uw(one, k, 1'000'000));
  // 1 J over 1 s is 1e6 uW.
  EXPECT_DOUBLE_EQ(estimate_energy_uw(EnergyCounts{1, 0, 0}, {1.0, 0, 0}, 1'000'000), 1e6);
  EXPECT_THROW(estimate_energy_uw(one, k, 0), ConfigError);
}

TEST(Report, PerfectRunAndEcho) {
  const auto t = topo();
  const auto gt = band_trace(50'000, {std::pair{2.0, 2.0}, std::pair{2.0, 2.0}});
  SpikeRecord r;
  r.duration = 100'000;
  r.input_events = 40;
  r.synaptic_deliveries = 77;
  for (Timestamp at : {1000, 20'000, 60'000}) {
    r.spikes.push_back({at, neuron_with_d(t, Population::Disparity, 2), Population::Disparity});
    r.spikes.push_back({at, neuron_with_d(t, Population::CoincExc, 2), Population::CoincExc});
  }
  for (const auto& s : r.spikes) ++r.population_counts[static_cast<std::size_t>(s.population)];
  ReportInputs in;
  in.record = &r;
  in.topology = &t;
  in.ground_truth = &gt;
  in.epsilon_d = 0.5;
  in.sample_label = "S1 mov2";
  in.config_json = R"({"k":1})";
  const auto rep = build_report(in);
  EXPECT_DOUBLE_EQ(*rep.disparity.rmse, 0.0);
  EXPECT_DOUBLE_EQ(*rep.disparity.pcd, 1.0);
  EXPECT_DOUBLE_EQ(*rep.coincidence.pcd, 1.0);
  EXPECT_EQ(rep.disparity.spikes, 3u);
  EXPECT_EQ(rep.window, 50'000);
  EXPECT_EQ(rep.epsilon_d, 0.5);
  EXPECT_EQ(rep.energy_counts.spikes, 6u);

  const auto back = report_from_json(report_to_json(rep));
  EXPECT_TRUE(back == rep);
  EXPECT_EQ(back.sample_label, "S1 mov2");

  in.window = 10'000;
  EXPECT_THROW(build_report(in), ConfigError);
  EXPECT_THROW(report_from_json("{}"), ParseError);
}

TEST(Report, SilentRunRoundTrips) {
  const auto t = topo();
  const auto gt = band_trace(50'000, {std::pair{2.0, 2.0}});
  SpikeRecord r;
  r.duration = 50'000;
  ReportInputs in;
  in.record = &r;
  in.topology = &t;
  in.ground_truth = &gt;
  const auto rep = build_report(in);
  EXPECT_FALSE(rep.disparity.pcd.has_value());
  EXPECT_FALSE(rep.disparity.rmse.has_value());
  EXPECT_TRUE(report_from_json(report_to_json(rep)) == rep);

  std::ostringstream csv;
  write_com_csv(csv, rep, gt);
  EXPECT_EQ(csv.str(), "window_i,t_center_us,com_c,com_d,d_mean,d_min,d_max\n0,25000,,,2,2,2\n");
}
