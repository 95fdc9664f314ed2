#include <gtest/gtest.h>

#include <set>
#include <sstream>
#include <tuple>

#include "oracles.hpp"
#include "stereosnn/error.hpp"
#include "stereosnn/simulator.hpp"

using namespace stereosnn;

namespace {

Topology small(int w = 8, int h = 4, int d_max = 4) {
  TopologyParams p;
  p.retina_width = w;
  p.retina_height = h;
  p.d_max = d_max;
  return Topology::build(p);
}

DvsEvent ev(Timestamp t, int x, int y, Side s, Polarity p = Polarity::On) {
  return DvsEvent{t, x, y, p, s};
}

LifParams uniform_lif(double tm, double ts) {
  LifParams lif = LifParams::defaults();
  lif.base.tau_m_us = tm;
  lif.base.tau_s_us = ts;
  for (auto& [pop, np] : lif.overrides) {
    np.tau_m_us = tm;
    np.tau_s_us = ts;
  }
  return lif;
}

std::set<std::tuple<int, int, int>> coinc_coords(const Topology& t, const SpikeRecord& r) {
  std::set<std::tuple<int, int, int>> out;
  for (const auto& s : r.spikes) {
    if (s.population != Population::CoincExc && s.population != Population::CoincInh) continue;
    const auto c = t.coord_of(s.neuron);
    out.insert({c.x_cyc, c.y, c.d});
  }
  return out;
}

std::size_t coinc_count(const SpikeRecord& r) {
  return r.count(Population::CoincExc) + r.count(Population::CoincInh);
}

}  // namespace

TEST(Simulate, SingleEventNeverCrosses) {
  const auto t = small();
  for (auto side : {Side::Left, Side::Right}) {
    const StereoEventStream s({ev(1000, 3, 2, side)}, t.retina_geometry());
    const auto r = simulate(t, s, LifParams::defaults());
    EXPECT_EQ(coinc_count(r), 0u);
    EXPECT_EQ(r.count(Population::Disparity), 0u);
    EXPECT_EQ(r.retina_spikes, 1u);
  }
}

TEST(Simulate, CoincidentPairFiresOnlyItsCoordinate) {
  const double tm = 5000, ts = 5000;
  // Closed-form check of the two-EPSP trace with an independent integrator.
  const double scale = 0.6 / testsupport::rk4_unit_peak(tm, ts);
  EXPECT_GE(testsupport::rk4_peak({{1000, scale}, {1200, scale}}, 1000, 40000, tm, ts), 1.0);

  const auto t = small();
  const StereoEventStream s({ev(1000, 3, 2, Side::Left), ev(1200, 5, 2, Side::Right)},
                            t.retina_geometry());
  const auto r = simulate(t, s, uniform_lif(tm, ts));
  EXPECT_EQ(r.count(Population::CoincExc), 1u);
  EXPECT_EQ(r.count(Population::CoincInh), 1u);
  const std::set<std::tuple<int, int, int>> want{{8, 2, 2}};
  EXPECT_EQ(coinc_coords(t, r), want);
  for (const auto& sp : r.spikes) EXPECT_GE(sp.t, 1200);
}

TEST(Simulate, DistantPairStaysSilent) {
  const double tm = 5000, ts = 5000;
  const double scale = 0.6 / testsupport::rk4_unit_peak(tm, ts);
  EXPECT_LT(testsupport::rk4_peak({{1000, scale}, {51000, scale}}, 0, 120000, tm, ts), 1.0);

  const auto t = small();
  const StereoEventStream s({ev(1000, 3, 2, Side::Left), ev(1000 + 10 * 5000, 5, 2, Side::Right)},
                            t.retina_geometry());
  const auto r = simulate(t, s, uniform_lif(tm, ts));
  EXPECT_EQ(coinc_count(r), 0u);
  EXPECT_EQ(r.count(Population::Disparity), 0u);
}

TEST(Simulate, MonocularSilence) {
  const auto t = small(16, 8, 7);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    for (double frac : {0.0, 1.0}) {
      testsupport::StreamSpec spec{16, 8, 1000, 200'000, frac};
      const auto r = simulate(t, testsupport::random_stream(seed, spec), LifParams::defaults());
      EXPECT_EQ(coinc_count(r), 0u) << seed;
      EXPECT_EQ(r.count(Population::Disparity), 0u) << seed;
      EXPECT_TRUE(r.spikes.empty());
    }
  }
}

TEST(Simulate, RefractoryAndBookkeepingOnBinocularNoise) {
  const auto t = small(16, 4, 7);
  const auto lif = LifParams::defaults();
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    testsupport::StreamSpec spec{16, 4, 3000, 300'000, 0.5};
    const auto r = simulate(t, testsupport::random_stream(seed, spec), lif);
    EXPECT_TRUE(testsupport::refractory_ok(r.spikes, lif)) << seed;
    EXPECT_GT(r.spikes.size(), 0u);
    const auto counts = per_neuron_counts(r, t.neuron_count());
    std::size_t sum = 0;
    for (auto c : counts) sum += c;
    EXPECT_EQ(sum, r.spikes.size());
    std::size_t pops = 0;
    for (auto pop : {Population::CoincExc, Population::CoincInh, Population::Disparity}) {
      pops += r.count(pop);
    }
    EXPECT_EQ(pops, r.spikes.size());
    EXPECT_EQ(r.count(Population::RetinaLeft) + r.count(Population::RetinaRight), r.retina_spikes);
    EXPECT_EQ(r.input_events, 3000u);
    for (std::size_t k = 1; k < r.spikes.size(); ++k) {
      EXPECT_LE(std::tie(r.spikes[k - 1].t, r.spikes[k - 1].neuron),
                std::tie(r.spikes[k].t, r.spikes[k].neuron));
    }
    for (const auto& s : r.spikes) EXPECT_EQ(t.population_of(s.neuron), s.population);
  }
}

TEST(Simulate, Deterministic) {
  const auto t = small(16, 4, 7);
  const auto s = testsupport::random_stream(42, {16, 4, 4000, 400'000, 0.5});
  const auto a = simulate(t, s, LifParams::defaults());
  const auto b = simulate(t, s, LifParams::defaults());
  EXPECT_EQ(a.spikes, b.spikes);
  EXPECT_EQ(a.population_counts, b.population_counts);
  EXPECT_EQ(a.synaptic_deliveries, b.synaptic_deliveries);

  MismatchOptions m{0.1, 0.05, 9};
  EXPECT_EQ(simulate(t, s, LifParams::defaults(), m).spikes,
            simulate(t, s, LifParams::defaults(), m).spikes);
}

TEST(Simulate, DisparityEquivariance) {
  const auto t = small(12, 4, 6);
  // Sparse probe grid: one binocular pair per 200 ms, far apart in time.
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::vector<DvsEvent> base;
    Timestamp at = 1000;
    for (int k = 0; k < 12; ++k, at += 200'000) {
      const int y = static_cast<int>(rng() % 4);
      const int xl = static_cast<int>(rng() % 8) + 1;
      const int d = static_cast<int>(rng() % 7) - 3;
      const int xr = std::clamp(xl + d, 0, 10);
      base.push_back(ev(at, xl, y, Side::Left));
      base.push_back(ev(at + static_cast<Timestamp>(rng() % 500), xr, y, Side::Right));
    }
    auto shifted = base;
    for (auto& e : shifted) e.x += e.side == Side::Right;
    const auto g = t.retina_geometry();
    const auto a = coinc_coords(t, simulate(t, StereoEventStream(base, g), LifParams::defaults()));
    const auto b =
        coinc_coords(t, simulate(t, StereoEventStream(shifted, g), LifParams::defaults()));
    ASSERT_FALSE(a.empty());
    std::set<std::tuple<int, int, int>> moved;
    for (const auto& [x, y, d] : a) moved.insert({x + 1, y, d + 1});
    EXPECT_EQ(moved, b) << seed;
  }
}

TEST(Simulate, GeometryMismatchAndBadParams) {
  const auto t = small();
  const StereoEventStream s({ev(0, 0, 0, Side::Left)}, CameraGeometry{9, 4});
  EXPECT_THROW(simulate(t, s, LifParams::defaults()), ConfigError);
  const StereoEventStream ok({ev(0, 0, 0, Side::Left)}, t.retina_geometry());
  auto lif = LifParams::defaults();
  lif.base.tau_m_us = std::nan("");
  EXPECT_THROW(simulate(t, ok, lif), ConfigError);
  EXPECT_THROW(simulate(t, ok, LifParams::defaults(), MismatchOptions{-0.1, 0, 0}), ConfigError);
}

TEST(Rates, FiveSpikesInOneWindow) {
  const auto t = small();
  const auto d = t.range(Population::Disparity).first;
  SpikeRecord r;
  for (Timestamp k = 0; k < 5; ++k) r.spikes.push_back({k * 10'000, d, Population::Disparity});
  const auto m = instantaneous_rates(r, t, 50'000, Population::Disparity, 2);
  EXPECT_DOUBLE_EQ(m.rate_hz(0, 0), 100.0);
  EXPECT_DOUBLE_EQ(m.rate_hz(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(m.rate_hz(1, 0), 0.0);
}

TEST(Rates, EmptyRecordIsZero) {
  const auto t = small();
  const auto m = instantaneous_rates(SpikeRecord{}, t, 50'000, Population::CoincExc, 4);
  for (std::size_t n = 0; n < m.neuron_count(); ++n)
    for (std::size_t w = 0; w < 4; ++w) EXPECT_EQ(m.count(n, w), 0u);
  EXPECT_THROW(instantaneous_rates(SpikeRecord{}, t, 0, Population::CoincExc, 1), ConfigError);
}

TEST(Rates, MatchesBruteForceCounting) {
  const auto t = small(16, 4, 7);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto s = testsupport::random_stream(seed, {16, 4, 3000, 500'000, 0.5});
    const auto r = simulate(t, s, LifParams::defaults());
    const Timestamp win = 37'000;
    const auto windows = window_count_for(s.duration(), win);
    for (auto pop : {Population::CoincExc, Population::Disparity}) {
      const auto m = instantaneous_rates(r, t, win, pop, windows);
      const auto range = t.range(pop);
      for (std::size_t n = 0; n < range.count; n += 7) {
        for (std::size_t w = 0; w < windows; ++w) {
          std::uint32_t c = 0;
          for (const auto& sp : r.spikes) {
            c += sp.neuron == range.first + n && sp.t >= static_cast<Timestamp>(w) * win &&
                 sp.t < static_cast<Timestamp>(w + 1) * win;
          }
          ASSERT_EQ(m.count(n, w), c);
          EXPECT_DOUBLE_EQ(m.rate_hz(n, w), c / (win / 1e6));
        }
      }
    }
  }
}

TEST(Rates, WindowCountCoversDuration) {
  EXPECT_EQ(window_count_for(0, 50'000), 1u);
  EXPECT_EQ(window_count_for(49'999, 50'000), 1u);
  EXPECT_EQ(window_count_for(50'000, 50'000), 2u);
  EXPECT_THROW(window_count_for(10, 0), ConfigError);
}

TEST(SpikeFile, RoundTrip) {
  const auto t = small(16, 4, 7);
  const auto r = simulate(t, testsupport::random_stream(3, {16, 4, 2000, 200'000, 0.5}),
                          LifParams::defaults());
  std::stringstream ss;
  write_spikes(ss, r.spikes);
  EXPECT_EQ(read_spikes(ss), r.spikes);
  EXPECT_THROW(
      {
        std::stringstream bad("t_us,neuron_id,population\n10,3,NOPE\n");
        read_spikes(bad);
      },
      ParseError);
}
