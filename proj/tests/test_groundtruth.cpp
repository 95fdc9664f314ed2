#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "stereosnn/error.hpp"
#include "stereosnn/groundtruth.hpp"
#include "stereosnn/topology.hpp"

using namespace stereosnn;

namespace {

constexpr ProjectionMatrix kIdentity{{{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}}};

MarkerTrack3D track(int joint, std::vector<MarkerSample> s) { return {joint, std::move(s)}; }

// A track already in image coordinates, every sample visible.
Track2D flat(int joint, std::vector<std::pair<Timestamp, double>> us) {
  Track2D t{joint, {}};
  for (auto [time, u] : us) t.samples.push_back({time, u, 0.0, true, true});
  return t;
}

}  // namespace

TEST(Project, PerspectiveDivide) {
  const MarkerTrack3D m = track(0, {{0, 100, 50, 2}});
  const auto out = project_markers({&m, 1}, kIdentity, CameraGeometry{346, 260});
  ASSERT_EQ(out.size(), 1u);
  const auto& s = out[0].samples[0];
  EXPECT_TRUE(s.valid);
  EXPECT_TRUE(s.visible);
  EXPECT_DOUBLE_EQ(s.u, 50.0);
  EXPECT_DOUBLE_EQ(s.v, 25.0);
}

TEST(Project, BehindCameraAndOutOfFrame) {
  const MarkerTrack3D m = track(0, {{0, 1, 1, -2}, {1, 1, 1, 0}, {2, 1000, 10, 1}});
  const auto s = project_markers({&m, 1}, kIdentity, CameraGeometry{346, 260})[0].samples;
  EXPECT_FALSE(s[0].valid);
  EXPECT_FALSE(s[0].visible);
  EXPECT_FALSE(s[1].valid);
  EXPECT_TRUE(s[2].valid);  // flagged, not dropped
  EXPECT_FALSE(s[2].visible);
  EXPECT_EQ(s.size(), 3u);

  // An invalid sample never enters the statistics.
  const auto l = project_markers({&m, 1}, kIdentity, CameraGeometry{346, 260});
  EXPECT_THROW(disparity_trajectory(l, l, 1, 3), ConfigError);
}

TEST(Project, MatchesIndependentAlgebra) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    ProjectionMatrix P{};
    for (auto& row : P)
      for (auto& c : row) c = u(rng) * 100;
    P[2] = {u(rng) * 0.01, u(rng) * 0.01, 1.0, 500.0};
    MarkerTrack3D m{0, {}};
    for (int k = 0; k < 10; ++k) m.samples.push_back({k, u(rng) * 400, u(rng) * 400, u(rng) * 400});
    const auto s = project_markers({&m, 1}, P, CameraGeometry{1000000, 1000000})[0].samples;
    for (int k = 0; k < 10; ++k) {
      const auto& p = m.samples[static_cast<std::size_t>(k)];
      // Cramer-free evaluation: dot products written out per row.
      const double w = P[2][0] * p.x_mm + P[2][1] * p.y_mm + P[2][2] * p.z_mm + P[2][3];
      const double x = P[0][0] * p.x_mm + P[0][1] * p.y_mm + P[0][2] * p.z_mm + P[0][3];
      const double y = P[1][0] * p.x_mm + P[1][1] * p.y_mm + P[1][2] * p.z_mm + P[1][3];
      ASSERT_EQ(s[static_cast<std::size_t>(k)].valid, w > 0);
      if (w > 0) {
        EXPECT_NEAR(s[static_cast<std::size_t>(k)].u, x / w, 1e-9 * (1 + std::abs(x / w)));
        EXPECT_NEAR(s[static_cast<std::size_t>(k)].v, y / w, 1e-9 * (1 + std::abs(y / w)));
      }
    }
  }
}

TEST(Downscale, Examples) {
  Track2D t{0, {{0, 60, 30, true, true}}};
  auto a = to_downscaled_coords({&t, 1}, 6, {0, 0}, {16, 16})[0].samples[0];
  EXPECT_DOUBLE_EQ(a.u, 10.0);
  EXPECT_DOUBLE_EQ(a.v, 5.0);
  EXPECT_TRUE(a.visible);
  auto b = to_downscaled_coords({&t, 1}, 1, {0, 0}, {346, 260})[0].samples[0];
  EXPECT_DOUBLE_EQ(b.u, 60.0);
  EXPECT_DOUBLE_EQ(b.v, 30.0);
  auto c = to_downscaled_coords({&t, 1}, 6, {10, 5}, {16, 16})[0].samples[0];
  EXPECT_DOUBLE_EQ(c.u, 0.0);
  EXPECT_DOUBLE_EQ(c.v, 0.0);
  EXPECT_TRUE(c.visible);
  auto d = to_downscaled_coords({&t, 1}, 6, {11, 5}, {16, 16})[0].samples[0];
  EXPECT_FALSE(d.visible);  // re-evaluated against the cropped window
  EXPECT_THROW(to_downscaled_coords({&t, 1}, 0, {0, 0}, {16, 16}), ConfigError);
}

TEST(Downscale, CommutesWithProjectionWithoutRounding) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 300.0);
  MarkerTrack3D m{0, {}};
  for (int k = 0; k < 100; ++k) m.samples.push_back({k, u(rng), u(rng), 1.0});
  const auto full = project_markers({&m, 1}, kIdentity, CameraGeometry{346, 260});
  const auto small = to_downscaled_coords(full, 7, {3, 2}, {40, 40});
  for (std::size_t k = 0; k < 100; ++k) {
    EXPECT_DOUBLE_EQ(small[0].samples[k].u, full[0].samples[k].u / 7 - 3);
    EXPECT_DOUBLE_EQ(small[0].samples[k].v, full[0].samples[k].v / 7 - 2);
  }
}

TEST(Trajectory, StaticJoint) {
  const auto l = flat(0, {{0, 3}, {1'000'000, 3}});
  const auto r = flat(0, {{0, 5}, {1'000'000, 5}});
  const auto tr = disparity_trajectory({&l, 1}, {&r, 1}, 50'000, 20);
  ASSERT_EQ(tr.windows.size(), 20u);
  for (std::size_t i = 0; i < 20; ++i) {
    const auto& w = tr.windows[i];
    EXPECT_EQ(w.t_center, static_cast<Timestamp>(i) * 50'000 + 25'000);
    EXPECT_EQ(w.n_joints, 1u);
    EXPECT_DOUBLE_EQ(w.d_mean, 2.0);
    EXPECT_DOUBLE_EQ(w.d_min, 2.0);
    EXPECT_DOUBLE_EQ(w.d_max, 2.0);
  }
}

TEST(Trajectory, TwoJointsAggregate) {
  const std::vector<Track2D> l{flat(0, {{0, 3}, {100'000, 3}}), flat(1, {{0, 6}, {100'000, 6}})};
  const std::vector<Track2D> r{flat(0, {{0, 4}, {100'000, 4}}), flat(1, {{0, 9}, {100'000, 9}})};
  const auto tr = disparity_trajectory(l, r, 50'000, 2);
  for (const auto& w : tr.windows) {
    EXPECT_DOUBLE_EQ(w.d_mean, 2.0);
    EXPECT_DOUBLE_EQ(w.d_min, 1.0);
    EXPECT_DOUBLE_EQ(w.d_max, 3.0);
    EXPECT_EQ(w.n_joints, 2u);
  }
}

TEST(Trajectory, LinearInterpolationIsExact) {
  // 10 Hz samples of u_L = 2 + t/1s, u_R = u_L + 1 + 2 t/1s.
  auto uL = [](double t) { return 2.0 + t / 1e6; };
  auto uR = [&](double t) { return uL(t) + 1.0 + 2.0 * t / 1e6; };
  std::vector<std::pair<Timestamp, double>> ls, rs;
  for (Timestamp t = 0; t <= 2'000'000; t += 100'000) {
    ls.emplace_back(t, uL(static_cast<double>(t)));
    rs.emplace_back(t, uR(static_cast<double>(t)));
  }
  const auto l = flat(3, ls), r = flat(3, rs);
  const auto tr = disparity_trajectory({&l, 1}, {&r, 1}, 50'000, 40);
  for (const auto& w : tr.windows) {
    const double want = 1.0 + 2.0 * static_cast<double>(w.t_center) / 1e6;
    EXPECT_NEAR(w.d_mean, want, 1e-12);
  }
}

TEST(Trajectory, MissingViewEmptiesWindow) {
  const auto l = flat(0, {{0, 3}, {50'000, 3}});
  const auto r = flat(0, {{0, 5}, {50'000, 5}});
  const auto only = flat(1, {{0, 1}, {200'000, 1}});
  const std::vector<Track2D> ls{l, only};
  const auto tr = disparity_trajectory(ls, {&r, 1}, 50'000, 3);
  EXPECT_TRUE(tr.windows[0].defined());
  EXPECT_EQ(tr.windows[0].n_joints, 1u);
  EXPECT_FALSE(tr.windows[1].defined());
  EXPECT_EQ(tr.defined_count(), 1u);

  Track2D hidden = r;
  hidden.samples[0].visible = false;
  hidden.samples[1].visible = false;
  EXPECT_THROW(disparity_trajectory({&l, 1}, {&hidden, 1}, 50'000, 3), ConfigError);
}

TEST(Trajectory, SignMatchesTopology) {
  // One point, the right camera offset so the target lands further right.
  ProjectionMatrix left = kIdentity, right = kIdentity;
  right[0][3] = 4.0;  // u_R = u_L + 4 / Z
  const MarkerTrack3D m = track(0, {{0, 10, 4, 1}, {100'000, 10, 4, 1}});
  const auto l = to_downscaled_coords(project_markers({&m, 1}, left, {64, 64}), 2, {0, 0}, {32, 32});
  const auto r = to_downscaled_coords(project_markers({&m, 1}, right, {64, 64}), 2, {0, 0}, {32, 32});
  const auto tr = disparity_trajectory(l, r, 50'000, 2);
  const double d_gt = tr.windows[0].d_mean;
  EXPECT_DOUBLE_EQ(d_gt, 2.0);
  // The same pixels fed to the network: x_L = 5, x_R = 7.
  const auto c = NeuronCoord::from_pair(static_cast<int>(l[0].samples[0].u),
                                        static_cast<int>(r[0].samples[0].u), 2);
  EXPECT_GT(c.d, 0);
  EXPECT_EQ(c.d, static_cast<int>(d_gt));
}

TEST(Files, MarkerAndTraceRoundTrip) {
  std::istringstream in("t_us,joint,X_mm,Y_mm,Z_mm\n200,1,1,2,3\n100,1,4,5,6\n100,0,0,0,1\r\n");
  auto tracks = read_markers(in);
  ASSERT_EQ(tracks.size(), 2u);
  EXPECT_EQ(tracks[0].joint, 0);
  ASSERT_EQ(tracks[1].samples.size(), 2u);
  EXPECT_EQ(tracks[1].samples[0].t, 100);
  EXPECT_DOUBLE_EQ(tracks[1].samples[1].z_mm, 3.0);
  shift_markers(tracks, 100);
  EXPECT_EQ(tracks[1].samples[0].t, 0);

  std::istringstream bad("t_us,joint,X_mm,Y_mm,Z_mm\n1,2,3\n");
  try {
    read_markers(bad);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }

  const auto l = flat(0, {{0, 1.1}, {90'000, 2.3}});
  const auto r = flat(0, {{0, 3.7}, {90'000, 1.9}});
  const auto tr = disparity_trajectory({&l, 1}, {&r, 1}, 30'000, 5);
  std::stringstream ss;
  write_trace(ss, tr);
  const auto back = read_trace(ss);
  ASSERT_EQ(back.windows.size(), tr.windows.size());
  EXPECT_EQ(back.window, tr.window);
  for (std::size_t i = 0; i < tr.windows.size(); ++i) {
    EXPECT_EQ(back.windows[i].defined(), tr.windows[i].defined());
    EXPECT_EQ(back.windows[i].t_center, tr.windows[i].t_center);
    if (!tr.windows[i].defined()) continue;
    EXPECT_EQ(back.windows[i].d_mean, tr.windows[i].d_mean);
    EXPECT_EQ(back.windows[i].d_min, tr.windows[i].d_min);
    EXPECT_EQ(back.windows[i].d_max, tr.windows[i].d_max);
  }
}

TEST(Files, Calibration) {
  const auto c = parse_calibration(
      R"({"left": [[1,0,0,0],[0,1,0,0],[0,0,1,0]], "right": [[1,0,0,4],[0,1,0,0],[0,0,1,0]]})");
  EXPECT_DOUBLE_EQ(c.right[0][3], 4.0);
  EXPECT_THROW(parse_calibration(R"({"left": [[1,0,0,0]]})"), ConfigError);
  EXPECT_THROW(parse_calibration("{"), ParseError);
}
