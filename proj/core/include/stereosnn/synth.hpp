#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "stereosnn/events.hpp"
#include "stereosnn/groundtruth.hpp"
#include "stereosnn/preprocess.hpp"

namespace stereosnn {

enum class StimulusShape { Dot, Bar, Cloud };
std::string_view to_string(StimulusShape shape);
StimulusShape shape_from_string(std::string_view name);

// Knot of a piecewise-linear disparity profile. Two knots at the same time
// form a step; the profile is right-continuous.
struct DisparityKnot {
  Timestamp t = 0;
  double d = 0.0;
};

struct DisparityProfile {
  std::vector<DisparityKnot> knots{{0, 0.0}};
  StimulusShape shape = StimulusShape::Dot;
  // Left-view position of the dot, the top of the bar, or the first cloud row.
  PixelCoord anchor{4, 8};
  // Rows covered by BAR and CLOUD.
  int extent = 1;
  int dots_per_row = 3;
  int min_dot_spacing = 2;
  double rate_hz = 100.0;  // per active pixel
  double jitter_us = 0.0;  // Gaussian sigma, clamped to +-3 sigma
  std::uint64_t seed = 1;

  double at(Timestamp t) const;
  double left_limit(Timestamp t) const;
  // Minimum and maximum of the profile over [begin, end).
  std::pair<double, double> range_over(Timestamp begin, Timestamp end) const;
  void validate() const;
};

struct Stimulus {
  StereoEventStream stream;
  DisparityTrace trace;
  // Left-view columns of the active dots of each stimulus row.
  std::vector<std::pair<int, std::vector<int>>> rows;
};

// Renders the profile on a 1 ms lattice: each stimulus row emits with
// probability rate x 1 ms per step; every emitting pixel yields a LEFT event
// at x and a RIGHT twin at x + round(d(t)), each with independent timing
// jitter. All pixels of one row emit together. The trace holds the exact
// profile per analysis window. Throws ConfigError (naming the first violating
// time) if the shape leaves the frame.
Stimulus gen_stimulus(const DisparityProfile& profile, const CameraGeometry& geometry,
                      Timestamp duration, Timestamp analysis_window = 50'000);

struct OracleMatch {
  std::size_t left_index = 0;
  std::size_t right_index = 0;
  Timestamp dt = 0;  // t_R - t_L
  int disparity = 0;  // x_R - x_L
  int y = 0;
  int x_left = 0;
  int x_right = 0;

  friend bool operator==(const OracleMatch&, const OracleMatch&) = default;
};

struct OracleResult {
  std::vector<OracleMatch> matches;  // sorted by (left_index, right_index)
  // Per analysis window (by the later event of each match): disparity -> count.
  std::vector<std::map<int, std::size_t>> histogram;
};

// Exhaustive scan of every (LEFT, RIGHT) pair in the same row with
// |t_R - t_L| <= window.
OracleResult oracle_matches(const StereoEventStream& stream, Timestamp window,
                            Timestamp analysis_window = 50'000);

// Count-weighted mean disparity per window; nullopt for empty windows.
std::vector<std::optional<double>> oracle_disparity_estimate(
    std::span<const std::map<int, std::size_t>> histogram);

}  // namespace stereosnn
