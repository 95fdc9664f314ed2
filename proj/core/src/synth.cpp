#include "stereosnn/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "stereosnn/error.hpp"
#include "stereosnn/simulator.hpp"

namespace stereosnn {

std::string_view to_string(StimulusShape shape) {
  switch (shape) {
    case StimulusShape::Dot: return "DOT";
    case StimulusShape::Bar: return "BAR";
    case StimulusShape::Cloud: return "CLOUD";
  }
  return "UNKNOWN";
}

StimulusShape shape_from_string(std::string_view name) {
  for (auto s : {StimulusShape::Dot, StimulusShape::Bar, StimulusShape::Cloud}) {
    if (to_string(s) == name) return s;
  }
  throw ConfigError("unknown stimulus shape '" + std::string(name) + "'");
}

double DisparityProfile::at(Timestamp t) const {
  // Last knot with knot.t <= t.
  const auto it = std::upper_bound(
      knots.begin(), knots.end(), t,
      [](Timestamp value, const DisparityKnot& k) { return value < k.t; });
  if (it == knots.begin()) return knots.front().d;
  const auto& a = *(it - 1);
  if (it == knots.end()) return a.d;
  const auto& b = *it;
  const double alpha = static_cast<double>(t - a.t) / static_cast<double>(b.t - a.t);
  return a.d + alpha * (b.d - a.d);
}

double DisparityProfile::left_limit(Timestamp t) const {
  // First knot with knot.t >= t.
  const auto it = std::lower_bound(
      knots.begin(), knots.end(), t,
      [](const DisparityKnot& k, Timestamp value) { return k.t < value; });
  if (it == knots.begin()) return knots.front().d;
  const auto& a = *(it - 1);
  if (it == knots.end()) return a.d;
  const auto& b = *it;
  const double alpha = static_cast<double>(t - a.t) / static_cast<double>(b.t - a.t);
  return a.d + alpha * (b.d - a.d);
}

std::pair<double, double> DisparityProfile::range_over(Timestamp begin,
                                                       Timestamp end) const {
  double lo = at(begin), hi = lo;
  auto take = [&](double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  };
  for (const auto& k : knots) {
    if (k.t > begin && k.t < end) {
      take(left_limit(k.t));
      take(at(k.t));
      take(k.d);
    }
  }
  if (end > begin) take(left_limit(end));
  return {lo, hi};
}

void DisparityProfile::validate() const {
  if (knots.empty()) throw ConfigError("disparity profile needs at least one knot");
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (!std::isfinite(knots[i].d)) throw ConfigError("non-finite disparity knot");
    if (i > 0 && knots[i].t < knots[i - 1].t) {
      throw ConfigError("disparity knots must be sorted by time");
    }
    if (i > 1 && knots[i].t == knots[i - 2].t) {
      throw ConfigError("at most two knots may share a timestamp");
    }
  }
  if (!(rate_hz > 0.0) || rate_hz > 1000.0) {
    throw ConfigError("rate_hz must lie in (0, 1000]");
  }
  if (!(jitter_us >= 0.0) || !std::isfinite(jitter_us)) {
    throw ConfigError("jitter_us must be finite and >= 0");
  }
  if (extent < 1) throw ConfigError("extent must be >= 1");
  if (shape == StimulusShape::Cloud && (dots_per_row < 1 || min_dot_spacing < 1)) {
    throw ConfigError("cloud needs dots_per_row >= 1 and min_dot_spacing >= 1");
  }
}

namespace {

constexpr Timestamp kLattice = 1'000;

int rendered_disparity(double d) { return static_cast<int>(std::lround(d)); }

std::vector<int> cloud_columns(int width, int lo, int hi, int count, int spacing,
                               std::mt19937_64& rng) {
  // Uniform choice among admissible columns, retried until the spacing holds.
  std::vector<int> cols;
  for (int attempt = 0; attempt < 10'000; ++attempt) {
    cols.clear();
    for (int k = 0; k < count; ++k) {
      std::uniform_int_distribution<int> pick(lo, hi);
      cols.push_back(pick(rng));
    }
    std::sort(cols.begin(), cols.end());
    bool ok = true;
    for (std::size_t k = 1; k < cols.size(); ++k) {
      if (cols[k] - cols[k - 1] < spacing) ok = false;
    }
    if (ok) return cols;
  }
  throw ConfigError("cannot place " + std::to_string(count) +
                    " dots with spacing " + std::to_string(spacing) + " in " +
                    std::to_string(width) + " columns");
}

}  // namespace

Stimulus gen_stimulus(const DisparityProfile& profile, const CameraGeometry& geometry,
                      Timestamp duration, Timestamp analysis_window) {
  profile.validate();
  geometry.validate();
  if (duration <= 0) throw ConfigError("stimulus duration must be positive");
  if (analysis_window <= 0) throw ConfigError("analysis window must be positive");

  // Rendered disparity range over the lattice, for frame checks and cloud
  // column placement.
  int rmin = 0, rmax = 0;
  bool first = true;
  for (Timestamp t = 0; t < duration; t += kLattice) {
    const int r = rendered_disparity(profile.at(t));
    rmin = first ? r : std::min(rmin, r);
    rmax = first ? r : std::max(rmax, r);
    first = false;
  }

  std::mt19937_64 rng(profile.seed);
  const int rows = profile.shape == StimulusShape::Dot ? 1 : profile.extent;
  if (profile.anchor.y < 0 || profile.anchor.y + rows > geometry.height) {
    throw ConfigError("stimulus rows " + std::to_string(profile.anchor.y) + ".." +
                      std::to_string(profile.anchor.y + rows - 1) +
                      " leave the frame at t=0 us");
  }
  Stimulus out;
  for (int r = 0; r < rows; ++r) {
    std::vector<int> cols;
    if (profile.shape == StimulusShape::Cloud) {
      const int lo = std::max(0, -rmin);
      const int hi = geometry.width - 1 - std::max(0, rmax);
      if (hi < lo) throw ConfigError("disparity range leaves no room for the cloud");
      cols = cloud_columns(geometry.width, lo, hi, profile.dots_per_row,
                           profile.min_dot_spacing, rng);
    } else {
      cols.push_back(profile.anchor.x);
    }
    out.rows.emplace_back(profile.anchor.y + r, std::move(cols));
  }

  // Frame check before any event is produced.
  for (Timestamp t = 0; t < duration; t += kLattice) {
    const int d = rendered_disparity(profile.at(t));
    for (const auto& [y, cols] : out.rows) {
      for (int x : cols) {
        if (!geometry.contains(x, y) || !geometry.contains(x + d, y)) {
          throw ConfigError("stimulus leaves the frame at t=" + std::to_string(t) +
                            " us (x_L=" + std::to_string(x) +
                            ", x_R=" + std::to_string(x + d) + ")");
        }
      }
    }
  }

  const double p = profile.rate_hz * static_cast<double>(kLattice) * 1e-6;
  std::bernoulli_distribution emit(p);
  std::bernoulli_distribution on(0.5);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sigma = profile.jitter_us;
  auto jitter = [&]() -> Timestamp {
    if (sigma <= 0.0) return 0;
    const double j = std::clamp(normal(rng) * sigma, -3.0 * sigma, 3.0 * sigma);
    return static_cast<Timestamp>(std::llround(j));
  };

  std::vector<DvsEvent> events;
  for (Timestamp t = 0; t < duration; t += kLattice) {
    const int d = rendered_disparity(profile.at(t));
    for (const auto& [y, cols] : out.rows) {
      if (!emit(rng)) continue;
      const Polarity pol = on(rng) ? Polarity::On : Polarity::Off;
      for (int x : cols) {
        const Timestamp tl = std::clamp<Timestamp>(t + jitter(), 0, duration);
        const Timestamp tr = std::clamp<Timestamp>(t + jitter(), 0, duration);
        events.push_back(DvsEvent{tl, x, y, pol, Side::Left});
        events.push_back(DvsEvent{tr, x + d, y, pol, Side::Right});
      }
    }
  }
  out.stream = StereoEventStream(std::move(events), geometry, duration);

  const std::size_t windows = window_count_for(duration, analysis_window);
  out.trace.window = analysis_window;
  out.trace.windows.resize(windows);
  for (std::size_t i = 0; i < windows; ++i) {
    auto& w = out.trace.windows[i];
    const Timestamp begin = static_cast<Timestamp>(i) * analysis_window;
    w.t_center = window_center(i, analysis_window);
    w.n_joints = 1;
    w.d_mean = profile.at(w.t_center);
    const auto [lo, hi] = profile.range_over(begin, begin + analysis_window);
    w.d_min = lo;
    w.d_max = hi;
    w.per_joint = {{0, w.d_mean}};
  }
  return out;
}

OracleResult oracle_matches(const StereoEventStream& stream, Timestamp window,
                            Timestamp analysis_window) {
  if (window <= 0) throw ConfigError("oracle window must be positive");
  OracleResult result;
  result.histogram.resize(window_count_for(stream.duration(), analysis_window));
  const auto ev = stream.events();
  // Group indices by (row, side).
  const auto H = static_cast<std::size_t>(stream.geometry().height);
  std::vector<std::vector<std::size_t>> left(H), right(H);
  for (std::size_t k = 0; k < ev.size(); ++k) {
    (ev[k].side == Side::Left ? left : right)[static_cast<std::size_t>(ev[k].y)]
        .push_back(k);
  }
  for (std::size_t y = 0; y < H; ++y) {
    for (auto li : left[y]) {
      for (auto ri : right[y]) {
        const Timestamp dt = ev[ri].t - ev[li].t;
        if (dt > window || dt < -window) continue;
        OracleMatch m{li, ri, dt, ev[ri].x - ev[li].x, static_cast<int>(y),
                      ev[li].x, ev[ri].x};
        result.matches.push_back(m);
        const auto w = static_cast<std::size_t>(
            std::max(ev[li].t, ev[ri].t) / analysis_window);
        if (w < result.histogram.size()) ++result.histogram[w][m.disparity];
      }
    }
  }
  std::sort(result.matches.begin(), result.matches.end(),
            [](const OracleMatch& a, const OracleMatch& b) {
              return a.left_index != b.left_index ? a.left_index < b.left_index
                                                  : a.right_index < b.right_index;
            });
  return result;
}

std::vector<std::optional<double>> oracle_disparity_estimate(
    std::span<const std::map<int, std::size_t>> histogram) {
  std::vector<std::optional<double>> est(histogram.size());
  for (std::size_t i = 0; i < histogram.size(); ++i) {
    long long num = 0, den = 0;
    for (const auto& [d, c] : histogram[i]) {
      num += static_cast<long long>(c) * d;
      den += static_cast<long long>(c);
    }
    if (den > 0) est[i] = static_cast<double>(num) / static_cast<double>(den);
  }
  return est;
}

}  // namespace stereosnn
