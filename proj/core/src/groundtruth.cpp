#include "stereosnn/groundtruth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <string>

#include "json.hpp"
#include "stereosnn/error.hpp"
#include "stereosnn/io.hpp"

namespace stereosnn {

std::vector<Track2D> project_markers(std::span<const MarkerTrack3D> tracks,
                                     const ProjectionMatrix& P,
                                     const CameraGeometry& frame) {
  std::vector<Track2D> out;
  out.reserve(tracks.size());
  for (const auto& track : tracks) {
    Track2D t2{track.joint, {}};
    t2.samples.reserve(track.samples.size());
    for (const auto& m : track.samples) {
      const std::array<double, 4> X{m.x_mm, m.y_mm, m.z_mm, 1.0};
      std::array<double, 3> h{};
      for (std::size_t r = 0; r < 3; ++r) {
        for (std::size_t c = 0; c < 4; ++c) h[r] += P[r][c] * X[c];
      }
      ImageSample s;
      s.t = m.t;
      if (h[2] > 0.0 && std::isfinite(h[2])) {
        s.u = h[0] / h[2];
        s.v = h[1] / h[2];
        s.valid = std::isfinite(s.u) && std::isfinite(s.v);
        s.visible = s.valid && s.u >= 0.0 && s.v >= 0.0 && s.u < frame.width &&
                    s.v < frame.height;
      }
      t2.samples.push_back(s);
    }
    out.push_back(std::move(t2));
  }
  return out;
}

std::vector<Track2D> to_downscaled_coords(std::span<const Track2D> tracks,
                                          int factor, PixelCoord crop_origin,
                                          PixelSize crop_size) {
  if (factor < 1) throw ConfigError("downscale factor must be >= 1");
  std::vector<Track2D> out(tracks.begin(), tracks.end());
  const double f = factor;
  for (auto& track : out) {
    for (auto& s : track.samples) {
      if (!s.valid) continue;
      s.u = s.u / f - crop_origin.x;
      s.v = s.v / f - crop_origin.y;
      s.visible = s.visible && s.u >= 0.0 && s.v >= 0.0 &&
                  s.u < crop_size.width && s.v < crop_size.height;
    }
  }
  return out;
}

std::size_t DisparityTrace::defined_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(
      windows.begin(), windows.end(),
      [](const TraceWindow& w) { return w.defined(); }));
}

namespace {

// Horizontal position of a track at time t, interpolated linearly between the
// bracketing samples; undefined if either bracket sample is not visible or t
// is outside the sampled span.
std::optional<double> horizontal_at(const Track2D& track, Timestamp t) {
  const auto& s = track.samples;
  if (s.empty()) return std::nullopt;
  const auto it = std::lower_bound(
      s.begin(), s.end(), t,
      [](const ImageSample& a, Timestamp value) { return a.t < value; });
  if (it != s.end() && it->t == t) {
    if (!it->visible) return std::nullopt;
    return it->u;
  }
  if (it == s.begin() || it == s.end()) return std::nullopt;
  const auto& b = *it;
  const auto& a = *(it - 1);
  if (!a.visible || !b.visible) return std::nullopt;
  const double alpha =
      static_cast<double>(t - a.t) / static_cast<double>(b.t - a.t);
  return a.u + alpha * (b.u - a.u);
}

}  // namespace

DisparityTrace disparity_trajectory(std::span<const Track2D> left,
                                    std::span<const Track2D> right,
                                    Timestamp window, std::size_t windows) {
  if (window <= 0) throw ConfigError("analysis window must be positive");
  std::map<int, const Track2D*> right_by_joint;
  for (const auto& r : right) right_by_joint[r.joint] = &r;

  DisparityTrace trace;
  trace.window = window;
  trace.windows.resize(windows);
  for (std::size_t i = 0; i < windows; ++i) {
    auto& w = trace.windows[i];
    w.t_center = window_center(i, window);
    double sum = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& l : left) {
      const auto rit = right_by_joint.find(l.joint);
      if (rit == right_by_joint.end()) continue;
      const auto ul = horizontal_at(l, w.t_center);
      const auto ur = horizontal_at(*rit->second, w.t_center);
      if (!ul || !ur) continue;
      const double d = *ur - *ul;
      w.per_joint.emplace_back(l.joint, d);
      sum += d;
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    w.n_joints = w.per_joint.size();
    if (w.n_joints > 0) {
      w.d_mean = sum / static_cast<double>(w.n_joints);
      w.d_min = lo;
      w.d_max = hi;
    }
  }
  if (trace.defined_count() == 0) {
    throw ConfigError("no joint is visible in both views in any window");
  }
  return trace;
}

std::vector<MarkerTrack3D> read_markers(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("missing header", 1);
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t_us,joint,X_mm,Y_mm,Z_mm") {
    throw ParseError("expected header t_us,joint,X_mm,Y_mm,Z_mm", line_no);
  }
  std::map<int, MarkerTrack3D> by_joint;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv(line);
    long long t = 0, joint = 0;
    MarkerSample m;
    if (f.size() != 5 || !parse_int(f[0], t) || !parse_int(f[1], joint) ||
        !parse_real(f[2], m.x_mm) || !parse_real(f[3], m.y_mm) ||
        !parse_real(f[4], m.z_mm)) {
      throw ParseError("malformed marker row", line_no);
    }
    m.t = t;
    auto& track = by_joint[static_cast<int>(joint)];
    track.joint = static_cast<int>(joint);
    track.samples.push_back(m);
  }
  std::vector<MarkerTrack3D> tracks;
  for (auto& [joint, track] : by_joint) {
    std::stable_sort(track.samples.begin(), track.samples.end(),
                     [](const MarkerSample& a, const MarkerSample& b) {
                       return a.t < b.t;
                     });
    tracks.push_back(std::move(track));
  }
  return tracks;
}

std::vector<MarkerTrack3D> read_marker_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open marker file " + path.string());
  try {
    return read_markers(in);
  } catch (const ParseError& e) {
    throw e.with_prefix(path.string() + ": ");
  }
}

void shift_markers(std::vector<MarkerTrack3D>& tracks, Timestamp offset) {
  for (auto& t : tracks) {
    for (auto& s : t.samples) s.t -= offset;
  }
}

namespace {

ProjectionMatrix matrix_from_json(const nlohmann::json& j, const char* name) {
  if (!j.contains(name)) {
    throw ConfigError(std::string("calibration lacks '") + name + "' matrix");
  }
  const auto& m = j.at(name);
  if (!m.is_array() || m.size() != 3) {
    throw ConfigError(std::string("'") + name + "' must be a 3x4 matrix");
  }
  ProjectionMatrix P{};
  for (std::size_t r = 0; r < 3; ++r) {
    if (!m[r].is_array() || m[r].size() != 4) {
      throw ConfigError(std::string("'") + name + "' must be a 3x4 matrix");
    }
    for (std::size_t c = 0; c < 4; ++c) {
      if (!m[r][c].is_number()) {
        throw ConfigError(std::string("'") + name + "' has a non-numeric entry");
      }
      P[r][c] = m[r][c].get<double>();
    }
  }
  return P;
}

}  // namespace

StereoCalibration parse_calibration(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("calibration JSON: ") + e.what(), 0);
  }
  return StereoCalibration{matrix_from_json(j, "left"),
                           matrix_from_json(j, "right")};
}

StereoCalibration read_calibration_file(const std::filesystem::path& path) {
  return parse_calibration(read_text_file(path));
}

void write_trace(std::ostream& out, const DisparityTrace& trace) {
  out << "window_i,t_center_us,d_mean,d_min,d_max,n_joints\n";
  for (std::size_t i = 0; i < trace.windows.size(); ++i) {
    const auto& w = trace.windows[i];
    out << i << ',' << w.t_center << ',';
    if (w.defined()) {
      out << format_real(w.d_mean) << ',' << format_real(w.d_min) << ','
          << format_real(w.d_max);
    } else {
      out << ",,";
    }
    out << ',' << w.n_joints << '\n';
  }
}

void write_trace_file(const DisparityTrace& trace,
                      const std::filesystem::path& path) {
  write_file_atomic(path, [&](std::ostream& out) { write_trace(out, trace); });
}

DisparityTrace read_trace(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("missing header", 1);
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "window_i,t_center_us,d_mean,d_min,d_max,n_joints") {
    throw ParseError("expected header window_i,t_center_us,d_mean,d_min,d_max,n_joints",
                     line_no);
  }
  DisparityTrace trace;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv(line);
    long long idx = 0, tc = 0, n = 0;
    if (f.size() != 6 || !parse_int(f[0], idx) || !parse_int(f[1], tc) ||
        !parse_int(f[5], n) || n < 0) {
      throw ParseError("malformed trace row", line_no);
    }
    if (idx != static_cast<long long>(trace.windows.size())) {
      throw ParseError("window indices must be consecutive from 0", line_no);
    }
    TraceWindow w;
    w.t_center = tc;
    w.n_joints = static_cast<std::size_t>(n);
    if (n > 0) {
      if (!parse_real(f[2], w.d_mean) || !parse_real(f[3], w.d_min) ||
          !parse_real(f[4], w.d_max)) {
        throw ParseError("defined window needs d_mean,d_min,d_max", line_no);
      }
    }
    trace.windows.push_back(std::move(w));
  }
  if (trace.windows.size() >= 2) {
    trace.window = trace.windows[1].t_center - trace.windows[0].t_center;
  } else if (trace.windows.size() == 1) {
    trace.window = 2 * trace.windows[0].t_center;
  }
  if (!trace.windows.empty() && trace.window <= 0) {
    throw ParseError("cannot infer a positive window length", line_no);
  }
  return trace;
}

DisparityTrace read_trace_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open trace file " + path.string());
  try {
    return read_trace(in);
  } catch (const ParseError& e) {
    throw e.with_prefix(path.string() + ": ");
  }
}

}  // namespace stereosnn
