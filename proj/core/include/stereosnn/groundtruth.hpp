#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "stereosnn/events.hpp"
#include "stereosnn/preprocess.hpp"

namespace stereosnn {

struct MarkerSample {
  Timestamp t = 0;
  double x_mm = 0.0;
  double y_mm = 0.0;
  double z_mm = 0.0;
};

struct MarkerTrack3D {
  int joint = 0;
  std::vector<MarkerSample> samples;  // sorted by t
};

// 3x4 homogeneous projection, world millimetres -> image pixels.
using ProjectionMatrix = std::array<std::array<double, 4>, 3>;

struct StereoCalibration {
  ProjectionMatrix left{};
  ProjectionMatrix right{};
};

struct ImageSample {
  Timestamp t = 0;
  double u = 0.0;
  double v = 0.0;
  // False when the homogeneous scale is not positive (at or behind the camera).
  bool valid = false;
  // Valid and inside the frame.
  bool visible = false;
};

struct Track2D {
  int joint = 0;
  std::vector<ImageSample> samples;
};

std::vector<Track2D> project_markers(std::span<const MarkerTrack3D> tracks,
                                     const ProjectionMatrix& projection,
                                     const CameraGeometry& frame);

// Full-resolution pixels -> cropped, downscaled pixels, kept real-valued.
// Visibility is re-evaluated against the crop window.
std::vector<Track2D> to_downscaled_coords(std::span<const Track2D> tracks,
                                          int factor, PixelCoord crop_origin,
                                          PixelSize crop_size);

struct TraceWindow {
  Timestamp t_center = 0;
  // Joints visible in both views at the window centre.
  std::size_t n_joints = 0;
  double d_mean = 0.0;
  double d_min = 0.0;
  double d_max = 0.0;
  std::vector<std::pair<int, double>> per_joint;  // (joint, disparity)

  bool defined() const noexcept { return n_joints > 0; }
};

// Ground-truth disparity (x_R - x_L, downscaled pixels) per analysis window.
struct DisparityTrace {
  Timestamp window = 0;
  std::vector<TraceWindow> windows;

  std::size_t defined_count() const noexcept;
};

inline Timestamp window_center(std::size_t i, Timestamp window) noexcept {
  return static_cast<Timestamp>(i) * window + window / 2;
}

// Per joint, u_R - u_L interpolated linearly to window centres; joints missing
// in either view contribute nothing to a window. Throws ConfigError when no
// window has a visible joint.
DisparityTrace disparity_trajectory(std::span<const Track2D> left,
                                    std::span<const Track2D> right,
                                    Timestamp window, std::size_t windows);

// Marker CSV: header `t_us,joint,X_mm,Y_mm,Z_mm`, any row order.
std::vector<MarkerTrack3D> read_markers(std::istream& in);
std::vector<MarkerTrack3D> read_marker_file(const std::filesystem::path& path);
// Shifts every marker timestamp by -offset.
void shift_markers(std::vector<MarkerTrack3D>& tracks, Timestamp offset);

// Calibration JSON: {"left": [[...4], [...4], [...4]], "right": [...]}.
StereoCalibration parse_calibration(const std::string& json_text);
StereoCalibration read_calibration_file(const std::filesystem::path& path);

// Trace CSV: `window_i,t_center_us,d_mean,d_min,d_max,n_joints`; undefined
// windows have empty disparity fields.
void write_trace(std::ostream& out, const DisparityTrace& trace);
void write_trace_file(const DisparityTrace& trace,
                      const std::filesystem::path& path);
DisparityTrace read_trace(std::istream& in);
DisparityTrace read_trace_file(const std::filesystem::path& path);

}  // namespace stereosnn
