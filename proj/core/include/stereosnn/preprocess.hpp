#pragma once

#include <compare>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "stereosnn/events.hpp"

namespace stereosnn {

struct PixelCoord {
  int x = 0;
  int y = 0;
  friend bool operator==(const PixelCoord&, const PixelCoord&) = default;
};

struct PixelSize {
  int width = 0;
  int height = 0;
  friend bool operator==(const PixelSize&, const PixelSize&) = default;
};

// Axis-aligned pixel rectangle [x, x+width) x [y, y+height). A region without a
// side applies to both cameras.
struct PixelRect {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;
  std::optional<Side> side;

  bool contains(const DvsEvent& e) const noexcept {
    return (!side || *side == e.side) && e.x >= x && e.x < x + width &&
           e.y >= y && e.y < y + height;
  }
};

struct HotPixel {
  int x = 0;
  int y = 0;
  Side side = Side::Left;
  friend auto operator<=>(const HotPixel&, const HotPixel&) = default;
};

// Noise removal, resolution reduction and cropping. Stages run in the order
// mask -> hot pixels -> background activity -> downscale -> crop.
struct PreprocessConfig {
  std::vector<PixelRect> mask_regions;

  bool hot_pixel_filter = true;
  double hot_pixel_rate_factor = 10.0;

  bool background_filter = true;
  Timestamp background_window = 5000;
  int background_radius = 1;
  bool background_include_same_pixel = false;

  int downscale_factor = 6;

  // Required unless auto_crop is set or the crop spans the whole downscaled
  // frame.
  std::optional<PixelCoord> crop_origin;
  PixelSize crop_size{16, 16};
  bool auto_crop = false;

  // Throws ConfigError when the config cannot apply to `input`.
  void validate(const CameraGeometry& input) const;

  // Stage-free configuration: no masks, no filters, factor 1, full-frame crop.
  static PreprocessConfig passthrough(const CameraGeometry& input);
};

StereoEventStream mask_regions(const StereoEventStream& stream,
                               std::span<const PixelRect> regions);

// Pixels whose event count exceeds factor x (median nonzero per-pixel count),
// evaluated per side over the whole stream.
std::set<HotPixel> detect_hot_pixels(const StereoEventStream& stream,
                                     double factor);

StereoEventStream remove_pixels(const StereoEventStream& stream,
                                const std::set<HotPixel>& pixels);

// Keeps an event iff an earlier event of the same side lies within Chebyshev
// distance `radius` and at most `window` us before it. Support comes from all
// earlier input events, surviving or not. The event's own pixel only counts
// when `include_same_pixel` is set.
StereoEventStream filter_background(const StereoEventStream& stream,
                                    Timestamp window, int radius,
                                    bool include_same_pixel = false);

// (x, y) -> (x / factor, y / factor). Events landing in the remainder strip of a
// non-divisible frame are dropped.
StereoEventStream downscale(const StereoEventStream& stream, int factor);

StereoEventStream crop(const StereoEventStream& stream, PixelCoord origin,
                       PixelSize size);

// Crop origin centred on the event centroid of the first `span` us, clamped so
// the crop fits inside the frame.
PixelCoord auto_crop_origin(const StereoEventStream& stream, PixelSize size,
                            Timestamp span = 1'000'000);

// Resolves the crop origin `config` would use for a downscaled stream.
PixelCoord resolve_crop_origin(const PreprocessConfig& config,
                               const StereoEventStream& downscaled);

StereoEventStream preprocess_pipeline(const StereoEventStream& stream,
                                      const PreprocessConfig& config);

struct PreprocessResult {
  StereoEventStream stream;
  PixelCoord crop_origin;
  std::set<HotPixel> hot_pixels;
};

// The pipeline plus the intermediate decisions (crop origin, removed pixels).
PreprocessResult preprocess_detailed(const StereoEventStream& stream,
                                     const PreprocessConfig& config);

}  // namespace stereosnn
