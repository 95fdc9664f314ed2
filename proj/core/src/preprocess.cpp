#include "stereosnn/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>

#include "stereosnn/error.hpp"

namespace stereosnn {

namespace {

CameraGeometry downscaled_geometry(const CameraGeometry& g, int factor) {
  return CameraGeometry{g.width / factor, g.height / factor};
}

std::string rect_string(const PixelRect& r) {
  return "(" + std::to_string(r.x) + "," + std::to_string(r.y) + " " +
         std::to_string(r.width) + "x" + std::to_string(r.height) + ")";
}

template <typename Pred>
StereoEventStream keep_if(const StereoEventStream& stream, Pred keep) {
  std::vector<DvsEvent> out;
  out.reserve(stream.size());
  for (const auto& e : stream.events()) {
    if (keep(e)) out.push_back(e);
  }
  return StereoEventStream(std::move(out), stream.geometry(), stream.duration());
}

}  // namespace

void PreprocessConfig::validate(const CameraGeometry& input) const {
  input.validate();
  for (const auto& r : mask_regions) {
    if (r.width <= 0 || r.height <= 0 || r.x < 0 || r.y < 0 ||
        r.x + r.width > input.width || r.y + r.height > input.height) {
      throw ConfigError("mask region " + rect_string(r) + " exceeds " +
                        std::to_string(input.width) + "x" +
                        std::to_string(input.height));
    }
  }
  if (hot_pixel_filter && !(hot_pixel_rate_factor > 0.0)) {
    throw ConfigError("hot_pixel_rate_factor must be positive");
  }
  if (background_filter) {
    if (background_window <= 0) {
      throw ConfigError("background_window must be positive");
    }
    if (background_radius < 0) {
      throw ConfigError("background_radius must be non-negative");
    }
    if (background_radius == 0 && !background_include_same_pixel) {
      throw ConfigError(
          "background_radius 0 without same-pixel support drops every event");
    }
  }
  if (downscale_factor < 1) {
    throw ConfigError("downscale_factor must be >= 1");
  }
  const auto reduced = downscaled_geometry(input, downscale_factor);
  if (reduced.width < 1 || reduced.height < 1) {
    throw ConfigError("downscale_factor " + std::to_string(downscale_factor) +
                      " leaves an empty frame");
  }
  if (crop_size.width < 1 || crop_size.height < 1 ||
      crop_size.width > reduced.width || crop_size.height > reduced.height) {
    throw ConfigError("crop " + std::to_string(crop_size.width) + "x" +
                      std::to_string(crop_size.height) +
                      " does not fit the downscaled frame " +
                      std::to_string(reduced.width) + "x" +
                      std::to_string(reduced.height));
  }
  if (crop_origin) {
    if (crop_origin->x < 0 || crop_origin->y < 0 ||
        crop_origin->x + crop_size.width > reduced.width ||
        crop_origin->y + crop_size.height > reduced.height) {
      throw ConfigError("crop rectangle at (" + std::to_string(crop_origin->x) +
                        "," + std::to_string(crop_origin->y) +
                        ") exceeds the downscaled frame");
    }
  } else if (!auto_crop && !(crop_size.width == reduced.width &&
                             crop_size.height == reduced.height)) {
    throw ConfigError("crop_origin is required (or enable auto_crop)");
  }
}

PreprocessConfig PreprocessConfig::passthrough(const CameraGeometry& input) {
  PreprocessConfig c;
  c.hot_pixel_filter = false;
  c.background_filter = false;
  c.downscale_factor = 1;
  c.crop_origin = PixelCoord{0, 0};
  c.crop_size = PixelSize{input.width, input.height};
  return c;
}

StereoEventStream mask_regions(const StereoEventStream& stream,
                               std::span<const PixelRect> regions) {
  if (regions.empty()) return stream;
  return keep_if(stream, [&](const DvsEvent& e) {
    return std::none_of(regions.begin(), regions.end(),
                        [&](const PixelRect& r) { return r.contains(e); });
  });
}

std::set<HotPixel> detect_hot_pixels(const StereoEventStream& stream,
                                     double factor) {
  const auto& g = stream.geometry();
  const auto pixels = static_cast<std::size_t>(g.width) *
                      static_cast<std::size_t>(g.height);
  std::set<HotPixel> hot;
  for (Side side : {Side::Left, Side::Right}) {
    std::vector<std::uint64_t> counts(pixels, 0);
    for (const auto& e : stream.events()) {
      if (e.side == side) {
        ++counts[static_cast<std::size_t>(e.y) * static_cast<std::size_t>(g.width) +
                 static_cast<std::size_t>(e.x)];
      }
    }
    std::vector<std::uint64_t> nonzero;
    for (auto c : counts) {
      if (c > 0) nonzero.push_back(c);
    }
    if (nonzero.empty()) continue;
    std::sort(nonzero.begin(), nonzero.end());
    const std::size_t n = nonzero.size();
    const double median =
        0.5 * (static_cast<double>(nonzero[(n - 1) / 2]) +
               static_cast<double>(nonzero[n / 2]));
    const double limit = factor * median;
    for (std::size_t i = 0; i < pixels; ++i) {
      if (static_cast<double>(counts[i]) > limit) {
        hot.insert(HotPixel{static_cast<int>(i % static_cast<std::size_t>(g.width)),
                            static_cast<int>(i / static_cast<std::size_t>(g.width)),
                            side});
      }
    }
  }
  return hot;
}

StereoEventStream remove_pixels(const StereoEventStream& stream,
                                const std::set<HotPixel>& pixels) {
  if (pixels.empty()) return stream;
  return keep_if(stream, [&](const DvsEvent& e) {
    return !pixels.contains(HotPixel{e.x, e.y, e.side});
  });
}

StereoEventStream filter_background(const StereoEventStream& stream,
                                    Timestamp window, int radius,
                                    bool include_same_pixel) {
  if (window <= 0) throw ConfigError("background window must be positive");
  if (radius < 0) throw ConfigError("background radius must be non-negative");
  const auto& g = stream.geometry();
  const auto plane = static_cast<std::size_t>(g.width) *
                     static_cast<std::size_t>(g.height);
  constexpr Timestamp kNever = -1;
  // Latest timestamp seen at each pixel, per side.
  std::vector<Timestamp> last(2 * plane, kNever);

  std::vector<DvsEvent> out;
  out.reserve(stream.size());
  for (const auto& e : stream.events()) {
    const std::size_t base = e.side == Side::Left ? 0 : plane;
    bool supported = false;
    const int y0 = std::max(0, e.y - radius);
    const int y1 = std::min(g.height - 1, e.y + radius);
    const int x0 = std::max(0, e.x - radius);
    const int x1 = std::min(g.width - 1, e.x + radius);
    for (int y = y0; y <= y1 && !supported; ++y) {
      for (int x = x0; x <= x1; ++x) {
        if (x == e.x && y == e.y && !include_same_pixel) continue;
        const Timestamp t = last[base + static_cast<std::size_t>(y) *
                                            static_cast<std::size_t>(g.width) +
                                 static_cast<std::size_t>(x)];
        if (t != kNever && e.t - t <= window) {
          supported = true;
          break;
        }
      }
    }
    if (supported) out.push_back(e);
    last[base + static_cast<std::size_t>(e.y) * static_cast<std::size_t>(g.width) +
         static_cast<std::size_t>(e.x)] = e.t;
  }
  return StereoEventStream(std::move(out), g, stream.duration());
}

StereoEventStream downscale(const StereoEventStream& stream, int factor) {
  if (factor < 1) throw ConfigError("downscale factor must be >= 1");
  if (factor == 1) return stream;
  const auto reduced = downscaled_geometry(stream.geometry(), factor);
  reduced.validate();
  std::vector<DvsEvent> out;
  out.reserve(stream.size());
  for (auto e : stream.events()) {
    e.x /= factor;
    e.y /= factor;
    if (reduced.contains(e.x, e.y)) out.push_back(e);
  }
  // Timestamps keep their order; ties at equal t are re-keyed canonically.
  return StereoEventStream(std::move(out), reduced, stream.duration());
}

StereoEventStream crop(const StereoEventStream& stream, PixelCoord origin,
                       PixelSize size) {
  const auto& g = stream.geometry();
  if (size.width < 1 || size.height < 1 || origin.x < 0 || origin.y < 0 ||
      origin.x + size.width > g.width || origin.y + size.height > g.height) {
    throw ConfigError("crop rectangle outside the " + std::to_string(g.width) +
                      "x" + std::to_string(g.height) + " frame");
  }
  std::vector<DvsEvent> out;
  out.reserve(stream.size());
  for (auto e : stream.events()) {
    if (e.x >= origin.x && e.x < origin.x + size.width && e.y >= origin.y &&
        e.y < origin.y + size.height) {
      e.x -= origin.x;
      e.y -= origin.y;
      out.push_back(e);
    }
  }
  return StereoEventStream(std::move(out), CameraGeometry{size.width, size.height},
                           stream.duration());
}

PixelCoord auto_crop_origin(const StereoEventStream& stream, PixelSize size,
                            Timestamp span) {
  const auto& g = stream.geometry();
  double sx = 0.0, sy = 0.0;
  std::size_t n = 0;
  const Timestamp start = stream.empty() ? 0 : stream.events().front().t;
  for (const auto& e : stream.events()) {
    if (e.t - start >= span) break;
    sx += e.x;
    sy += e.y;
    ++n;
  }
  double cx = 0.5 * g.width, cy = 0.5 * g.height;
  if (n > 0) {
    cx = sx / static_cast<double>(n) + 0.5;
    cy = sy / static_cast<double>(n) + 0.5;
  }
  const int x = static_cast<int>(std::lround(cx - 0.5 * size.width));
  const int y = static_cast<int>(std::lround(cy - 0.5 * size.height));
  return PixelCoord{std::clamp(x, 0, std::max(0, g.width - size.width)),
                    std::clamp(y, 0, std::max(0, g.height - size.height))};
}

PixelCoord resolve_crop_origin(const PreprocessConfig& config,
                               const StereoEventStream& downscaled) {
  if (config.crop_origin) return *config.crop_origin;
  if (config.auto_crop) return auto_crop_origin(downscaled, config.crop_size);
  return PixelCoord{0, 0};
}

PreprocessResult preprocess_detailed(const StereoEventStream& stream,
                                     const PreprocessConfig& config) {
  config.validate(stream.geometry());
  PreprocessResult r;
  auto s = mask_regions(stream, config.mask_regions);
  if (config.hot_pixel_filter) {
    r.hot_pixels = detect_hot_pixels(s, config.hot_pixel_rate_factor);
    s = remove_pixels(s, r.hot_pixels);
  }
  if (config.background_filter) {
    s = filter_background(s, config.background_window, config.background_radius,
                          config.background_include_same_pixel);
  }
  s = downscale(s, config.downscale_factor);
  r.crop_origin = resolve_crop_origin(config, s);
  r.stream = crop(s, r.crop_origin, config.crop_size);
  return r;
}

StereoEventStream preprocess_pipeline(const StereoEventStream& stream,
                                      const PreprocessConfig& config) {
  return preprocess_detailed(stream, config).stream;
}

}  // namespace stereosnn
