#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <tuple>
#include <vector>

namespace stereosnn {

// Integer microseconds since recording start. There is no floating-point time
// anywhere in the pipeline.
using Timestamp = std::int64_t;

enum class Polarity : std::uint8_t { Off = 0, On = 1 };
enum class Side : std::uint8_t { Left = 0, Right = 1 };

std::string_view to_string(Side side);

struct CameraGeometry {
  int width = 346;
  int height = 260;

  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width && y < height;
  }
  // Throws ConfigError unless width and height are positive.
  void validate() const;

  friend bool operator==(const CameraGeometry&, const CameraGeometry&) = default;
};

struct DvsEvent {
  Timestamp t = 0;
  int x = 0;
  int y = 0;
  Polarity polarity = Polarity::On;
  Side side = Side::Left;

  friend bool operator==(const DvsEvent&, const DvsEvent&) = default;
};

// Canonical total order: (t, side, y, x, polarity). LEFT sorts before RIGHT at
// equal t, which fixes the simulator's input order.
inline auto canonical_key(const DvsEvent& e) noexcept {
  return std::make_tuple(e.t, e.side, e.y, e.x, e.polarity);
}

inline bool canonical_less(const DvsEvent& a, const DvsEvent& b) noexcept {
  return canonical_key(a) < canonical_key(b);
}

// Immutable, validated, canonically sorted event sequence.
class StereoEventStream {
 public:
  StereoEventStream() = default;

  // Sorts `events` canonically and validates every event against `geometry`.
  // The duration is the last timestamp (0 when empty).
  StereoEventStream(std::vector<DvsEvent> events, CameraGeometry geometry);

  // As above with an explicit duration, which must cover the last event.
  StereoEventStream(std::vector<DvsEvent> events, CameraGeometry geometry,
                    Timestamp duration);

  std::span<const DvsEvent> events() const noexcept { return events_; }
  const CameraGeometry& geometry() const noexcept { return geometry_; }
  Timestamp duration() const noexcept { return duration_; }
  std::size_t size() const noexcept { return events_.size(); }
  bool empty() const noexcept { return events_.empty(); }

  // Count of events on one side.
  std::size_t count(Side side) const noexcept;
  // Every event is on `side` (true for an empty stream).
  bool single_sided(Side side) const noexcept;

  friend bool operator==(const StereoEventStream&,
                         const StereoEventStream&) = default;

 private:
  std::vector<DvsEvent> events_;
  CameraGeometry geometry_{};
  Timestamp duration_ = 0;
};

// Parses the event CSV format (header `t_us,x,y,p,side`, or `t_us,x,y,p` with
// the side given by `default_side`). Rows may arrive in any order.
StereoEventStream parse_events(std::istream& in, CameraGeometry geometry,
                               std::optional<Side> default_side = std::nullopt);
StereoEventStream parse_event_file(const std::filesystem::path& path,
                                   CameraGeometry geometry,
                                   std::optional<Side> default_side = std::nullopt);

void write_events(std::ostream& out, const StereoEventStream& stream);
// Written atomically: the file is either complete or absent.
void write_event_file(const StereoEventStream& stream,
                      const std::filesystem::path& path);

// Merges a LEFT-only and a RIGHT-only stream of equal geometry.
StereoEventStream merge_streams(const StereoEventStream& left,
                                const StereoEventStream& right);

// Subtracts `offset` from every timestamp (recording-start normalization).
StereoEventStream shift_time(const StereoEventStream& stream, Timestamp offset);

// Earliest timestamp across both streams; 0 if both are empty.
Timestamp earliest_timestamp(const StereoEventStream& a,
                             const StereoEventStream& b);

}  // namespace stereosnn
