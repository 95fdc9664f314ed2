#include "stereosnn/events.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "stereosnn/error.hpp"
#include "stereosnn/io.hpp"

namespace stereosnn {

std::string_view to_string(Side side) {
  return side == Side::Left ? "L" : "R";
}

void CameraGeometry::validate() const {
  if (width <= 0 || height <= 0) {
    throw ConfigError("camera geometry must be positive, got " +
                      std::to_string(width) + "x" + std::to_string(height));
  }
}

namespace {

void check_event(const DvsEvent& e, const CameraGeometry& g) {
  if (e.t < 0) {
    throw ConfigError("negative timestamp " + std::to_string(e.t));
  }
  if (!g.contains(e.x, e.y)) {
    throw ConfigError("event (" + std::to_string(e.x) + "," +
                      std::to_string(e.y) + ") outside " +
                      std::to_string(g.width) + "x" + std::to_string(g.height));
  }
}

}  // namespace

StereoEventStream::StereoEventStream(std::vector<DvsEvent> events,
                                     CameraGeometry geometry)
    : events_(std::move(events)), geometry_(geometry) {
  geometry_.validate();
  for (const auto& e : events_) check_event(e, geometry_);
  if (!std::is_sorted(events_.begin(), events_.end(), canonical_less)) {
    std::sort(events_.begin(), events_.end(), canonical_less);
  }
  duration_ = events_.empty() ? 0 : events_.back().t;
}

StereoEventStream::StereoEventStream(std::vector<DvsEvent> events,
                                     CameraGeometry geometry,
                                     Timestamp duration)
    : StereoEventStream(std::move(events), geometry) {
  if (duration < duration_) {
    throw ConfigError("stream duration " + std::to_string(duration) +
                      " precedes last event at " + std::to_string(duration_));
  }
  duration_ = duration;
}

std::size_t StereoEventStream::count(Side side) const noexcept {
  return static_cast<std::size_t>(
      std::count_if(events_.begin(), events_.end(),
                    [side](const DvsEvent& e) { return e.side == side; }));
}

bool StereoEventStream::single_sided(Side side) const noexcept {
  return std::all_of(events_.begin(), events_.end(),
                     [side](const DvsEvent& e) { return e.side == side; });
}

StereoEventStream parse_events(std::istream& in, CameraGeometry geometry,
                               std::optional<Side> default_side) {
  geometry.validate();
  std::string line;
  std::size_t line_no = 0;

  // Header.
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    have_header = true;
    break;
  }
  if (!have_header) throw ParseError("missing header", line_no);

  int col_t = -1, col_x = -1, col_y = -1, col_p = -1, col_side = -1;
  const auto header = split_csv(line);
  for (int i = 0; i < static_cast<int>(header.size()); ++i) {
    const auto h = header[static_cast<std::size_t>(i)];
    if (h == "t_us") col_t = i;
    else if (h == "x") col_x = i;
    else if (h == "y") col_y = i;
    else if (h == "p") col_p = i;
    else if (h == "side") col_side = i;
    else throw ParseError("unknown column '" + std::string(h) + "'", line_no);
  }
  if (col_t < 0 || col_x < 0 || col_y < 0 || col_p < 0) {
    throw ParseError("header must contain t_us,x,y,p", line_no);
  }
  if (col_side < 0 && !default_side) {
    throw ParseError("no side column and no side given for the file", line_no);
  }
  const std::size_t columns = header.size();

  std::vector<DvsEvent> events;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != columns) {
      throw ParseError("expected " + std::to_string(columns) + " fields, got " +
                           std::to_string(f.size()),
                       line_no);
    }
    long long t = 0, x = 0, y = 0, p = 0;
    if (!parse_int(f[static_cast<std::size_t>(col_t)], t)) {
      throw ParseError("non-integer timestamp '" +
                           std::string(f[static_cast<std::size_t>(col_t)]) + "'",
                       line_no);
    }
    if (!parse_int(f[static_cast<std::size_t>(col_x)], x) ||
        !parse_int(f[static_cast<std::size_t>(col_y)], y)) {
      throw ParseError("non-integer coordinate", line_no);
    }
    if (!parse_int(f[static_cast<std::size_t>(col_p)], p) || (p != 0 && p != 1)) {
      throw ParseError("polarity must be 0 or 1", line_no);
    }
    DvsEvent e;
    e.t = t;
    e.x = static_cast<int>(x);
    e.y = static_cast<int>(y);
    e.polarity = p == 1 ? Polarity::On : Polarity::Off;
    if (col_side >= 0) {
      const auto s = f[static_cast<std::size_t>(col_side)];
      if (s == "L") e.side = Side::Left;
      else if (s == "R") e.side = Side::Right;
      else throw ParseError("side must be L or R", line_no);
    } else {
      e.side = *default_side;
    }
    if (t < 0) throw ParseError("negative timestamp", line_no);
    if (x < 0 || y < 0 || x >= geometry.width || y >= geometry.height) {
      throw ParseError("coordinate (" + std::to_string(x) + "," +
                           std::to_string(y) + ") outside " +
                           std::to_string(geometry.width) + "x" +
                           std::to_string(geometry.height),
                       line_no);
    }
    events.push_back(e);
  }
  return StereoEventStream(std::move(events), geometry);
}

StereoEventStream parse_event_file(const std::filesystem::path& path,
                                   CameraGeometry geometry,
                                   std::optional<Side> default_side) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open event file " + path.string());
  try {
    return parse_events(in, geometry, default_side);
  } catch (const ParseError& e) {
    throw e.with_prefix(path.string() + ": ");
  }
}

void write_events(std::ostream& out, const StereoEventStream& stream) {
  out << "t_us,x,y,p,side\n";
  std::string row;
  for (const auto& e : stream.events()) {
    row.clear();
    row += std::to_string(e.t);
    row += ',';
    row += std::to_string(e.x);
    row += ',';
    row += std::to_string(e.y);
    row += e.polarity == Polarity::On ? ",1," : ",0,";
    row += to_string(e.side);
    row += '\n';
    out << row;
  }
}

void write_event_file(const StereoEventStream& stream,
                      const std::filesystem::path& path) {
  write_file_atomic(path, [&](std::ostream& out) { write_events(out, stream); });
}

StereoEventStream merge_streams(const StereoEventStream& left,
                                const StereoEventStream& right) {
  if (!left.single_sided(Side::Left)) {
    throw ConfigError("left stream contains RIGHT events");
  }
  if (!right.single_sided(Side::Right)) {
    throw ConfigError("right stream contains LEFT events");
  }
  if (!(left.geometry() == right.geometry())) {
    throw ConfigError("stream geometries differ");
  }
  std::vector<DvsEvent> merged;
  merged.reserve(left.size() + right.size());
  std::merge(left.events().begin(), left.events().end(), right.events().begin(),
             right.events().end(), std::back_inserter(merged), canonical_less);
  return StereoEventStream(std::move(merged), left.geometry(),
                           std::max(left.duration(), right.duration()));
}

StereoEventStream shift_time(const StereoEventStream& stream, Timestamp offset) {
  std::vector<DvsEvent> events(stream.events().begin(), stream.events().end());
  for (auto& e : events) e.t -= offset;
  return StereoEventStream(std::move(events), stream.geometry(),
                           std::max<Timestamp>(0, stream.duration() - offset));
}

Timestamp earliest_timestamp(const StereoEventStream& a,
                             const StereoEventStream& b) {
  if (a.empty() && b.empty()) return 0;
  if (a.empty()) return b.events().front().t;
  if (b.empty()) return a.events().front().t;
  return std::min(a.events().front().t, b.events().front().t);
}

}  // namespace stereosnn
