#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "stereosnn/error.hpp"
#include "stereosnn/events.hpp"

using namespace stereosnn;
using testsupport::StreamSpec;

namespace {

StereoEventStream parse(const std::string& text, CameraGeometry g = {},
                        std::optional<Side> side = std::nullopt) {
  std::istringstream in(text);
  return parse_events(in, g, side);
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("stereosnn_events_" + name);
}

}  // namespace

TEST(Events, ParsesTwoRows) {
  const auto s = parse("t_us,x,y,p,side\n0,10,20,1,L\n5,11,20,0,R\n");
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s.duration(), 5);
  EXPECT_EQ(s.events()[0], (DvsEvent{0, 10, 20, Polarity::On, Side::Left}));
  EXPECT_EQ(s.events()[1], (DvsEvent{5, 11, 20, Polarity::Off, Side::Right}));
}

TEST(Events, HeaderOnlyIsEmpty) {
  const auto s = parse("t_us,x,y,p,side\n");
  EXPECT_TRUE(s.empty());
  EXPECT_EQ(s.duration(), 0);
}

TEST(Events, UnsortedRowsComeOutCanonical) {
  auto ev = testsupport::random_events(11, StreamSpec{.count = 500, .t_max = 50});
  std::ostringstream csv;
  csv << "t_us,x,y,p,side\n";
  for (const auto& e : ev) {
    csv << e.t << ',' << e.x << ',' << e.y << ',' << (e.polarity == Polarity::On) << ','
        << to_string(e.side) << '\n';
  }
  const auto s = parse(csv.str(), CameraGeometry{32, 24});
  std::sort(ev.begin(), ev.end(), testsupport::key_less);
  EXPECT_EQ(testsupport::to_vector(s), ev);
}

TEST(Events, ColumnOrderFollowsHeader) {
  const auto s = parse("side,p,y,x,t_us\nR,1,2,3,40\n");
  EXPECT_EQ(s.events()[0], (DvsEvent{40, 3, 2, Polarity::On, Side::Right}));
}

TEST(Events, SideFromFlagWhenColumnMissing) {
  const auto s = parse("t_us,x,y,p\n1,2,3,0\n", {}, Side::Right);
  EXPECT_EQ(s.events()[0].side, Side::Right);
  EXPECT_THROW(parse("t_us,x,y,p\n1,2,3,0\n"), ParseError);
}

TEST(Events, AcceptsCrLf) {
  const auto s = parse("t_us,x,y,p,side\r\n7,1,1,0,L\r\n");
  EXPECT_EQ(s.size(), 1u);
}

TEST(Events, MalformedLineReportsLineNumber) {
  try {
    parse("t_us,x,y,p,side\n0,1,1,1,L\n0,1,1,L\n");
    FAIL() << "no error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(Events, RejectsBadFields) {
  EXPECT_THROW(parse("t_us,x,y,p,side\n1.5,1,1,1,L\n"), ParseError);
  EXPECT_THROW(parse("t_us,x,y,p,side\n1,346,1,1,L\n"), ParseError);
  EXPECT_THROW(parse("t_us,x,y,p,side\n1,1,-1,1,L\n"), ParseError);
  EXPECT_THROW(parse("t_us,x,y,p,side\n1,1,1,2,L\n"), ParseError);
  EXPECT_THROW(parse("t_us,x,y,p,side\n1,1,1,1,X\n"), ParseError);
  EXPECT_THROW(parse("t_us,x,y,p,side\n-1,1,1,1,L\n"), ParseError);
  EXPECT_THROW(parse(""), ParseError);
}

TEST(Events, FileErrorsNameThePath) {
  const auto p = temp_path("bad.csv");
  {
    std::ofstream(p) << "t_us,x,y,p,side\nx,1,1,1,L\n";
  }
  try {
    parse_event_file(p, {});
    FAIL() << "no error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find(p.string()), std::string::npos);
  }
  EXPECT_THROW(parse_event_file(temp_path("missing.csv"), {}), IoError);
}

TEST(Events, WriteParseRoundTrip) {
  const StereoEventStream two(
      {{0, 10, 20, Polarity::On, Side::Left}, {5, 11, 20, Polarity::Off, Side::Right}}, {});
  std::ostringstream out;
  write_events(out, two);
  EXPECT_EQ(out.str(), "t_us,x,y,p,side\n0,10,20,1,L\n5,11,20,0,R\n");
  EXPECT_EQ(parse(out.str()), two);

  std::ostringstream empty;
  write_events(empty, StereoEventStream({}, {}));
  EXPECT_EQ(empty.str(), "t_us,x,y,p,side\n");
}

TEST(Events, LargeRandomRoundTripThroughFile) {
  const auto s = testsupport::random_stream(
      5, StreamSpec{.width = 346, .height = 260, .count = 100'000, .t_max = 10'000'000});
  const auto p = temp_path("roundtrip.csv");
  write_event_file(s, p);
  EXPECT_EQ(parse_event_file(p, {}), s);
  std::filesystem::remove(p);
}

TEST(Events, StreamValidation) {
  EXPECT_THROW(StereoEventStream({{0, 5, 0, Polarity::On, Side::Left}}, {5, 5}), ConfigError);
  EXPECT_THROW(StereoEventStream({{-1, 0, 0, Polarity::On, Side::Left}}, {5, 5}), ConfigError);
  EXPECT_THROW(StereoEventStream({{9, 0, 0, Polarity::On, Side::Left}}, {5, 5}, 8),
               ConfigError);
  EXPECT_EQ(StereoEventStream({{9, 0, 0, Polarity::On, Side::Left}}, {5, 5}, 20).duration(),
            20);
  EXPECT_THROW(CameraGeometry({0, 3}).validate(), ConfigError);
}

TEST(Events, CanonicalOrderIsTotal) {
  const auto ev = testsupport::random_events(3, StreamSpec{.width = 3, .height = 2,
                                                           .count = 400, .t_max = 3});
  for (const auto& a : ev) {
    for (const auto& b : ev) {
      const bool lt = canonical_less(a, b), gt = canonical_less(b, a);
      EXPECT_TRUE(lt || gt || a == b);
      EXPECT_FALSE(lt && gt);
    }
  }
}

TEST(Events, MergeTieBreaksLeftFirst) {
  const StereoEventStream l({{0, 1, 1, Polarity::On, Side::Left}}, {4, 4});
  const StereoEventStream r({{0, 0, 0, Polarity::On, Side::Right}}, {4, 4});
  const auto m = merge_streams(l, r);
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m.events()[0].side, Side::Left);
  EXPECT_EQ(m.events()[1].side, Side::Right);
}

TEST(Events, MergeWithEmptyLeftIsRight) {
  const auto r = testsupport::random_stream(8, StreamSpec{.right_fraction = 1.0});
  EXPECT_EQ(merge_streams(StereoEventStream({}, r.geometry()), r), r);
}

TEST(Events, MergeEqualsConcatenateThenSort) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto l = testsupport::random_stream(seed, StreamSpec{.right_fraction = 0.0});
    const auto r = testsupport::random_stream(seed + 100, StreamSpec{.right_fraction = 1.0});
    auto all = testsupport::to_vector(l);
    const auto rv = testsupport::to_vector(r);
    all.insert(all.end(), rv.begin(), rv.end());
    std::sort(all.begin(), all.end(), testsupport::key_less);
    const auto m = merge_streams(l, r);
    EXPECT_EQ(testsupport::to_vector(m), all);
    EXPECT_EQ(m.size(), l.size() + r.size());
  }
}

TEST(Events, MergeRejectsMixedSidesAndGeometry) {
  const auto mixed = testsupport::random_stream(1, StreamSpec{});
  const auto right = testsupport::random_stream(2, StreamSpec{.right_fraction = 1.0});
  EXPECT_THROW(merge_streams(mixed, right), ConfigError);
  const StereoEventStream other({}, {10, 10});
  const StereoEventStream left({}, right.geometry());
  EXPECT_THROW(merge_streams(other, right), ConfigError);
  EXPECT_NO_THROW(merge_streams(left, right));
}

TEST(Events, ShiftTimeAndEarliest) {
  const StereoEventStream a({{100, 0, 0, Polarity::On, Side::Left}}, {2, 2});
  const StereoEventStream b({{40, 0, 0, Polarity::On, Side::Right}}, {2, 2});
  EXPECT_EQ(earliest_timestamp(a, b), 40);
  const auto s = shift_time(a, 40);
  EXPECT_EQ(s.events()[0].t, 60);
}
