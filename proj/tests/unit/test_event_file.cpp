#include <doctest.h>

#include <filesystem>

#include "impact/core/error.hpp"
#include "impact/core/text.hpp"
#include "impact/dataset/event_file.hpp"
#include "testkit.hpp"

using namespace impact;
namespace fs = std::filesystem;

TEST_CASE("event text round trip is exact") {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const auto ev = testkit::random_event(seed);
    const std::string text = dataset::format_event(ev);
    const auto back = dataset::parse_event(text);
    CHECK(back == ev);
    CHECK(dataset::format_event(back) == text);
  }
}

TEST_CASE("event file layout") {
  const auto ev = testkit::random_event(3);
  const std::string text = dataset::format_event(ev);
  LineReader in(text);
  CHECK(*in.next() == "# schema=impact-pipe/1");
  CHECK(*in.next() == "# event_id=" + ev.event_id);
  CHECK(text.find("\nt_ms,lin_x_g,lin_y_g,lin_z_g\n-50,") != std::string::npos);
  CHECK(text.find("\n\nt_ms,ang_x_dps,ang_y_dps,ang_z_dps\n-50,") != std::string::npos);
  CHECK(text.find("\r") == std::string::npos);
  CHECK(text.back() == '\n');
}

TEST_CASE("CRLF line endings are accepted") {
  const auto ev = testkit::random_event(4);
  std::string text = dataset::format_event(ev), crlf;
  for (char c : text) {
    if (c == '\n') crlf += '\r';
    crlf += c;
  }
  CHECK(dataset::parse_event(crlf) == ev);
}

TEST_CASE("malformed corpus yields the specified error classes") {
  const auto ev = testkit::random_event(7);
  const auto corpus = testkit::malformed_corpus(ev);
  CHECK(corpus.size() >= 15);
  for (const auto& c : corpus) {
    CAPTURE(c.name);
    CHECK(testkit::classify_parse_failure(c.text) == testkit::expected_error_name(c.expected));
  }
}

TEST_CASE("data errors report the 1-based row within the block") {
  const auto ev = testkit::random_event(8);
  std::string text = dataset::format_event(ev);
  const auto title = text.find("t_ms,ang_x_dps");
  // third angular data row
  std::size_t pos = text.find('\n', title) + 1;
  for (int i = 0; i < 2; ++i) pos = text.find('\n', pos) + 1;
  const auto comma = text.find(',', pos);
  text.replace(comma + 1, text.find(',', comma + 1) - comma - 1, "NaN");
  try {
    (void)dataset::parse_event(text);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(e.row() == 3);
  }
}

TEST_CASE("header values are checked") {
  const auto ev = testkit::random_event(9);
  const std::string text = dataset::format_event(ev);
  auto replace = [&](const std::string& from, const std::string& to) {
    std::string t = text;
    t.replace(t.find(from), from.size(), to);
    return t;
  };
  CHECK_THROWS_AS(dataset::parse_event(replace(ev.worn ? "# worn=true" : "# worn=false", "# worn=maybe")),
                  SchemaError);
  CHECK_THROWS_AS(dataset::parse_event(replace("# lin_rate_hz=1000", "# lin_rate_hz=fast")), SchemaError);
  CHECK_THROWS_AS(dataset::parse_event(replace("# lin_rate_hz=1000", "# lin_rate_hz=1000\n# lin_rate_hz=1000")),
                  SchemaError);
  CHECK_THROWS_AS(dataset::parse_event(""), SchemaError);
}

TEST_CASE("parse honours the capture window") {
  const auto ev = testkit::random_event(10);
  const std::string text = dataset::format_event(ev);
  TriggerConfig shorter;
  shorter.post_ms = 100.0;
  CHECK_THROWS_AS(dataset::parse_event(text, shorter), StructuralError);
}

TEST_CASE("files and identifiers") {
  const fs::path dir = fs::temp_directory_path() / "impact_event_file_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto ev = testkit::random_event(11);
  dataset::write_event_file(ev, dir / "a.csv");
  CHECK(dataset::parse_event_file(dir / "a.csv") == ev);
  CHECK_THROWS_AS(dataset::parse_event_file(dir / "missing.csv"), IoError);
  CHECK_THROWS_AS(dataset::write_event_file(ev, dir / "no" / "such" / "dir.csv"), IoError);
  fs::remove_all(dir);

  CHECK_NOTHROW(dataset::check_identifier("sim42-00001+s3", "id"));
  CHECK_THROWS_AS(dataset::check_identifier("", "id"), InvalidParameter);
  CHECK_THROWS_AS(dataset::check_identifier("..", "id"), InvalidParameter);
  CHECK_THROWS_AS(dataset::check_identifier("a/b", "id"), InvalidParameter);
  CHECK_THROWS_AS(dataset::check_identifier("a,b", "id"), InvalidParameter);
}

TEST_CASE("number text helpers") {
  CHECK(parse_number("1.5e3") == 1500.0);
  CHECK_FALSE(parse_number("1.5x").has_value());
  CHECK_FALSE(parse_number("").has_value());
  CHECK(parse_integer("-12") == -12);
  CHECK_FALSE(parse_integer("1.0").has_value());
  CHECK(format_exact(0.1) == "0.10000000000000001");
  std::string s;
  append_number(s, 1.0 / 3.0);
  CHECK(s == "0.333333333");
  CHECK(trim("  a b \t") == "a b");
}
