#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace impact {

/// Line-by-line view over a text buffer. Lines exclude the '\n'; a trailing
/// '\r' is dropped.
class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  std::optional<std::string_view> peek() const;
  std::optional<std::string_view> next();
  /// 1-based number of the last line returned by next().
  std::size_t line_number() const noexcept { return line_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 0;
};

std::vector<std::string_view> split(std::string_view text, char sep);
std::string join(std::span<const std::string_view> parts, char sep);
std::string_view trim(std::string_view text);

/// Locale-independent; the whole string must be consumed. "nan"/"inf" parse
/// to their non-finite values so callers can report them.
std::optional<double> parse_number(std::string_view text);
std::optional<long long> parse_integer(std::string_view text);

/// 9 significant digits, as used by the event files.
void append_number(std::string& out, double v);
/// 17 significant digits: exact round trip of a double.
void append_exact(std::string& out, double v);
std::string format_exact(double v);

}  // namespace impact
