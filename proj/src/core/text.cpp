#include "impact/core/text.hpp"

#include <charconv>

namespace impact {

std::optional<std::string_view> LineReader::peek() const {
  if (pos_ >= text_.size()) return std::nullopt;
  auto end = text_.find('\n', pos_);
  if (end == std::string_view::npos) end = text_.size();
  auto line = text_.substr(pos_, end - pos_);
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

std::optional<std::string_view> LineReader::next() {
  auto line = peek();
  if (!line) return line;
  const auto end = text_.find('\n', pos_);
  pos_ = end == std::string_view::npos ? text_.size() : end + 1;
  ++line_;
  return line;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto at = text.find(sep, start);
    if (at == std::string_view::npos) {
      out.push_back(text.substr(start));
      return out;
    }
    out.push_back(text.substr(start, at - start));
    start = at + 1;
  }
}

std::string join(std::span<const std::string_view> parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string_view trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t");
  return text.substr(first, last - first + 1);
}

std::optional<double> parse_number(std::string_view text) {
  if (text.empty()) return std::nullopt;
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

std::optional<long long> parse_integer(std::string_view text) {
  if (text.empty()) return std::nullopt;
  long long v = 0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

namespace {

// Same text as printf("%.*g"), without depending on the C locale.
void append_general(std::string& out, double v, int precision) {
  char buf[48];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, precision);
  out.append(buf, ptr);
}

}  // namespace

void append_number(std::string& out, double v) { append_general(out, v, 9); }

void append_exact(std::string& out, double v) { append_general(out, v, 17); }

std::string format_exact(double v) {
  std::string s;
  append_exact(s, v);
  return s;
}

}  // namespace impact
