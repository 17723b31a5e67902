#include "impact/dataset/event_file.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "impact/core/error.hpp"
#include "impact/core/text.hpp"

namespace impact::dataset {

namespace {

constexpr std::string_view kHeaderKeys[] = {"event_id",  "device_id",   "trigger_time", "threshold_g",
                                            "lin_rate_hz", "ang_rate_hz", "worn"};

void append_row(std::string& out, double t, const std::array<ChannelSeries, 3>& ch, std::size_t i) {
  append_number(out, t);
  for (const auto& s : ch) {
    out += ',';
    append_number(out, s.samples[i]);
  }
  out += '\n';
}

void check_header_value(std::string_view value, std::string_view key) {
  if (value.find('\n') != std::string_view::npos || value.find('\r') != std::string_view::npos) {
    throw InvalidParameter(std::string(key) + " contains a line break");
  }
}

double header_number(const std::map<std::string, std::string, std::less<>>& header, std::string_view key) {
  const std::string& text = header.find(key)->second;
  const auto v = parse_number(text);
  if (!v || !std::isfinite(*v)) throw SchemaError("header " + std::string(key) + " is not a finite number: '" + text + "'");
  return *v;
}

// Reads one column-titled block of exactly `rows` data rows starting at the
// reader's position. Fills time and the three channels.
void read_block(LineReader& in, std::span<const std::string_view> columns, std::string_view block,
                std::size_t rows, double t0, double rate, std::array<ChannelSeries, 3>& out) {
  const auto title = in.next();
  if (!title) throw StructuralError(std::string(block) + " block is missing");
  const auto fields = split(*title, ',');
  for (std::size_t c = 0; c < columns.size(); ++c) {
    bool found = false;
    for (const auto& f : fields) found = found || f == columns[c];
    if (!found) throw SchemaError("missing column '" + std::string(columns[c]) + "' in " + std::string(block) + " block");
  }
  if (fields.size() != columns.size()) {
    throw SchemaError(std::string(block) + " block has " + std::to_string(fields.size()) + " columns, expected " +
                      std::to_string(columns.size()));
  }
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (fields[c] != columns[c]) {
      throw SchemaError("column '" + std::string(fields[c]) + "' out of order in " + std::string(block) + " block");
    }
  }

  for (auto& s : out) s.samples.clear();
  std::size_t row = 0;
  while (auto line = in.peek()) {
    if (line->empty()) break;
    in.next();
    ++row;
    if (row > rows) continue;  // counted, reported below
    const auto values = split(*line, ',');
    if (values.size() != columns.size()) {
      throw StructuralError(std::string(block) + " row " + std::to_string(row) + " has " +
                            std::to_string(values.size()) + " fields, expected " + std::to_string(columns.size()));
    }
    std::array<double, 4> parsed{};
    for (std::size_t c = 0; c < values.size(); ++c) {
      const auto v = parse_number(values[c]);
      if (!v) throw DataError("unparsable value '" + std::string(values[c]) + "' in column " + std::string(columns[c]), row);
      if (!std::isfinite(*v)) throw DataError("non-finite value in column " + std::string(columns[c]), row);
      parsed[c] = *v;
    }
    const double expected_t = t0 + static_cast<double>(row - 1) * 1000.0 / rate;
    if (std::abs(parsed[0] - expected_t) > 1e-6 + 1e-9 * std::abs(expected_t)) {
      throw DataError("t_ms " + std::string(values[0]) + " out of sequence", row);
    }
    for (std::size_t a = 0; a < 3; ++a) out[a].samples.push_back(parsed[a + 1]);
  }
  if (row != rows) {
    throw StructuralError(std::string(block) + " block has " + std::to_string(row) + " rows, expected " +
                          std::to_string(rows));
  }
}

}  // namespace

void check_identifier(std::string_view id, std::string_view what) {
  if (id.empty()) throw InvalidParameter(std::string(what) + " is empty");
  for (char ch : id) {
    const bool ok = (ch >= 'A' && ch <= 'Z') || (ch >= 'a' && ch <= 'z') || (ch >= '0' && ch <= '9') || ch == '.' ||
                    ch == '_' || ch == '+' || ch == '-';
    if (!ok) throw InvalidParameter(std::string(what) + " '" + std::string(id) + "' has a character outside [A-Za-z0-9._+-]");
  }
  if (id == "." || id == "..") throw InvalidParameter(std::string(what) + " may not be '.' or '..'");
}

std::string format_sample_blocks(const KinematicEvent& event, std::span<const std::string_view> lin_columns,
                                 std::span<const std::string_view> ang_columns) {
  const TriggerConfig& cfg = event.trigger;
  std::string out;
  out.reserve(64 * (cfg.lin_samples() + cfg.ang_samples()));
  out += join(lin_columns, ',');
  out += '\n';
  for (std::size_t i = 0; i < event.lin_acc[0].size(); ++i) {
    append_row(out, -cfg.pre_ms + static_cast<double>(i) * 1000.0 / cfg.lin_rate_hz, event.lin_acc, i);
  }
  out += '\n';
  out += join(ang_columns, ',');
  out += '\n';
  for (std::size_t i = 0; i < event.ang_vel[0].size(); ++i) {
    append_row(out, -cfg.pre_ms + static_cast<double>(i) * 1000.0 / cfg.ang_rate_hz, event.ang_vel, i);
  }
  return out;
}

std::string format_event(const KinematicEvent& event) {
  event.validate();
  check_identifier(event.event_id, "event_id");
  check_header_value(event.device_id, "device_id");
  check_header_value(event.trigger_time, "trigger_time");

  const TriggerConfig& cfg = event.trigger;
  std::string out = "# schema=";
  out += kEventSchema;
  out += "\n# event_id=" + event.event_id;
  out += "\n# device_id=" + event.device_id;
  out += "\n# trigger_time=" + event.trigger_time;
  out += "\n# threshold_g=";
  append_number(out, cfg.threshold_g);
  out += "\n# lin_rate_hz=";
  append_number(out, cfg.lin_rate_hz);
  out += "\n# ang_rate_hz=";
  append_number(out, cfg.ang_rate_hz);
  out += event.worn ? "\n# worn=true\n" : "\n# worn=false\n";

  out += format_sample_blocks(event, kLinearColumns, kAngularColumns);
  return out;
}

KinematicEvent parse_event(std::string_view text, const TriggerConfig& window) {
  LineReader in(text);

  const auto first = in.next();
  if (!first || !first->starts_with("# schema=")) throw SchemaError("first line must be '# schema=...'");
  const auto schema = first->substr(9);
  if (schema != kEventSchema) throw SchemaError("unsupported schema '" + std::string(schema) + "'");

  std::map<std::string, std::string, std::less<>> header;
  while (auto line = in.peek()) {
    if (!line->starts_with("#")) break;
    in.next();
    if (!line->starts_with("# ")) throw SchemaError("header line without '# ' prefix");
    const auto body = line->substr(2);
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) throw SchemaError("header line without '=': '" + std::string(*line) + "'");
    const std::string key(body.substr(0, eq));
    bool known = false;
    for (auto k : kHeaderKeys) known = known || k == key;
    if (!known) throw SchemaError("unknown header key '" + key + "'");
    if (!header.emplace(key, std::string(body.substr(eq + 1))).second) {
      throw SchemaError("duplicate header key '" + key + "'");
    }
  }
  for (auto k : kHeaderKeys) {
    if (!header.contains(k)) throw SchemaError("missing header key '" + std::string(k) + "'");
  }

  KinematicEvent event;
  event.event_id = header["event_id"];
  event.device_id = header["device_id"];
  event.trigger_time = header["trigger_time"];
  const std::string& worn = header["worn"];
  if (worn != "true" && worn != "false") throw SchemaError("header worn must be true or false, got '" + worn + "'");
  event.worn = worn == "true";

  TriggerConfig cfg = window;
  cfg.threshold_g = header_number(header, "threshold_g");
  cfg.lin_rate_hz = header_number(header, "lin_rate_hz");
  cfg.ang_rate_hz = header_number(header, "ang_rate_hz");
  try {
    cfg.validate();
  } catch (const InvalidParameter& e) {
    throw SchemaError(std::string("header values rejected: ") + e.what());
  }
  event.trigger = cfg;

  read_block(in, kLinearColumns, "linear", cfg.lin_samples(), -cfg.pre_ms, cfg.lin_rate_hz, event.lin_acc);
  const auto gap = in.next();
  if (!gap) throw StructuralError("angular block is missing");
  read_block(in, kAngularColumns, "angular", cfg.ang_samples(), -cfg.pre_ms, cfg.ang_rate_hz, event.ang_vel);
  while (auto rest = in.next()) {
    if (!rest->empty()) throw StructuralError("unexpected content after the angular block");
  }

  for (auto& s : event.lin_acc) {
    s.rate_hz = cfg.lin_rate_hz;
    s.unit = Unit::G;
    s.t0_offset_ms = -cfg.pre_ms;
  }
  for (auto& s : event.ang_vel) {
    s.rate_hz = cfg.ang_rate_hz;
    s.unit = Unit::DegPerSec;
    s.t0_offset_ms = -cfg.pre_ms;
  }
  event.validate();
  return event;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed on " + path.string());
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.empty()) throw IoError("empty output path");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out) throw IoError("write failed on " + path.string());
}

void write_event_file(const KinematicEvent& event, const std::filesystem::path& path) {
  write_text_file(path, format_event(event));
}

KinematicEvent parse_event_file(const std::filesystem::path& path, const TriggerConfig& window) {
  return parse_event(read_text_file(path), window);
}

}  // namespace impact::dataset
