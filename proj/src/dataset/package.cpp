#include "impact/dataset/package.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <system_error>

#include "impact/core/error.hpp"
#include "impact/core/text.hpp"
#include "impact/dataset/event_file.hpp"

namespace impact::dataset {

namespace {

void check_cell(std::string_view value, std::string_view what) {
  if (value.find_first_of(",\n\r") != std::string_view::npos) {
    throw InvalidParameter(std::string(what) + " '" + std::string(value) + "' contains a comma or line break");
  }
}

std::string_view field(const std::vector<std::string_view>& f, std::size_t i) { return f[i]; }

}  // namespace

std::string format_manifest(Manifest manifest) {
  std::stable_sort(manifest.begin(), manifest.end(),
                   [](const ManifestRow& a, const ManifestRow& b) { return a.event_id < b.event_id; });
  std::string out(kManifestHeader);
  out += '\n';
  for (const auto& row : manifest) {
    check_identifier(row.event_id, "event_id");
    check_cell(row.model_id, "model_id");
    check_cell(row.version, "version");
    out += row.event_id;
    out += ',';
    out += class_name(row.label.value);
    out += ',';
    out += source_name(row.label.source);
    out += ',';
    if (row.predicted) out += class_name(*row.predicted);
    out += ',';
    if (row.score) append_exact(out, *row.score);
    out += ',';
    out += row.model_id;
    out += ',';
    out += row.version;
    out += '\n';
  }
  return out;
}

Manifest parse_manifest(std::string_view text) {
  LineReader in(text);
  const auto header = in.next();
  if (!header) throw SchemaError("empty manifest");
  const auto columns = split(*header, ',');
  const auto expected = split(kManifestHeader, ',');
  for (const auto& name : expected) {
    if (std::find(columns.begin(), columns.end(), name) == columns.end()) {
      throw SchemaError("manifest is missing column '" + std::string(name) + "'");
    }
  }
  if (columns != expected) throw SchemaError("manifest columns out of order");

  Manifest manifest;
  std::size_t row = 0;
  while (auto line = in.next()) {
    if (line->empty()) continue;
    ++row;
    const auto f = split(*line, ',');
    if (f.size() != expected.size()) {
      throw StructuralError("manifest row " + std::to_string(row) + " has " + std::to_string(f.size()) + " fields");
    }
    ManifestRow r;
    r.event_id = std::string(field(f, 0));
    try {
      r.label.value = parse_class(field(f, 1));
      r.label.source = parse_source(field(f, 2));
      if (!field(f, 3).empty()) r.predicted = parse_class(field(f, 3));
    } catch (const SchemaError& e) {
      throw DataError(e.what(), row);
    }
    if (!field(f, 4).empty()) {
      const auto v = parse_number(field(f, 4));
      if (!v || !std::isfinite(*v)) throw DataError("bad score '" + std::string(field(f, 4)) + "'", row);
      r.score = *v;
    }
    r.model_id = std::string(field(f, 5));
    r.version = std::string(field(f, 6));
    manifest.push_back(std::move(r));
  }
  return manifest;
}

void write_manifest_file(const Manifest& manifest, const std::filesystem::path& path) {
  write_text_file(path, format_manifest(manifest));
}

Manifest read_manifest_file(const std::filesystem::path& path) { return parse_manifest(read_text_file(path)); }

std::string format_export_event(const KinematicEvent& event) {
  event.validate();
  check_identifier(event.event_id, "event_id");
  const TriggerConfig& cfg = event.trigger;
  std::string out = "# schema=impact-pipe-export/1\n# event_id=" + event.event_id;
  out += "\n# threshold_g=";
  append_number(out, cfg.threshold_g);
  out += "\n# lin_rate_hz=";
  append_number(out, cfg.lin_rate_hz);
  out += "\n# ang_rate_hz=";
  append_number(out, cfg.ang_rate_hz);
  out += event.worn ? "\n# worn=true\n" : "\n# worn=false\n";
  out += format_sample_blocks(event, kExportLinearColumns, kExportAngularColumns);
  return out;
}

Manifest export_package(std::span<const KinematicEvent> events, std::span<const Label> labels,
                        std::span<const std::optional<PredictionRecord>> predictions, const ExportInfo& info,
                        const std::filesystem::path& out_dir) {
  if (labels.size() != events.size()) throw InvalidParameter("labels must run parallel to events");
  if (!predictions.empty() && predictions.size() != events.size()) {
    throw InvalidParameter("predictions must be empty or run parallel to events");
  }
  std::set<std::string> seen;
  for (const auto& e : events) {
    check_identifier(e.event_id, "event_id");
    if (!seen.insert(e.event_id).second) throw InvalidParameter("duplicate event id " + e.event_id);
  }
  // Render everything before touching the disk so a bad event leaves no
  // partial package behind.
  std::vector<std::string> files;
  files.reserve(events.size());
  for (const auto& e : events) files.push_back(format_export_event(e));

  Manifest manifest;
  for (std::size_t i = 0; i < events.size(); ++i) {
    labels[i].validate();
    ManifestRow row{events[i].event_id, labels[i], std::nullopt, std::nullopt, info.model_id, info.version};
    if (!predictions.empty() && predictions[i]) {
      row.predicted = predictions[i]->label;
      row.score = predictions[i]->score;
    }
    manifest.push_back(std::move(row));
  }
  const std::string manifest_text = format_manifest(manifest);

  std::error_code ec;
  std::filesystem::create_directories(out_dir / "events", ec);
  if (ec) throw IoError("cannot create " + (out_dir / "events").string() + ": " + ec.message());
  for (std::size_t i = 0; i < events.size(); ++i) {
    write_text_file(out_dir / "events" / (events[i].event_id + ".csv"), files[i]);
  }
  write_text_file(out_dir / "manifest.csv", manifest_text);
  std::sort(manifest.begin(), manifest.end(),
            [](const ManifestRow& a, const ManifestRow& b) { return a.event_id < b.event_id; });
  return manifest;
}

std::string format_windows(std::span<const LabeledWindow> windows) {
  std::string out = "# schema=impact-pipe-windows/1\n# count=" + std::to_string(windows.size()) + "\n";
  for (const auto& w : windows) {
    check_identifier(w.id, "window id");
    const ProcessedWindow& pw = w.window;
    out += "window id=" + w.id;
    out += " label=";
    out += class_name(w.label.value);
    out += " source=";
    out += source_name(w.label.source);
    out += " parent=" + (w.label.parent_id.empty() ? std::string("-") : w.label.parent_id);
    out += " partition=";
    out += w.partition == Partition::Test ? "test" : w.partition == Partition::Train ? "train" : "unassigned";
    out += " cols=" + std::to_string(pw.cols()) + " trigger_col=" + std::to_string(pw.trigger_col());
    out += " normalized=";
    out += pw.normalized() ? "true" : "false";
    out += " units=";
    for (std::size_t r = 0; r < pw.rows(); ++r) {
      if (r) out += ',';
      out += unit_name(pw.channel_units()[r]);
    }
    out += " scale=";
    for (std::size_t r = 0; r < pw.rows(); ++r) {
      if (r) out += ',';
      append_exact(out, pw.row_scale()[r]);
    }
    out += '\n';
    for (std::size_t r = 0; r < pw.rows(); ++r) {
      const auto row = pw.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (c) out += ',';
        append_exact(out, row[c]);
      }
      out += '\n';
    }
  }
  return out;
}

std::vector<LabeledWindow> parse_windows(std::string_view text) {
  LineReader in(text);
  auto line = in.next();
  if (!line || *line != "# schema=impact-pipe-windows/1") throw SchemaError("not a windows file");
  line = in.next();
  if (!line || !line->starts_with("# count=")) throw SchemaError("windows file lacks '# count='");
  const auto count = parse_integer(line->substr(8));
  if (!count || *count < 0) throw SchemaError("bad window count");

  std::vector<LabeledWindow> out;
  while (auto head = in.next()) {
    if (head->empty()) continue;
    if (!head->starts_with("window ")) throw StructuralError("expected a 'window' line at line " + std::to_string(in.line_number()));
    std::map<std::string_view, std::string_view> kv;
    for (auto part : split(head->substr(7), ' ')) {
      const auto eq = part.find('=');
      if (eq == std::string_view::npos) throw SchemaError("window attribute without '='");
      kv[part.substr(0, eq)] = part.substr(eq + 1);
    }
    for (auto key : {"id", "label", "source", "parent", "partition", "cols", "trigger_col", "normalized", "units", "scale"}) {
      if (!kv.contains(key)) throw SchemaError("window line lacks '" + std::string(key) + "'");
    }
    const auto cols = parse_integer(kv["cols"]);
    const auto trig = parse_integer(kv["trigger_col"]);
    if (!cols || *cols <= 0 || !trig || *trig < 0) throw SchemaError("bad window geometry");
    const auto unit_text = split(kv["units"], ',');
    const auto scale_text = split(kv["scale"], ',');
    if (unit_text.size() != kWindowRows || scale_text.size() != kWindowRows) throw SchemaError("need 6 units and scales");
    std::array<Unit, kWindowRows> units{};
    std::array<double, kWindowRows> scale{};
    for (std::size_t r = 0; r < kWindowRows; ++r) {
      units[r] = parse_unit(unit_text[r]);
      const auto s = parse_number(scale_text[r]);
      if (!s || !(*s > 0.0)) throw SchemaError("bad row scale");
      scale[r] = *s;
    }

    LabeledWindow w;
    w.id = std::string(kv["id"]);
    w.label.value = parse_class(kv["label"]);
    w.label.source = parse_source(kv["source"]);
    if (kv["parent"] != "-") w.label.parent_id = std::string(kv["parent"]);
    const auto part = kv["partition"];
    w.partition = part == "test" ? Partition::Test : part == "train" ? Partition::Train : Partition::Unassigned;
    if (part != "test" && part != "train" && part != "unassigned") throw SchemaError("bad partition");
    w.window = ProcessedWindow(static_cast<std::size_t>(*cols), static_cast<std::size_t>(*trig), units);
    for (std::size_t r = 0; r < kWindowRows; ++r) {
      const auto row = in.next();
      if (!row) throw StructuralError("window " + w.id + " is truncated");
      const auto values = split(*row, ',');
      if (values.size() != w.window.cols()) throw StructuralError("window " + w.id + " row has the wrong length");
      for (std::size_t c = 0; c < values.size(); ++c) {
        const auto v = parse_number(values[c]);
        if (!v || !std::isfinite(*v)) throw DataError("bad value in window " + w.id, in.line_number());
        w.window.at(r, c) = *v;
      }
    }
    if (kv["normalized"] == "true") w.window.mark_normalized(scale);
    w.label.validate();
    out.push_back(std::move(w));
  }
  if (out.size() != static_cast<std::size_t>(*count)) {
    throw StructuralError("windows file declares " + std::to_string(*count) + " windows, holds " + std::to_string(out.size()));
  }
  return out;
}

void write_windows_file(std::span<const LabeledWindow> windows, const std::filesystem::path& path) {
  write_text_file(path, format_windows(windows));
}

std::vector<LabeledWindow> read_windows_file(const std::filesystem::path& path) {
  return parse_windows(read_text_file(path));
}

}  // namespace impact::dataset
