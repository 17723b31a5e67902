#include "impact/eval/report.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <map>

#include "impact/core/error.hpp"
#include "impact/core/random.hpp"
#include "impact/core/text.hpp"
#include "impact/dataset/event_file.hpp"

namespace impact::eval {

namespace {

constexpr std::string_view kReportSchema = "# schema=impact-pipe-report/1";
constexpr const char* kMetricNames[] = {"Sensitivity", "Specificity", "Accuracy", "Precision"};
constexpr const char* kMetricKeys[] = {"sensitivity", "specificity", "accuracy", "precision"};

std::optional<double> metric_at(const Metrics& m, int i) {
  switch (i) {
    case 0: return m.sensitivity;
    case 1: return m.specificity;
    case 2: return m.accuracy;
    default: return m.precision;
  }
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string iso_utc(std::int64_t secs) {
  const auto t = static_cast<std::time_t>(secs);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[64];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

EvalReport evaluate(std::span<const LabeledWindow> test_set, const Classifier& classify, const ReportInfo& info,
                    const dataset::SplitSpec* split) {
  if (test_set.empty()) throw InvalidParameter("empty test set");
  for (const auto& w : test_set) {
    if (w.partition != Partition::Test) throw ContaminationError(w.id + " is not a test-partition window");
    if (w.label.source == LabelSource::Augmented) throw ContaminationError("augmented window " + w.id + " in a test set");
    if (split && (!split->is_test(w.id) || split->is_train(w.id))) {
      throw ContaminationError(w.id + " is not on the test side of the split");
    }
  }
  EvalReport r;
  r.label = info.label;
  r.model_kind = info.model_kind;
  r.model_id = info.model_id;
  r.seed = info.seed;
  r.timestamp = info.timestamp;
  r.version = info.version;
  r.dataset_id = dataset_id(test_set);
  for (const auto& w : test_set) r.matrix.add(w.label.value, classify(w));
  r.metrics = metrics(r.matrix);
  return r;
}

std::string dataset_id(std::span<const LabeledWindow> windows) {
  std::vector<std::string> ids;
  for (const auto& w : windows) ids.push_back(w.id);
  std::sort(ids.begin(), ids.end());
  std::string joined;
  for (const auto& id : ids) joined += id + "\n";
  return "ds-" + hex64(fnv1a64(joined));
}

std::string render_table(std::span<const EvalReport> reports) {
  constexpr std::size_t first = 14;
  std::vector<std::size_t> width;
  for (const auto& r : reports) width.push_back(std::max<std::size_t>(r.label.size(), 9) + 2);

  auto line = [&](const std::string& head, const std::function<std::string(const EvalReport&)>& cell) {
    std::string out = pad(head, first);
    for (std::size_t i = 0; i < reports.size(); ++i) out += pad(cell(reports[i]), width[i]);
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out + "\n";
  };
  std::string out = line("Metric", [](const EvalReport& r) { return r.label; });
  out += line("Dataset size", [](const EvalReport& r) { return std::to_string(r.matrix.total()); });
  for (int m = 0; m < 4; ++m) {
    out += line(kMetricNames[m], [m](const EvalReport& r) {
      const auto pct = rounded_percent(metric_at(r.metrics, m));
      return pct ? std::to_string(*pct) + "%" : std::string("undefined");
    });
  }
  return out;
}

std::string format_report(const EvalReport& r) {
  for (const std::string* v : {&r.label, &r.model_kind, &r.model_id, &r.dataset_id, &r.timestamp, &r.version}) {
    if (v->find('\n') != std::string::npos) throw InvalidParameter("report fields may not contain line breaks");
  }
  std::string out(kReportSchema);
  out += "\n";
  out += render_table(std::span<const EvalReport>(&r, 1));
  out += "\n[details]\n";
  out += "label=" + r.label + "\n";
  out += "model_kind=" + r.model_kind + "\n";
  out += "model_id=" + r.model_id + "\n";
  out += "dataset_id=" + r.dataset_id + "\n";
  out += "seed=" + std::to_string(r.seed) + "\n";
  out += "timestamp=" + r.timestamp + "\n";
  out += "version=" + r.version + "\n";
  out += "tp=" + std::to_string(r.matrix.tp) + "\n";
  out += "fn=" + std::to_string(r.matrix.fn) + "\n";
  out += "fp=" + std::to_string(r.matrix.fp) + "\n";
  out += "tn=" + std::to_string(r.matrix.tn) + "\n";
  for (int m = 0; m < 4; ++m) {
    const auto v = metric_at(r.metrics, m);
    out += std::string(kMetricKeys[m]) + "=" + (v ? format_exact(*v) : std::string("undefined")) + "\n";
  }
  return out;
}

EvalReport parse_report(std::string_view text) {
  LineReader in(text);
  const auto first = in.next();
  if (!first || *first != kReportSchema) throw FormatError("not a report file");
  bool in_details = false;
  std::map<std::string, std::string, std::less<>> kv;
  while (auto line = in.next()) {
    if (!in_details) {
      in_details = *line == "[details]";
      continue;
    }
    if (line->empty()) continue;
    const auto eq = line->find('=');
    if (eq == std::string_view::npos) throw FormatError("footer line without '='");
    kv[std::string(line->substr(0, eq))] = std::string(line->substr(eq + 1));
  }
  if (!in_details) throw FormatError("report has no [details] footer");
  auto get = [&](std::string_view key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw FormatError("report footer lacks '" + std::string(key) + "'");
    return it->second;
  };
  auto count = [&](std::string_view key) {
    const auto v = parse_integer(get(key));
    if (!v || *v < 0) throw FormatError("bad count for '" + std::string(key) + "'");
    return static_cast<std::uint64_t>(*v);
  };

  EvalReport r;
  r.label = get("label");
  r.model_kind = get("model_kind");
  r.model_id = get("model_id");
  r.dataset_id = get("dataset_id");
  r.seed = count("seed");
  r.timestamp = get("timestamp");
  r.version = get("version");
  r.matrix = {count("tp"), count("fn"), count("fp"), count("tn")};
  r.metrics = metrics(r.matrix);
  for (int m = 0; m < 4; ++m) {
    const std::string& stored = get(kMetricKeys[m]);
    const auto expected = metric_at(r.metrics, m);
    const bool ok = expected ? stored == format_exact(*expected) : stored == "undefined";
    if (!ok) throw FormatError(std::string(kMetricKeys[m]) + " " + stored + " disagrees with the confusion matrix");
  }
  return r;
}

void write_report_file(const EvalReport& report, const std::filesystem::path& path) {
  dataset::write_text_file(path, format_report(report));
}

EvalReport read_report_file(const std::filesystem::path& path) { return parse_report(dataset::read_text_file(path)); }

std::string resolve_timestamp(const std::optional<std::string>& explicit_value) {
  if (explicit_value) return *explicit_value;
  if (const char* sde = std::getenv("SOURCE_DATE_EPOCH"); sde && *sde) {
    const auto secs = parse_integer(sde);
    if (!secs) throw InvalidParameter("SOURCE_DATE_EPOCH must be an integer number of seconds");
    return iso_utc(*secs);
  }
  const auto now = std::chrono::system_clock::now();
  return iso_utc(std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count());
}

}  // namespace impact::eval
