#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>

#include "impact/core/window.hpp"
#include "impact/dataset/split.hpp"
#include "impact/eval/metrics.hpp"

namespace impact::eval {

struct EvalReport {
  std::string label;       // column heading in the table
  std::string model_kind;  // mignet, svm or rule
  std::string model_id;
  std::string dataset_id;
  std::uint64_t seed = 0;
  std::string timestamp;
  std::string version;
  ConfusionMatrix matrix;
  Metrics metrics;

  bool operator==(const EvalReport&) const = default;
};

/// Everything in a report except what evaluation measures.
struct ReportInfo {
  std::string label;
  std::string model_kind;
  std::string model_id;
  std::uint64_t seed = 0;
  std::string timestamp;
  std::string version;
};

using Classifier = std::function<EventClass(const LabeledWindow&)>;

/// Runs the classifier on every window. Windows must be original (not
/// augmented) test-partition windows and, when a split is given, listed on
/// its test side; anything else raises ContaminationError.
EvalReport evaluate(std::span<const LabeledWindow> test_set, const Classifier& classify, const ReportInfo& info,
                    const dataset::SplitSpec* split = nullptr);

/// "ds-" followed by the FNV-1a hash of the sorted ids.
std::string dataset_id(std::span<const LabeledWindow> windows);

/// Metric rows laid out as a comparison table: one column per
/// report, percentages to whole numbers, "undefined" for empty metrics.
std::string render_table(std::span<const EvalReport> reports);

/// Schema line, the one-column table, then a "[details]" key=value footer
/// with the matrix and metrics at full precision.
std::string format_report(const EvalReport& report);
/// Reads the footer back. Throws FormatError when keys are missing or the
/// stored metrics disagree with the matrix.
EvalReport parse_report(std::string_view text);
void write_report_file(const EvalReport& report, const std::filesystem::path& path);
EvalReport read_report_file(const std::filesystem::path& path);

/// --timestamp if given, else SOURCE_DATE_EPOCH (seconds), else the current
/// time; rendered as ISO-8601 UTC.
std::string resolve_timestamp(const std::optional<std::string>& explicit_value);

}  // namespace impact::eval
