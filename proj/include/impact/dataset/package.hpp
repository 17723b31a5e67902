#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "impact/core/kinematics.hpp"
#include "impact/core/window.hpp"

namespace impact::dataset {

/// One row of manifest.csv.
struct ManifestRow {
  std::string event_id;
  Label label;
  std::optional<EventClass> predicted;
  std::optional<double> score;
  std::string model_id;
  std::string version;

  bool operator==(const ManifestRow&) const = default;
};

using Manifest = std::vector<ManifestRow>;

inline constexpr std::string_view kManifestHeader = "event_id,label,source,predicted,score,model_id,version";

/// Column-titled table, rows sorted by event_id. Empty cells stand for
/// absent predictions. Scores use 17 significant digits.
std::string format_manifest(Manifest manifest);
Manifest parse_manifest(std::string_view text);
void write_manifest_file(const Manifest& manifest, const std::filesystem::path& path);
Manifest read_manifest_file(const std::filesystem::path& path);

struct PredictionRecord {
  EventClass label = EventClass::NonContact;
  double score = 0.0;
};

struct ExportInfo {
  std::string model_id;  // empty when no model was applied
  std::string version;
};

/// Export-side column titles, named after common data elements.
inline constexpr std::string_view kExportLinearColumns[] = {
    "ImpactTimeOffsetMs", "LinearAccelerationXG", "LinearAccelerationYG", "LinearAccelerationZG"};
inline constexpr std::string_view kExportAngularColumns[] = {
    "ImpactTimeOffsetMs", "AngularVelocityXDegPerSec", "AngularVelocityYDegPerSec", "AngularVelocityZDegPerSec"};

/// Export file for one event. Same numeric layout as the event file but with
/// the export column names; the device id and wall-clock trigger time are
/// not written.
std::string format_export_event(const KinematicEvent& event);

/// Writes <out_dir>/events/<event_id>.csv for every event and
/// <out_dir>/manifest.csv. labels (and predictions, when given) run parallel
/// to events. Throws InvalidParameter on duplicate ids or mismatched lengths,
/// IoError when the directory cannot be written.
Manifest export_package(std::span<const KinematicEvent> events, std::span<const Label> labels,
                        std::span<const std::optional<PredictionRecord>> predictions, const ExportInfo& info,
                        const std::filesystem::path& out_dir);

/// Windows file: header comment lines, then per window one "window ..." line
/// followed by one line per row of 17-digit values.
std::string format_windows(std::span<const LabeledWindow> windows);
std::vector<LabeledWindow> parse_windows(std::string_view text);
void write_windows_file(std::span<const LabeledWindow> windows, const std::filesystem::path& path);
std::vector<LabeledWindow> read_windows_file(const std::filesystem::path& path);

}  // namespace impact::dataset
