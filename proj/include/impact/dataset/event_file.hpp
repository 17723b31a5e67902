#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "impact/core/kinematics.hpp"

namespace impact::dataset {

inline constexpr std::string_view kEventSchema = "impact-pipe/1";

/// Column titles of the two sample blocks, in file order.
inline constexpr std::string_view kLinearColumns[] = {"t_ms", "lin_x_g", "lin_y_g", "lin_z_g"};
inline constexpr std::string_view kAngularColumns[] = {"t_ms", "ang_x_dps", "ang_y_dps", "ang_z_dps"};

/// Renders an event file:
///
///   # schema=impact-pipe/1
///   # event_id=...
///   # device_id=...
///   # trigger_time=...
///   # threshold_g=...
///   # lin_rate_hz=1000
///   # ang_rate_hz=8000
///   # worn=true|false
///   t_ms,lin_x_g,lin_y_g,lin_z_g
///   (one row per linear sample)
///   <blank line>
///   t_ms,ang_x_dps,ang_y_dps,ang_z_dps
///   (one row per angular sample)
///
/// Numbers use 9 significant digits; lines end in '\n'. t_ms is relative to
/// the trigger instant.
std::string format_event(const KinematicEvent& event);

/// Parses format_event() output. pre_ms/post_ms come from `window` (the file
/// does not carry them); threshold and rates come from the header.
/// Errors: SchemaError (missing header key or column), DataError (bad or
/// non-finite number; row() is 1-based within its block), StructuralError
/// (row or field counts), MalformedEvent (values beyond sensor full scale).
KinematicEvent parse_event(std::string_view text, const TriggerConfig& window = {});

/// The two sample blocks of an event file under the given column titles.
std::string format_sample_blocks(const KinematicEvent& event, std::span<const std::string_view> lin_columns,
                                 std::span<const std::string_view> ang_columns);

/// Throws IoError when the file cannot be written.
void write_event_file(const KinematicEvent& event, const std::filesystem::path& path);
KinematicEvent parse_event_file(const std::filesystem::path& path, const TriggerConfig& window = {});

/// Whole-file helpers shared by the on-disk formats.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// Identifiers end up in file names and comma-separated tables.
/// Accepts [A-Za-z0-9._+-], non-empty; throws InvalidParameter otherwise.
void check_identifier(std::string_view id, std::string_view what);

}  // namespace impact::dataset
