#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace impact {

/// Sensor full-scale ranges of the mouthguard IMU.
inline constexpr double kLinearFullScaleG = 400.0;
inline constexpr double kAngularFullScaleDps = 4000.0;

enum class Unit { G, DegPerSec, RadPerSec2 };

std::string_view unit_name(Unit unit);
/// Inverse of unit_name; throws SchemaError on unknown text.
Unit parse_unit(std::string_view text);

/// One uniformly sampled channel. t0_offset_ms is the time of the first sample
/// relative to the trigger instant (negative = before the trigger).
struct ChannelSeries {
  std::vector<double> samples;
  double rate_hz = 1000.0;
  Unit unit = Unit::G;
  double t0_offset_ms = 0.0;

  /// Throws InvalidParameter when rate <= 0, empty or non-finite.
  void validate() const;

  std::size_t size() const noexcept { return samples.size(); }
  double duration_ms() const noexcept { return 1000.0 * static_cast<double>(samples.size()) / rate_hz; }

  bool operator==(const ChannelSeries&) const = default;
};

enum class TriggerMode {
  AnyAxis,    // |x| >= threshold on any single linear axis
  Magnitude,  // |a| >= threshold on the linear vector magnitude
};

/// Capture settings of the device: threshold and pre/post trigger buffer.
struct TriggerConfig {
  double threshold_g = 10.0;
  double pre_ms = 50.0;
  double post_ms = 150.0;
  double lin_rate_hz = 1000.0;
  double ang_rate_hz = 8000.0;
  TriggerMode mode = TriggerMode::AnyAxis;

  void validate() const;

  double window_ms() const noexcept { return pre_ms + post_ms; }
  std::size_t pre_lin_samples() const;
  std::size_t post_lin_samples() const;
  std::size_t lin_samples() const { return pre_lin_samples() + post_lin_samples(); }
  /// Angular samples per linear sample; the rates must divide evenly.
  std::size_t ang_per_lin() const;
  std::size_t ang_samples() const { return lin_samples() * ang_per_lin(); }

  bool operator==(const TriggerConfig&) const = default;
};

/// One triggered recording.
struct KinematicEvent {
  std::string event_id;
  std::string device_id;
  std::string trigger_time;  // ISO-8601, UTC
  std::array<ChannelSeries, 3> lin_acc;  // g
  std::array<ChannelSeries, 3> ang_vel;  // deg/s
  TriggerConfig trigger;
  bool worn = true;

  /// Throws MalformedEvent on any violated invariant (window span, rates,
  /// units, full-scale bounds, finiteness).
  void validate() const;

  bool operator==(const KinematicEvent&) const = default;
};

enum class EventClass { TrueImpact, NonContact };
enum class LabelSource { VideoVerified, Synthetic, Augmented };

std::string_view class_name(EventClass c);
std::string_view source_name(LabelSource s);
/// Inverse of class_name / source_name; throws SchemaError on unknown text.
EventClass parse_class(std::string_view text);
LabelSource parse_source(std::string_view text);

struct Label {
  EventClass value = EventClass::NonContact;
  LabelSource source = LabelSource::Synthetic;
  std::string parent_id;  // required for Augmented

  void validate() const;

  bool operator==(const Label&) const = default;
};

/// Per-class loss multipliers.
struct ClassWeights {
  double w_true = 1.0;
  double w_false = 1.0;

  double of(EventClass c) const noexcept { return c == EventClass::TrueImpact ? w_true : w_false; }

  bool operator==(const ClassWeights&) const = default;
};

}  // namespace impact
