#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "impact/core/kinematics.hpp"
#include "impact/core/window.hpp"

namespace impact::sim {

/// Continuous sensor output of one device. lin/ang share the same time span;
/// worn is sampled on the linear clock.
struct SensorStream {
  std::string device_id = "MG-SIM-01";
  std::int64_t start_epoch_ms = 0;  // wall clock of the first sample
  std::array<ChannelSeries, 3> lin;
  std::array<ChannelSeries, 3> ang;
  std::vector<bool> worn;

  std::size_t lin_samples() const { return lin[0].size(); }
  void validate() const;
};

/// Quiet stream of the given length: Gaussian sensor noise only, worn throughout.
SensorStream quiet_stream(double duration_ms, double noise_rms_g, std::uint64_t seed,
                          const TriggerConfig& cfg = {});

/// Emits one event per threshold crossing (worn gate open), capturing
/// [t - pre_ms, t + post_ms). Crossings inside an active capture are ignored;
/// crossings too close to either stream edge for a full window are skipped.
/// Throws InvalidParameter on an empty stream or one shorter than the window.
std::vector<KinematicEvent> run_trigger(const SensorStream& stream, const TriggerConfig& cfg = {});

enum class SyntheticKind { Impact, Artifact };

/// Non-contact artifact families.
enum class ArtifactFamily {
  OscillatoryBurst,  // 200-450 Hz carrier under a Hann envelope
  SpikeTrain,        // isolated single-sample spikes
  BiteRamp,          // slow ramp up/hold/down with jitter
};

struct SyntheticSpec {
  SyntheticKind kind = SyntheticKind::Impact;
  double peak_g = 30.0;
  std::optional<double> duration_ms;  // drawn from the family range when empty
  double ang_peak_dps = 900.0;
  double noise_rms_g = 0.2;
  std::uint64_t rng_seed = 0;
  std::optional<ArtifactFamily> family;  // artifacts only; drawn when empty

  void validate() const;
};

/// Length of a generated segment and the onset of its pulse within it.
inline constexpr double kSegmentMs = 300.0;
inline constexpr double kPulseOnsetMs = 100.0;
/// Angular sensor noise per g of linear noise.
inline constexpr double kAngNoiseDpsPerG = 10.0;

struct LabeledSegment {
  SensorStream segment;
  Label label;
};

/// Haversine linear pulse along a random direction with a coupled angular
/// velocity pulse about a perpendicular axis. Deterministic in rng_seed.
LabeledSegment gen_impact(const SyntheticSpec& spec, const TriggerConfig& cfg = {});

/// One of the artifact families; deterministic in rng_seed.
LabeledSegment gen_artifact(const SyntheticSpec& spec, const TriggerConfig& cfg = {});

struct LabeledEvent {
  KinematicEvent event;
  Label label;
};

/// Draws n_impact impacts and n_artifact artifacts, embeds each in a quiet
/// stream, runs the trigger and returns exactly the requested counts (impacts
/// first). A segment that fails to trigger is redrawn with a derived seed.
std::vector<LabeledEvent> gen_dataset(int n_impact, int n_artifact, std::uint64_t seed,
                                      const TriggerConfig& cfg = {});

/// Wall-clock milliseconds since the Unix epoch as "YYYY-MM-DDThh:mm:ss.sssZ".
std::string format_iso8601_ms(std::int64_t epoch_ms);

}  // namespace impact::sim
