#include "impact/sim/device.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <numbers>

#include "impact/core/error.hpp"
#include "impact/core/random.hpp"

namespace impact::sim {

namespace {

using Vec3 = std::array<double, 3>;

constexpr std::int64_t kSimulatedEpochMs = 1598918400000;  // 2020-09-01T00:00:00Z
constexpr double kQuietPaddingMs = 100.0;
constexpr int kMaxRetries = 16;

Vec3 random_unit(Rng& rng) {
  for (;;) {
    Vec3 v{rng.normal(), rng.normal(), rng.normal()};
    const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    if (n > 1e-6) return {v[0] / n, v[1] / n, v[2] / n};
  }
}

Vec3 perpendicular_unit(const Vec3& u, Rng& rng) {
  for (;;) {
    const Vec3 v = random_unit(rng);
    Vec3 c{u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
    const double n = std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2]);
    if (n > 1e-3) return {c[0] / n, c[1] / n, c[2] / n};
  }
}

double haversine(double t, double duration) {
  if (t < 0.0 || t > duration) return 0.0;
  const double s = std::sin(std::numbers::pi * t / duration);
  return s * s;
}

void clip_to_full_scale(SensorStream& s) {
  for (auto& ch : s.lin)
    for (double& v : ch.samples) v = std::clamp(v, -kLinearFullScaleG, kLinearFullScaleG);
  for (auto& ch : s.ang)
    for (double& v : ch.samples) v = std::clamp(v, -kAngularFullScaleDps, kAngularFullScaleDps);
}

// Low-amplitude slow rotation typical of jaw and head motion without contact.
void add_angular_wobble(SensorStream& s, double peak_dps, Rng& rng) {
  const Vec3 axis = random_unit(rng);
  const double duration = rng.uniform(60.0, 150.0);
  const double onset = kPulseOnsetMs - rng.uniform(0.0, 20.0);
  const double rate = s.ang[0].rate_hz;
  for (std::size_t j = 0; j < s.ang[0].size(); ++j) {
    const double w = peak_dps * haversine(1000.0 * static_cast<double>(j) / rate - onset, duration);
    if (w == 0.0) continue;
    for (int a = 0; a < 3; ++a) s.ang[a].samples[j] += w * axis[a];
  }
}

double lin_time_ms(const SensorStream& s, std::size_t i) {
  return 1000.0 * static_cast<double>(i) / s.lin[0].rate_hz;
}

}  // namespace

void SensorStream::validate() const {
  const std::size_t n = lin[0].size();
  if (n == 0) throw InvalidParameter("empty sensor stream");
  for (const auto& ch : lin) {
    ch.validate();
    if (ch.size() != n || ch.rate_hz != lin[0].rate_hz) throw InvalidParameter("linear channels disagree");
  }
  for (const auto& ch : ang) {
    ch.validate();
    if (ch.size() != ang[0].size() || ch.rate_hz != ang[0].rate_hz) {
      throw InvalidParameter("angular channels disagree");
    }
  }
  const double lin_span = lin[0].duration_ms();
  if (std::abs(ang[0].duration_ms() - lin_span) > 1e-6) throw InvalidParameter("streams cover different spans");
  if (worn.size() != n) throw InvalidParameter("worn flag series length mismatch");
}

SensorStream quiet_stream(double duration_ms, double noise_rms_g, std::uint64_t seed,
                          const TriggerConfig& cfg) {
  cfg.validate();
  Rng rng(seed);
  SensorStream s;
  const auto n_lin = static_cast<std::size_t>(std::llround(duration_ms * cfg.lin_rate_hz / 1000.0));
  const std::size_t n_ang = n_lin * cfg.ang_per_lin();
  for (int a = 0; a < 3; ++a) {
    s.lin[a] = ChannelSeries{std::vector<double>(n_lin), cfg.lin_rate_hz, Unit::G, 0.0};
    s.ang[a] = ChannelSeries{std::vector<double>(n_ang), cfg.ang_rate_hz, Unit::DegPerSec, 0.0};
  }
  for (int a = 0; a < 3; ++a)
    for (double& v : s.lin[a].samples) v = rng.normal(0.0, noise_rms_g);
  for (int a = 0; a < 3; ++a)
    for (double& v : s.ang[a].samples) v = rng.normal(0.0, kAngNoiseDpsPerG * noise_rms_g);
  s.worn.assign(n_lin, true);
  return s;
}

std::vector<KinematicEvent> run_trigger(const SensorStream& stream, const TriggerConfig& cfg) {
  if (stream.lin[0].samples.empty()) throw InvalidParameter("empty sensor stream");
  stream.validate();
  cfg.validate();
  if (std::abs(stream.lin[0].rate_hz - cfg.lin_rate_hz) > 1e-9 ||
      std::abs(stream.ang[0].rate_hz - cfg.ang_rate_hz) > 1e-9) {
    throw InvalidParameter("stream rates differ from trigger configuration");
  }
  const std::size_t n = stream.lin_samples();
  const std::size_t pre = cfg.pre_lin_samples();
  const std::size_t post = cfg.post_lin_samples();
  const std::size_t ratio = cfg.ang_per_lin();
  if (n < pre + post) throw InvalidParameter("stream shorter than one capture window");

  auto crosses = [&](std::size_t i) {
    const double x = stream.lin[0].samples[i];
    const double y = stream.lin[1].samples[i];
    const double z = stream.lin[2].samples[i];
    if (cfg.mode == TriggerMode::Magnitude) return std::sqrt(x * x + y * y + z * z) >= cfg.threshold_g;
    return std::abs(x) >= cfg.threshold_g || std::abs(y) >= cfg.threshold_g || std::abs(z) >= cfg.threshold_g;
  };

  std::vector<KinematicEvent> events;
  std::size_t i = pre;  // earlier crossings lack a full pre-trigger buffer
  while (i + post <= n) {
    if (!stream.worn[i] || !crosses(i)) {
      ++i;
      continue;
    }
    KinematicEvent ev;
    const std::int64_t trigger_ms =
        stream.start_epoch_ms + static_cast<std::int64_t>(std::llround(lin_time_ms(stream, i)));
    ev.device_id = stream.device_id;
    ev.event_id = stream.device_id + "-" + std::to_string(trigger_ms);
    ev.trigger_time = format_iso8601_ms(trigger_ms);
    ev.trigger = cfg;
    ev.worn = true;
    for (int a = 0; a < 3; ++a) {
      const auto& lin = stream.lin[a].samples;
      const auto& ang = stream.ang[a].samples;
      ev.lin_acc[a] = ChannelSeries{{lin.begin() + static_cast<std::ptrdiff_t>(i - pre),
                                     lin.begin() + static_cast<std::ptrdiff_t>(i + post)},
                                    cfg.lin_rate_hz, Unit::G, -cfg.pre_ms};
      ev.ang_vel[a] = ChannelSeries{{ang.begin() + static_cast<std::ptrdiff_t>((i - pre) * ratio),
                                     ang.begin() + static_cast<std::ptrdiff_t>((i + post) * ratio)},
                                    cfg.ang_rate_hz, Unit::DegPerSec, -cfg.pre_ms};
    }
    events.push_back(std::move(ev));
    i += post;  // refractory: the rest of the capture window
  }
  return events;
}

void SyntheticSpec::validate() const {
  if (!(peak_g > 0.0)) throw InvalidParameter("peak_g must be > 0");
  if (duration_ms && !(*duration_ms > 0.0)) throw InvalidParameter("duration_ms must be > 0");
  if (!(noise_rms_g >= 0.0)) throw InvalidParameter("noise_rms_g must be >= 0");
  if (!(ang_peak_dps >= 0.0)) throw InvalidParameter("ang_peak_dps must be >= 0");
}

LabeledSegment gen_impact(const SyntheticSpec& spec, const TriggerConfig& cfg) {
  spec.validate();
  if (spec.kind != SyntheticKind::Impact) throw InvalidParameter("gen_impact needs kind = Impact");
  Rng rng(spec.rng_seed);
  const double duration = spec.duration_ms.value_or(rng.uniform(6.0, 15.0));
  const Vec3 dir = random_unit(rng);
  const Vec3 axis = perpendicular_unit(dir, rng);
  const double ang_duration = 2.0 * duration;

  SensorStream s = quiet_stream(kSegmentMs, spec.noise_rms_g, derive_seed(spec.rng_seed, 1), cfg);
  for (std::size_t i = 0; i < s.lin_samples(); ++i) {
    const double a = spec.peak_g * haversine(lin_time_ms(s, i) - kPulseOnsetMs, duration);
    if (a == 0.0) continue;
    for (int k = 0; k < 3; ++k) s.lin[k].samples[i] += a * dir[k];
  }
  const double ang_rate = s.ang[0].rate_hz;
  for (std::size_t j = 0; j < s.ang[0].size(); ++j) {
    const double t = 1000.0 * static_cast<double>(j) / ang_rate - kPulseOnsetMs;
    const double w = spec.ang_peak_dps * haversine(t, ang_duration);
    if (w == 0.0) continue;
    for (int k = 0; k < 3; ++k) s.ang[k].samples[j] += w * axis[k];
  }
  clip_to_full_scale(s);
  return {std::move(s), Label{EventClass::TrueImpact, LabelSource::Synthetic, {}}};
}

LabeledSegment gen_artifact(const SyntheticSpec& spec, const TriggerConfig& cfg) {
  spec.validate();
  if (spec.kind != SyntheticKind::Artifact) throw InvalidParameter("gen_artifact needs kind = Artifact");
  Rng rng(spec.rng_seed);
  const auto family = spec.family.value_or(static_cast<ArtifactFamily>(rng.below(3)));

  SensorStream s = quiet_stream(kSegmentMs, spec.noise_rms_g, derive_seed(spec.rng_seed, 1), cfg);
  const std::size_t n = s.lin_samples();

  switch (family) {
    case ArtifactFamily::OscillatoryBurst: {
      const double carrier_hz = rng.uniform(200.0, 450.0);
      const double length = spec.duration_ms.value_or(rng.uniform(20.0, 60.0));
      const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const Vec3 dir = random_unit(rng);
      for (std::size_t i = 0; i < n; ++i) {
        const double t = lin_time_ms(s, i) - kPulseOnsetMs;
        const double env = haversine(t, length);
        if (env == 0.0) continue;
        const double a = spec.peak_g * env * std::sin(2.0 * std::numbers::pi * carrier_hz * t / 1000.0 + phase);
        for (int k = 0; k < 3; ++k) s.lin[k].samples[i] += a * dir[k];
      }
      break;
    }
    case ArtifactFamily::SpikeTrain: {
      const int count = 1 + static_cast<int>(rng.below(4));
      double t = kPulseOnsetMs;
      for (int c = 0; c < count; ++c) {
        const auto axis = static_cast<int>(rng.below(3));
        const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        const double amp = c == 0 ? spec.peak_g : spec.peak_g * rng.uniform(0.5, 1.0);
        const auto i = static_cast<std::size_t>(std::llround(t * s.lin[0].rate_hz / 1000.0));
        if (i < n) s.lin[axis].samples[i] += sign * amp;
        t += std::round(rng.uniform(5.0, 30.0));
      }
      break;
    }
    case ArtifactFamily::BiteRamp: {
      const double rise = spec.duration_ms.value_or(rng.uniform(30.0, 80.0));
      const double hold = rng.uniform(10.0, 40.0);
      const double fall = rng.uniform(30.0, 80.0);
      const double jitter = rng.uniform(0.5, 2.0);
      const Vec3 dir = random_unit(rng);
      for (std::size_t i = 0; i < n; ++i) {
        const double t = lin_time_ms(s, i) - kPulseOnsetMs;
        double level = 0.0;
        if (t >= 0.0 && t < rise) {
          level = t / rise;
        } else if (t >= rise && t < rise + hold) {
          level = 1.0;
        } else if (t >= rise + hold && t < rise + hold + fall) {
          level = 1.0 - (t - rise - hold) / fall;
        }
        if (level == 0.0) continue;
        for (int k = 0; k < 3; ++k) s.lin[k].samples[i] += spec.peak_g * level * dir[k] + rng.normal(0.0, jitter);
      }
      break;
    }
  }
  add_angular_wobble(s, spec.ang_peak_dps, rng);
  clip_to_full_scale(s);
  return {std::move(s), Label{EventClass::NonContact, LabelSource::Synthetic, {}}};
}

std::vector<LabeledEvent> gen_dataset(int n_impact, int n_artifact, std::uint64_t seed, const TriggerConfig& cfg) {
  if (n_impact < 0 || n_artifact < 0) throw InvalidParameter("event counts must be >= 0");
  cfg.validate();
  const double noise = 0.2;
  const int total = n_impact + n_artifact;
  const double quiet_ms = kSegmentMs + 2.0 * kQuietPaddingMs;
  const auto pad = static_cast<std::size_t>(std::llround(kQuietPaddingMs * cfg.lin_rate_hz / 1000.0));
  const std::size_t ratio = cfg.ang_per_lin();

  std::vector<LabeledEvent> out;
  out.reserve(static_cast<std::size_t>(total));
  for (int k = 0; k < total; ++k) {
    const bool impact = k < n_impact;
    const std::uint64_t item_seed = derive_seed(seed, static_cast<std::uint64_t>(k));
    bool done = false;
    for (int attempt = 0; attempt < kMaxRetries && !done; ++attempt) {
      const std::uint64_t s = derive_seed(item_seed, static_cast<std::uint64_t>(attempt));
      Rng rng(s);
      SyntheticSpec spec;
      spec.noise_rms_g = noise;
      spec.rng_seed = derive_seed(s, 99);
      LabeledSegment seg;
      if (impact) {
        spec.kind = SyntheticKind::Impact;
        spec.peak_g = rng.uniform(20.0, 80.0);
        spec.ang_peak_dps = std::min(3800.0, spec.peak_g * rng.uniform(15.0, 35.0));
        seg = gen_impact(spec, cfg);
      } else {
        spec.kind = SyntheticKind::Artifact;
        const auto family = static_cast<ArtifactFamily>(rng.below(3));
        spec.family = family;
        switch (family) {
          case ArtifactFamily::OscillatoryBurst: spec.peak_g = rng.uniform(15.0, 50.0); break;
          case ArtifactFamily::SpikeTrain: spec.peak_g = rng.uniform(15.0, 80.0); break;
          case ArtifactFamily::BiteRamp: spec.peak_g = rng.uniform(11.0, 25.0); break;
        }
        spec.ang_peak_dps = rng.uniform(5.0, 40.0);
        seg = gen_artifact(spec, cfg);
      }

      SensorStream stream = quiet_stream(quiet_ms, noise, derive_seed(s, 7), cfg);
      stream.start_epoch_ms = kSimulatedEpochMs + static_cast<std::int64_t>(k) * 60000;
      for (int a = 0; a < 3; ++a) {
        std::copy(seg.segment.lin[a].samples.begin(), seg.segment.lin[a].samples.end(),
                  stream.lin[a].samples.begin() + static_cast<std::ptrdiff_t>(pad));
        std::copy(seg.segment.ang[a].samples.begin(), seg.segment.ang[a].samples.end(),
                  stream.ang[a].samples.begin() + static_cast<std::ptrdiff_t>(pad * ratio));
      }
      auto events = run_trigger(stream, cfg);
      if (events.empty()) continue;

      char id[96];
      std::snprintf(id, sizeof id, "sim%llu-%05d", static_cast<unsigned long long>(seed % 1000000), k);
      KinematicEvent ev = std::move(events.front());
      ev.event_id = id;
      out.push_back({std::move(ev), seg.label});
      done = true;
    }
    if (!done) {
      throw SolverError("synthetic event " + std::to_string(k) + " failed to trigger after " +
                        std::to_string(kMaxRetries) + " attempts");
    }
  }
  return out;
}

std::string format_iso8601_ms(std::int64_t epoch_ms) {
  std::int64_t secs = epoch_ms / 1000;
  std::int64_t ms = epoch_ms % 1000;
  if (ms < 0) {
    ms += 1000;
    --secs;
  }
  const auto t = static_cast<std::time_t>(secs);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[96];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1,
                tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
  return buf;
}

}  // namespace impact::sim
