#include "impact/core/kinematics.hpp"

#include <cmath>

#include "impact/core/error.hpp"

namespace impact {

namespace {

std::size_t exact_count(double value, const char* what) {
  const double rounded = std::round(value);
  if (rounded < 0.0 || std::abs(value - rounded) > 1e-9 * std::max(1.0, value)) {
    throw InvalidParameter(std::string(what) + " is not a whole number of samples");
  }
  return static_cast<std::size_t>(rounded);
}

}  // namespace

std::string_view unit_name(Unit unit) {
  switch (unit) {
    case Unit::G: return "g";
    case Unit::DegPerSec: return "deg/s";
    case Unit::RadPerSec2: return "rad/s^2";
  }
  return "?";
}

Unit parse_unit(std::string_view text) {
  for (Unit u : {Unit::G, Unit::DegPerSec, Unit::RadPerSec2}) {
    if (unit_name(u) == text) return u;
  }
  throw SchemaError("unknown unit '" + std::string(text) + "'");
}

void ChannelSeries::validate() const {
  if (!(rate_hz > 0.0) || !std::isfinite(rate_hz)) throw InvalidParameter("sampling rate must be > 0");
  if (samples.empty()) throw InvalidParameter("series has no samples");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!std::isfinite(samples[i])) {
      throw InvalidParameter("non-finite sample at index " + std::to_string(i));
    }
  }
}

void TriggerConfig::validate() const {
  if (!(threshold_g > 0.0)) throw InvalidParameter("threshold_g must be > 0");
  if (!(pre_ms > 0.0) || !(post_ms > 0.0)) throw InvalidParameter("pre_ms and post_ms must be > 0");
  if (!(lin_rate_hz > 0.0) || !(ang_rate_hz > 0.0)) throw InvalidParameter("rates must be > 0");
  (void)lin_samples();
  (void)ang_per_lin();
}

std::size_t TriggerConfig::pre_lin_samples() const {
  return exact_count(pre_ms * lin_rate_hz / 1000.0, "pre-trigger span");
}

std::size_t TriggerConfig::post_lin_samples() const {
  return exact_count(post_ms * lin_rate_hz / 1000.0, "post-trigger span");
}

std::size_t TriggerConfig::ang_per_lin() const {
  const std::size_t ratio = exact_count(ang_rate_hz / lin_rate_hz, "angular/linear rate ratio");
  if (ratio == 0) throw InvalidParameter("angular rate must be at least the linear rate");
  return ratio;
}

void KinematicEvent::validate() const {
  try {
    trigger.validate();
  } catch (const InvalidParameter& e) {
    throw MalformedEvent(e.what());
  }
  const std::size_t n_lin = trigger.lin_samples();
  const std::size_t n_ang = trigger.ang_samples();
  const char* axes = "xyz";

  auto check = [&](const ChannelSeries& s, const std::string& name, Unit unit, double rate,
                   std::size_t n, double full_scale) {
    if (s.samples.empty()) throw MalformedEvent("missing channel " + name);
    try {
      s.validate();
    } catch (const InvalidParameter& e) {
      throw MalformedEvent(name + ": " + e.what());
    }
    if (s.unit != unit) throw MalformedEvent(name + ": unexpected unit " + std::string(unit_name(s.unit)));
    if (std::abs(s.rate_hz - rate) > 1e-9 * rate) throw MalformedEvent(name + ": rate mismatch");
    if (s.size() != n) {
      throw MalformedEvent(name + ": expected " + std::to_string(n) + " samples, got " +
                           std::to_string(s.size()));
    }
    if (std::abs(s.t0_offset_ms + trigger.pre_ms) > 1e-9) {
      throw MalformedEvent(name + ": first sample must sit pre_ms before the trigger");
    }
    for (double v : s.samples) {
      if (std::abs(v) > full_scale) throw MalformedEvent(name + ": sample beyond sensor full scale");
    }
  };

  for (int a = 0; a < 3; ++a) {
    check(lin_acc[a], std::string("lin_") + axes[a], Unit::G, trigger.lin_rate_hz, n_lin, kLinearFullScaleG);
    check(ang_vel[a], std::string("ang_") + axes[a], Unit::DegPerSec, trigger.ang_rate_hz, n_ang,
          kAngularFullScaleDps);
  }
}

std::string_view class_name(EventClass c) {
  return c == EventClass::TrueImpact ? "TrueImpact" : "NonContact";
}

std::string_view source_name(LabelSource s) {
  switch (s) {
    case LabelSource::VideoVerified: return "VideoVerified";
    case LabelSource::Synthetic: return "Synthetic";
    case LabelSource::Augmented: return "Augmented";
  }
  return "?";
}

EventClass parse_class(std::string_view text) {
  if (text == "TrueImpact") return EventClass::TrueImpact;
  if (text == "NonContact") return EventClass::NonContact;
  throw SchemaError("unknown label '" + std::string(text) + "'");
}

LabelSource parse_source(std::string_view text) {
  if (text == "VideoVerified") return LabelSource::VideoVerified;
  if (text == "Synthetic") return LabelSource::Synthetic;
  if (text == "Augmented") return LabelSource::Augmented;
  throw SchemaError("unknown label source '" + std::string(text) + "'");
}

void Label::validate() const {
  if (source == LabelSource::Augmented && parent_id.empty()) {
    throw InvalidState("augmented label without a parent event id");
  }
}

}  // namespace impact
