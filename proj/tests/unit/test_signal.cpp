#include <doctest.h>

#include <cmath>
#include <numbers>

#include "impact/core/error.hpp"
#include "impact/core/signal.hpp"
#include "impact/core/window.hpp"
#include "testkit.hpp"

using namespace impact;

namespace {

ChannelSeries sine(double freq_hz, double rate_hz, std::size_t n, double amp = 1.0, Unit unit = Unit::DegPerSec) {
  ChannelSeries s{std::vector<double>(n), rate_hz, unit, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    s.samples[i] = amp * std::sin(2.0 * std::numbers::pi * freq_hz * static_cast<double>(i) / rate_hz);
  }
  return s;
}

// RMS over the middle half, away from edge transients.
double mid_rms(const std::vector<double>& v) {
  const std::size_t a = v.size() / 4, b = 3 * v.size() / 4;
  double acc = 0.0;
  for (std::size_t i = a; i < b; ++i) acc += v[i] * v[i];
  return std::sqrt(acc / static_cast<double>(b - a));
}

// Forward-backward bilinear Butterworth-4: |H|^2 = 1 / (1 + (tan(pi f/fs) / tan(pi fc/fs))^8).
double zero_phase_gain(double f, double fc, double fs) {
  const double r = std::tan(std::numbers::pi * f / fs) / std::tan(std::numbers::pi * fc / fs);
  return 1.0 / (1.0 + std::pow(r, 8.0));
}

}  // namespace

TEST_CASE("zero-phase low-pass matches the squared Butterworth response") {
  const double rate = 8000.0, fc = 300.0;
  for (double f : {50.0, 150.0, 300.0, 450.0, 600.0, 900.0}) {
    CAPTURE(f);
    const auto x = sine(f, rate, 16000);
    const auto y = lowpass_filter(x, fc);
    const double expected = zero_phase_gain(f, fc, rate) * mid_rms(x.samples);
    CHECK(mid_rms(y.samples) == doctest::Approx(expected).epsilon(0.01).scale(1e-3));
  }
}

TEST_CASE("zero-phase filter introduces no delay") {
  const auto x = sine(40.0, 8000.0, 8000);
  const auto y = lowpass_filter(x, 300.0);
  double dot = 0.0, nx = 0.0, ny = 0.0;
  for (std::size_t i = 2000; i < 6000; ++i) {
    dot += x.samples[i] * y.samples[i];
    nx += x.samples[i] * x.samples[i];
    ny += y.samples[i] * y.samples[i];
  }
  CHECK(dot / std::sqrt(nx * ny) > 0.99999);
}

TEST_CASE("constant input passes through the filter unchanged") {
  ChannelSeries c{std::vector<double>(500, 3.25), 8000.0, Unit::DegPerSec, 0.0};
  const auto y = lowpass_filter(c, 300.0);
  for (double v : y.samples) CHECK(v == doctest::Approx(3.25).epsilon(1e-9));
}

TEST_CASE("filter cutoff must lie below Nyquist") {
  ChannelSeries c{std::vector<double>(100, 1.0), 1000.0, Unit::G, 0.0};
  CHECK_THROWS_AS(lowpass_filter(c, 500.0), InvalidParameter);
  CHECK_THROWS_AS(lowpass_filter(c, 0.0), InvalidParameter);
}

TEST_CASE("decimate keeps in-band tones and removes aliases") {
  const auto low = decimate(sine(50.0, 8000.0, 16000), 1000.0);
  CHECK(low.rate_hz == 1000.0);
  CHECK(low.size() == 2000);
  CHECK(mid_rms(low.samples) == doctest::Approx(std::sqrt(0.5)).epsilon(0.01));
  // 1900 Hz would fold onto 100 Hz without the anti-alias stage.
  const auto alias = decimate(sine(1900.0, 8000.0, 16000), 1000.0);
  CHECK(mid_rms(alias.samples) < 1e-3);
  CHECK_THROWS_AS(decimate(sine(50.0, 8000.0, 100), 3000.0), InvalidParameter);
}

TEST_CASE("differentiate converts deg/s ramps and quadratics exactly") {
  const double rate = 8000.0;
  ChannelSeries ramp{std::vector<double>(64), rate, Unit::DegPerSec, 0.0};
  ChannelSeries quad = ramp;
  for (std::size_t i = 0; i < 64; ++i) {
    const double t = static_cast<double>(i) / rate;
    ramp.samples[i] = 1000.0 * t;
    quad.samples[i] = 5e5 * t * t;
  }
  const double k = std::numbers::pi / 180.0;
  const auto d = differentiate(ramp);
  CHECK(d.unit == Unit::RadPerSec2);
  for (double v : d.samples) CHECK(v == doctest::Approx(1000.0 * k).epsilon(1e-9));
  const auto dq = differentiate(quad);
  for (std::size_t i = 0; i < 64; ++i) {
    const double t = static_cast<double>(i) / rate;
    CHECK(dq.samples[i] == doctest::Approx(1e6 * t * k).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("processed window geometry and normalization") {
  const auto ev = testkit::random_event(5);
  const auto w = build_window(ev);
  CHECK(w.rows() == 6);
  CHECK(w.cols() == 200);
  CHECK(w.trigger_col() == 50);
  CHECK_FALSE(w.normalized());
  CHECK(w.channel_units()[0] == Unit::G);
  CHECK(w.channel_units()[3] == Unit::RadPerSec2);
  // linear rows are the raw samples
  for (std::size_t c = 0; c < 200; ++c) CHECK(w.at(1, c) == ev.lin_acc[1].samples[c]);

  const auto n = normalize(w);
  CHECK(n.normalized());
  CHECK(n.row_scale()[0] == 400.0);
  CHECK(n.row_scale()[5] == 20000.0);
  for (std::size_t c = 0; c < 200; ++c) {
    CHECK(n.at(0, c) == doctest::Approx(w.at(0, c) / 400.0));
    for (std::size_t r = 0; r < 6; ++r) CHECK(std::abs(n.at(r, c)) <= 1.0);
  }
  CHECK_THROWS_AS(normalize(n), InvalidState);

  ProcessingConfig vel;
  vel.angular_mode = AngularMode::Velocity;
  const auto wv = normalize(build_window(ev, vel), vel);
  CHECK(wv.channel_units()[4] == Unit::DegPerSec);
  CHECK(wv.row_scale()[4] == 4000.0);
}
