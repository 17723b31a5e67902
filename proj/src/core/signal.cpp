#include "impact/core/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "impact/core/error.hpp"

namespace impact {

namespace {

// Odd-reflection padding length used by the forward-backward filter.
constexpr std::size_t kPadLength = 15;

std::vector<double> filtfilt(const std::array<Biquad, 2>& sections, const std::vector<double>& x) {
  const std::size_t n = x.size();
  const std::size_t pad = std::min(kPadLength, n == 0 ? 0 : n - 1);

  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x.front() - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x.back() - x[n - 1 - i]);

  // Starting from rest on a signal offset by its first value is the
  // steady-state initial condition for a unity-DC-gain filter.
  const double head = ext.front();
  for (double& v : ext) v -= head;
  std::vector<double> fwd = filter_causal(sections, ext);
  for (double& v : fwd) v += head;

  std::reverse(fwd.begin(), fwd.end());
  const double tail = fwd.front();
  for (double& v : fwd) v -= tail;
  std::vector<double> bwd = filter_causal(sections, fwd);
  for (double& v : bwd) v += tail;
  std::reverse(bwd.begin(), bwd.end());

  return {bwd.begin() + static_cast<std::ptrdiff_t>(pad), bwd.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

}  // namespace

std::array<Biquad, 2> butterworth4_lowpass(double cutoff_hz, double rate_hz) {
  const double k = std::tan(std::numbers::pi * cutoff_hz / rate_hz);
  const double k2 = k * k;
  std::array<Biquad, 2> out{};
  for (int s = 0; s < 2; ++s) {
    // Pole-pair quality factors of the 4th-order Butterworth prototype.
    const double theta = std::numbers::pi * (2.0 * s + 1.0) / 8.0;
    const double q = 1.0 / (2.0 * std::cos(theta));
    const double norm = 1.0 / (1.0 + k / q + k2);
    out[s].b0 = k2 * norm;
    out[s].b1 = 2.0 * out[s].b0;
    out[s].b2 = out[s].b0;
    out[s].a1 = 2.0 * (k2 - 1.0) * norm;
    out[s].a2 = (1.0 - k / q + k2) * norm;
  }
  return out;
}

std::vector<double> filter_causal(const std::array<Biquad, 2>& sections, const std::vector<double>& x) {
  std::vector<double> y = x;
  for (const Biquad& s : sections) {
    double z1 = 0.0;
    double z2 = 0.0;
    for (double& v : y) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
  }
  return y;
}

ChannelSeries lowpass_filter(const ChannelSeries& series, double cutoff_hz) {
  series.validate();
  if (!(cutoff_hz > 0.0) || !(cutoff_hz < series.rate_hz / 2.0)) {
    throw InvalidParameter("low-pass cutoff " + std::to_string(cutoff_hz) + " Hz must lie in (0, " +
                           std::to_string(series.rate_hz / 2.0) + ") Hz");
  }
  ChannelSeries out = series;
  out.samples = filtfilt(butterworth4_lowpass(cutoff_hz, series.rate_hz), series.samples);
  return out;
}

ChannelSeries decimate(const ChannelSeries& series, double target_rate_hz) {
  series.validate();
  if (!(target_rate_hz > 0.0) || target_rate_hz > series.rate_hz) {
    throw InvalidParameter("decimation target must be in (0, source rate]");
  }
  const double ratio = series.rate_hz / target_rate_hz;
  const double factor = std::round(ratio);
  if (std::abs(ratio - factor) > 1e-9 * ratio) {
    throw InvalidParameter("decimation ratio " + std::to_string(ratio) + " is not an integer");
  }
  const auto step = static_cast<std::size_t>(factor);
  if (step == 1) return series;

  const ChannelSeries smoothed = lowpass_filter(series, 0.4 * target_rate_hz);
  ChannelSeries out;
  out.rate_hz = target_rate_hz;
  out.unit = series.unit;
  out.t0_offset_ms = series.t0_offset_ms;
  out.samples.reserve(series.size() / step + 1);
  for (std::size_t i = 0; i < smoothed.size(); i += step) out.samples.push_back(smoothed.samples[i]);
  return out;
}

ChannelSeries differentiate(const ChannelSeries& series) {
  series.validate();
  if (series.unit != Unit::DegPerSec) throw InvalidParameter("differentiate expects deg/s input");
  const std::size_t n = series.size();
  if (n < 3) throw InvalidParameter("differentiate needs at least 3 samples");

  const auto& x = series.samples;
  const double scale = series.rate_hz * std::numbers::pi / 180.0;
  ChannelSeries out = series;
  out.unit = Unit::RadPerSec2;
  auto& d = out.samples;
  d[0] = (-3.0 * x[0] + 4.0 * x[1] - x[2]) * 0.5 * scale;
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (x[i + 1] - x[i - 1]) * 0.5 * scale;
  d[n - 1] = (3.0 * x[n - 1] - 4.0 * x[n - 2] + x[n - 3]) * 0.5 * scale;
  return out;
}

}  // namespace impact
