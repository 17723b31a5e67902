#include "impact/svm/features.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "impact/core/error.hpp"

namespace impact::svm {

namespace {

constexpr double kColumnMs = 1.0;
constexpr double kGridHz = 1000.0 / kColumnMs;
constexpr double kBandEdges[] = {0.0, 100.0, 300.0};

struct Twiddles {
  std::size_t n = 0;
  std::vector<double> c, s;  // cos / sin of 2 pi m / n
};

const Twiddles& twiddles(std::size_t n) {
  thread_local Twiddles t;
  if (t.n != n) {
    t.n = n;
    t.c.resize(n);
    t.s.resize(n);
    for (std::size_t m = 0; m < n; ++m) {
      const double a = 2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(n);
      t.c[m] = std::cos(a);
      t.s[m] = std::sin(a);
    }
  }
  return t;
}

// One-sided periodogram summed into three bands, as fractions of the total.
std::array<double, 3> band_fractions(std::span<const double> x) {
  const std::size_t n = x.size();
  const Twiddles& tw = twiddles(n);
  std::array<double, 3> band{};
  double total = 0.0;
  for (std::size_t k = 0; k <= n / 2; ++k) {
    double re = 0.0, im = 0.0;
    std::size_t m = 0;
    for (std::size_t i = 0; i < n; ++i) {
      re += x[i] * tw.c[m];
      im -= x[i] * tw.s[m];
      m += k;
      if (m >= n) m -= n;
    }
    double p = re * re + im * im;
    if (k != 0 && 2 * k != n) p *= 2.0;
    const double f = static_cast<double>(k) * kGridHz / static_cast<double>(n);
    const std::size_t b = f < kBandEdges[1] ? 0 : f < kBandEdges[2] ? 1 : 2;
    band[b] += p;
    total += p;
  }
  if (total > 0.0) {
    for (double& v : band) v /= total;
  }
  return band;
}

double nominal_scale(Unit u, const ProcessingConfig& cfg) {
  switch (u) {
    case Unit::G: return kLinearFullScaleG;
    case Unit::DegPerSec: return kAngularFullScaleDps;
    case Unit::RadPerSec2: return cfg.angular_accel_full_scale;
  }
  return 1.0;
}

}  // namespace

const std::vector<std::string>& feature_names() {
  static const std::vector<std::string> names = [] {
    const char* rows[] = {"lin_x", "lin_y", "lin_z", "ang_x", "ang_y", "ang_z"};
    const char* per[] = {"peak",          "time_to_peak_ms", "integral",      "above_half_ms",
                         "zero_crossings", "band_0_100",      "band_100_300", "band_300_500"};
    std::vector<std::string> out;
    for (const char* r : rows) {
      for (const char* p : per) out.push_back(std::string(r) + "." + p);
    }
    out.emplace_back("lin_mag.peak");
    out.emplace_back("ang_lin.energy_ratio");
    return out;
  }();
  return names;
}

std::vector<double> extract_features(const ProcessedWindow& window, const ProcessingConfig& cfg) {
  const std::size_t n = window.cols();
  if (n == 0) throw InvalidParameter("empty window");
  std::vector<double> out;
  out.reserve(kFeatureCount);

  std::array<std::vector<double>, kWindowRows> phys;
  double energy_lin = 0.0, energy_ang = 0.0;
  for (std::size_t r = 0; r < kWindowRows; ++r) {
    const double back = window.normalized() ? window.row_scale()[r] : 1.0;
    const double full = window.normalized() ? window.row_scale()[r] : nominal_scale(window.channel_units()[r], cfg);
    auto& v = phys[r];
    v.resize(n);
    double e = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      v[c] = window.at(r, c) * back;
      const double u = v[c] / full;
      e += u * u;
    }
    (r < 3 ? energy_lin : energy_ang) += e;

    std::size_t arg = 0;
    double peak = 0.0, integral = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      if (std::abs(v[c]) > peak) {
        peak = std::abs(v[c]);
        arg = c;
      }
      integral += v[c];
    }
    std::size_t above = 0, crossings = 0;
    int last_sign = 0;
    for (std::size_t c = 0; c < n; ++c) {
      if (peak > 0.0 && std::abs(v[c]) >= 0.5 * peak) ++above;
      const int sign = v[c] > 0.0 ? 1 : v[c] < 0.0 ? -1 : 0;
      if (sign != 0) {
        if (last_sign != 0 && sign != last_sign) ++crossings;
        last_sign = sign;
      }
    }
    out.push_back(peak);
    out.push_back(peak > 0.0 ? (static_cast<double>(arg) - static_cast<double>(window.trigger_col())) * kColumnMs : 0.0);
    out.push_back(integral * kColumnMs / 1000.0);
    out.push_back(static_cast<double>(above) * kColumnMs);
    out.push_back(static_cast<double>(crossings));
    for (double b : band_fractions(v)) out.push_back(b);
  }

  double mag_peak = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    mag_peak = std::max(mag_peak, std::sqrt(phys[0][c] * phys[0][c] + phys[1][c] * phys[1][c] + phys[2][c] * phys[2][c]));
  }
  out.push_back(mag_peak);
  out.push_back(energy_lin > 0.0 ? energy_ang / energy_lin : 0.0);
  return out;
}

void FeatureMatrix::append(std::span<const double> values) {
  if (rows == 0 && cols == 0) cols = values.size();
  if (values.size() != cols) throw StructuralError("feature row of length " + std::to_string(values.size()) + ", expected " + std::to_string(cols));
  data.insert(data.end(), values.begin(), values.end());
  ++rows;
}

FeatureMatrix FeatureMatrix::select_columns(std::span<const std::size_t> columns) const {
  FeatureMatrix out(rows, columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j] >= cols) throw InvalidParameter("feature index " + std::to_string(columns[j]) + " out of range");
  }
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < columns.size(); ++j) out.at(i, j) = at(i, columns[j]);
  }
  return out;
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> rows_to_keep) const {
  FeatureMatrix out(rows_to_keep.size(), cols);
  for (std::size_t i = 0; i < rows_to_keep.size(); ++i) {
    if (rows_to_keep[i] >= rows) throw InvalidParameter("row index out of range");
    std::copy_n(data.begin() + static_cast<std::ptrdiff_t>(rows_to_keep[i] * cols), cols,
                out.data.begin() + static_cast<std::ptrdiff_t>(i * cols));
  }
  return out;
}

FeatureMatrix extract_all(std::span<const LabeledWindow> windows, const ProcessingConfig& cfg) {
  FeatureMatrix x;
  x.cols = kFeatureCount;
  x.data.reserve(windows.size() * kFeatureCount);
  for (const auto& w : windows) x.append(extract_features(w.window, cfg));
  return x;
}

Standardizer Standardizer::fit(const FeatureMatrix& x) {
  if (x.rows == 0) throw InvalidParameter("cannot standardize an empty table");
  Standardizer s;
  s.mean.assign(x.cols, 0.0);
  s.sd.assign(x.cols, 0.0);
  for (std::size_t i = 0; i < x.rows; ++i) {
    for (std::size_t j = 0; j < x.cols; ++j) s.mean[j] += x.at(i, j);
  }
  for (double& m : s.mean) m /= static_cast<double>(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) {
    for (std::size_t j = 0; j < x.cols; ++j) {
      const double d = x.at(i, j) - s.mean[j];
      s.sd[j] += d * d;
    }
  }
  for (double& v : s.sd) {
    v = std::sqrt(v / static_cast<double>(x.rows));
    if (!(v > 1e-12)) v = 1.0;
  }
  return s;
}

std::vector<double> Standardizer::apply(std::span<const double> v) const {
  if (v.size() != mean.size()) throw StructuralError("feature vector length does not match the standardizer");
  std::vector<double> out(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) out[j] = (v[j] - mean[j]) / sd[j];
  return out;
}

FeatureMatrix Standardizer::apply(const FeatureMatrix& x) const {
  if (x.cols != mean.size()) throw StructuralError("feature table width does not match the standardizer");
  FeatureMatrix out = x;
  for (std::size_t i = 0; i < x.rows; ++i) {
    for (std::size_t j = 0; j < x.cols; ++j) out.at(i, j) = (x.at(i, j) - mean[j]) / sd[j];
  }
  return out;
}

}  // namespace impact::svm
