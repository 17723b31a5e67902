#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "impact/core/kinematics.hpp"
#include "impact/core/window.hpp"

namespace impact::svm {

/// Per row, in order: peak |v|, time to peak (ms from the trigger column),
/// signed integral (unit * s), time above half of peak (ms), zero crossings,
/// and the periodogram energy fractions in 0-100, 100-300 and 300-500 Hz.
inline constexpr std::size_t kFeaturesPerRow = 8;
/// Row features for the six rows, then the peak of the linear vector
/// magnitude (g) and the angular/linear energy ratio on full-scale units.
inline constexpr std::size_t kFeatureCount = kFeaturesPerRow * kWindowRows + 2;

/// Stable names such as "lin_x.peak" or "ang_z.band_300_500".
const std::vector<std::string>& feature_names();

/// Works on either raw or normalized windows: values are taken back to
/// physical units through row_scale(). Columns are 1 ms apart. The energy
/// ratio divides unnormalized rows by the full scales of `cfg`.
std::vector<double> extract_features(const ProcessedWindow& window, const ProcessingConfig& cfg = {});

/// Row-major table of feature vectors.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  FeatureMatrix() = default;
  FeatureMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  void append(std::span<const double> values);
  /// Keeps the given columns, in the given order.
  FeatureMatrix select_columns(std::span<const std::size_t> columns) const;
  FeatureMatrix select_rows(std::span<const std::size_t> rows_to_keep) const;

  bool operator==(const FeatureMatrix&) const = default;
};

FeatureMatrix extract_all(std::span<const LabeledWindow> windows, const ProcessingConfig& cfg = {});

/// z-score transform fitted on training rows only. A constant column keeps
/// unit spread so it maps to zero rather than dividing by zero.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> sd;

  static Standardizer fit(const FeatureMatrix& x);
  std::vector<double> apply(std::span<const double> v) const;
  FeatureMatrix apply(const FeatureMatrix& x) const;

  bool operator==(const Standardizer&) const = default;
};

}  // namespace impact::svm
