#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "impact/core/kinematics.hpp"

namespace impact::eval {

/// Positive class is TrueImpact.
struct ConfusionMatrix {
  std::uint64_t tp = 0;
  std::uint64_t fn = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;

  void add(EventClass actual, EventClass predicted);
  std::uint64_t positives() const noexcept { return tp + fn; }
  std::uint64_t negatives() const noexcept { return fp + tn; }
  std::uint64_t total() const noexcept { return tp + fn + fp + tn; }

  bool operator==(const ConfusionMatrix&) const = default;
};

/// A metric is empty when its denominator is zero.
struct Metrics {
  std::optional<double> sensitivity;  // TP / (TP + FN)
  std::optional<double> specificity;  // TN / (TN + FP)
  std::optional<double> accuracy;     // (TP + TN) / total
  std::optional<double> precision;    // TP / (TP + FP)

  bool operator==(const Metrics&) const = default;
};

Metrics metrics(const ConfusionMatrix& m);

/// Whole percent, halves rounded up, as printed in the report table.
std::optional<long long> rounded_percent(const std::optional<double>& v);

/// Result of checking a row of reported percentages against integer
/// confusion matrices.
struct ConsistencyResult {
  bool consistent = false;
  std::optional<ConfusionMatrix> witness;  // a matching matrix when consistent
  std::uint64_t matrices_checked = 0;
};

/// Searches every confusion matrix with `total` events (and exactly
/// `positives` positives when given) for one whose four metrics round to the
/// given whole percentages (within +-0.5 points, so either rounding of a
/// half counts).
ConsistencyResult check_consistency(double sensitivity_pct, double specificity_pct, double accuracy_pct,
                                    double precision_pct, std::uint64_t total,
                                    std::optional<std::uint64_t> positives = std::nullopt);

}  // namespace impact::eval
