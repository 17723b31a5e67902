#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "impact/svm/svm.hpp"

namespace impact::svm {

struct SelectionConfig {
  std::size_t k_folds = 5;
  /// 0 is rejected; use the feature count for "no limit".
  std::size_t max_features = kFeatureCount;
  std::uint64_t seed = 42;
  SvmParams svm;

  void validate() const;
};

struct SelectionStep {
  std::size_t feature = 0;  // index added at this step
  double cv_error = 0.0;    // misclassification rate with it included
};

struct SelectionResult {
  std::vector<std::size_t> selected;  // in order of addition
  std::vector<SelectionStep> trace;
  /// CV error of predicting each fold's training majority, the bar the first
  /// feature has to beat.
  double baseline_error = 0.0;
  std::size_t svm_fits = 0;
};

/// Stratified fold index per row: each class is shuffled with the seed and
/// dealt round-robin. Throws InvalidParameter when a class has fewer rows
/// than folds.
std::vector<std::size_t> stratified_folds(std::span<const EventClass> labels, std::size_t k, std::uint64_t seed);

/// k-fold misclassification rate of an SVM on the given columns. Each fold
/// standardizes with its own training rows.
double cv_error(const FeatureMatrix& x, std::span<const EventClass> labels, std::span<const std::size_t> columns,
                std::span<const std::size_t> folds, std::size_t k, const SvmParams& params);

/// Greedy forward selection. Each step adds the feature with the lowest CV
/// error (lowest index on ties) and stops at the first step that does not
/// strictly improve on the previous error, or at max_features.
SelectionResult sequential_forward_selection(const FeatureMatrix& x, std::span<const EventClass> labels,
                                             const SelectionConfig& cfg);

}  // namespace impact::svm
