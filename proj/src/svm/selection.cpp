#include "impact/svm/selection.hpp"

#include <algorithm>
#include <limits>

#include "impact/core/error.hpp"
#include "impact/core/random.hpp"

namespace impact::svm {

void SelectionConfig::validate() const {
  if (k_folds < 2) throw InvalidParameter("k_folds must be >= 2");
  if (max_features == 0) throw InvalidParameter("max_features must be >= 1");
  svm.validate();
}

std::vector<std::size_t> stratified_folds(std::span<const EventClass> labels, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw InvalidParameter("need at least 2 folds");
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i] == EventClass::TrueImpact ? 0 : 1].push_back(i);
  std::vector<std::size_t> fold(labels.size(), 0);
  std::size_t next = 0;
  for (int c = 0; c < 2; ++c) {
    if (by_class[c].size() < k) {
      throw InvalidParameter(std::to_string(by_class[c].size()) + " " +
                             std::string(class_name(c == 0 ? EventClass::TrueImpact : EventClass::NonContact)) +
                             " rows cannot fill " + std::to_string(k) + " folds");
    }
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
    rng.shuffle(by_class[c]);
    // Continue the deal where the previous class stopped so fold sizes stay
    // within one of each other.
    for (std::size_t idx : by_class[c]) fold[idx] = next++ % k;
  }
  return fold;
}

double cv_error(const FeatureMatrix& x, std::span<const EventClass> labels, std::span<const std::size_t> columns,
                std::span<const std::size_t> folds, std::size_t k, const SvmParams& params) {
  const FeatureMatrix sel = x.select_columns(columns);
  std::size_t wrong = 0;
  std::vector<std::size_t> train_rows, test_rows;
  std::vector<EventClass> train_labels;
  for (std::size_t f = 0; f < k; ++f) {
    train_rows.clear();
    test_rows.clear();
    train_labels.clear();
    for (std::size_t i = 0; i < sel.rows; ++i) {
      if (folds[i] == f) {
        test_rows.push_back(i);
      } else {
        train_rows.push_back(i);
        train_labels.push_back(labels[i]);
      }
    }
    const SvmModel m = train_svm(sel.select_rows(train_rows), train_labels, params);
    for (std::size_t i : test_rows) {
      if (predict_svm(m, sel.row(i)).label != labels[i]) ++wrong;
    }
  }
  return static_cast<double>(wrong) / static_cast<double>(sel.rows);
}

SelectionResult sequential_forward_selection(const FeatureMatrix& x, std::span<const EventClass> labels,
                                             const SelectionConfig& cfg) {
  cfg.validate();
  if (labels.size() != x.rows) throw StructuralError("label count does not match the feature table");
  const auto folds = stratified_folds(labels, cfg.k_folds, cfg.seed);

  SelectionResult result;
  std::size_t wrong = 0;
  for (std::size_t f = 0; f < cfg.k_folds; ++f) {
    std::size_t n_true = 0, n_false = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (folds[i] != f) (labels[i] == EventClass::TrueImpact ? n_true : n_false)++;
    }
    // Ties go to NonContact, as in the classifiers.
    const EventClass majority = n_true > n_false ? EventClass::TrueImpact : EventClass::NonContact;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (folds[i] == f && labels[i] != majority) ++wrong;
    }
  }
  result.baseline_error = static_cast<double>(wrong) / static_cast<double>(labels.size());

  double current = result.baseline_error;
  std::vector<bool> used(x.cols, false);
  std::vector<std::size_t> candidate;
  while (result.selected.size() < std::min(cfg.max_features, x.cols)) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_feature = 0;
    for (std::size_t f = 0; f < x.cols; ++f) {
      if (used[f]) continue;
      candidate = result.selected;
      candidate.push_back(f);
      const double err = cv_error(x, labels, candidate, folds, cfg.k_folds, cfg.svm);
      result.svm_fits += cfg.k_folds;
      if (err < best) {
        best = err;
        best_feature = f;
      }
    }
    if (!(best < current)) break;
    used[best_feature] = true;
    result.selected.push_back(best_feature);
    result.trace.push_back({best_feature, best});
    current = best;
  }
  return result;
}

}  // namespace impact::svm
