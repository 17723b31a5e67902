#include "impact/dataset/augment.hpp"

#include <algorithm>

#include "impact/core/error.hpp"

namespace impact::dataset {

std::string_view augment_classes_name(AugmentClasses c) {
  switch (c) {
    case AugmentClasses::Both: return "both";
    case AugmentClasses::TrueImpactOnly: return "true";
    case AugmentClasses::NonContactOnly: return "false";
  }
  return "both";
}

AugmentClasses parse_augment_classes(std::string_view text) {
  if (text == "both") return AugmentClasses::Both;
  if (text == "true") return AugmentClasses::TrueImpactOnly;
  if (text == "false") return AugmentClasses::NonContactOnly;
  throw InvalidParameter("augment_classes must be both, true or false, got '" + std::string(text) + "'");
}

void AugmentConfig::validate() const {
  if (min_shift_ms < 0 || max_shift_ms < min_shift_ms) {
    throw InvalidParameter("shift range [" + std::to_string(min_shift_ms) + ", " + std::to_string(max_shift_ms) +
                           "] is empty or negative");
  }
}

LabeledWindow augment_shift(const LabeledWindow& window, int shift_ms, const AugmentConfig& cfg) {
  cfg.validate();
  if (shift_ms < cfg.min_shift_ms || shift_ms > cfg.max_shift_ms) {
    throw InvalidParameter("shift " + std::to_string(shift_ms) + " ms outside [" + std::to_string(cfg.min_shift_ms) +
                           ", " + std::to_string(cfg.max_shift_ms) + "]");
  }
  if (window.partition == Partition::Test) throw ContaminationError("cannot augment test window " + window.id);
  if (window.label.source == LabelSource::Augmented) throw InvalidState(window.id + " is already augmented");

  const auto k = static_cast<std::size_t>(shift_ms);
  LabeledWindow out = window;
  out.id = window.id + "+s" + std::to_string(shift_ms);
  out.label.source = LabelSource::Augmented;
  out.label.parent_id = window.id;
  for (std::size_t r = 0; r < out.window.rows(); ++r) {
    auto src = window.window.row(r);
    auto dst = out.window.row(r);
    const std::size_t n = dst.size();
    const std::size_t kk = std::min(k, n);
    std::fill(dst.begin(), dst.begin() + static_cast<std::ptrdiff_t>(kk), 0.0);
    std::copy(src.begin(), src.end() - static_cast<std::ptrdiff_t>(kk), dst.begin() + static_cast<std::ptrdiff_t>(kk));
  }
  return out;
}

std::vector<LabeledWindow> expand_training_set(std::span<const LabeledWindow> originals, const AugmentConfig& cfg) {
  cfg.validate();
  for (const auto& w : originals) {
    if (w.partition == Partition::Test) throw ContaminationError("test window " + w.id + " in a training set");
  }
  std::vector<LabeledWindow> out;
  out.reserve(originals.size() * static_cast<std::size_t>(cfg.max_shift_ms - cfg.min_shift_ms + 2));
  for (const auto& w : originals) {
    out.push_back(w);
    const bool selected = cfg.classes == AugmentClasses::Both ||
                          (cfg.classes == AugmentClasses::TrueImpactOnly && w.label.value == EventClass::TrueImpact) ||
                          (cfg.classes == AugmentClasses::NonContactOnly && w.label.value == EventClass::NonContact);
    if (!selected) continue;
    for (int k = cfg.min_shift_ms; k <= cfg.max_shift_ms; ++k) {
      if (k == 0) continue;  // the original already stands for shift 0
      out.push_back(augment_shift(w, k, cfg));
    }
  }
  return out;
}

ClassWeights class_weights(long long n_true, long long n_false) {
  if (n_true <= 0 || n_false <= 0) {
    throw InvalidParameter("class counts must be positive, got " + std::to_string(n_true) + " true / " +
                           std::to_string(n_false) + " false");
  }
  const double total = static_cast<double>(n_true + n_false);
  return {total / (2.0 * static_cast<double>(n_true)), total / (2.0 * static_cast<double>(n_false))};
}

ClassWeights class_weights(std::span<const LabeledWindow> windows) {
  const auto n_true = std::count_if(windows.begin(), windows.end(),
                                    [](const LabeledWindow& w) { return w.label.value == EventClass::TrueImpact; });
  return class_weights(n_true, static_cast<long long>(windows.size()) - n_true);
}

}  // namespace impact::dataset
