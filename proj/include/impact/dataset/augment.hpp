#pragma once

#include <span>
#include <vector>

#include "impact/core/kinematics.hpp"
#include "impact/core/window.hpp"

namespace impact::dataset {

/// Which classes expand_training_set() augments.
enum class AugmentClasses { Both, TrueImpactOnly, NonContactOnly };

std::string_view augment_classes_name(AugmentClasses c);
AugmentClasses parse_augment_classes(std::string_view text);

struct AugmentConfig {
  int min_shift_ms = 1;
  int max_shift_ms = 5;
  AugmentClasses classes = AugmentClasses::Both;

  void validate() const;
};

/// Shifts every row right by shift_ms columns (one column per ms on the 1 kHz
/// grid), zero-filling the leading columns. The copy is labeled Augmented
/// with the original as parent and the id "<parent>+s<k>".
/// Throws InvalidParameter for a shift outside the configured range,
/// ContaminationError for a test window, InvalidState for an input that is
/// itself augmented.
LabeledWindow augment_shift(const LabeledWindow& window, int shift_ms, const AugmentConfig& cfg = {});

/// Each original followed by its shifts min..max (for the classes selected).
/// The default yields 6x the input. Throws ContaminationError if any input
/// belongs to the test partition.
std::vector<LabeledWindow> expand_training_set(std::span<const LabeledWindow> originals,
                                               const AugmentConfig& cfg = {});

/// w_c = (n_true + n_false) / (2 n_c). Throws InvalidParameter when either
/// count is not positive.
ClassWeights class_weights(long long n_true, long long n_false);
/// Counts the labels of `windows`.
ClassWeights class_weights(std::span<const LabeledWindow> windows);

}  // namespace impact::dataset
