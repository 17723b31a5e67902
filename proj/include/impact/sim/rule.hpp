#pragma once

#include "impact/core/kinematics.hpp"
#include "impact/core/window.hpp"

namespace impact::sim {

/// Hand-written separability check for the synthetic corpus: an impact has a
/// linear vector-magnitude pulse wider than min_fwhm_ms at half maximum and a
/// share of normalized angular energy above min_angular_fraction.
struct SeparabilityRule {
  double min_fwhm_ms = 2.0;
  double min_angular_fraction = 0.2;

  /// Full width at half maximum of the linear vector magnitude around its
  /// peak, with linear interpolation at the half-max crossings.
  static double magnitude_fwhm_ms(const ProcessedWindow& window);

  /// sum(angular^2) / sum(all^2) over the normalized rows; 0 for a zero window.
  static double angular_energy_fraction(const ProcessedWindow& window);

  /// Window must be normalized.
  EventClass classify(const ProcessedWindow& window) const;
};

}  // namespace impact::sim
