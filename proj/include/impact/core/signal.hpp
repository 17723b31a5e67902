#pragma once

#include <array>
#include <vector>

#include "impact/core/kinematics.hpp"

namespace impact {

/// Transposed direct-form II biquad coefficients, a0 normalized to 1.
struct Biquad {
  double b0, b1, b2, a1, a2;
};

/// Fourth-order Butterworth low-pass as two cascaded biquads (bilinear
/// transform with pre-warping).
std::array<Biquad, 2> butterworth4_lowpass(double cutoff_hz, double rate_hz);

/// Single causal pass of a biquad cascade starting from rest.
std::vector<double> filter_causal(const std::array<Biquad, 2>& sections, const std::vector<double>& x);

/// Zero-phase 4th-order Butterworth low-pass (forward-backward pass with odd
/// reflection padding). Constant input comes back unchanged.
/// Throws InvalidParameter unless 0 < cutoff_hz < rate/2.
ChannelSeries lowpass_filter(const ChannelSeries& series, double cutoff_hz);

/// Anti-alias filter at 0.4 x target rate, then keep every (rate/target)-th
/// sample. Throws InvalidParameter when the rate ratio is not an integer.
ChannelSeries decimate(const ChannelSeries& series, double target_rate_hz);

/// Angular velocity (deg/s) to angular acceleration (rad/s^2): central
/// differences inside, second-order one-sided differences at the ends.
ChannelSeries differentiate(const ChannelSeries& series);

}  // namespace impact
