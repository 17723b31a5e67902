#include "impact/sim/rule.hpp"

#include <cmath>
#include <vector>

#include "impact/core/error.hpp"

namespace impact::sim {

double SeparabilityRule::magnitude_fwhm_ms(const ProcessedWindow& window) {
  const std::size_t n = window.cols();
  if (n == 0) return 0.0;
  std::vector<double> mag(n);
  std::size_t peak = 0;
  for (std::size_t c = 0; c < n; ++c) {
    double sq = 0.0;
    for (std::size_t r = 0; r < 3; ++r) {
      const double v = window.at(r, c) * window.row_scale()[r];
      sq += v * v;
    }
    mag[c] = std::sqrt(sq);
    if (mag[c] > mag[peak]) peak = c;
  }
  const double half = 0.5 * mag[peak];
  if (half <= 0.0) return 0.0;

  std::size_t lo = peak;
  while (lo > 0 && mag[lo - 1] >= half) --lo;
  std::size_t hi = peak;
  while (hi + 1 < n && mag[hi + 1] >= half) ++hi;

  double left = static_cast<double>(lo);
  if (lo > 0) left -= (mag[lo] - half) / (mag[lo] - mag[lo - 1]);
  double right = static_cast<double>(hi);
  if (hi + 1 < n) right += (mag[hi] - half) / (mag[hi] - mag[hi + 1]);
  // One grid column per millisecond on the default 1 kHz grid.
  return right - left;
}

double SeparabilityRule::angular_energy_fraction(const ProcessedWindow& window) {
  double lin = 0.0;
  double ang = 0.0;
  for (std::size_t r = 0; r < kWindowRows; ++r) {
    double e = 0.0;
    for (double v : window.row(r)) e += v * v;
    (r < 3 ? lin : ang) += e;
  }
  const double total = lin + ang;
  return total > 0.0 ? ang / total : 0.0;
}

EventClass SeparabilityRule::classify(const ProcessedWindow& window) const {
  if (!window.normalized()) throw InvalidParameter("rule classifier expects a normalized window");
  const bool impact = magnitude_fwhm_ms(window) > min_fwhm_ms &&
                      angular_energy_fraction(window) > min_angular_fraction;
  return impact ? EventClass::TrueImpact : EventClass::NonContact;
}

}  // namespace impact::sim
