#include "impact/eval/metrics.hpp"

#include <cmath>

#include "impact/core/error.hpp"

namespace impact::eval {

namespace {

std::optional<double> ratio(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

bool near_pct(std::uint64_t num, std::uint64_t den, double pct) {
  if (den == 0) return false;
  // Either rounding of an exact half is accepted.
  return std::abs(100.0 * static_cast<double>(num) / static_cast<double>(den) - pct) <= 0.5 + 1e-12;
}

}  // namespace

void ConfusionMatrix::add(EventClass actual, EventClass predicted) {
  if (actual == EventClass::TrueImpact) {
    (predicted == EventClass::TrueImpact ? tp : fn)++;
  } else {
    (predicted == EventClass::TrueImpact ? fp : tn)++;
  }
}

Metrics metrics(const ConfusionMatrix& m) {
  return {ratio(m.tp, m.tp + m.fn), ratio(m.tn, m.tn + m.fp), ratio(m.tp + m.tn, m.total()), ratio(m.tp, m.tp + m.fp)};
}

std::optional<long long> rounded_percent(const std::optional<double>& v) {
  if (!v) return std::nullopt;
  return static_cast<long long>(std::floor(100.0 * *v + 0.5));
}

ConsistencyResult check_consistency(double sens, double spec, double acc, double prec, std::uint64_t total,
                                    std::optional<std::uint64_t> positives) {
  if (total == 0) throw InvalidParameter("total must be positive");
  if (positives && *positives > total) throw InvalidParameter("positives exceed total");
  ConsistencyResult result;
  const std::uint64_t p_lo = positives ? *positives : 0;
  const std::uint64_t p_hi = positives ? *positives : total;
  for (std::uint64_t p = p_lo; p <= p_hi; ++p) {
    const std::uint64_t n = total - p;
    for (std::uint64_t tp = 0; tp <= p; ++tp) {
      if (!near_pct(tp, p, sens)) continue;
      for (std::uint64_t tn = 0; tn <= n; ++tn) {
        ++result.matrices_checked;
        if (!near_pct(tn, n, spec) || !near_pct(tp + tn, total, acc)) continue;
        const std::uint64_t fp = n - tn;
        if (!near_pct(tp, tp + fp, prec)) continue;
        result.consistent = true;
        result.witness = ConfusionMatrix{tp, p - tp, fp, tn};
        return result;
      }
    }
  }
  return result;
}

}  // namespace impact::eval
