#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "impact/core/kinematics.hpp"
#include "impact/svm/features.hpp"

namespace impact::svm {

enum class KernelType { Linear, Rbf };

std::string_view kernel_name(KernelType k);
KernelType parse_kernel(std::string_view text);

struct SvmParams {
  KernelType kernel = KernelType::Rbf;
  /// rbf only; 0 means 1 / n_features.
  double gamma = 0.0;
  double C = 1.0;
  /// Stop when the maximal KKT violation m(a) - M(a) drops below tol.
  double tol = 1e-3;
  std::size_t max_iterations = 10'000'000;
  /// Refine the SMO point to the exact optimum (problems of at most 300
  /// points; larger ones stop at tol).
  bool polish = true;
  /// Kernel rows kept in memory.
  std::size_t cache_mb = 256;

  void validate() const;
};

/// Solver output on the dual problem
///   min 1/2 a'Qa - 1'a  s.t.  0 <= a_i <= C,  y'a = 0,  Q_ij = y_i y_j K(x_i, x_j).
struct DualSolution {
  std::vector<double> alpha;
  double bias = 0.0;       // decision = sum_i a_i y_i K(x_i, x) + bias
  double objective = 0.0;  // value of the minimized dual objective
  double kkt_gap = 0.0;    // final m(a) - M(a)
  std::size_t iterations = 0;
};

/// +1 for TrueImpact, -1 for NonContact.
inline double sign_of(EventClass c) { return c == EventClass::TrueImpact ? 1.0 : -1.0; }

/// SMO with second-order working-set selection. x must already be
/// standardized. Throws InvalidParameter without both classes, SolverError
/// when max_iterations is exhausted.
DualSolution solve_dual(const FeatureMatrix& x, std::span<const double> y, const SvmParams& params);

struct SvmModel {
  KernelType kernel = KernelType::Rbf;
  double gamma = 0.0;
  double C = 1.0;
  /// Feature indices (into extract_features output) the model reads, in order.
  std::vector<std::size_t> features;
  Standardizer scaler;
  /// Standardized support vectors and their a_i y_i.
  FeatureMatrix support;
  std::vector<double> coef;
  double bias = 0.0;
  /// The decision function is constant over the training set.
  bool degenerate = false;
  std::size_t iterations = 0;

  bool operator==(const SvmModel&) const = default;
};

/// Fits the standardizer on `x` restricted to `features` (all columns when
/// empty), then solves the dual.
SvmModel train_svm(const FeatureMatrix& x, std::span<const EventClass> labels, const SvmParams& params,
                   std::span<const std::size_t> features = {});

struct SvmPrediction {
  EventClass label = EventClass::NonContact;
  double decision = 0.0;
};

/// `features` is a full feature vector (the model selects its columns). A
/// decision value of exactly zero goes to NonContact.
SvmPrediction predict_svm(const SvmModel& model, std::span<const double> features);

double kernel_value(KernelType kernel, double gamma, std::span<const double> a, std::span<const double> b);

void save_svm(const SvmModel& model, const std::filesystem::path& path);
SvmModel load_svm(const std::filesystem::path& path);
std::string format_svm(const SvmModel& model);
SvmModel parse_svm(std::string_view text);

}  // namespace impact::svm
