#include "impact/svm/svm.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <numeric>
#include <optional>
#include <unordered_map>

#include "impact/core/error.hpp"
#include "impact/core/text.hpp"
#include "impact/dataset/event_file.hpp"

namespace impact::svm {

namespace {

constexpr double kTau = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

// LRU cache of kernel rows.
class KernelRows {
 public:
  KernelRows(const FeatureMatrix& x, KernelType kernel, double gamma, std::size_t cache_mb)
      : x_(x), kernel_(kernel), gamma_(gamma), diag_(x.rows) {
    const std::size_t row_bytes = std::max<std::size_t>(1, x.rows * sizeof(double));
    capacity_ = std::max<std::size_t>(2, cache_mb * 1024 * 1024 / row_bytes);
    for (std::size_t i = 0; i < x.rows; ++i) diag_[i] = kernel_value(kernel_, gamma_, x_.row(i), x_.row(i));
  }

  double diag(std::size_t i) const { return diag_[i]; }

  const std::vector<double>& row(std::size_t i) {
    if (auto it = index_.find(i); it != index_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second);
      return it->second->second;
    }
    if (lru_.size() >= capacity_) {
      index_.erase(lru_.back().first);
      lru_.pop_back();
    }
    std::vector<double> k(x_.rows);
    const auto xi = x_.row(i);
    for (std::size_t j = 0; j < x_.rows; ++j) k[j] = kernel_value(kernel_, gamma_, xi, x_.row(j));
    lru_.emplace_front(i, std::move(k));
    index_[i] = lru_.begin();
    return lru_.front().second;
  }

 private:
  const FeatureMatrix& x_;
  KernelType kernel_;
  double gamma_;
  std::vector<double> diag_;
  std::size_t capacity_ = 2;
  std::list<std::pair<std::size_t, std::vector<double>>> lru_;
  std::unordered_map<std::size_t, decltype(lru_)::iterator> index_;
};


// Largest KKT violation m(a) - M(a).
double kkt_gap(const std::vector<double>& a, const std::vector<double>& G, std::span<const double> y, double C) {
  double up = -kInf, low = kInf;
  for (std::size_t t = 0; t < a.size(); ++t) {
    const double v = -y[t] * G[t];
    const bool in_up = y[t] > 0.0 ? a[t] < C : a[t] > 0.0;
    const bool in_low = y[t] > 0.0 ? a[t] > 0.0 : a[t] < C;
    if (in_up) up = std::max(up, v);
    if (in_low) low = std::min(low, v);
  }
  return up == -kInf || low == kInf ? 0.0 : up - low;
}

// Bias and objective from the final gradient.
void finish(DualSolution& sol, const std::vector<double>& G, std::span<const double> y, double C) {
  const auto& a = sol.alpha;
  double ub = kInf, lb = -kInf, sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    const double yg = y[t] * G[t];
    if (a[t] >= C) {
      if (y[t] < 0.0) {
        ub = std::min(ub, yg);
      } else {
        lb = std::max(lb, yg);
      }
    } else if (a[t] <= 0.0) {
      if (y[t] > 0.0) {
        ub = std::min(ub, yg);
      } else {
        lb = std::max(lb, yg);
      }
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;
  sol.bias = -rho;
  double obj = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) obj += a[t] * (G[t] - 1.0);
  sol.objective = obj / 2.0;
}

// Dense face solves are cubic in the working set, so the exact refinement is
// only run on problems up to this many points.
constexpr std::size_t kMaxPolishPoints = 300;
constexpr int kMaxPolishRounds = 50;
constexpr double kTightGap = 1e-10;

// g = Qa - 1 from scratch.
std::vector<double> dual_gradient(const std::vector<double>& alpha, std::span<const double> y, KernelRows& K) {
  const std::size_t n = alpha.size();
  std::vector<double> g(n, -1.0);
  for (std::size_t s = 0; s < n; ++s) {
    if (alpha[s] == 0.0) continue;
    const auto& row = K.row(s);
    for (std::size_t t = 0; t < n; ++t) g[t] += y[t] * y[s] * row[t] * alpha[s];
  }
  return g;
}

// Minimizer of the dual on the face where `work` varies and every other
// variable keeps its value:
//   Q_WW a_W + nu y_W = 1 - Q_WB a_B,   y_W' a_W = -y_B' a_B.
// On flat faces the system is singular; the minimizer nearest the current
// point is taken. When it has no solution the face is unbounded below along
// a null direction of Q_WW inside y_W' d = 0, and that descent ray is returned
// instead (ray = true, alpha holds current + direction).
struct FaceStep {
  std::vector<double> alpha;
  double nu = 0.0;
  bool ray = false;
};

constexpr std::size_t kMaxRayFree = 400;

std::optional<FaceStep> face_minimizer(const std::vector<double>& alpha, const std::vector<double>& g,
                                       const std::vector<std::size_t>& work, std::span<const double> y,
                                       KernelRows& K) {
  const std::size_t n = alpha.size(), f = work.size();
  const auto ef = static_cast<Eigen::Index>(f);
  std::vector<bool> in_work(n, false);
  for (std::size_t t : work) in_work[t] = true;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(ef + 1, ef + 1);
  Eigen::VectorXd rhs(ef + 1), cur(ef + 1);
  double y_sum_fixed = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    if (!in_work[t]) y_sum_fixed += y[t] * alpha[t];
  }
  for (std::size_t r = 0; r < f; ++r) {
    const auto& row = K.row(work[r]);
    const auto er = static_cast<Eigen::Index>(r);
    double q_fixed = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      if (!in_work[t] && alpha[t] != 0.0) q_fixed += y[work[r]] * y[t] * row[t] * alpha[t];
    }
    for (std::size_t c = 0; c < f; ++c) A(er, static_cast<Eigen::Index>(c)) = y[work[r]] * y[work[c]] * row[work[c]];
    A(er, ef) = y[work[r]];
    A(ef, er) = y[work[r]];
    rhs(er) = 1.0 - q_fixed;
    cur(er) = alpha[work[r]];
  }
  rhs(ef) = -y_sum_fixed;
  cur(ef) = 0.0;
  const Eigen::VectorXd z = cur + A.completeOrthogonalDecomposition().solve(rhs - A * cur);
  FaceStep out{alpha, 0.0, false};
  if (z.allFinite() && (A * z - rhs).norm() <= 1e-9 * (1.0 + rhs.norm())) {
    out.nu = z(ef);
    for (std::size_t r = 0; r < f; ++r) out.alpha[work[r]] = z(static_cast<Eigen::Index>(r));
    return out;
  }
  if (f > kMaxRayFree) return std::nullopt;
  // Null space of [Q_WW; y_W'] from the SVD; project -g onto it.
  Eigen::MatrixXd M(ef + 1, ef);
  M.topRows(ef) = A.topLeftCorner(ef, ef);
  M.row(ef) = A.row(ef).head(ef);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cut = 1e-10 * std::max(1.0, sv.size() > 0 ? sv(0) : 0.0);
  Eigen::VectorXd g_w(ef);
  for (std::size_t r = 0; r < f; ++r) g_w(static_cast<Eigen::Index>(r)) = g[work[r]];
  Eigen::VectorXd d = Eigen::VectorXd::Zero(ef);
  for (Eigen::Index k = 0; k < ef; ++k) {
    if (k < sv.size() && sv(k) > cut) continue;
    const auto v = svd.matrixV().col(k);
    d -= v.dot(g_w) * v;
  }
  if (!d.allFinite() || d.norm() == 0.0 || d.dot(g_w) >= 0.0) return std::nullopt;
  out.ray = true;
  for (std::size_t r = 0; r < f; ++r) out.alpha[work[r]] += d(static_cast<Eigen::Index>(r));
  return out;
}

// SMO stops at a KKT tolerance, so its objective is only close to optimal,
// and its free set can miss variables that are positive at the optimum. A
// primal active-set pass finishes the job. The working set starts as the
// free variables; each round moves toward the exact minimizer of the current
// face (or along a descent ray when the face is unbounded), cutting the step
// at the first bound hit and dropping the variables that hit. Once a face minimizer is reached, bounded variables whose reduced
// gradient G + nu y points into the box join the working set. The result
// replaces the SMO point only if it is no worse in objective and KKT gap.
void polish(DualSolution& sol, std::vector<double>& G, std::span<const double> y, double C, KernelRows& K,
            double tol) {
  const std::size_t n = sol.alpha.size();
  std::vector<double> a = sol.alpha;
  std::vector<double> g = G;
  std::vector<bool> in_work(n, false);
  std::size_t work_size = 0;
  for (std::size_t t = 0; t < n; ++t) {
    if (a[t] > 0.0 && a[t] < C) {
      in_work[t] = true;
      ++work_size;
    }
  }
  auto add_violators = [&](double nu) {
    bool added = false;
    for (std::size_t t = 0; t < n; ++t) {
      if (in_work[t]) continue;
      const double r = g[t] + nu * y[t];
      const double slack = 1e-12 * (1.0 + std::abs(g[t]));
      if ((a[t] <= 0.0 && r < -slack) || (a[t] >= C && r > slack)) {
        in_work[t] = true;
        ++work_size;
        added = true;
      }
    }
    return added;
  };
  if (work_size == 0) {
    DualSolution probe = sol;
    finish(probe, g, y, C);
    if (!add_violators(probe.bias)) return;  // nu = -rho = bias
  }

  for (int round = 0; round < kMaxPolishRounds; ++round) {
    if (work_size == 0) break;
    std::vector<std::size_t> work;
    for (std::size_t t = 0; t < n; ++t) {
      if (in_work[t]) work.push_back(t);
    }
    const auto face = face_minimizer(a, g, work, y, K);
    if (!face) break;
    double step = face->ray ? kInf : 1.0;
    std::ptrdiff_t blocking = -1;
    double blocking_value = 0.0;
    for (std::size_t t : work) {
      const double d = face->alpha[t] - a[t];
      const double room = d < 0.0 ? a[t] / -d : d > 0.0 ? (C - a[t]) / d : kInf;
      if (room < step) {
        step = room;
        blocking = static_cast<std::ptrdiff_t>(t);
        blocking_value = d < 0.0 ? 0.0 : C;
      }
    }
    if (step == kInf) break;
    for (std::size_t t : work) {
      double v = (!face->ray && step >= 1.0) ? face->alpha[t] : a[t] + step * (face->alpha[t] - a[t]);
      if (v <= 1e-14 * C) v = 0.0;
      if (v >= C * (1.0 - 1e-14)) v = C;
      a[t] = v;
    }
    if (blocking >= 0) a[static_cast<std::size_t>(blocking)] = blocking_value;
    g = dual_gradient(a, y, K);
    if (face->ray || step < 1.0) {
      for (std::size_t t : work) {
        if (a[t] <= 0.0 || a[t] >= C) {
          in_work[t] = false;
          --work_size;
        }
      }
      continue;
    }
    if (!add_violators(face->nu)) break;  // optimal
  }

  DualSolution cand = sol;
  cand.alpha = std::move(a);
  finish(cand, g, y, C);
  cand.kkt_gap = kkt_gap(cand.alpha, g, y, C);
  if (cand.objective <= sol.objective && cand.kkt_gap <= std::max(sol.kkt_gap, tol)) {
    sol = std::move(cand);
    G = std::move(g);
  }
}

struct SmoRun {
  std::size_t iterations = 0;
  double gap = 0.0;
  bool converged = true;
};

// WSS2 SMO from the given point until the KKT gap drops below tol or
// max_iter updates have been made. a and G are updated in place.
SmoRun smo_loop(std::vector<double>& a, std::vector<double>& G, std::span<const double> y, double C, KernelRows& K,
                double tol, std::size_t max_iter) {
  const std::size_t n = a.size();
  std::size_t iter = 0;
  double gap = kInf;
  while (true) {
    // Maximal violating index i, then j by second-order gain.
    double gmax = -kInf;
    std::ptrdiff_t i = -1;
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] > 0.0) {
        if (a[t] < C && -G[t] >= gmax) {
          gmax = -G[t];
          i = static_cast<std::ptrdiff_t>(t);
        }
      } else if (a[t] > 0.0 && G[t] >= gmax) {
        gmax = G[t];
        i = static_cast<std::ptrdiff_t>(t);
      }
    }
    if (i < 0) {
      gap = 0.0;
      break;
    }
    const auto ui = static_cast<std::size_t>(i);
    const std::vector<double>& Ki = K.row(ui);
    double gmax2 = -kInf;
    double best = kInf;
    std::ptrdiff_t j = -1;
    for (std::size_t t = 0; t < n; ++t) {
      double grad_diff;
      if (y[t] > 0.0) {
        if (!(a[t] > 0.0)) continue;
        grad_diff = gmax + G[t];
        gmax2 = std::max(gmax2, G[t]);
      } else {
        if (!(a[t] < C)) continue;
        grad_diff = gmax - G[t];
        gmax2 = std::max(gmax2, -G[t]);
      }
      if (grad_diff > 0.0) {
        double quad = K.diag(ui) + K.diag(t) - 2.0 * Ki[t];
        if (quad <= 0.0) quad = kTau;
        const double gain = -(grad_diff * grad_diff) / quad;
        if (gain <= best) {
          best = gain;
          j = static_cast<std::ptrdiff_t>(t);
        }
      }
    }
    gap = gmax + gmax2;
    if (gap < tol || j < 0) break;
    if (iter >= max_iter) return {iter, gap, false};
    ++iter;

    const auto uj = static_cast<std::size_t>(j);
    const std::vector<double>& Kj = K.row(uj);
    const std::vector<double>& Ki2 = K.row(ui);  // may have been evicted by row(uj)
    const double old_i = a[ui], old_j = a[uj];
    double quad = K.diag(ui) + K.diag(uj) - 2.0 * Ki2[uj];
    if (quad <= 0.0) quad = kTau;
    if (y[ui] != y[uj]) {
      const double delta = (-G[ui] - G[uj]) / quad;
      const double diff = a[ui] - a[uj];
      a[ui] += delta;
      a[uj] += delta;
      if (diff > 0.0) {
        if (a[uj] < 0.0) {
          a[uj] = 0.0;
          a[ui] = diff;
        }
      } else if (a[ui] < 0.0) {
        a[ui] = 0.0;
        a[uj] = -diff;
      }
      if (diff > 0.0) {
        if (a[ui] > C) {
          a[ui] = C;
          a[uj] = C - diff;
        }
      } else if (a[uj] > C) {
        a[uj] = C;
        a[ui] = C + diff;
      }
    } else {
      const double delta = (G[ui] - G[uj]) / quad;
      const double sum = a[ui] + a[uj];
      a[ui] -= delta;
      a[uj] += delta;
      if (sum > C) {
        if (a[ui] > C) {
          a[ui] = C;
          a[uj] = sum - C;
        }
      } else if (a[uj] < 0.0) {
        a[uj] = 0.0;
        a[ui] = sum;
      }
      if (sum > C) {
        if (a[uj] > C) {
          a[uj] = C;
          a[ui] = sum - C;
        }
      } else if (a[ui] < 0.0) {
        a[ui] = 0.0;
        a[uj] = sum;
      }
    }
    const double di = (a[ui] - old_i) * y[ui];
    const double dj = (a[uj] - old_j) * y[uj];
    for (std::size_t t = 0; t < n; ++t) G[t] += y[t] * (Ki2[t] * di + Kj[t] * dj);
  }

  return {iter, gap, true};
}

}  // namespace

std::string_view kernel_name(KernelType k) { return k == KernelType::Linear ? "linear" : "rbf"; }

KernelType parse_kernel(std::string_view text) {
  if (text == "linear") return KernelType::Linear;
  if (text == "rbf") return KernelType::Rbf;
  throw InvalidParameter("kernel must be linear or rbf, got '" + std::string(text) + "'");
}

void SvmParams::validate() const {
  if (!(C > 0.0) || !std::isfinite(C)) throw InvalidParameter("C must be > 0");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw InvalidParameter("gamma must be >= 0");
  if (!(tol > 0.0)) throw InvalidParameter("tol must be > 0");
  if (max_iterations == 0) throw InvalidParameter("max_iterations must be > 0");
}

double kernel_value(KernelType kernel, double gamma, std::span<const double> a, std::span<const double> b) {
  if (kernel == KernelType::Linear) {
    double dot = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
    return dot;
  }
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    d2 += d * d;
  }
  return std::exp(-gamma * d2);
}

DualSolution solve_dual(const FeatureMatrix& x, std::span<const double> y, const SvmParams& params) {
  params.validate();
  const std::size_t n = x.rows;
  if (y.size() != n) throw StructuralError("label count does not match the feature table");
  bool has_pos = false, has_neg = false;
  for (double v : y) {
    if (v == 1.0) {
      has_pos = true;
    } else if (v == -1.0) {
      has_neg = true;
    } else {
      throw InvalidParameter("labels must be +1 or -1");
    }
  }
  if (!has_pos || !has_neg) throw InvalidParameter("training needs at least one event of each class");

  const double gamma = params.gamma > 0.0 ? params.gamma : 1.0 / static_cast<double>(std::max<std::size_t>(1, x.cols));
  const double C = params.C;
  KernelRows K(x, params.kernel, gamma, params.cache_mb);

  DualSolution sol;
  auto& a = sol.alpha;
  a.assign(n, 0.0);
  std::vector<double> G(n, -1.0);  // gradient of the dual objective, Qa - 1

  const std::size_t max_iter = std::max(params.max_iterations, std::size_t{100} * n);
  const auto run = smo_loop(a, G, y, C, K, params.tol, max_iter);
  if (!run.converged) {
    throw SolverError("SMO did not converge in " + std::to_string(run.iterations) + " iterations (KKT gap " +
                      format_exact(run.gap) + ", tol " + format_exact(params.tol) + ", n " + std::to_string(n) + ")");
  }
  std::size_t iter = run.iterations;
  const double gap = run.gap;
  finish(sol, G, y, C);
  sol.iterations = iter;
  sol.kkt_gap = gap;
  if (params.polish && n <= kMaxPolishPoints) {
    polish(sol, G, y, C, K, params.tol);
    if (sol.kkt_gap > kTightGap) {
      // Flat or badly conditioned duals, where the face solve cannot close
      // the gap: run SMO on to a tight tolerance (bounded), then polish again.
      DualSolution tight = sol;
      std::vector<double> g = G;
      const auto extra = smo_loop(tight.alpha, g, y, C, K, kTightGap, std::max<std::size_t>(1000, 20 * n));
      finish(tight, g, y, C);
      tight.kkt_gap = extra.gap;
      tight.iterations += extra.iterations;
      polish(tight, g, y, C, K, kTightGap);
      if (tight.objective <= sol.objective) {
        sol = std::move(tight);
        G = std::move(g);
      }
    }
  }
  return sol;
}

SvmModel train_svm(const FeatureMatrix& x, std::span<const EventClass> labels, const SvmParams& params,
                   std::span<const std::size_t> features) {
  params.validate();
  if (labels.size() != x.rows) throw StructuralError("label count does not match the feature table");
  SvmModel m;
  m.kernel = params.kernel;
  m.C = params.C;
  if (features.empty()) {
    m.features.resize(x.cols);
    std::iota(m.features.begin(), m.features.end(), std::size_t{0});
  } else {
    m.features.assign(features.begin(), features.end());
  }
  const FeatureMatrix sel = x.select_columns(m.features);
  m.scaler = Standardizer::fit(sel);
  const FeatureMatrix z = m.scaler.apply(sel);
  m.gamma = params.kernel == KernelType::Rbf
                ? (params.gamma > 0.0 ? params.gamma : 1.0 / static_cast<double>(m.features.size()))
                : 0.0;

  std::vector<double> y(labels.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = sign_of(labels[i]);
  SvmParams p = params;
  p.gamma = m.gamma;
  const DualSolution sol = solve_dual(z, y, p);

  m.support.cols = z.cols;
  for (std::size_t i = 0; i < z.rows; ++i) {
    if (sol.alpha[i] > 0.0) {
      m.support.append(z.row(i));
      m.coef.push_back(sol.alpha[i] * y[i]);
    }
  }
  m.bias = sol.bias;
  m.iterations = sol.iterations;

  double lo = kInf, hi = -kInf;
  for (std::size_t i = 0; i < z.rows; ++i) {
    double f = m.bias;
    for (std::size_t s = 0; s < m.coef.size(); ++s) f += m.coef[s] * kernel_value(m.kernel, m.gamma, m.support.row(s), z.row(i));
    lo = std::min(lo, f);
    hi = std::max(hi, f);
  }
  m.degenerate = hi - lo <= 1e-9 * (1.0 + std::abs(hi));
  return m;
}

SvmPrediction predict_svm(const SvmModel& model, std::span<const double> features) {
  std::vector<double> sel(model.features.size());
  for (std::size_t k = 0; k < sel.size(); ++k) {
    if (model.features[k] >= features.size()) throw StructuralError("feature vector too short for the model");
    sel[k] = features[model.features[k]];
  }
  const auto z = model.scaler.apply(sel);
  double f = model.bias;
  for (std::size_t s = 0; s < model.coef.size(); ++s) {
    f += model.coef[s] * kernel_value(model.kernel, model.gamma, model.support.row(s), z);
  }
  return {f > 0.0 ? EventClass::TrueImpact : EventClass::NonContact, f};
}

std::string format_svm(const SvmModel& m) {
  std::string out = "svm-model 1\nkernel ";
  out += kernel_name(m.kernel);
  out += "\ngamma " + format_exact(m.gamma);
  out += "\nC " + format_exact(m.C);
  out += "\nbias " + format_exact(m.bias);
  out += m.degenerate ? "\ndegenerate true" : "\ndegenerate false";
  out += "\niterations " + std::to_string(m.iterations);
  out += "\nfeatures " + std::to_string(m.features.size());
  for (auto f : m.features) out += " " + std::to_string(f);
  out += "\nmean";
  for (double v : m.scaler.mean) out += " " + format_exact(v);
  out += "\nsd";
  for (double v : m.scaler.sd) out += " " + format_exact(v);
  out += "\nsupport " + std::to_string(m.coef.size()) + "\n";
  for (std::size_t s = 0; s < m.coef.size(); ++s) {
    append_exact(out, m.coef[s]);
    for (double v : m.support.row(s)) {
      out += ' ';
      append_exact(out, v);
    }
    out += '\n';
  }
  out += "end\n";
  return out;
}

namespace {

std::vector<double> numbers_after(std::string_view line, std::string_view key, std::size_t expected) {
  if (!line.starts_with(key)) throw FormatError("expected '" + std::string(key) + "' line");
  auto parts = split(trim(line.substr(key.size())), ' ');
  if (parts.size() == 1 && parts[0].empty()) parts.clear();
  if (parts.size() != expected) throw FormatError("'" + std::string(key) + "' line has the wrong number of values");
  std::vector<double> out;
  for (auto p : parts) {
    const auto v = parse_number(p);
    if (!v || !std::isfinite(*v)) throw FormatError("bad number '" + std::string(p) + "' on '" + std::string(key) + "' line");
    out.push_back(*v);
  }
  return out;
}

std::string_view expect_line(LineReader& in) {
  auto l = in.next();
  if (!l) throw FormatError("svm model file is truncated");
  return *l;
}

}  // namespace

SvmModel parse_svm(std::string_view text) {
  LineReader in(text);
  if (expect_line(in) != "svm-model 1") throw FormatError("not an svm model file");
  SvmModel m;
  auto line = expect_line(in);
  if (!line.starts_with("kernel ")) throw FormatError("expected 'kernel' line");
  try {
    m.kernel = parse_kernel(line.substr(7));
  } catch (const InvalidParameter& e) {
    throw FormatError(e.what());
  }
  m.gamma = numbers_after(expect_line(in), "gamma", 1)[0];
  m.C = numbers_after(expect_line(in), "C", 1)[0];
  m.bias = numbers_after(expect_line(in), "bias", 1)[0];
  line = expect_line(in);
  if (line != "degenerate true" && line != "degenerate false") throw FormatError("expected 'degenerate' line");
  m.degenerate = line == "degenerate true";
  line = expect_line(in);
  const auto iters = line.starts_with("iterations ") ? parse_integer(line.substr(11)) : std::nullopt;
  if (!iters || *iters < 0) throw FormatError("expected 'iterations' line");
  m.iterations = static_cast<std::size_t>(*iters);

  line = expect_line(in);
  if (!line.starts_with("features ")) throw FormatError("expected 'features' line");
  const auto fparts = split(line.substr(9), ' ');
  const auto nf = parse_integer(fparts[0]);
  if (!nf || *nf <= 0 || fparts.size() != static_cast<std::size_t>(*nf) + 1) throw FormatError("bad 'features' line");
  for (std::size_t k = 1; k < fparts.size(); ++k) {
    const auto f = parse_integer(fparts[k]);
    if (!f || *f < 0) throw FormatError("bad feature index");
    m.features.push_back(static_cast<std::size_t>(*f));
  }
  m.scaler.mean = numbers_after(expect_line(in), "mean", m.features.size());
  m.scaler.sd = numbers_after(expect_line(in), "sd", m.features.size());
  for (double sd : m.scaler.sd) {
    if (!(sd > 0.0)) throw FormatError("standard deviations must be positive");
  }
  line = expect_line(in);
  const auto ns = line.starts_with("support ") ? parse_integer(line.substr(8)) : std::nullopt;
  if (!ns || *ns < 0) throw FormatError("expected 'support' line");
  m.support.cols = m.features.size();
  for (long long s = 0; s < *ns; ++s) {
    const auto parts = split(expect_line(in), ' ');
    if (parts.size() != m.features.size() + 1) throw FormatError("support vector line has the wrong length");
    std::vector<double> v;
    for (auto p : parts) {
      const auto d = parse_number(p);
      if (!d || !std::isfinite(*d)) throw FormatError("bad support vector value");
      v.push_back(*d);
    }
    m.coef.push_back(v[0]);
    m.support.append(std::span<const double>(v).subspan(1));
  }
  if (expect_line(in) != "end") throw FormatError("missing 'end'");
  return m;
}

void save_svm(const SvmModel& model, const std::filesystem::path& path) {
  dataset::write_text_file(path, format_svm(model));
}

SvmModel load_svm(const std::filesystem::path& path) { return parse_svm(dataset::read_text_file(path)); }

}  // namespace impact::svm
