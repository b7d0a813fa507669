#ifndef OPTEN_LOSS_HPP
#define OPTEN_LOSS_HPP

// Quadratic loss surfaces over the regularization parameter t, plus analytic
// minimizers for identity design and for the Rademacher-noise model. The four
// kinds, all squared Euclidean distances of the solution z^t:
//
//   true_loss  R(t)    = ||z^t - x||^2
//   empirical  Rh(t)   = ||z^t - xhat||^2
//   projected  Rp(t)   = ||P z^t - xhat||^2      (P = A^dagger A)
//   modified   Rm(t)   = ||A z^t - Pi_hat y||^2
//
// The projected/modified variants discard the part of z^t in Null(A), which
// cannot be estimated from data and otherwise drowns the empirical surface
// for non-injective forward matrices.

#include "opten/core.hpp"
#include "opten/elastic_net.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace opten {

enum class LossKind { true_loss, empirical, projected, modified };

inline const char* to_string(LossKind k) {
  switch (k) {
    case LossKind::true_loss: return "true";
    case LossKind::empirical: return "empirical";
    case LossKind::projected: return "projected";
    case LossKind::modified: return "modified";
  }
  return "?";
}

class LossSurface {
 public:
  /// `reference` is x for true_loss and xhat otherwise; `pi_y` (Pi_hat * y) is
  /// only consumed by the modified kind and may be empty for the others.
  LossSurface(LossKind kind, const InverseProblem& prob, const SpectralData& spec,
              Vec reference, Vec pi_y = Vec(), SolveConfig cfg = {})
      : kind_(kind),
        op_(prob, spec),
        A_(prob.A),
        P_(spec.P),
        reference_(std::move(reference)),
        pi_y_(std::move(pi_y)),
        cfg_(std::move(cfg)) {
    if (kind_ == LossKind::modified && pi_y_.size() != prob.y.size())
      throw std::invalid_argument("LossSurface: modified kind needs Pi_hat*y");
    if (kind_ != LossKind::modified && reference_.size() != prob.A.cols())
      throw std::invalid_argument("LossSurface: reference length must be d");
  }

  double eval(double t) const {
    SolveConfig cfg = cfg_;
    if (warm_start_ && warm_.size() > 0) cfg.warm_start = warm_;
    Solution sol = op_.solve(t, cfg);
    if (warm_start_) warm_ = sol.z;
    last_converged_ = sol.converged;
    switch (kind_) {
      case LossKind::true_loss:
      case LossKind::empirical:
        return (sol.z - reference_).squaredNorm();
      case LossKind::projected:
        return (P_ * sol.z - reference_).squaredNorm();
      case LossKind::modified:
        return (A_ * sol.z - pi_y_).squaredNorm();
    }
    return 0.0;
  }

  double operator()(double t) const { return eval(t); }

  double t_floor() const { return op_.t_floor(); }
  LossKind kind() const { return kind_; }
  bool last_eval_converged() const { return last_converged_; }
  const EnetOperator& op() const { return op_; }

  /// Warm starts reuse the previous solution as the next initializer. The
  /// minimizer is unique, so results are unchanged; disable for parallel
  /// evaluation of grid points.
  void set_warm_start(bool on) const { warm_start_ = on; if (!on) warm_.resize(0); }

 private:
  LossKind kind_;
  EnetOperator op_;
  Mat A_;
  Mat P_;
  Vec reference_;
  Vec pi_y_;
  SolveConfig cfg_;
  mutable Vec warm_;
  mutable bool warm_start_ = true;
  mutable bool last_converged_ = true;
};

/// Exhaustive search over {0, step, 2*step, ..., 1}; ties break to the
/// smallest t. Returns (argmin, min value).
inline std::pair<double, double> grid_minimize(const std::function<double(double)>& f,
                                               double grid_step) {
  if (!(grid_step > 0.0 && grid_step <= 0.5))
    throw std::invalid_argument("grid_minimize: step outside (0, 0.5]");
  double best_t = 0.0, best_v = std::numeric_limits<double>::infinity();
  const long n = static_cast<long>(std::floor(1.0 / grid_step));
  for (long k = 0; k <= n; ++k) {
    const double t = std::min(1.0, k * grid_step);
    const double v = f(t);
    if (v < best_v) { best_v = v; best_t = t; }
  }
  if (n * grid_step < 1.0) {
    const double v = f(1.0);
    if (v < best_v) { best_v = v; best_t = 1.0; }
  }
  return {best_t, best_v};
}

inline std::pair<double, double> grid_minimize(const LossSurface& surface, double grid_step) {
  return grid_minimize([&surface](double t) { return surface.eval(t); }, grid_step);
}

// ---------------------------------------------------------------------------
// Identity-design analysis. With A = I and |y_1| >= ... >= |y_m| the loss is
// differentiable between the breakpoints 1/b_i, b_i = 1 + 2|y_i|.

struct BreakpointSet {
  Vec edges;  // b_i, non-increasing

  /// Closure of the k-th differentiability interval, k = 0..m:
  /// I_0 = [0, 1/b_1], I_k = [1/b_k, 1/b_{k+1}], I_m = [1/b_m, 1].
  std::pair<double, double> interval(int k) const {
    const int m = static_cast<int>(edges.size());
    const double lo = (k == 0) ? 0.0 : 1.0 / edges(k - 1);
    const double hi = (k >= m) ? 1.0 : 1.0 / edges(k);
    return {lo, hi};
  }
};

/// Expects |y| already sorted in non-increasing order.
inline BreakpointSet breakpoints(const Vec& y_sorted) {
  BreakpointSet bp;
  bp.edges = Vec(y_sorted.size());
  for (Index i = 0; i < y_sorted.size(); ++i) bp.edges(i) = 1.0 + 2.0 * std::abs(y_sorted(i));
  return bp;
}

/// Stationary point of the identity-design loss restricted to interval I_k,
/// clamped to its closure. `y` must be sorted by non-increasing magnitude and
/// `reference` permuted accordingly (x for the true loss, xhat for the
/// empirical one). k = 0 returns 0, where the loss is constant.
inline double interval_minimizer(int k, const Vec& y, const Vec& reference, double alpha) {
  const int m = static_cast<int>(y.size());
  if (k < 0 || k > m) throw std::invalid_argument("interval_minimizer: k out of range");
  if (reference.size() != y.size())
    throw std::invalid_argument("interval_minimizer: length mismatch");
  const BreakpointSet bp = breakpoints(y);
  if (k == 0) return 0.0;
  double num = 0.0, den = 0.0;
  for (int i = 0; i < k; ++i) {
    const double yi = y(i), xi = reference(i);
    const double s = yi > 0 ? 1.0 : (yi < 0 ? -1.0 : 0.0);
    const double a = s * (1.0 + 2.0 * alpha * std::abs(yi));
    const double c = s + 2.0 * xi * (alpha - 1.0) + 2.0 * yi;
    const double d = s + 2.0 * alpha * xi;
    num += a * d;
    den += a * c;
  }
  const auto [lo, hi] = bp.interval(k);
  if (den == 0.0) return hi;
  const double stat = num / den;
  return std::min(hi, std::max(lo, stat));
}

/// Evaluates the identity-design loss at every interval minimizer and returns
/// the best location (smallest t on ties).
inline double analytic_minimizer_identity(const Vec& y, const Vec& reference, double alpha) {
  const int m = static_cast<int>(y.size());
  auto loss_at = [&](double t) {
    return (closed_form_orthogonal(y, t, alpha) - reference).squaredNorm();
  };
  // Interval minimizers are non-decreasing in k, so a strict improvement test
  // keeps the smallest t among ties.
  double best_t = 0.0, best_v = loss_at(0.0);
  for (int k = 1; k <= m; ++k) {
    const double t = interval_minimizer(k, y, reference, alpha);
    const double v = loss_at(t);
    if (v < best_v) { best_v = v; best_t = t; }
  }
  return best_t;
}

// ---------------------------------------------------------------------------
// Closed forms for the Rademacher-noise model: y = x + sigma*w with
// w_i in {-1,+1}, support on the first h coordinates, |x_i| >= 2*sigma there,
// and alpha = 1. b_i = 1 + 2|y_i| equals 2|x_i +- sigma| + 1 on the support
// and 2*sigma + 1 off it.

/// Minimizer of the true loss: min{t*, 1} with
/// t* = [sum_{i<=h} b_i (1 + 2 sgn(y_i) x_i) + (m-h) b_off]
///      / [sum_{i<=h} b_i^2 + (m-h) b_off^2].
inline double bernoulli_tstar(const Vec& x, const Vec& y, double sigma, int h) {
  const Index m = x.size();
  if (y.size() != m || h < 1 || h > m)
    throw std::invalid_argument("bernoulli_tstar: bad sizes");
  if (sigma < 0.0) throw std::invalid_argument("bernoulli_tstar: sigma < 0");
  for (Index i = 0; i < m; ++i) {
    if (std::abs(std::abs(y(i) - x(i)) - sigma) > 1e-12)
      throw std::invalid_argument("bernoulli_tstar: noise is not +-sigma");
    if (i >= h && x(i) != 0.0)
      throw std::invalid_argument("bernoulli_tstar: support must be the first h entries");
    if (i < h && std::abs(x(i)) < 2.0 * sigma)
      throw std::invalid_argument("bernoulli_tstar: need |x_i| >= 2*sigma on the support");
  }
  const double b_off = 1.0 + 2.0 * sigma;
  double num = (m - h) * b_off;
  double den = (m - h) * b_off * b_off;
  for (Index i = 0; i < h; ++i) {
    const double b = 1.0 + 2.0 * std::abs(y(i));
    const double s = y(i) > 0 ? 1.0 : (y(i) < 0 ? -1.0 : 0.0);
    num += b * (1.0 + 2.0 * s * x(i));
    den += b * b;
  }
  const double tstar = num / den;
  return std::min(1.0, std::max(tstar, 1.0 / b_off));
}

/// Stationary point of the empirical loss on the same instance:
/// that* = t* + sum_i b_i sgn(y_i)(x_i - xhat_i) / sum_{b_i > 1/t*} b_i^2.
inline double bernoulli_that(double tstar, const Vec& x, const Vec& xhat, const Vec& y,
                             int h) {
  const Index m = x.size();
  if (xhat.size() != m || y.size() != m || h < 1 || h > m)
    throw std::invalid_argument("bernoulli_that: bad sizes");
  double num = 0.0, den = 0.0;
  for (Index i = 0; i < m; ++i) {
    const double b = 1.0 + 2.0 * std::abs(y(i));
    const double s = y(i) > 0 ? 1.0 : (y(i) < 0 ? -1.0 : 0.0);
    num += b * s * (x(i) - xhat(i));
    if (b > 1.0 / tstar) den += b * b;
  }
  if (den == 0.0) throw std::invalid_argument("bernoulli_that: empty denominator set");
  return tstar + num / den;
}

}  // namespace opten

#endif  // OPTEN_LOSS_HPP
