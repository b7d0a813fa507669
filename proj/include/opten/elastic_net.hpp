#ifndef OPTEN_ELASTIC_NET_HPP
#define OPTEN_ELASTIC_NET_HPP

// Elastic-net solver for the reparametrized problem
//
//   z^t = argmin_z  t*||A z - y||_2^2 + (1-t)*(||z||_1 + alpha*||z||_2^2),
//   t in [0,1]
//
// solved by fixed-point iteration of the contractive soft-thresholding map
//
//   T_t(z) = S_{1-t}( t*(theta*I - A^T A) z + t*A^T y ) / (theta*t + (1-t)*alpha)
//
// whose Lipschitz constant is t*(sM^2 - sm^2) / (t*(sM^2 + sm^2) + 2*alpha*(1-t)) < 1
// for t < 1, with theta = (sm^2 + sM^2)/2. Boundary cases are handled without
// iterating: z^0 = 0, z^1 = A^dagger y, and z^t = 0 whenever
// t <= 1/(1 + 2*||A^T y||_inf). For orthogonal design (A^T A = I) the exact
// componentwise closed form is used instead.

#include "opten/core.hpp"

#include <algorithm>
#include <optional>

namespace opten {

/// Shrink-toward-zero operator sgn(u) * (|u| - tau/2)_+.
inline double soft_threshold(double u, double tau) {
  const double a = std::abs(u) - 0.5 * tau;
  if (a <= 0.0) return 0.0;
  return u > 0 ? a : -a;
}

inline Vec soft_threshold(const Vec& u, double tau) {
  Vec out(u.size());
  for (Index i = 0; i < u.size(); ++i) out(i) = soft_threshold(u(i), tau);
  return out;
}

struct SolveConfig {
  double fp_tol = 1e-10;  // fixed-point residual ||z - T_t(z)||_2 at exit
  int max_iter = 20000;
  std::optional<Vec> warm_start;
};

struct Solution {
  Vec z;
  double t = 0.0;
  int iterations = 0;
  bool converged = true;
  double fp_residual = 0.0;
};

/// Componentwise minimizer for orthogonal design (A^T A = I), with aty = A^T y:
///   z_i = (t*(1 + 2|aty_i|) - 1)_+ / (2*(t*(1-alpha) + alpha)) * sgn(aty_i).
/// The degenerate t = 0, alpha = 0 corner returns the zero vector.
inline Vec closed_form_orthogonal(const Vec& aty, double t, double alpha) {
  Vec z = Vec::Zero(aty.size());
  const double denom = 2.0 * (t * (1.0 - alpha) + alpha);
  if (denom <= 0.0) return z;
  for (Index i = 0; i < aty.size(); ++i) {
    const double num = t * (1.0 + 2.0 * std::abs(aty(i))) - 1.0;
    if (num > 0.0) z(i) = num / denom * (aty(i) > 0 ? 1.0 : (aty(i) < 0 ? -1.0 : 0.0));
  }
  return z;
}

/// Caches A^T A, A^T y and the pseudo-inverse solution so that many solves on
/// one instance (grids, line searches, probes) share the expensive products.
class EnetOperator {
 public:
  EnetOperator(const InverseProblem& prob, const SpectralData& spec)
      : A_(prob.A),
        aty_(prob.A.transpose() * prob.y),
        ata_(prob.A.transpose() * prob.A),
        pinv_y_(spec.pinv * prob.y),
        alpha_(prob.alpha),
        theta_(spec.theta),
        sigma_min_(spec.sigma_min),
        sigma_max_(spec.sigma_max) {
    orthogonal_ = (ata_ - Mat::Identity(ata_.rows(), ata_.cols())).cwiseAbs().maxCoeff() <= 1e-12;
    t_floor_ = 1.0 / (1.0 + 2.0 * aty_.cwiseAbs().maxCoeff());
  }

  /// Replaces A^T y (and the dependent quantities) for a new observation on
  /// the same forward matrix; used by noise-probe solves.
  void set_observation(const Vec& y, const SpectralData& spec) {
    aty_ = A_.transpose() * y;
    pinv_y_ = spec.pinv * y;
    t_floor_ = 1.0 / (1.0 + 2.0 * aty_.cwiseAbs().maxCoeff());
  }

  /// One application of the contraction map T_t.
  Vec step(const Vec& z, double t) const {
    Vec u = t * (theta_ * z - ata_ * z + aty_);
    u = soft_threshold(u, 1.0 - t);
    u /= theta_ * t + (1.0 - t) * alpha_;
    return u;
  }

  double lipschitz(double t) const {
    const double sm2 = sigma_min_ * sigma_min_, sM2 = sigma_max_ * sigma_max_;
    return t * (sM2 - sm2) / (t * (sM2 + sm2) + 2.0 * alpha_ * (1.0 - t));
  }

  double t_floor() const { return t_floor_; }
  bool orthogonal_design() const { return orthogonal_; }
  const Vec& aty() const { return aty_; }
  const Vec& pinv_y() const { return pinv_y_; }
  double alpha() const { return alpha_; }

  Solution solve(double t, const SolveConfig& cfg = {}) const {
    if (t < 0.0 || t > 1.0) throw std::invalid_argument("solve: t outside [0,1]");
    Solution sol;
    sol.t = t;
    const Index d = ata_.rows();
    if (t == 0.0) {
      sol.z = Vec::Zero(d);
      return sol;
    }
    if (t == 1.0) {
      sol.z = pinv_y_;
      return sol;
    }
    if (t <= t_floor_) {
      sol.z = Vec::Zero(d);
      return sol;
    }
    if (orthogonal_) {
      sol.z = closed_form_orthogonal(aty_, t, alpha_);
      return sol;
    }
    Vec z = cfg.warm_start && cfg.warm_start->size() == d ? *cfg.warm_start : Vec::Zero(d);
    Vec gz(d);
    const double denom = theta_ * t + (1.0 - t) * alpha_;
    const double tau = 1.0 - t;
    double res = std::numeric_limits<double>::infinity();
    int it = 0;
    while (it < cfg.max_iter) {
      gz.noalias() = ata_ * z;
      double acc = 0.0;
      for (Index i = 0; i < d; ++i) {
        const double next = soft_threshold(t * (theta_ * z(i) - gz(i) + aty_(i)), tau) / denom;
        const double diff = next - z(i);
        acc += diff * diff;
        z(i) = next;
      }
      res = std::sqrt(acc);
      ++it;
      if (res <= cfg.fp_tol) break;
    }
    sol.z = std::move(z);
    sol.iterations = it;
    sol.fp_residual = res;
    sol.converged = res <= cfg.fp_tol;
    return sol;
  }

 private:
  Mat A_;
  Vec aty_;
  Mat ata_;
  Vec pinv_y_;
  double alpha_, theta_, sigma_min_, sigma_max_;
  double t_floor_ = 0.0;
  bool orthogonal_ = false;
};

inline Vec contraction_step(const Vec& z, const InverseProblem& prob,
                            const SpectralData& spec, double t) {
  return EnetOperator(prob, spec).step(z, t);
}

inline Solution solve(const InverseProblem& prob, const SpectralData& spec, double t,
                      const SolveConfig& cfg = {}) {
  return EnetOperator(prob, spec).solve(t, cfg);
}

}  // namespace opten

#endif  // OPTEN_ELASTIC_NET_HPP
