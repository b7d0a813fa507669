#ifndef OPTEN_OPTEN_SEARCH_HPP
#define OPTEN_OPTEN_SEARCH_HPP

// OptEN: backtracking line search over a loss surface, started at t = 1.
//
// The minimizer of the empirical losses sits in a valley near t = 1 for
// moderate noise, so the search walks left from the boundary along the
// negated finite-difference derivative, with an Armijo acceptance test,
// quadratic interpolation on rejection, and a step-ratio safeguard. Iterates
// stay inside [t_floor, 1] where t_floor = 1/(1 + 2*||A^T y||_inf); below
// t_floor the loss is constant, so nothing is lost by clamping.

#include "opten/loss.hpp"

#include <functional>
#include <vector>

namespace opten {

struct OptENConfig {
  double epsilon = 1e-3;     // finite-difference half-width
  double tol = 1e-4;         // stop when |p_k| < tol
  double tol2 = 1e-8;        // step floor triggering the safeguard
  double alpha_step = 0.5;   // initial trial step, in (0,1)
  double c1 = 1e-4;          // Armijo constant
  double beta = 0.5;         // safeguard shrink factor, in (0,1)
  double gamma = 10.0;       // step-ratio guard
  int max_iter = 100;
};

enum class OptENStatus { gradient_converged, max_iter, boundary, eval_failed };

inline const char* to_string(OptENStatus s) {
  switch (s) {
    case OptENStatus::gradient_converged: return "gradient_converged";
    case OptENStatus::max_iter: return "max_iter";
    case OptENStatus::boundary: return "boundary";
    case OptENStatus::eval_failed: return "eval_failed";
  }
  return "?";
}

struct OptENIterate {
  double t = 0.0;      // iterate location
  double loss = 0.0;   // loss at t
  double deriv = 0.0;  // descent direction p_k = -D_eps loss(t)
  double step = 0.0;   // accepted step size s_k (0 on the final record)
};

struct OptENTrace {
  std::vector<OptENIterate> iterates;
  OptENStatus status = OptENStatus::max_iter;
};

struct OptENResult {
  double t_hat = 1.0;
  OptENTrace trace;
};

/// Line search over an arbitrary loss callable on [t_floor, 1]. All
/// evaluations happen inside [max(0, t_floor - epsilon), 1]; the one-sided
/// difference is used whenever t + epsilon would leave the domain.
inline OptENResult opten_line_search(const std::function<double(double)>& loss, double t_floor,
                                const OptENConfig& cfg = {}) {
  if (!(cfg.epsilon > 0) || !(cfg.tol > 0) || !(cfg.tol2 > 0) ||
      !(cfg.alpha_step > 0 && cfg.alpha_step < 1) || !(cfg.c1 > 0) ||
      !(cfg.beta > 0 && cfg.beta < 1) || !(cfg.gamma > 0) || cfg.max_iter < 1)
    throw std::invalid_argument("opten_line_search: bad config");
  t_floor = std::min(std::max(t_floor, 0.0), 1.0);

  OptENResult res;
  OptENTrace& trace = res.trace;
  const double eps = cfg.epsilon;

  double t = 1.0;
  double r1 = 0.0;
  bool have_r1 = false;

  auto safe_eval = [&](double at, double& out) {
    try {
      out = loss(std::min(1.0, std::max(std::max(0.0, t_floor - eps), at)));
      return true;
    } catch (...) {
      return false;
    }
  };

  // Descent direction p = -loss'(t), one-sided at the right boundary.
  auto direction = [&](double at, double& p) {
    if (at + eps > 1.0) {
      double left;
      if (!have_r1 && !safe_eval(at, r1)) return false;
      have_r1 = true;
      if (!safe_eval(at - eps, left)) return false;
      p = -(r1 - left) / eps;
    } else {
      double right, left;
      if (!safe_eval(at + eps, right) || !safe_eval(at - eps, left)) return false;
      p = -(right - left) / (2.0 * eps);
    }
    return true;
  };

  double p = 0.0;
  if (!safe_eval(t, r1)) {
    trace.status = OptENStatus::eval_failed;
    res.t_hat = t;
    return res;
  }
  have_r1 = true;
  if (!direction(t, p)) {
    trace.status = OptENStatus::eval_failed;
    trace.iterates.push_back({t, r1, 0.0, 0.0});
    res.t_hat = t;
    return res;
  }

  double s_prev = cfg.alpha_step;
  bool first_step = true;
  int k = 0;
  while (true) {
    if (std::abs(p) < cfg.tol) {
      trace.status = OptENStatus::gradient_converged;
      break;
    }
    // A direction pointing out of the feasible interval cannot be followed.
    if ((t >= 1.0 && p > 0.0) || (t <= t_floor && p < 0.0)) {
      trace.status = OptENStatus::boundary;
      break;
    }
    if (k >= cfg.max_iter) {
      trace.status = OptENStatus::max_iter;
      break;
    }

    const double phi0 = r1;
    const double dphi0 = -p * p;
    // The trial point is clamped into the feasible interval; the step that
    // was actually realized replaces alpha_step in the Armijo test and in the
    // interpolation, otherwise the quadratic model would be fit to a point it
    // never sampled and the search can ping-pong between the two walls.
    const double t_trial = std::min(1.0, std::max(t_floor, t + cfg.alpha_step * p));
    const double a_eff = (t_trial - t) / p;
    double phi1;
    if (!safe_eval(t_trial, phi1)) {
      trace.status = OptENStatus::eval_failed;
      break;
    }
    if (first_step) {
      s_prev = a_eff;  // reference step for the very first safeguard ratio
      first_step = false;
    }

    double s;
    if (phi1 - phi0 < cfg.c1 * dphi0 * a_eff) {
      s = a_eff;
    } else {
      s = -0.5 * dphi0 * a_eff * a_eff / (phi1 - phi0 - dphi0 * a_eff);
    }
    if (std::abs(s) < cfg.tol2 || std::abs(s_prev / s) > cfg.gamma) s = s_prev * cfg.beta;

    double t_next = std::min(1.0, std::max(t_floor, t + s * p));
    // Landing exactly on a wall from the interior collapses the state and can
    // close a cycle (the wall bounces the next step straight back). Halve the
    // distance instead; if the minimum really hugs the wall the iterates still
    // approach it geometrically.
    if (t_next == 1.0 && t < 1.0) t_next = 0.5 * (t + 1.0);
    if (t_next == t_floor && t > t_floor) t_next = 0.5 * (t + t_floor);
    trace.iterates.push_back({t, r1, p, s});
    s_prev = s;
    t = t_next;
    ++k;

    if (!safe_eval(t, r1)) {
      trace.status = OptENStatus::eval_failed;
      break;
    }
    if (!direction(t, p)) {
      trace.status = OptENStatus::eval_failed;
      break;
    }
  }

  trace.iterates.push_back({t, r1, p, 0.0});
  res.t_hat = t;
  return res;
}

inline OptENResult opten_select(const LossSurface& surface, const OptENConfig& cfg = {}) {
  return opten_line_search([&surface](double t) { return surface.eval(t); }, surface.t_floor(), cfg);
}

}  // namespace opten

#endif  // OPTEN_OPTEN_SEARCH_HPP
