#ifndef OPTEN_RULES_HPP
#define OPTEN_RULES_HPP

// Classical parameter-selection rules, all operating on a warm-started
// solution path over the geometric grid t_n = 1/(1 + mu0 * q^n).

#include "opten/core.hpp"
#include "opten/elastic_net.hpp"

#include <chrono>
#include <random>
#include <string>
#include <vector>

namespace opten {

struct ParamGrid {
  double mu0 = 1.0;
  double q = 0.95;
  int n_max = 100;
  std::vector<double> values;  // t_n for n = 0..n_max
};

inline ParamGrid build_grid(double mu0 = 1.0, double q = 0.95, int n_max = 100) {
  if (!(mu0 > 0.0) || !(q > 0.0) || n_max < 0)
    throw std::invalid_argument("build_grid: need mu0 > 0, q > 0, n_max >= 0");
  ParamGrid g{mu0, q, n_max, {}};
  g.values.resize(static_cast<size_t>(n_max) + 1);
  double qn = 1.0;
  for (int n = 0; n <= n_max; ++n) {
    g.values[static_cast<size_t>(n)] = 1.0 / (1.0 + mu0 * qn);
    qn *= q;
  }
  return g;
}

struct RegPath {
  ParamGrid grid;
  std::vector<Vec> solutions;     // z_n, length d each
  std::vector<double> residuals;  // ||A z_n - y||_2
  std::vector<bool> converged;
  Index m = 0;  // observation length, for noise-level bounds

  int n_max() const { return static_cast<int>(solutions.size()) - 1; }
};

/// Sweeps the grid in order, warm-starting every solve from the previous
/// solution.
inline RegPath solution_path(const InverseProblem& prob, const SpectralData& spec,
                             const ParamGrid& grid, const SolveConfig& cfg = {}) {
  if (grid.values.empty()) throw std::invalid_argument("solution_path: empty grid");
  EnetOperator op(prob, spec);
  RegPath path;
  path.grid = grid;
  path.m = prob.m();
  path.solutions.reserve(grid.values.size());
  SolveConfig c = cfg;
  for (double t : grid.values) {
    if (t < 0.0 || t > 1.0) throw std::invalid_argument("solution_path: t outside [0,1]");
    Solution sol = op.solve(t, c);
    c.warm_start = sol.z;
    path.residuals.push_back((prob.A * sol.z - prob.y).norm());
    path.converged.push_back(sol.converged);
    path.solutions.push_back(std::move(sol.z));
  }
  return path;
}

struct RuleOutcome {
  std::string rule;
  int n_star = 0;
  double t = 0.0;
  double wall_time = 0.0;
  bool warning = false;  // set when a rule had to fall back to n_max
};

namespace detail {
class StopWatch {
 public:
  StopWatch() : t0_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }
 private:
  std::chrono::steady_clock::time_point t0_;
};

inline RuleOutcome make_outcome(std::string rule, const RegPath& path, int n,
                                const StopWatch& sw, bool warning = false) {
  return {std::move(rule), n, path.grid.values[static_cast<size_t>(n)], sw.seconds(), warning};
}
}  // namespace detail

/// Discrepancy principle [DP]: the first n whose residual reaches the noise
/// level tau * sigma * sqrt(m). Falls back to n_max (flagged) if none does.
inline RuleOutcome discrepancy(const RegPath& path, double sigma, double tau = 1.0) {
  detail::StopWatch sw;
  if (sigma < 0.0) throw std::invalid_argument("discrepancy: sigma < 0");
  const double bound = tau * sigma * std::sqrt(double(path.m));
  for (int n = 0; n <= path.n_max(); ++n)
    if (path.residuals[static_cast<size_t>(n)] <= bound)
      return detail::make_outcome("dp", path, n, sw);
  return detail::make_outcome("dp", path, path.n_max(), sw, true);
}

/// Monotone error rule [ME]: the first n for which the error can be certified
/// to decrease,
///   <A z_n - y, pinv^T (z_n - z_{n+1})> / ||pinv^T (z_n - z_{n+1})|| <= tau sigma sqrt(m).
/// A zero denominator at a given n falls back to the discrepancy test there.
inline RuleOutcome monotone_error(const RegPath& path, const InverseProblem& prob,
                                  const Mat& pinv_T, double sigma, double tau = 1.0) {
  detail::StopWatch sw;
  const double bound = tau * sigma * std::sqrt(double(path.m));
  for (int n = 0; n < path.n_max(); ++n) {
    const Vec diff = path.solutions[static_cast<size_t>(n)] - path.solutions[static_cast<size_t>(n) + 1];
    const Vec v = pinv_T * diff;
    const double den = v.norm();
    const Vec resid = prob.A * path.solutions[static_cast<size_t>(n)] - prob.y;
    if (den == 0.0) {
      if (resid.norm() <= bound) return detail::make_outcome("me", path, n, sw);
      continue;
    }
    if (resid.dot(v) / den <= bound) return detail::make_outcome("me", path, n, sw);
  }
  return detail::make_outcome("me", path, path.n_max(), sw, true);
}

/// Quasi-optimality [QO]: argmin_n ||z_n - z_{n+1}||, smallest n on ties.
inline RuleOutcome quasi_optimality(const RegPath& path) {
  detail::StopWatch sw;
  if (path.n_max() < 1) throw std::invalid_argument("quasi_optimality: need n_max >= 1");
  int best = 0;
  double best_v = std::numeric_limits<double>::infinity();
  for (int n = 0; n < path.n_max(); ++n) {
    const double v =
        (path.solutions[static_cast<size_t>(n)] - path.solutions[static_cast<size_t>(n) + 1]).norm();
    if (v < best_v) { best_v = v; best = n; }
  }
  return detail::make_outcome("qo", path, best, sw);
}

/// L-curve [LC]: argmin_n residual_n * ||z_n||, smallest n on ties.
inline RuleOutcome l_curve(const RegPath& path) {
  detail::StopWatch sw;
  int best = 0;
  double best_v = std::numeric_limits<double>::infinity();
  for (int n = 0; n <= path.n_max(); ++n) {
    const double v = path.residuals[static_cast<size_t>(n)] * path.solutions[static_cast<size_t>(n)].norm();
    if (v < best_v) { best_v = v; best = n; }
  }
  return detail::make_outcome("lc", path, best, sw);
}

/// Monte-Carlo balancing principle [BP]: smallest n with
///   ||z_n - z_k|| <= 4 kappa sigma rho(k)  for every k in [n, n_max],
/// where rho(k)^2 is the mean of ||A_k^{-1} xi||^2 over `probes` Gaussian
/// noise vectors xi and A_k^{-1} is the elastic-net solution map at t_k.
/// The probe vectors are drawn once and each is swept over the grid with warm
/// starts.
inline RuleOutcome balancing(const RegPath& path, const InverseProblem& prob,
                             const SpectralData& spec, double sigma, double kappa = 0.25,
                             int probes = 4, std::uint64_t rng_seed = 0) {
  detail::StopWatch sw;
  if (probes < 1) throw std::invalid_argument("balancing: probes >= 1 required");
  const int n_max = path.n_max();
  std::mt19937_64 rng(rng_seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<double> rho2(static_cast<size_t>(n_max) + 1, 0.0);
  EnetOperator op(prob, spec);
  for (int j = 0; j < probes; ++j) {
    Vec xi(prob.m());
    for (Index i = 0; i < xi.size(); ++i) xi(i) = gauss(rng);
    op.set_observation(xi, spec);
    SolveConfig c;
    for (int k = 0; k <= n_max; ++k) {
      Solution sol = op.solve(path.grid.values[static_cast<size_t>(k)], c);
      c.warm_start = sol.z;
      rho2[static_cast<size_t>(k)] += sol.z.squaredNorm();
    }
  }
  for (double& r : rho2) r /= double(probes);

  for (int n = 0; n <= n_max; ++n) {
    bool ok = true;
    for (int k = n; k <= n_max; ++k) {
      const double bound = 4.0 * kappa * sigma * std::sqrt(rho2[static_cast<size_t>(k)]);
      if ((path.solutions[static_cast<size_t>(n)] - path.solutions[static_cast<size_t>(k)]).norm() > bound) {
        ok = false;
        break;
      }
    }
    if (ok) return detail::make_outcome("bp", path, n, sw);
  }
  return detail::make_outcome("bp", path, n_max, sw, true);
}

/// Elastic-net balancing principle [ENBP], on its own grid (t_0 = 0.05,
/// q = 1.05): scan k = n_max-1 .. 0 and stop at the first k where consecutive
/// solutions are farther apart than 4C / (sqrt(d) * alpha * mu0 * q^{k+1});
/// the selected index is k+1, or 0 if the bound never fails.
inline RuleOutcome en_balancing(const RegPath& path_enbp, double C, double alpha, int d) {
  detail::StopWatch sw;
  if (!(C > 0.0)) throw std::invalid_argument("en_balancing: C must be positive");
  const int n_max = path_enbp.n_max();
  const double mu0 = path_enbp.grid.mu0, q = path_enbp.grid.q;
  for (int k = n_max - 1; k >= 0; --k) {
    const double lambda_next = mu0 * std::pow(q, k + 1);
    const double bound = 4.0 * C / (std::sqrt(double(d)) * alpha * lambda_next);
    const double dist = (path_enbp.solutions[static_cast<size_t>(k)] -
                         path_enbp.solutions[static_cast<size_t>(k) + 1]).norm();
    if (dist > bound) return detail::make_outcome("enbp", path_enbp, k + 1, sw);
  }
  return detail::make_outcome("enbp", path_enbp, 0, sw);
}

/// Monte-Carlo generalized cross-validation [GCV]:
///   argmin_n (m^{-1} residual_n^2) / (m^{-1} (m - est_n))^2,
/// where est_n estimates trace(A * A_n^{-1}) from one Gaussian probe delta by
/// the directional difference  delta^T A (z(y + eps*delta) - z(y)) / eps.
/// Indices whose estimate reaches m are excluded (flagged).
inline RuleOutcome gcv_mc(const RegPath& path, const InverseProblem& prob,
                          const SpectralData& spec, double probe_eps = -1.0,
                          std::uint64_t rng_seed = 0) {
  detail::StopWatch sw;
  if (probe_eps <= 0.0) probe_eps = 1e-4 * (1.0 + prob.y.norm());
  const int n_max = path.n_max();
  const double m = double(path.m);
  std::mt19937_64 rng(rng_seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  EnetOperator op(prob, spec);
  int best = -1;
  double best_v = std::numeric_limits<double>::infinity();
  bool excluded = false;
  for (int n = 0; n <= n_max; ++n) {
    Vec delta(prob.m());
    for (Index i = 0; i < delta.size(); ++i) delta(i) = gauss(rng);
    op.set_observation(prob.y + probe_eps * delta, spec);
    SolveConfig c;
    c.warm_start = path.solutions[static_cast<size_t>(n)];
    Solution pert = op.solve(path.grid.values[static_cast<size_t>(n)], c);
    const double est =
        delta.dot(prob.A * (pert.z - path.solutions[static_cast<size_t>(n)])) / probe_eps;
    if (est >= m) {
      excluded = true;
      continue;
    }
    const double resid2 = path.residuals[static_cast<size_t>(n)] * path.residuals[static_cast<size_t>(n)];
    const double denom = (m - est) / m;
    const double v = (resid2 / m) / (denom * denom);
    if (v < best_v) { best_v = v; best = n; }
  }
  if (best < 0) return detail::make_outcome("gcv", path, n_max, sw, true);
  return detail::make_outcome("gcv", path, best, sw, excluded);
}

/// Nonlinear GCV [NGCV]: argmin_n residual_n^2 / (m^{-1} (1 - d*s_n/m)^2) with
/// s_n = ||z_n||_g / ||z_dagger||_g and ||u||_g = ||u||_1 + alpha ||u||_2^2.
inline RuleOutcome ngcv(const RegPath& path, const InverseProblem& prob, const Vec& z_dagger) {
  detail::StopWatch sw;
  const double alpha = prob.alpha;
  auto gamma_norm = [alpha](const Vec& u) { return u.lpNorm<1>() + alpha * u.squaredNorm(); };
  const double ref = gamma_norm(z_dagger);
  if (ref == 0.0) throw std::invalid_argument("ngcv: z_dagger has zero norm");
  const double m = double(path.m);
  const double d = double(z_dagger.size());
  int best = 0;
  double best_v = std::numeric_limits<double>::infinity();
  for (int n = 0; n <= path.n_max(); ++n) {
    const double s = gamma_norm(path.solutions[static_cast<size_t>(n)]) / ref;
    const double factor = 1.0 - d * s / m;
    const double v = path.residuals[static_cast<size_t>(n)] * path.residuals[static_cast<size_t>(n)] /
                     (factor * factor / m);
    if (v < best_v) { best_v = v; best = n; }
  }
  return detail::make_outcome("ngcv", path, best, sw);
}

}  // namespace opten

#endif  // OPTEN_RULES_HPP
