#ifndef OPTEN_SUBSPACE_HPP
#define OPTEN_SUBSPACE_HPP

// Learned prior from noisy training observations: empirical (non-centered)
// covariance, top-h eigenprojection, the empirical estimator
// xhat = A^dagger * Pi_hat * y, and spectral criteria for picking h.

#include "opten/core.hpp"

#include <Eigen/Eigenvalues>

#include <string>
#include <vector>

namespace opten {

struct CovarianceEstimate {
  Mat matrix;        // (1/N) * sum_i y_i y_i^T
  Vec eigenvalues;   // descending, negatives clamped to 0
  Mat eigenvectors;  // orthonormal columns, paired with eigenvalues
};

/// Rows of `samples` are the observations y_1..y_N.
inline CovarianceEstimate empirical_covariance(const Mat& samples) {
  if (samples.rows() < 1 || samples.cols() < 1)
    throw std::invalid_argument("empirical_covariance: need at least one sample");
  CovarianceEstimate out;
  out.matrix = samples.transpose() * samples / double(samples.rows());
  Eigen::SelfAdjointEigenSolver<Mat> eig(out.matrix);
  const Index m = out.matrix.rows();
  out.eigenvalues = Vec(m);
  out.eigenvectors = Mat(m, m);
  for (Index i = 0; i < m; ++i) {  // ascending -> descending
    out.eigenvalues(i) = std::max(0.0, eig.eigenvalues()(m - 1 - i));
    out.eigenvectors.col(i) = eig.eigenvectors().col(m - 1 - i);
  }
  return out;
}

inline CovarianceEstimate empirical_covariance(const std::vector<Vec>& samples) {
  if (samples.empty()) throw std::invalid_argument("empirical_covariance: no samples");
  const Index m = samples.front().size();
  Mat S(static_cast<Index>(samples.size()), m);
  for (size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].size() != m)
      throw std::invalid_argument("empirical_covariance: inconsistent sample lengths");
    S.row(static_cast<Index>(i)) = samples[i].transpose();
  }
  return empirical_covariance(S);
}

struct SubspaceModel {
  int h = 0;
  Mat projection;  // orthogonal projector onto the span of the top-h eigenvectors
  CovarianceEstimate source;
};

inline SubspaceModel top_h_projection(const CovarianceEstimate& cov, int h) {
  const Index m = cov.matrix.rows();
  if (h < 1 || h > m) throw std::invalid_argument("top_h_projection: h out of range");
  SubspaceModel model;
  model.h = h;
  const Mat V = cov.eigenvectors.leftCols(h);
  model.projection = V * V.transpose();
  model.source = cov;
  return model;
}

/// xhat = pinv * (Pi_hat * y). Satisfies A*xhat + Q*(y - Pi_hat*y) = Q*y.
inline Vec empirical_estimator(const SpectralData& spec, const SubspaceModel& model,
                               const Vec& y) {
  if (y.size() != model.projection.rows() || spec.pinv.cols() != y.size())
    throw std::invalid_argument("empirical_estimator: dimension mismatch");
  return spec.pinv * (model.projection * y);
}

// ---------------------------------------------------------------------------
// Spectral criteria for the intrinsic dimension h. Indices are 1-based and the
// returned k means "keep the top k eigenvectors"; ties break to the smallest k.

enum class HCriterionKind {
  spectral_gap,             // argmax_k (l_k - l_{k+1})
  relative_gap,             // argmax_k (1 - l_{k+1}/l_k)
  cum_energy,               // smallest k with sum_{i<=k} l_i / sum l_i >= threshold
  rel_cum_energy,           // smallest k with sum_{i<=k} l_i / sum_{i<=k+1} l_i >= threshold
  relative_gap_restricted,  // relative_gap over k <= floor(restrict_fraction * m)
};

struct HCriterion {
  HCriterionKind kind = HCriterionKind::relative_gap_restricted;
  double threshold = 0.95;        // energy criteria
  double restrict_fraction = 0.5; // restricted relative gap
  // Opt-in fidelity switch: evaluate the relative gap as 1 - l_k/l_{k+1}
  // (negative on descending spectra) instead of the corrected 1 - l_{k+1}/l_k.
  bool printed_relative_gap = false;
};

inline HCriterionKind parse_h_criterion(const std::string& name) {
  if (name == "spectral_gap") return HCriterionKind::spectral_gap;
  if (name == "relative_gap") return HCriterionKind::relative_gap;
  if (name == "cum_energy") return HCriterionKind::cum_energy;
  if (name == "rel_cum_energy") return HCriterionKind::rel_cum_energy;
  if (name == "relative_gap_restricted") return HCriterionKind::relative_gap_restricted;
  throw std::invalid_argument("unknown h criterion: " + name);
}

inline int estimate_h(const CovarianceEstimate& cov, const HCriterion& crit) {
  const Vec& l = cov.eigenvalues;
  const Index m = l.size();
  if (m < 2) throw std::invalid_argument("estimate_h: need m >= 2");
  if (l.maxCoeff() <= 0.0) throw std::invalid_argument("estimate_h: degenerate spectrum");

  auto argmax_gap = [&](Index k_max, bool relative) {
    int best_k = 1;
    double best = -std::numeric_limits<double>::infinity();
    for (Index k = 1; k <= k_max; ++k) {
      const double lk = l(k - 1), lk1 = l(k);
      double g;
      if (!relative) {
        g = lk - lk1;
      } else if (crit.printed_relative_gap) {
        g = lk1 > 0.0 ? 1.0 - lk / lk1 : 0.0;
      } else {
        g = lk > 0.0 ? 1.0 - lk1 / lk : 0.0;
      }
      if (g > best) { best = g; best_k = static_cast<int>(k); }
    }
    return best_k;
  };

  switch (crit.kind) {
    case HCriterionKind::spectral_gap:
      return argmax_gap(m - 1, false);
    case HCriterionKind::relative_gap:
      return argmax_gap(m - 1, true);
    case HCriterionKind::relative_gap_restricted: {
      const Index k_max = std::max<Index>(1, std::min<Index>(m - 1,
          static_cast<Index>(std::floor(crit.restrict_fraction * double(m)))));
      return argmax_gap(k_max, true);
    }
    case HCriterionKind::cum_energy: {
      const double total = l.sum();
      double run = 0.0;
      for (Index k = 1; k <= m; ++k) {
        run += l(k - 1);
        if (run / total >= crit.threshold) return static_cast<int>(k);
      }
      return static_cast<int>(m);
    }
    case HCriterionKind::rel_cum_energy: {
      double run = 0.0;
      for (Index k = 1; k <= m - 1; ++k) {
        run += l(k - 1);
        const double next = run + l(k);
        if (next <= 0.0) return static_cast<int>(k);
        if (run / next >= crit.threshold) return static_cast<int>(k);
      }
      return static_cast<int>(m);
    }
  }
  return 1;
}

}  // namespace opten

#endif  // OPTEN_SUBSPACE_HPP
