#ifndef OPTEN_CORE_HPP
#define OPTEN_CORE_HPP

// Core domain types shared by all modules: the inverse problem instance,
// ground truth for synthetic trials, and spectral data of the forward matrix.

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>

namespace opten {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr const char* kVersion = "0.1.0";

/// Linear observation model y = A x + sigma w with elastic-net mixing alpha.
/// Immutable after construction; safe to share across threads.
struct InverseProblem {
  Mat A;
  Vec y;
  double alpha = 1.0;

  InverseProblem(Mat A_, Vec y_, double alpha_)
      : A(std::move(A_)), y(std::move(y_)), alpha(alpha_) {
    if (A.rows() < 1 || A.cols() < 1)
      throw std::invalid_argument("InverseProblem: A must be nonempty");
    if (y.size() != A.rows())
      throw std::invalid_argument("InverseProblem: y length must equal rows of A");
    if (!(alpha > 0.0))
      throw std::invalid_argument("InverseProblem: alpha must be positive");
    if (!A.allFinite() || !y.allFinite())
      throw std::invalid_argument("InverseProblem: non-finite entries");
  }

  Index m() const { return A.rows(); }
  Index d() const { return A.cols(); }
};

/// Known truth behind a synthetic observation. In synthetic mode the signal
/// support is exactly the first h coordinates.
struct GroundTruth {
  Vec x;
  double sigma = 0.0;
  Vec w;
  int h = 1;
};

inline Vec observe(const Mat& A, const GroundTruth& gt) {
  return A * gt.x + gt.sigma * gt.w;
}

/// SVD-derived quantities of a forward matrix: extreme singular values,
/// theta = (sigma_min^2 + sigma_max^2)/2, the pseudo-inverse and the
/// orthogonal projections P = pinv*A (onto the row space) and Q = A*pinv
/// (onto the column space).
///
/// sigma_min is the smallest singular value of A seen as a map on R^d:
/// it is 0 whenever rank(A) < d (wide or rank-deficient matrices), so that
/// theta*I - A^T A has spectrum inside [-(sM^2-sm^2)/2, (sM^2-sm^2)/2].
struct SpectralData {
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  double theta = 0.0;
  Mat pinv;  // d x m
  Mat P;     // d x d
  Mat Q;     // m x m
  Index rank = 0;
  Vec singular_values;  // descending, length min(m,d)
};

/// Factorize A. Singular values <= rcond * sigma_max are treated as zero when
/// forming the pseudo-inverse; rcond < 0 selects the default
/// eps * max(m,d), the usual numerically safe cutoff.
inline SpectralData spectral_data(const Mat& A, double rcond = -1.0) {
  if (A.rows() < 1 || A.cols() < 1)
    throw std::invalid_argument("spectral_data: empty matrix");
  if (!A.allFinite())
    throw std::invalid_argument("spectral_data: non-finite entries");

  Eigen::BDCSVD<Mat> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec& s = svd.singularValues();
  const Index n = s.size();  // min(m, d)

  SpectralData out;
  out.singular_values = s;
  out.sigma_max = n > 0 ? s(0) : 0.0;
  if (rcond < 0.0) {
    rcond = std::numeric_limits<double>::epsilon() *
            static_cast<double>(std::max(A.rows(), A.cols()));
  }
  const double cutoff = rcond * out.sigma_max;

  Index rank = 0;
  for (Index i = 0; i < n; ++i)
    if (s(i) > cutoff) ++rank;
  out.rank = rank;

  // Smallest singular value as a map on R^d: 0 when A^T A is singular.
  out.sigma_min = (A.cols() <= A.rows()) ? s(n - 1) : 0.0;
  out.theta = 0.5 * (out.sigma_min * out.sigma_min + out.sigma_max * out.sigma_max);

  const Mat U = svd.matrixU().leftCols(rank);
  const Mat V = svd.matrixV().leftCols(rank);
  Vec sinv(rank);
  for (Index i = 0; i < rank; ++i) sinv(i) = 1.0 / s(i);

  out.pinv = V * sinv.asDiagonal() * U.transpose();
  out.P = V * V.transpose();
  out.Q = U * U.transpose();
  return out;
}

/// splitmix64; used to derive independent child seeds from one master seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace opten

#endif  // OPTEN_CORE_HPP
