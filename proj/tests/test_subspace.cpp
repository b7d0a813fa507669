#include "opten/subspace.hpp"

#include "opten/synth.hpp"
#include "test_helpers.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace opten;

TEST_CASE("empirical covariance of basis samples") {
  Mat S1(1, 2);
  S1 << 1.0, 0.0;
  const CovarianceEstimate c1 = empirical_covariance(S1);
  CHECK((c1.matrix - (Mat(2, 2) << 1, 0, 0, 0).finished()).norm() < 1e-14);

  Mat S2(2, 2);
  S2 << 1.0, 0.0, 0.0, 1.0;
  const CovarianceEstimate c2 = empirical_covariance(S2);
  CHECK((c2.matrix - 0.5 * Mat::Identity(2, 2)).norm() < 1e-14);

  // Scaling every sample by c scales the covariance by c^2.
  const Mat S = test::random_matrix(6, 4, 5);
  const Mat lhs = empirical_covariance(Mat(3.0 * S)).matrix;
  const Mat rhs = 9.0 * empirical_covariance(S).matrix;
  CHECK((lhs - rhs).norm() / rhs.norm() < 1e-12);
}

TEST_CASE("covariance eigendecomposition reconstructs the matrix") {
  const Mat S = test::random_matrix(12, 6, 15);
  const CovarianceEstimate cov = empirical_covariance(S);
  for (Index i = 0; i + 1 < cov.eigenvalues.size(); ++i)
    CHECK(cov.eigenvalues(i) >= cov.eigenvalues(i + 1));
  CHECK(cov.eigenvalues.minCoeff() >= 0.0);
  const Mat recon = cov.eigenvectors * cov.eigenvalues.asDiagonal() * cov.eigenvectors.transpose();
  CHECK((recon - cov.matrix).norm() / cov.matrix.norm() < 1e-8);
  CHECK_THROWS_AS(empirical_covariance(std::vector<Vec>{Vec::Ones(2), Vec::Ones(3)}),
                  std::invalid_argument);
}

TEST_CASE("top-h projection of a diagonal covariance") {
  Mat S(3, 3);  // samples engineered so the covariance is diag(3, 4/3, 1/3)
  S.setZero();
  S(0, 0) = 3.0;
  S(1, 1) = 2.0;
  S(2, 2) = 1.0;
  const CovarianceEstimate cov = empirical_covariance(S);
  const SubspaceModel m2 = top_h_projection(cov, 2);
  Mat expected = Mat::Zero(3, 3);
  expected(0, 0) = expected(1, 1) = 1.0;
  CHECK((m2.projection - expected).norm() < 1e-12);

  const SubspaceModel m3 = top_h_projection(cov, 3);
  CHECK((m3.projection - Mat::Identity(3, 3)).norm() < 1e-12);
  CHECK_THROWS_AS(top_h_projection(cov, 0), std::invalid_argument);
  CHECK_THROWS_AS(top_h_projection(cov, 4), std::invalid_argument);
}

TEST_CASE("projection is an orthogonal projector of trace h") {
  const Mat S = test::random_matrix(40, 12, 25);
  const SubspaceModel model = top_h_projection(empirical_covariance(S), 5);
  const Mat& P = model.projection;
  CHECK((P * P - P).norm() < 1e-10);
  CHECK((P - P.transpose()).norm() < 1e-12);
  CHECK(P.trace() == Catch::Approx(5.0).margin(1e-8));
}

TEST_CASE("rotation covariance of the projection") {
  const Mat S = test::random_matrix(30, 8, 35);
  const Mat U = test::random_orthogonal(8, 36);
  const Mat P = top_h_projection(empirical_covariance(S), 3).projection;
  const Mat P_rot = top_h_projection(empirical_covariance(Mat(S * U.transpose())), 3).projection;
  CHECK((P_rot - U * P * U.transpose()).norm() < 1e-8);
}

TEST_CASE("noise shift leaves the top eigenvectors unchanged") {
  // Exact covariance S(Ax) + sigma^2 I has the same eigenvectors as S(Ax).
  const Mat A = test::random_matrix(12, 6, 45);
  const Mat As = A.leftCols(3);
  const Mat signal = As * As.transpose();
  Eigen::SelfAdjointEigenSolver<Mat> eig_signal(signal);
  CovarianceEstimate shifted;
  shifted.matrix = signal + 0.09 * Mat::Identity(12, 12);
  Eigen::SelfAdjointEigenSolver<Mat> eig(shifted.matrix);
  shifted.eigenvalues = eig.eigenvalues().reverse();
  shifted.eigenvectors = eig.eigenvectors().rowwise().reverse();

  const Mat P_shift = top_h_projection(shifted, 3).projection;
  Mat P_signal = Mat::Zero(12, 12);
  for (int i = 0; i < 3; ++i) {
    const Vec v = eig_signal.eigenvectors().col(11 - i);
    P_signal += v * v.transpose();
  }
  CHECK((P_shift - P_signal).norm() < 1e-10);
}

TEST_CASE("empirical estimator on identity problems") {
  const SpectralData spec = spectral_data(Mat::Identity(2, 2));
  CovarianceEstimate cov;
  cov.matrix = Mat::Identity(2, 2);
  cov.eigenvalues = Vec::Ones(2);
  cov.eigenvectors = Mat::Identity(2, 2);
  Vec y(2);
  y << 3.0, 4.0;

  const SubspaceModel full = top_h_projection(cov, 2);
  CHECK((empirical_estimator(spec, full, y) - y).norm() < 1e-14);

  const SubspaceModel partial = top_h_projection(cov, 1);
  const Vec xh = empirical_estimator(spec, partial, y);
  CHECK(xh(0) == Catch::Approx(3.0));
  CHECK(xh(1) == 0.0);
}

TEST_CASE("empirical estimator solves the projected problem") {
  // A xhat + Q(y - Pi y) = Q y for any projection Pi.
  const Mat A = test::random_rank_deficient(6, 4, 2, 55);
  const SpectralData spec = spectral_data(A);
  const Mat S = test::random_matrix(20, 6, 56);
  const SubspaceModel model = top_h_projection(empirical_covariance(S), 2);
  const Vec y = test::random_vector(6, 57);
  const Vec xhat = empirical_estimator(spec, model, y);
  const Vec lhs = A * xhat + spec.Q * (y - model.projection * y);
  CHECK((lhs - spec.Q * y).norm() < 1e-8);
}

TEST_CASE("projection error decays with the sample count") {
  // True projector: the column space of the first h columns of A.
  const int m = 500, d = 100, h = 10;
  const double sigma = 0.3;
  const Mat A = gen_forward(m, d, std::nullopt, 1234);
  Eigen::HouseholderQR<Mat> qr(Mat(A.leftCols(h)));
  const Mat Qh = Mat(qr.householderQ()).leftCols(h);
  const Mat P_true = Qh * Qh.transpose();

  auto mean_error = [&](int N, std::uint64_t seed) {
    double acc = 0.0;
    const int reps = 3;
    for (int r = 0; r < reps; ++r) {
      Mat Y(N, m);
      std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(r)));
      for (int i = 0; i < N; ++i) {
        const Vec x = gen_signal(d, h, mix_seed(seed, 1000 + 100 * r + static_cast<std::uint64_t>(i)));
        Y.row(i) = (A * x + sigma * gaussian_vector(m, rng)).transpose();
      }
      const Mat P_hat = top_h_projection(empirical_covariance(Y), h).projection;
      Eigen::BDCSVD<Mat> svd(P_hat - P_true);
      acc += svd.singularValues()(0);
    }
    return acc / reps;
  };

  CHECK(mean_error(400, 7) < mean_error(25, 7));
}

TEST_CASE("spectral criteria on synthetic spectra") {
  auto from_spectrum = [](std::initializer_list<double> vals) {
    CovarianceEstimate cov;
    cov.eigenvalues = Vec(static_cast<Index>(vals.size()));
    Index i = 0;
    for (double v : vals) cov.eigenvalues(i++) = v;
    cov.matrix = cov.eigenvalues.asDiagonal();
    cov.eigenvectors = Mat::Identity(cov.eigenvalues.size(), cov.eigenvalues.size());
    return cov;
  };

  const CovarianceEstimate c1 = from_spectrum({10, 9, 8, 1, 0.9});
  CHECK(estimate_h(c1, {HCriterionKind::spectral_gap}) == 3);
  CHECK(estimate_h(c1, {HCriterionKind::relative_gap}) == 3);

  const CovarianceEstimate c2 = from_spectrum({9, 0.5, 0.5});
  CHECK(estimate_h(c2, {HCriterionKind::cum_energy, 0.95}) == 2);
  CHECK(estimate_h(c2, {HCriterionKind::rel_cum_energy, 0.9}) == 1);

  // The printed relative gap is negative on descending spectra and tops out
  // where the drop is smallest.
  HCriterion printed{HCriterionKind::relative_gap};
  printed.printed_relative_gap = true;
  const CovarianceEstimate c3 = from_spectrum({10, 9.9, 5, 4.99});
  CHECK(estimate_h(c3, printed) == 3);
  CHECK(estimate_h(c3, {HCriterionKind::relative_gap}) == 2);

  // Ties break to the smallest k.
  const CovarianceEstimate c4 = from_spectrum({4, 2, 2, 0});
  CHECK(estimate_h(c4, {HCriterionKind::spectral_gap}) == 1);

  CovarianceEstimate zero;
  zero.eigenvalues = Vec::Zero(3);
  zero.matrix = Mat::Zero(3, 3);
  zero.eigenvectors = Mat::Identity(3, 3);
  CHECK_THROWS_AS(estimate_h(zero, {HCriterionKind::spectral_gap}), std::invalid_argument);
}

TEST_CASE("restricted relative gap recovers h on one seeded instance") {
  const int m = 100, h = 20, N = 150;
  const double sigma = 0.3;
  const Mat A = gen_forward(m, m, std::nullopt, 99);
  Mat Y(N, m);
  std::mt19937_64 rng(100);
  for (int i = 0; i < N; ++i) {
    const Vec x = gen_signal(m, h, mix_seed(101, static_cast<std::uint64_t>(i)));
    Y.row(i) = (A * x + sigma * gaussian_vector(m, rng)).transpose();
  }
  const CovarianceEstimate cov = empirical_covariance(Y);
  HCriterion crit;  // default: relative gap restricted to the first m/2
  CHECK(estimate_h(cov, crit) == h);
}
