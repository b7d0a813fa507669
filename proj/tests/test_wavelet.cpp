#include "opten/wavelet.hpp"

#include "test_helpers.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace opten;

namespace {

Mat random_image(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Mat img(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) img(i, j) = u(rng);
  return img;
}

}  // namespace

TEST_CASE("constant images have vanishing detail coefficients") {
  const Mat img = Mat::Constant(64, 64, 0.37);
  const WaveletCoeffs wc = dwt2(img, 3);
  const Vec flat = flatten(wc);
  const Index approx = (64 >> 3) * (64 >> 3);
  for (Index i = approx; i < flat.size(); ++i) CHECK(std::abs(flat(i)) < 1e-12);
  // All the energy sits in the approximation block.
  CHECK(flat.head(approx).norm() == Catch::Approx(img.norm()).margin(1e-9));
}

TEST_CASE("perfect reconstruction and energy preservation") {
  const Mat img = random_image(64, 5);
  const WaveletCoeffs wc = dwt2(img);
  CHECK(wc.levels == default_levels(64, 64));
  const Mat back = idwt2(wc);
  CHECK((back - img).cwiseAbs().maxCoeff() < 1e-9);

  const Vec flat = flatten(wc);
  CHECK(flat.norm() == Catch::Approx(img.norm()).margin(1e-9));

  // Flatten/unflatten is a faithful relayout.
  const WaveletCoeffs rebuilt = unflatten(flat, wc.levels, wc.rows(), wc.cols());
  CHECK((rebuilt.data - wc.data).norm() == 0.0);
}

TEST_CASE("transform dimension checks") {
  CHECK_THROWS_AS(dwt2(Mat::Zero(50, 64), 2), std::invalid_argument);  // 50 % 4 != 0
  CHECK_THROWS_AS(dwt2(Mat::Zero(64, 50), 2), std::invalid_argument);
  CHECK_NOTHROW(dwt2(Mat::Zero(32, 32), 2));
}

TEST_CASE("full-depth transforms stay orthogonal") {
  const Mat img = random_image(32, 21);
  const WaveletCoeffs wc = dwt2(img, 5);  // coarsest block is a single pixel
  CHECK((idwt2(wc) - img).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(flatten(wc).norm() == Catch::Approx(img.norm()).margin(1e-9));
}

TEST_CASE("hard thresholding keeps the strongest coefficients") {
  const Mat img = random_image(32, 15);
  const int levels = 2;
  // Keeping everything returns the image.
  const Mat full = hard_threshold_estimator(img, img.size(), levels);
  CHECK((full - img).cwiseAbs().maxCoeff() < 1e-9);

  // At full depth a constant image is carried by one approximation
  // coefficient, so h = 1 reproduces it exactly.
  const Mat flat_img = Mat::Constant(32, 32, 0.5);
  const Mat one = hard_threshold_estimator(flat_img, 1, 5);
  CHECK((one - flat_img).cwiseAbs().maxCoeff() < 1e-9);

  // Coefficient energy grows with h.
  const Mat a = hard_threshold_estimator(img, 50, levels);
  const Mat b = hard_threshold_estimator(img, 51, levels);
  CHECK(b.norm() >= a.norm() - 1e-12);

  CHECK_THROWS_AS(hard_threshold_estimator(img, 0, levels), std::invalid_argument);
}

TEST_CASE("threshold-count error sweep matches direct recomputation") {
  const Mat X = make_phantom(32, 3);
  const Mat Y = add_noise(X, 0.1, 4);
  const int levels = 2;
  const std::vector<double> sweep = hard_threshold_mse_sweep(X, Y, levels);
  REQUIRE(sweep.size() == static_cast<size_t>(X.size()));
  for (Index h : {Index(1), Index(17), Index(256), Index(1024)}) {
    const Mat est = hard_threshold_estimator(Y, h, levels);
    CHECK(sweep[static_cast<size_t>(h - 1)] ==
          Catch::Approx((X - est).squaredNorm() / double(X.size())).margin(1e-12));
  }

  // The oracle count sits at an interior minimum for noisy data.
  const Index h_star = oracle_h(X, Y, levels);
  CHECK(h_star > 1);
  CHECK(h_star < X.size());
}

TEST_CASE("denoising endpoints and improvement") {
  const Mat X = make_phantom(64, 7);
  const Mat Y = add_noise(X, 0.1, 8);

  const Mat at_one = denoise(Y, 1e-3, 1.0);
  CHECK((at_one - Y.cwiseMax(0.0).cwiseMin(1.0)).cwiseAbs().maxCoeff() < 1e-9);

  const Mat at_zero = denoise(Y, 1e-3, 0.0);
  CHECK(at_zero.cwiseAbs().maxCoeff() == 0.0);

  // Some interior parameter beats the noisy input.
  double best = -std::numeric_limits<double>::infinity();
  for (double t = 0.5; t < 1.0; t += 0.02) best = std::max(best, psnr(X, denoise(Y, 1e-3, t)));
  CHECK(best > psnr(X, Y));
}

TEST_CASE("keeping every coefficient saturates the learned parameter") {
  const Mat X = make_phantom(64, 9);
  const Mat Y = add_noise(X, 0.075, 10);
  HSchedule sched;
  sched.h0 = Y.size();  // estimator equals the observation itself
  const HSelection sel = select_h_heuristic(Y, 1e-3, sched);
  CHECK(sel.h == Y.size());
  CHECK(sel.t_hat >= 1.0 - 1e-6);
  CHECK(sel.steps == 1);
}

TEST_CASE("noiseless images saturate the learned parameter") {
  // An exactly sparse clean image: any h covering its support makes the
  // hard-threshold estimator reproduce the image, so t = 1 is optimal.
  const int levels = default_levels(64, 64);
  Vec coeffs = Vec::Zero(64 * 64);
  std::mt19937_64 rng(55);
  std::normal_distribution<double> g(0.0, 1.0);
  coeffs(0) = 20.0;
  for (int k = 1; k < 100; ++k) coeffs(17 * k % coeffs.size()) = 0.5 * g(rng);
  const Mat X = idwt2(unflatten(coeffs, levels, 64, 64));
  HSchedule sched;
  sched.h0 = 256;  // covers the support
  sched.h_step = 256;
  const HSelection sel = select_h_heuristic(X, 1e-3, sched);
  CHECK(sel.t_hat >= 1.0 - 1e-6);
  CHECK(sel.h == 256);
}

TEST_CASE("heuristic threshold count lands near the oracle") {
  int hits = 0;
  const int runs = 5;
  for (int r = 0; r < runs; ++r) {
    const Mat X = make_phantom(128, 100 + static_cast<std::uint64_t>(r));
    const Mat Y = add_noise(X, 0.075, 200 + static_cast<std::uint64_t>(r));
    const Index h_star = oracle_h(X, Y);
    const HSelection sel = select_h_heuristic(Y, 1e-3);
    if (sel.h >= h_star / 2 && sel.h <= 2 * h_star) ++hits;
  }
  CHECK(hits >= (runs * 7 + 9) / 10);
}

TEST_CASE("phantoms are reproducible and in range") {
  const Mat a = make_phantom(64, 42);
  const Mat b = make_phantom(64, 42);
  CHECK((a - b).norm() == 0.0);
  CHECK(a.minCoeff() >= 0.0);
  CHECK(a.maxCoeff() <= 1.0);
  CHECK((a - make_phantom(64, 43)).norm() > 0.0);
}
