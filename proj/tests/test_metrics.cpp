#include "opten/metrics.hpp"

#include "test_helpers.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace opten;

TEST_CASE("false discovery proportion") {
  Vec x = Vec::Zero(10);
  for (int i = 0; i < 4; ++i) x(i) = 2.0;
  CHECK(fdp(x, x) == 0.0);

  Vec z = Vec::Constant(10, 1.0);
  CHECK(fdp(z, Vec::Zero(10)) == 1.0);

  // 8 true and 2 false discoveries.
  Vec x2 = Vec::Zero(12), z2 = Vec::Zero(12);
  for (int i = 0; i < 8; ++i) { x2(i) = 3.0; z2(i) = 3.0; }
  z2(10) = z2(11) = 1.0;
  CHECK(fdp(z2, x2) == Catch::Approx(0.2));

  // No discoveries at all: the max(..., 1) guard keeps the value at zero.
  CHECK(fdp(Vec::Zero(5), x.head(5)) == 0.0);
}

TEST_CASE("true positive proportion") {
  Vec x = Vec::Zero(10);
  for (int i = 0; i < 4; ++i) x(i) = 2.0;
  CHECK(tpp(x, x, 0.5, 4) == 1.0);
  CHECK(tpp(Vec::Zero(10), x, 0.5, 4) == 0.0);

  Vec half = Vec::Zero(10);
  half(0) = half(1) = 2.0;
  CHECK(tpp(half, x, 0.5, 4) == Catch::Approx(0.5));
}

TEST_CASE("peak signal-to-noise ratio") {
  Mat X(2, 2);
  X << 0.0, 1.0, 0.5, 0.25;
  CHECK(std::isinf(psnr(X, X)));

  // range = 1, MSE = 0.01 -> 20 dB.
  Mat Z = X.array() + 0.1;
  CHECK(psnr(X, Z) == Catch::Approx(20.0).margin(1e-9));

  // Strictly decreasing in the error.
  Mat Z2 = X.array() + 0.2;
  CHECK(psnr(X, Z2) < psnr(X, Z));

  CHECK_THROWS_AS(psnr(Mat::Ones(2, 2), Mat::Ones(2, 2)), std::invalid_argument);
}

TEST_CASE("structural similarity of the whole image") {
  // Flat all-ones images: luminance (2 + C1)/(1 + C1), contrast exactly 1.
  const Mat ones = Mat::Ones(4, 4);
  CHECK(ssim(ones, ones) == Catch::Approx(2.01 / 1.01));

  // X = Z with nonzero spread: ((2 mu^2 + C1)/(mu^4 + C1)) * ((2 s^2 + C2)/(s^4 + C2)).
  Mat X(1, 4);
  X << 0.2, 0.4, 0.6, 0.8;
  const double mu = X.mean();
  const double s = std::sqrt((X.array() - mu).square().sum() / 4.0);
  const double expected = ((2 * mu * mu + 0.01) / (mu * mu * mu * mu + 0.01)) *
                          ((2 * s * s + 0.03) / (s * s * s * s + 0.03));
  CHECK(ssim(X, X) == Catch::Approx(expected));

  // Zero-mean images: the luminance term collapses to C1/C1 = 1.
  Mat A(1, 2), B(1, 2);
  A << 1.0, -1.0;
  B << 0.5, -0.5;
  const double sa = 1.0, sb = 0.5;
  const double contrast = (2 * sa * sb + 0.03) / (sa * sa * sb * sb + 0.03);
  CHECK(ssim(A, B) == Catch::Approx(contrast));
}

TEST_CASE("sparse signal-to-noise gap") {
  Vec x = Vec::Zero(6);
  x(0) = 2.0;
  x(1) = -4.0;
  const Vec w = Vec::Ones(6);
  CHECK(sparse_snr(x, w, 0.0, 2) == 0.0);
  CHECK(sparse_snr(x, w, 2.0, 2) == Catch::Approx(1.0));

  Vec spike = Vec::Zero(6);
  spike(5) = 3.0;
  CHECK(sparse_snr(x, spike, 1.0, 2) == Catch::Approx(1.5));

  CHECK_THROWS_AS(sparse_snr(Vec::Zero(3), w.head(3), 1.0, 2), std::invalid_argument);
}
