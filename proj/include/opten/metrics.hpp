#ifndef OPTEN_METRICS_HPP
#define OPTEN_METRICS_HPP

// Signal and image quality metrics: FDP/TPP for support recovery, relative
// errors, PSNR, global SSIM, and the SparseSNR gap measure.

#include "opten/core.hpp"

namespace opten {

struct TrialMetrics {
  double rel_param_err = std::numeric_limits<double>::quiet_NaN();  // |t_opt - t|/t_opt
  double rel_sol_err = 0.0;                                         // ||x - z|| / ||x||
  double fdp = 0.0;
  double tpp = 0.0;
  double sparse_snr = 0.0;
  double seconds = 0.0;
};

/// False discovery proportion after magnitude thresholding: discoveries are
/// entries with |z_i| > thresh, false ones those where x_i = 0.
inline double fdp(const Vec& z, const Vec& x, double thresh = 0.5) {
  if (z.size() != x.size()) throw std::invalid_argument("fdp: length mismatch");
  long discoveries = 0, false_disc = 0;
  for (Index i = 0; i < z.size(); ++i) {
    if (std::abs(z(i)) > thresh) {
      ++discoveries;
      if (x(i) == 0.0) ++false_disc;
    }
  }
  return double(false_disc) / double(std::max(discoveries, 1L));
}

/// True positive proportion: recovered support entries divided by h.
inline double tpp(const Vec& z, const Vec& x, double thresh, int h) {
  if (z.size() != x.size()) throw std::invalid_argument("tpp: length mismatch");
  if (h < 1 || h > z.size()) throw std::invalid_argument("tpp: h out of range");
  long hits = 0;
  for (Index i = 0; i < h; ++i)
    if (x(i) != 0.0 && std::abs(z(i)) > thresh) ++hits;
  return double(hits) / double(h);
}

inline double mse(const Mat& X, const Mat& Z) {
  if (X.rows() != Z.rows() || X.cols() != Z.cols())
    throw std::invalid_argument("mse: dimension mismatch");
  return (X - Z).squaredNorm() / double(X.size());
}

/// 10*log10(range^2 / MSE) with range = max(X) - min(X). For images spanning
/// [0,1] the range is 1 and the square is immaterial. Identical images return
/// +infinity.
inline double psnr(const Mat& X, const Mat& Z) {
  const double range = X.maxCoeff() - X.minCoeff();
  if (range <= 0.0) throw std::invalid_argument("psnr: reference image is constant");
  const double e = mse(X, Z);
  if (e == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(range * range / e);
}

/// Global (whole-image) structural similarity,
///   [ (2 mX mZ + C1) / (mX^2 mZ^2 + C1) ] * [ (2 sX sZ + C2) / (sX^2 sZ^2 + C2) ]
/// with C1 = 0.01, C2 = 0.03. Note the squared products in the denominators:
/// the value is 1 at X = Z only when mean and std are both 1; comparisons
/// remain meaningful because the same convention is applied to both sides.
inline double ssim(const Mat& X, const Mat& Z) {
  if (X.rows() != Z.rows() || X.cols() != Z.cols())
    throw std::invalid_argument("ssim: dimension mismatch");
  constexpr double C1 = 0.01, C2 = 0.03;
  const double n = double(X.size());
  const double mX = X.mean(), mZ = Z.mean();
  const double sX = std::sqrt((X.array() - mX).square().sum() / n);
  const double sZ = std::sqrt((Z.array() - mZ).square().sum() / n);
  const double lum = (2.0 * mX * mZ + C1) / (mX * mX * mZ * mZ + C1);
  const double con = (2.0 * sX * sZ + C2) / (sX * sX * sZ * sZ + C2);
  return lum * con;
}

/// max_i |sigma w_i| / min_{i<=h} |x_i|: how close the largest noise spike
/// comes to the weakest on-support signal entry.
inline double sparse_snr(const Vec& x, const Vec& w, double sigma, int h) {
  if (h < 1 || h > x.size()) throw std::invalid_argument("sparse_snr: h out of range");
  double min_sig = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < h; ++i) min_sig = std::min(min_sig, std::abs(x(i)));
  if (min_sig == 0.0) throw std::invalid_argument("sparse_snr: zero entry on the support");
  return sigma * w.cwiseAbs().maxCoeff() / min_sig;
}

}  // namespace opten

#endif  // OPTEN_METRICS_HPP
