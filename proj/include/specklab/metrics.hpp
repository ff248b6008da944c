#pragma once

#include <string>

#include "specklab/optics.hpp"

namespace specklab {

/// Constants of the windowed SSIM. Defaults follow the usual Gaussian-window
/// convention: 11x11, sigma 1.5, c1 = (0.01 L)^2, c2 = (0.03 L)^2, c3 = c2 / 2.
struct SsimParams {
  double max_value = 1.0;  ///< L, the largest representable gray value
  std::size_t window = 11;
  double sigma = 1.5;
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 1.0;
  double c1 = -1.0;  ///< negative means derive from max_value
  double c2 = -1.0;
  double c3 = -1.0;
  /// Use 2*sigma_xy instead of 2*sigma_x*sigma_y in the contrast term.
  bool contrast_uses_covariance = false;

  /// Copy with c1, c2, c3 materialized.
  SsimParams resolved() const;
};

double mae(const IntensityImage& restored, const IntensityImage& truth);
double mse(const IntensityImage& restored, const IntensityImage& truth);

/// Mean of the local SSIM over every full window position ("valid" windows).
double ssim(const IntensityImage& restored, const IntensityImage& truth, const SsimParams& params = {});

/// 10 log10(max^2 / MSE); +infinity when the images are identical.
double psnr(const IntensityImage& restored, const IntensityImage& truth, double max_value);

struct MetricReport {
  double mae = 0.0;
  double ssim = 0.0;
  double psnr = 0.0;
  SsimParams params;
};

MetricReport evaluate_pair(const IntensityImage& restored, const IntensityImage& truth,
                           const SsimParams& params = {});

/// Decibel value as text; +infinity serializes as "inf".
std::string format_db(double psnr_db);

}  // namespace specklab
