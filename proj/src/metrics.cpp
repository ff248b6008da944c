#include "specklab/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <vector>

#include "specklab/errors.hpp"

namespace specklab {
namespace {

void require_same(const IntensityImage& a, const IntensityImage& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError("image grids differ: " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
  }
  if (a.data.empty()) throw DimensionError("images are empty");
}

std::vector<double> gaussian_window(std::size_t n, double sigma) {
  std::vector<double> w(n * n);
  const double centre = (static_cast<double>(n) - 1.0) / 2.0;
  double total = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      const double dr = static_cast<double>(r) - centre;
      const double dc = static_cast<double>(c) - centre;
      w[r * n + c] = std::exp(-(dr * dr + dc * dc) / (2.0 * sigma * sigma));
      total += w[r * n + c];
    }
  }
  for (double& v : w) v /= total;
  return w;
}

}  // namespace

SsimParams SsimParams::resolved() const {
  SsimParams p = *this;
  if (p.c1 < 0.0) p.c1 = (0.01 * max_value) * (0.01 * max_value);
  if (p.c2 < 0.0) p.c2 = (0.03 * max_value) * (0.03 * max_value);
  if (p.c3 < 0.0) p.c3 = p.c2 / 2.0;
  return p;
}

double mae(const IntensityImage& restored, const IntensityImage& truth) {
  require_same(restored, truth);
  double s = 0.0;
  for (std::size_t i = 0; i < restored.data.size(); ++i) {
    s += std::abs(restored.data.data()[i] - truth.data.data()[i]);
  }
  return s / static_cast<double>(restored.data.size());
}

double mse(const IntensityImage& restored, const IntensityImage& truth) {
  require_same(restored, truth);
  double s = 0.0;
  for (std::size_t i = 0; i < restored.data.size(); ++i) {
    const double d = restored.data.data()[i] - truth.data.data()[i];
    s += d * d;
  }
  return s / static_cast<double>(restored.data.size());
}

double psnr(const IntensityImage& restored, const IntensityImage& truth, double max_value) {
  if (!(max_value > 0.0)) throw ParameterError("PSNR max_value must be positive");
  const double e = mse(restored, truth);
  if (e == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(max_value * max_value / e);
}

double ssim(const IntensityImage& restored, const IntensityImage& truth, const SsimParams& params) {
  require_same(restored, truth);
  const SsimParams p = params.resolved();
  if (p.window == 0 || p.window > restored.rows() || p.window > restored.cols()) {
    throw ParameterError("SSIM window " + std::to_string(p.window) + " does not fit the image");
  }
  if (!(p.sigma > 0.0)) throw ParameterError("SSIM sigma must be positive");

  const std::size_t n = p.window;
  const std::vector<double> w = gaussian_window(n, p.sigma);
  const RealArray& x = restored.data;
  const RealArray& y = truth.data;
  const std::size_t out_rows = x.rows() - n + 1;
  const std::size_t out_cols = x.cols() - n + 1;

  double total = 0.0;
  for (std::size_t r = 0; r < out_rows; ++r) {
    for (std::size_t c = 0; c < out_cols; ++c) {
      double mx = 0.0, my = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double* xr = &x(r + i, c);
        const double* yr = &y(r + i, c);
        const double* wr = &w[i * n];
        for (std::size_t j = 0; j < n; ++j) {
          mx += wr[j] * xr[j];
          my += wr[j] * yr[j];
          sxx += wr[j] * xr[j] * xr[j];
          syy += wr[j] * yr[j] * yr[j];
          sxy += wr[j] * xr[j] * yr[j];
        }
      }
      const double vx = std::max(0.0, sxx - mx * mx);
      const double vy = std::max(0.0, syy - my * my);
      const double cov = sxy - mx * my;
      const double sx = std::sqrt(vx);
      const double sy = std::sqrt(vy);

      const double lum = (2.0 * mx * my + p.c1) / (mx * mx + my * my + p.c1);
      const double con_num = p.contrast_uses_covariance ? 2.0 * cov : 2.0 * sx * sy;
      const double con = (con_num + p.c2) / (vx + vy + p.c2);
      const double str = (cov + p.c3) / (sx * sy + p.c3);
      double local = 1.0;
      local *= p.alpha == 1.0 ? lum : std::pow(lum, p.alpha);
      local *= p.beta == 1.0 ? con : std::pow(con, p.beta);
      local *= p.gamma == 1.0 ? str : std::pow(str, p.gamma);
      total += local;
    }
  }
  return total / static_cast<double>(out_rows * out_cols);
}

MetricReport evaluate_pair(const IntensityImage& restored, const IntensityImage& truth,
                           const SsimParams& params) {
  MetricReport report;
  report.params = params.resolved();
  report.mae = mae(restored, truth);
  report.ssim = ssim(restored, truth, report.params);
  report.psnr = psnr(restored, truth, report.params.max_value);
  return report;
}

std::string format_db(double psnr_db) {
  if (std::isinf(psnr_db) && psnr_db > 0) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", psnr_db);
  return buf;
}

}  // namespace specklab
