#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "specklab/errors.hpp"
#include "specklab/metrics.hpp"

using namespace specklab;

namespace {

IntensityImage img(Shape s, std::uint64_t seed) { return IntensityImage(oracle::random_image(s, seed)); }

IntensityImage constant(Shape s, double v) { return IntensityImage(RealArray(s, v)); }

}  // namespace

TEST(Metrics, MatchOraclesOnRandomPairs) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto a = img({24, 31}, 2 * seed), b = img({24, 31}, 2 * seed + 1);
    EXPECT_NEAR(mae(a, b), oracle::mae(a.data, b.data), 1e-9);
    EXPECT_NEAR(psnr(a, b, 1.0), oracle::psnr(a.data, b.data, 1.0), 1e-9);
    EXPECT_NEAR(ssim(a, b), oracle::ssim(a.data, b.data), 1e-9);
  }
}

TEST(Metrics, SsimMatchesOracleWithOtherExponentsAndRange) {
  const auto a = img({20, 20}, 1), b = img({20, 20}, 2);
  SsimParams p;
  p.alpha = 2.0;
  p.beta = 0.5;
  p.gamma = 1.0;
  p.max_value = 1.0;
  oracle::SsimConstants k;
  k.alpha = 2.0;
  k.beta = 0.5;
  EXPECT_NEAR(ssim(a, b, p), oracle::ssim(a.data, b.data, k), 1e-9);

  IntensityImage a255 = a, b255 = b;
  for (double& v : a255.data) v *= 255.0;
  for (double& v : b255.data) v *= 255.0;
  SsimParams q;
  q.max_value = 255.0;
  oracle::SsimConstants k255;
  k255.L = 255.0;
  EXPECT_NEAR(ssim(a255, b255, q), oracle::ssim(a255.data, b255.data, k255), 1e-9);
  // Same constants relative to the range: SSIM is scale free.
  EXPECT_NEAR(ssim(a255, b255, q), ssim(a, b), 1e-9);
}

TEST(Metrics, ClosedForms) {
  const Shape s{16, 16};
  // 0.3 vs 0.7 everywhere.
  EXPECT_NEAR(mae(constant(s, 0.3), constant(s, 0.7)), 0.4, 1e-12);
  // Constant offset of 1 at L = 1: MSE 1 -> 0 dB; offset 0.1 -> 20 dB.
  EXPECT_NEAR(psnr(constant(s, 0.0), constant(s, 1.0), 1.0), 0.0, 1e-12);
  EXPECT_NEAR(psnr(constant(s, 0.2), constant(s, 0.3), 1.0), 20.0, 1e-9);
  // Constant images: only the luminance term differs from 1.
  const double a = 0.3, b = 0.7, c1 = 1e-4;
  EXPECT_NEAR(ssim(constant(s, a), constant(s, b)), (2 * a * b + c1) / (a * a + b * b + c1), 1e-12);
  const auto x = img(s, 4);
  EXPECT_NEAR(ssim(x, x), 1.0, 1e-12);
  EXPECT_EQ(mae(x, x), 0.0);
}

TEST(Metrics, PsnrIdenticalIsInfinite) {
  const auto x = img({8, 8}, 9);
  EXPECT_EQ(psnr(x, x, 1.0), std::numeric_limits<double>::infinity());
  EXPECT_EQ(format_db(psnr(x, x, 1.0)), "inf");
  EXPECT_EQ(format_db(20.0), "20.0000");
}

TEST(Metrics, Symmetric) {
  const auto a = img({16, 16}, 1), b = img({16, 16}, 2);
  EXPECT_DOUBLE_EQ(mae(a, b), mae(b, a));
  EXPECT_DOUBLE_EQ(psnr(a, b, 1.0), psnr(b, a, 1.0));
  EXPECT_NEAR(ssim(a, b), ssim(b, a), 1e-12);
  EXPECT_LT(ssim(a, b), 1.0);
}

TEST(Metrics, PsnrFallsAsNoiseGrows) {
  const auto truth = img({32, 32}, 3);
  double last = std::numeric_limits<double>::infinity();
  for (double amp : {0.01, 0.05, 0.1, 0.3}) {
    IntensityImage noisy = truth;
    const RealArray n = oracle::random_image({32, 32}, 11, -amp, amp);
    for (std::size_t i = 0; i < noisy.data.size(); ++i) noisy.data.data()[i] += n.data()[i];
    const double p = psnr(noisy, truth, 1.0);
    EXPECT_LT(p, last);
    last = p;
  }
}

TEST(Metrics, CovarianceContrastVariantIsBoundedByOne) {
  const auto a = img({16, 16}, 5), b = img({16, 16}, 6);
  SsimParams p;
  p.contrast_uses_covariance = true;
  const double v = ssim(a, b, p);
  EXPECT_LT(v, 1.0);
  EXPECT_NEAR(ssim(a, a, p), 1.0, 1e-12);
}

TEST(Metrics, ShapeErrors) {
  EXPECT_THROW(mae(img({8, 8}, 1), img({8, 9}, 2)), DimensionError);
  EXPECT_THROW(psnr(img({8, 8}, 1), img({9, 8}, 2), 1.0), DimensionError);
  EXPECT_THROW(ssim(img({8, 8}, 1), img({8, 8}, 2)), ParameterError);  // 11x11 window does not fit
  SsimParams none;
  none.window = 0;
  EXPECT_THROW(ssim(img({16, 16}, 1), img({16, 16}, 2), none), ParameterError);
  EXPECT_THROW(psnr(img({8, 8}, 1), img({8, 8}, 2), 0.0), ParameterError);
}

TEST(Metrics, EvaluatePairBundlesAll) {
  const auto a = img({16, 16}, 1), b = img({16, 16}, 2);
  const auto r = evaluate_pair(a, b);
  EXPECT_DOUBLE_EQ(r.mae, mae(a, b));
  EXPECT_DOUBLE_EQ(r.ssim, ssim(a, b));
  EXPECT_DOUBLE_EQ(r.psnr, psnr(a, b, 1.0));
  EXPECT_DOUBLE_EQ(r.params.resolved().c1, 1e-4);
  EXPECT_DOUBLE_EQ(r.params.resolved().c3, 0.0009 / 2);
}
