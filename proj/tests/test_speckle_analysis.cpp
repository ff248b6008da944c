#include <gtest/gtest.h>

#include "oracles.hpp"
#include "scenarios.hpp"
#include "specklab/errors.hpp"
#include "specklab/speckle_analysis.hpp"

using namespace specklab;

TEST(Autocorrelate, DeltaGivesCentredDelta) {
  RealArray img(16, 16);
  img(3, 11) = 2.0;
  const auto map = autocorrelate(img, false);
  EXPECT_NEAR(map.peak_value, 4.0, 1e-12);
  EXPECT_NEAR(map.data(8, 8), 4.0, 1e-12);
  for (std::size_t i = 0; i < map.data.size(); ++i) {
    if (i != 8 * 16 + 8) EXPECT_LE(std::abs(map.data.data()[i]), 1e-12 * map.peak_value);
  }
}

TEST(Autocorrelate, MatchesCircularSlidingSum) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    for (bool sub : {false, true}) {
      const RealArray img = oracle::random_image({16, 16}, seed);
      const auto fast = autocorrelate(img, sub);
      const RealArray slow = oracle::circular_autocorrelation(img, sub);
      double peak = 0;
      for (double v : slow) peak = std::max(peak, std::abs(v));
      for (std::size_t i = 0; i < slow.size(); ++i) ASSERT_NEAR(fast.data.data()[i], slow.data()[i], 1e-6 * peak);
    }
  }
}

TEST(Autocorrelate, OddShapeMatchesOracle) {
  const RealArray img = oracle::random_image({9, 14}, 5);
  const auto fast = autocorrelate(img, true);
  const RealArray slow = oracle::circular_autocorrelation(img, true);
  for (std::size_t i = 0; i < slow.size(); ++i) EXPECT_NEAR(fast.data.data()[i], slow.data()[i], 1e-9);
}

TEST(Autocorrelate, PointSymmetricAndPeakIsMax) {
  const RealArray img = oracle::random_image({32, 24}, 6);
  const auto map = autocorrelate(img, true);
  const std::size_t R = 32, C = 24;
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t c = 0; c < C; ++c) {
      const std::size_t rr = (R - r) % R, cc = (C - c) % C;  // -d about the centre sample
      const double a = map.data((r + R / 2) % R, (c + C / 2) % C);
      const double b = map.data((rr + R / 2) % R, (cc + C / 2) % C);
      EXPECT_NEAR(a, b, 1e-9);
    }
  EXPECT_EQ(map.peak_value, *std::max_element(map.data.begin(), map.data.end()));
}

TEST(Autocorrelate, ParsevalSumEqualsSquaredTotal) {
  const RealArray img = oracle::random_image({20, 20}, 7);
  const auto map = autocorrelate(img, false);
  double s = 0, t = 0;
  for (double v : map.data) s += v;
  for (double v : img) t += v;
  EXPECT_NEAR(s, t * t, 1e-6 * t * t);
}

TEST(Autocorrelate, TranslationInvariantForInteriorObjects) {
  RealArray obj(32, 32);
  const RealArray patch = oracle::random_image({6, 6}, 8);
  for (std::size_t r = 0; r < 6; ++r)
    for (std::size_t c = 0; c < 6; ++c) obj(10 + r, 12 + c) = patch(r, c);
  const auto a = autocorrelate(obj, false);
  const auto b = autocorrelate(circular_shift(obj, {5, -4}), false);
  for (std::size_t i = 0; i < a.data.size(); ++i) EXPECT_NEAR(a.data.data()[i], b.data.data()[i], 1e-9);
}

TEST(Ncc, BasicProperties) {
  const RealArray a = oracle::random_image({16, 16}, 1);
  RealArray b = a;
  for (double& v : b) v = 3.0 * v + 2.0;
  EXPECT_NEAR(normalized_cross_correlation(a, b), 1.0, 1e-12);
  RealArray c = a;
  for (double& v : c) v = -v;
  EXPECT_NEAR(normalized_cross_correlation(a, c), -1.0, 1e-12);
  EXPECT_EQ(normalized_cross_correlation(a, RealArray(16, 16, 1.0)), 0.0);
  EXPECT_THROW(normalized_cross_correlation(a, RealArray(4, 4)), DimensionError);
}

TEST(Ncc, PeakCrossCorrelationFindsShift) {
  const RealArray a = oracle::random_image({32, 32}, 2);
  const RealArray b = circular_shift(a, {-7, 3});
  Offset lag;
  EXPECT_NEAR(peak_cross_correlation(a, b, &lag), 1.0, 1e-12);
  EXPECT_TRUE(circular_shift(b, lag) == a);
}

TEST(SpeckleContrast, UniformImageIsZeroAndBadFractionRejected) {
  EXPECT_EQ(speckle_contrast(IntensityImage(RealArray(8, 8, 3.0))), 0.0);
  EXPECT_THROW(speckle_contrast(IntensityImage(RealArray(8, 8, 3.0)), 0.0), ParameterError);
}

TEST(OmeIdentity, WithinOmeScoreHigh) {
  double total = 0;
  for (std::uint64_t seed = 0; seed < 3; ++seed) total += scenario::ome_scores(seed).within;
  EXPECT_GE(total / 3, 0.7);
}

TEST(OmeIdentity, BeyondOmePrefersSumOfRegions) {
  double sum = 0, uni = 0;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto s = scenario::ome_scores(seed);
    sum += s.beyond_sum;
    uni += s.beyond_union;
  }
  EXPECT_GT(sum, uni);
}

TEST(OmeIdentity, PureNoiseScoresNearZero) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) EXPECT_LE(std::abs(scenario::ome_scores(seed).noise), 0.2);
}

TEST(OmeIdentity, InvariantToIntensityScale) {
  OpticalConfig cfg;
  cfg.grid = {64, 64};
  const auto comp = scenario::composite(2, false, {64, 64}, 32);
  SceneLayout layout;
  layout.grid = cfg.grid;
  layout.regions.push_back({comp.object, {0, 0}, 0, 0});
  const auto sp = make_beyond_ome_speckle(layout, {make_diffuser(cfg.grid, 1.0, 1)}, cfg).speckle;
  IntensityImage scaled = sp;
  for (double& v : scaled.data) v *= 7.5;
  EXPECT_NEAR(ome_identity_score(sp, layout), ome_identity_score(scaled, layout), 1e-12);
}

TEST(ReferenceAutocorrelation, SumOfPlacedRegions) {
  SceneLayout layout;
  layout.grid = {16, 16};
  layout.regions.push_back({IntensityImage(oracle::random_image({3, 3}, 1)), {1, 1}, 0, 0});
  layout.regions.push_back({IntensityImage(oracle::random_image({3, 3}, 2)), {9, 9}, 0, 0});
  const RealArray ref = reference_autocorrelation(layout);
  RealArray expected = oracle::circular_autocorrelation(layout.placed(0), false);
  const RealArray b = oracle::circular_autocorrelation(layout.placed(1), false);
  for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_NEAR(ref.data()[i], expected.data()[i] + b.data()[i], 1e-9);
}

TEST(OmeScan, ZeroShiftIsExactlyOne) {
  OpticalConfig cfg;
  cfg.grid = {64, 64};
  const auto curve = ome_scan(make_diffuser(cfg.grid, 1.0, 1), cfg, {4, 1, 0.5});
  ASSERT_EQ(curve.shifts.size(), 5u);
  EXPECT_EQ(curve.correlations[0], 1.0);
  for (double c : curve.correlations) {
    EXPECT_GE(c, -1.0);
    EXPECT_LE(c, 1.0);
  }
}

TEST(OmeScan, IndependentScreensDecorrelated) {
  OpticalConfig cfg;
  const auto a = measure_psf(make_diffuser(cfg.grid, 1.0, 1), cfg);
  const auto b = measure_psf(make_diffuser(cfg.grid, 1.0, 2), cfg);
  EXPECT_LE(std::abs(normalized_cross_correlation(a.data, b.data)), 0.05);
}

TEST(OmeScan, RegionModelRangeEqualsTileSize) {
  OpticalConfig cfg;
  cfg.grid = {128, 128};
  const RegionPsfModel m(cfg, 10, 1.0, 4, "m");
  const auto curve = ome_scan(m, {20, 1, 0.5});
  EXPECT_EQ(curve.range_estimate, 10);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_NEAR(curve.correlations[i], 1.0, 1e-9);
}

TEST(OmeScan, RejectsTooLargeShift) {
  OpticalConfig cfg;
  cfg.grid = {32, 32};
  EXPECT_THROW(ome_scan(make_diffuser(cfg.grid, 1.0, 1), cfg, {16, 1, 0.5}), ParameterError);
}

TEST(OmeCurve, TextDump) {
  OmeCurve c;
  c.shifts = {0, 2};
  c.correlations = {1.0, 0.25};
  EXPECT_EQ(c.to_text(), "# shift correlation\n0 1.000000000\n2 0.250000000\n");
}
