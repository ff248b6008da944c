#include <gtest/gtest.h>

#include "oracles.hpp"
#include "scenarios.hpp"
#include "specklab/errors.hpp"
#include "specklab/phase_retrieval.hpp"

using namespace specklab;

TEST(MagnitudeFromSpeckle, DeltaIsFlat) {
  IntensityImage img(Shape{16, 16});
  img(5, 9) = 1.0;
  const RealArray m = magnitude_from_speckle(img);
  EXPECT_EQ(m(0, 0), 0.0);
  for (std::size_t i = 1; i < m.size(); ++i) EXPECT_NEAR(m.data()[i], 1.0, 1e-9);
}

TEST(MagnitudeFromSpeckle, ShiftInvariant) {
  const IntensityImage img(oracle::random_image({24, 24}, 1));
  const IntensityImage moved(circular_shift(img.data, {5, -9}));
  const RealArray a = magnitude_from_speckle(img), b = magnitude_from_speckle(moved);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a.data()[i], b.data()[i], 1e-9);
}

TEST(MagnitudeFromSpeckle, SquareIsSpectrumOfAutocorrelation) {
  const IntensityImage img(oracle::random_image({16, 16}, 2));
  const RealArray m = magnitude_from_speckle(img);
  ComplexArray power(m.shape());
  for (std::size_t i = 0; i < m.size(); ++i) power.data()[i] = m.data()[i] * m.data()[i];
  const RealArray ac = fftshift(fft::inverse_real(std::move(power)));
  const RealArray slow = oracle::circular_autocorrelation(img.data, true);
  for (std::size_t i = 0; i < ac.size(); ++i) EXPECT_NEAR(ac.data()[i], slow.data()[i], 1e-6);
}

TEST(Support, CentredBox) {
  const auto s = centered_box_support({8, 10}, 4, 6);
  std::size_t count = 0;
  for (unsigned char v : s) count += v;
  EXPECT_EQ(count, 24u);
  EXPECT_EQ(s(2, 2), 1);
  EXPECT_EQ(s(5, 7), 1);
  EXPECT_EQ(s(1, 2), 0);
  EXPECT_EQ(s(2, 8), 0);
}

TEST(RetrievalProblem, ValidationErrors) {
  RetrievalProblem p;
  p.magnitude = RealArray(8, 8, 1.0);
  p.support = centered_box_support({8, 8}, 4, 4);
  EXPECT_NO_THROW(p.validate());
  RetrievalProblem q = p;
  q.support = centered_box_support({4, 4}, 2, 2);
  EXPECT_THROW(hio_retrieve(q), ParameterError);
  q = p;
  q.magnitude = RealArray(8, 8, 0.0);
  EXPECT_THROW(hio_retrieve(q), DegenerateInputError);
  q = p;
  q.support = Array2D<unsigned char>(Shape{8, 8}, 0);
  EXPECT_THROW(hio_retrieve(q), ParameterError);
  q = p;
  q.beta = 1.5;
  EXPECT_THROW(hio_retrieve(q), ParameterError);
}

TEST(ObjectUpdate, BetaZeroFreezesOutsideConstraintSet) {
  RealArray g = oracle::random_image({8, 8}, 1, -1, 1);
  const RealArray gp = oracle::random_image({8, 8}, 2, -1, 1);
  const auto support = centered_box_support({8, 8}, 4, 4);
  const RealArray before = g;
  apply_object_update(g, gp, support, 0.0, UpdateRule::hybrid_input_output);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const bool in_gamma = support.data()[i] && gp.data()[i] >= 0.0;
    EXPECT_EQ(g.data()[i], in_gamma ? gp.data()[i] : before.data()[i]);
  }
}

TEST(ObjectUpdate, HioAndErRules) {
  RealArray g(1, 3, 0.5);
  RealArray gp(1, 3);
  gp(0, 0) = 0.2;   // inside support, nonnegative -> accepted
  gp(0, 1) = -0.4;  // inside support, negative -> feedback
  gp(0, 2) = 0.3;   // outside support -> feedback
  Array2D<unsigned char> support(1, 3, 1);
  support(0, 2) = 0;
  RealArray h = g;
  apply_object_update(h, gp, support, 0.9, UpdateRule::hybrid_input_output);
  EXPECT_DOUBLE_EQ(h(0, 0), 0.2);
  EXPECT_DOUBLE_EQ(h(0, 1), 0.5 + 0.9 * 0.4);
  EXPECT_DOUBLE_EQ(h(0, 2), 0.5 - 0.9 * 0.3);
  RealArray e = g;
  apply_object_update(e, gp, support, 0.9, UpdateRule::error_reduction);
  EXPECT_DOUBLE_EQ(e(0, 0), 0.2);
  EXPECT_DOUBLE_EQ(e(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(e(0, 2), 0.0);
}

TEST(Hio, RecoversOffCentreDelta) {
  RealArray obj(32, 32);
  obj(13, 18) = 1.0;
  RetrievalProblem p;
  p.magnitude = fourier_magnitude(obj);
  p.support = centered_box_support({32, 32}, 16, 16);
  p.max_iters = 200;
  p.restarts = 4;
  const auto res = hio_retrieve(p);
  EXPECT_GE(align_for_comparison(res.estimate, IntensityImage(obj)).ncc, 0.99);
}

TEST(Hio, ResultShapeAndInvariants) {
  const auto comp = scenario::composite(5, false, {32, 32}, 16);
  RetrievalProblem p;
  p.magnitude = fourier_magnitude(comp.object.data);
  p.support = centered_box_support({32, 32}, 16, 16);
  p.max_iters = 50;
  p.restarts = 5;
  const auto res = hio_retrieve(p);
  EXPECT_EQ(res.residual_history.size(), 50u);
  ASSERT_EQ(res.final_residuals.size(), 5u);
  for (double r : res.final_residuals) EXPECT_GE(r, res.final_residuals[res.best_restart]);
  for (std::size_t i = 0; i < res.estimate.data.size(); ++i) {
    EXPECT_GE(res.estimate.data.data()[i], 0.0);
    if (!p.support.data()[i]) EXPECT_EQ(res.estimate.data.data()[i], 0.0);
  }
}

TEST(Hio, ThreadCountDoesNotChangeResult) {
  const auto comp = scenario::composite(6, false, {32, 32}, 16);
  RetrievalProblem p;
  p.magnitude = fourier_magnitude(comp.object.data);
  p.support = centered_box_support({32, 32}, 16, 16);
  p.max_iters = 40;
  p.restarts = 6;
  p.threads = 1;
  const auto a = hio_retrieve(p);
  p.threads = 3;
  const auto b = hio_retrieve(p);
  EXPECT_TRUE(a.estimate.data == b.estimate.data);
  EXPECT_EQ(a.best_restart, b.best_restart);
}

TEST(ErrorReduction, ResidualNeverIncreases) {
  const auto comp = scenario::composite(7, false, {32, 32}, 16);
  RetrievalProblem p;
  p.magnitude = fourier_magnitude(comp.object.data);
  p.support = centered_box_support({32, 32}, 16, 16);
  p.rule = UpdateRule::error_reduction;
  p.max_iters = 100;
  p.restarts = 1;
  const auto res = hio_retrieve(p);
  for (std::size_t k = 1; k < res.residual_history.size(); ++k) {
    EXPECT_LE(res.residual_history[k], res.residual_history[k - 1] + 1e-12) << "iteration " << k;
  }
}

TEST(Hio, WithinOmeCompositeReachesBar) {
  EXPECT_GE(scenario::hio_instance(0).within_ncc, 0.9);
}

TEST(Align, UndoesShiftAndReflection) {
  const IntensityImage truth(oracle::random_image({16, 16}, 3));
  const IntensityImage est(circular_shift(point_reflect(truth.data), {4, -6}));
  const auto cmp = align_for_comparison(est, truth);
  EXPECT_NEAR(cmp.ncc, 1.0, 1e-12);
  EXPECT_TRUE(cmp.reflected);
  for (std::size_t i = 0; i < truth.data.size(); ++i) EXPECT_NEAR(cmp.aligned.data.data()[i], truth.data.data()[i], 1e-12);
  EXPECT_THROW(align_for_comparison(IntensityImage(Shape{4, 4}), truth), DimensionError);
}

TEST(RescaleUnit, MapsToUnitRange) {
  IntensityImage img(RealArray(2, 2));
  img(0, 0) = -1;
  img(1, 1) = 3;
  const auto out = rescale_unit(img);
  EXPECT_DOUBLE_EQ(out(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(out(1, 1), 1.0);
  EXPECT_DOUBLE_EQ(out(0, 1), 0.25);
}
