#include "specklab/phase_retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "specklab/errors.hpp"
#include "specklab/fft.hpp"
#include "specklab/parallel.hpp"
#include "specklab/rng.hpp"
#include "specklab/speckle_analysis.hpp"

namespace specklab {

void RetrievalProblem::validate() const {
  if (magnitude.empty()) throw ParameterError("magnitude is empty");
  if (support.shape() != magnitude.shape()) throw ParameterError("support and magnitude grids differ");
  if (!(beta >= 0.0 && beta <= 1.0)) throw ParameterError("beta must lie in [0, 1]");
  if (max_iters == 0) throw ParameterError("max_iters must be positive");
  if (restarts == 0) throw ParameterError("restarts must be positive");
  bool any = false;
  for (unsigned char s : support) any = any || s;
  if (!any) throw ParameterError("support has no true cell");
  double total = 0.0;
  for (double v : magnitude) {
    if (v < 0.0 || !std::isfinite(v)) throw ParameterError("magnitude must be finite and nonnegative");
    total += v;
  }
  if (total == 0.0) throw DegenerateInputError("magnitude is identically zero");
}

RealArray fourier_magnitude(const RealArray& object) {
  const ComplexArray spectrum = fft::forward(object);
  RealArray out(object.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = std::abs(spectrum.data()[i]);
  return out;
}

RealArray magnitude_from_speckle(const IntensityImage& speckle) {
  RealArray work = speckle.data;
  double mean = 0.0;
  for (double v : work) mean += v;
  mean /= static_cast<double>(work.size());
  for (double& v : work) v -= mean;
  RealArray mag = fourier_magnitude(work);
  mag(0, 0) = 0.0;
  return mag;
}

Array2D<unsigned char> centered_box_support(Shape grid, std::size_t rows, std::size_t cols) {
  rows = std::min(rows, grid.rows);
  cols = std::min(cols, grid.cols);
  Array2D<unsigned char> mask(grid, 0);
  const std::size_t r0 = (grid.rows - rows) / 2;
  const std::size_t c0 = (grid.cols - cols) / 2;
  for (std::size_t r = r0; r < r0 + rows; ++r) {
    for (std::size_t c = c0; c < c0 + cols; ++c) mask(r, c) = 1;
  }
  return mask;
}

namespace {

double residual_of_spectrum(const ComplexArray& spectrum, const RealArray& magnitude, double mag_norm) {
  double err = 0.0;
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    const double d = std::abs(spectrum.data()[i]) - magnitude.data()[i];
    err += d * d;
  }
  return std::sqrt(err) / mag_norm;
}

double norm2(const RealArray& a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

struct RestartOutcome {
  RealArray estimate;
  std::vector<double> history;
  double final_residual = 0.0;
};

RestartOutcome run_restart(const RetrievalProblem& p, std::size_t restart, double mag_norm) {
  const Shape grid = p.magnitude.shape();
  const rng::CounterRng gen(rng::derive_seed(p.seed, restart));
  RealArray g(grid);
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.data()[i] = p.support.data()[i] ? gen.uniform2(i).first : 0.0;
  }

  RestartOutcome out;
  out.history.reserve(p.max_iters);
  ComplexArray spectrum(grid);
  RealArray g_prime(grid);
  for (std::size_t k = 0; k < p.max_iters; ++k) {
    for (std::size_t i = 0; i < g.size(); ++i) spectrum.data()[i] = g.data()[i];
    fft::transform(spectrum, fft::Direction::forward);
    out.history.push_back(residual_of_spectrum(spectrum, p.magnitude, mag_norm));
    for (std::size_t i = 0; i < spectrum.size(); ++i) {
      Complex& v = spectrum.data()[i];
      const double a = std::abs(v);
      v = a > 0.0 ? v * (p.magnitude.data()[i] / a) : Complex(p.magnitude.data()[i], 0.0);
    }
    fft::transform(spectrum, fft::Direction::inverse);
    for (std::size_t i = 0; i < g.size(); ++i) g_prime.data()[i] = spectrum.data()[i].real();
    if (k + 1 < p.max_iters) apply_object_update(g, g_prime, p.support, p.beta, p.rule);
  }

  for (std::size_t i = 0; i < g_prime.size(); ++i) {
    double& v = g_prime.data()[i];
    v = p.support.data()[i] ? std::max(v, 0.0) : 0.0;
  }
  out.final_residual = fourier_residual(g_prime, p.magnitude);
  out.estimate = std::move(g_prime);
  return out;
}

}  // namespace

double fourier_residual(const RealArray& estimate, const RealArray& magnitude) {
  if (estimate.shape() != magnitude.shape()) throw DimensionError("estimate and magnitude grids differ");
  const double n = norm2(magnitude);
  if (n == 0.0) throw DegenerateInputError("magnitude is identically zero");
  return residual_of_spectrum(fft::forward(estimate), magnitude, n);
}

void apply_object_update(RealArray& g, const RealArray& g_prime, const Array2D<unsigned char>& support,
                         double beta, UpdateRule rule) {
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double gp = g_prime.data()[i];
    if (support.data()[i] && gp >= 0.0) {
      g.data()[i] = gp;
    } else if (rule == UpdateRule::hybrid_input_output) {
      g.data()[i] = g.data()[i] - beta * gp;
    } else {
      g.data()[i] = 0.0;
    }
  }
}

RetrievalResult hio_retrieve(const RetrievalProblem& problem) {
  problem.validate();
  const double mag_norm = norm2(problem.magnitude);

  std::vector<RestartOutcome> outcomes(problem.restarts);
  parallel_for(problem.restarts, problem.threads,
               [&](std::size_t r) { outcomes[r] = run_restart(problem, r, mag_norm); });

  RetrievalResult result;
  std::size_t best = 0;
  for (std::size_t r = 0; r < outcomes.size(); ++r) {
    result.final_residuals.push_back(outcomes[r].final_residual);
    if (outcomes[r].final_residual < outcomes[best].final_residual) best = r;
  }
  result.best_restart = best;
  result.residual_history = std::move(outcomes[best].history);
  double peak = 0.0;
  for (double v : outcomes[best].estimate) peak = std::max(peak, v);
  result.estimate = IntensityImage(std::move(outcomes[best].estimate), peak > 0.0 ? peak : 1.0);
  return result;
}

IntensityImage rescale_unit(const IntensityImage& image) {
  IntensityImage out = image;
  if (image.data.empty()) return out;
  const auto [lo, hi] = std::minmax_element(image.data.begin(), image.data.end());
  const double span = *hi - *lo;
  for (double& v : out.data) v = span > 0.0 ? (v - *lo) / span : 0.0;
  out.value_scale = 1.0;
  return out;
}

AlignedComparison align_for_comparison(const IntensityImage& estimate, const IntensityImage& truth) {
  if (estimate.shape() != truth.shape()) throw DimensionError("estimate and truth grids differ");
  AlignedComparison best;
  best.ncc = -std::numeric_limits<double>::infinity();
  for (bool reflected : {false, true}) {
    const RealArray candidate = reflected ? point_reflect(estimate.data) : estimate.data;
    Offset lag;
    const double ncc = peak_cross_correlation(truth.data, candidate, &lag);
    if (ncc > best.ncc) {
      best.ncc = ncc;
      best.shift = lag;
      best.reflected = reflected;
      best.aligned = IntensityImage(circular_shift(candidate, lag), estimate.value_scale);
    }
  }
  return best;
}

}  // namespace specklab
