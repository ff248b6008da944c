#pragma once

#include <cstdint>
#include <vector>

#include "specklab/optics.hpp"

namespace specklab {

enum class UpdateRule {
  hybrid_input_output,  ///< outside the constraint set: g_k - beta * g'_k
  error_reduction,      ///< outside the constraint set: 0
};

/// Fourier-magnitude phase retrieval problem. The magnitude uses the unshifted
/// DFT layout (zero frequency at (0, 0)); the support is in object coordinates.
struct RetrievalProblem {
  RealArray magnitude;
  Array2D<unsigned char> support;
  double beta = 0.9;
  std::size_t max_iters = 600;
  std::uint64_t seed = 0;
  std::size_t restarts = 20;
  UpdateRule rule = UpdateRule::hybrid_input_output;
  /// Worker threads for restarts; 0 picks hardware concurrency.
  unsigned threads = 0;

  void validate() const;
};

struct RetrievalResult {
  IntensityImage estimate;
  /// ||F(g_k)| - magnitude| / |magnitude| per iteration of the chosen restart.
  std::vector<double> residual_history;
  std::size_t best_restart = 0;
  /// Residual of the final (clipped, masked) estimate of each restart.
  std::vector<double> final_residuals;
};

/// Fourier modulus of the mean-subtracted speckle with the DC bin zeroed.
/// Its square is the DFT of the mean-subtracted speckle autocorrelation.
RealArray magnitude_from_speckle(const IntensityImage& speckle);

/// Fourier modulus |DFT(object)| (DC kept).
RealArray fourier_magnitude(const RealArray& object);

/// Centred rows x cols box of true cells on `grid`.
Array2D<unsigned char> centered_box_support(Shape grid, std::size_t rows, std::size_t cols);

double fourier_residual(const RealArray& estimate, const RealArray& magnitude);

/// One object-domain update of the constraint set
/// Gamma = {support and g'_k >= 0}: inside Gamma g_{k+1} = g'_k, outside per `rule`.
void apply_object_update(RealArray& g, const RealArray& g_prime, const Array2D<unsigned char>& support,
                         double beta, UpdateRule rule);

/// Runs `restarts` independent random starts and keeps the lowest final
/// residual (ties go to the lower restart index).
RetrievalResult hio_retrieve(const RetrievalProblem& problem);

struct AlignedComparison {
  IntensityImage aligned;
  double ncc = 0.0;
  Offset shift;
  bool reflected = false;
};

/// Best NCC of `estimate` against `truth` over every circular shift of the
/// estimate and of its point reflection.
AlignedComparison align_for_comparison(const IntensityImage& estimate, const IntensityImage& truth);

/// Linear rescale to [0, 1] (all-constant images map to 0).
IntensityImage rescale_unit(const IntensityImage& image);

}  // namespace specklab
