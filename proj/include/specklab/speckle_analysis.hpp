#pragma once

#include <string>
#include <vector>

#include "specklab/forward_model.hpp"
#include "specklab/optics.hpp"

namespace specklab {

/// Autocorrelation with zero lag at (rows/2, cols/2).
struct CorrelationMap {
  RealArray data;
  double peak_value = 0.0;
  /// Mean of |data| outside the 3x3 window around zero lag.
  double background_mean = 0.0;

  double peak_to_background() const;
};

/// Circular autocorrelation through the power spectrum: IFFT(|FFT(I - mean)|^2).
CorrelationMap autocorrelate(const IntensityImage& image, bool subtract_mean = true);
CorrelationMap autocorrelate(const RealArray& image, bool subtract_mean = true);

/// Zero-mean, unit-norm normalized cross-correlation of two equal-shape arrays
/// over the samples where `mask` is nonzero (all samples when mask is empty).
double normalized_cross_correlation(const RealArray& a, const RealArray& b,
                                    const Array2D<unsigned char>& mask = {});

/// Max over all circular lags of the NCC between a and shifted b. `best_lag`
/// receives the shift applied to b.
double peak_cross_correlation(const RealArray& a, const RealArray& b, Offset* best_lag = nullptr);

/// sigma / mu over the central (fraction x fraction) window.
double speckle_contrast(const IntensityImage& image, double central_fraction = 0.5);

/// Sum over regions of the raw autocorrelation of each placed region object.
RealArray reference_autocorrelation(const SceneLayout& layout);

/// Lags where a nonnegative reference autocorrelation is nonzero.
Array2D<unsigned char> autocorrelation_support(const RealArray& raw_reference);

/// NCC between the mean-subtracted speckle autocorrelation and
/// sum_i autocorr(O_i placed), evaluated over the lags inside the reference
/// support with the 3x3 window around zero lag excluded. Outside the support
/// the speckle map holds only PSF cross-talk noise, which carries no object
/// information.
double ome_identity_score(const IntensityImage& speckle, const SceneLayout& layout);

/// Same score against an explicit reference; an empty support means all lags.
double ome_identity_score(const CorrelationMap& speckle_autocorr, const RealArray& reference_autocorr,
                          const Array2D<unsigned char>& support = {});

struct OmeCurve {
  std::vector<long> shifts;  ///< diagonal source offsets (s, s)
  std::vector<double> correlations;
  /// First shift whose correlation fell below threshold; -1 when it never did.
  long range_estimate = -1;
  double threshold = 0.5;

  std::string to_text() const;
};

struct OmeScanOptions {
  long max_shift = 16;
  long step = 1;
  double threshold = 0.5;
};

/// Correlation of the on-axis PSF with the PSF of a source moved by (s, s),
/// after compensating the geometric speckle shift (peak over lags).
OmeCurve ome_scan(const DiffuserScreen& screen, const OpticalConfig& config, const OmeScanOptions& options);
OmeCurve ome_scan(const RegionPsfModel& system, const OmeScanOptions& options);

}  // namespace specklab
