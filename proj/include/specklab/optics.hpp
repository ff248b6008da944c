#pragma once

#include "specklab/array2d.hpp"
#include "specklab/fft.hpp"

namespace specklab {

/// Complex scalar field sampled on a uniform square grid.
struct ComplexField {
  ComplexArray data;
  double pitch = 0.0;  ///< metres per sample

  ComplexField() = default;
  ComplexField(ComplexArray d, double p);

  Shape shape() const { return data.shape(); }
};

/// Nonnegative real image. value_scale is the largest representable value
/// (1.0 for normalized float images, 255 for 8-bit data).
struct IntensityImage {
  RealArray data;
  double value_scale = 1.0;

  IntensityImage() = default;
  explicit IntensityImage(RealArray d, double scale = 1.0);
  IntensityImage(Shape s, double fill = 0.0) : data(s, fill) {}

  Shape shape() const { return data.shape(); }
  std::size_t rows() const { return data.rows(); }
  std::size_t cols() const { return data.cols(); }
  double& operator()(std::size_t r, std::size_t c) { return data(r, c); }
  double operator()(std::size_t r, std::size_t c) const { return data(r, c); }
};

struct OpticalConfig {
  double wavelength = 625e-9;  ///< metres
  double d1 = 0.25;            ///< object to diffuser, metres
  double d2 = 0.08;            ///< diffuser to camera, metres
  Shape grid{256, 256};
  double pitch = 13.68e-6;     ///< metres per sample

  /// Throws ParameterError on a non-physical configuration.
  void validate() const;
};

enum class PropagationDirection { forward, backward };

struct PropagationResult {
  ComplexField field;
  /// lambda * z / (N * pitch^2) with N the smaller grid side; > 1 means the
  /// transfer-function kernel is aliased at the band edge.
  double sampling_ratio = 0.0;
  bool undersampled = false;
};

/// Fresnel transfer-function propagation:
///   U_out = IFFT( FFT(U_in) * exp(i k z) exp(-i pi lambda z (fx^2 + fy^2)) ).
/// backward applies the conjugate kernel, undoing a forward hop exactly on
/// the sampled band. distance == 0 returns the input unchanged.
PropagationResult fresnel_propagate(const ComplexField& field, double distance,
                                    const OpticalConfig& config,
                                    PropagationDirection direction = PropagationDirection::forward);

/// Sum of |u|^2.
double field_energy(const ComplexField& field);

/// Pixelwise |u|^2; value_scale is the peak (1.0 when the field is zero).
IntensityImage to_intensity(const ComplexField& field);

/// Sampling validity ratio of the transfer-function kernel for a hop of `distance`.
double fresnel_sampling_ratio(double distance, const OpticalConfig& config);

/// Scales the image so its maximum is 1 and returns the divisor (1 for an all-zero image).
double normalize_to_unit_max(IntensityImage& image);

}  // namespace specklab
