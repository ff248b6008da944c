#include "specklab/optics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "specklab/errors.hpp"

namespace specklab {

ComplexField::ComplexField(ComplexArray d, double p) : data(std::move(d)), pitch(p) {
  if (data.rows() < 2 || data.cols() < 2) throw DimensionError("field grid must be at least 2x2");
  if (!(pitch > 0.0)) throw ParameterError("field pitch must be positive");
}

IntensityImage::IntensityImage(RealArray d, double scale) : data(std::move(d)), value_scale(scale) {
  if (!(value_scale > 0.0)) throw ParameterError("value_scale must be positive");
}

void OpticalConfig::validate() const {
  if (!(wavelength > 0.0)) throw ParameterError("wavelength must be positive");
  if (!(d1 >= 0.0) || !(d2 >= 0.0)) throw ParameterError("propagation distances must be >= 0");
  if (!(pitch > 0.0)) throw ParameterError("pitch must be positive");
  if (grid.rows < 2 || grid.cols < 2) throw ParameterError("grid must be at least 2x2");
}

double fresnel_sampling_ratio(double distance, const OpticalConfig& config) {
  const double n = static_cast<double>(std::min(config.grid.rows, config.grid.cols));
  return config.wavelength * distance / (n * config.pitch * config.pitch);
}

PropagationResult fresnel_propagate(const ComplexField& field, double distance,
                                    const OpticalConfig& config, PropagationDirection direction) {
  config.validate();
  if (field.shape() != config.grid) {
    throw DimensionError("field grid " + std::to_string(field.data.rows()) + "x" +
                         std::to_string(field.data.cols()) + " does not match config grid " +
                         std::to_string(config.grid.rows) + "x" + std::to_string(config.grid.cols));
  }
  if (!(distance >= 0.0)) throw ParameterError("propagation distance must be >= 0");

  PropagationResult result;
  result.sampling_ratio = fresnel_sampling_ratio(distance, config);
  result.undersampled = result.sampling_ratio > 1.0;
  if (distance == 0.0) {
    result.field = field;
    return result;
  }

  const std::size_t rows = field.data.rows();
  const std::size_t cols = field.data.cols();
  const double lambda = config.wavelength;
  const double k = 2.0 * std::numbers::pi / lambda;
  const double sign = direction == PropagationDirection::forward ? 1.0 : -1.0;
  const double dfx = 1.0 / (static_cast<double>(cols) * field.pitch);
  const double dfy = 1.0 / (static_cast<double>(rows) * field.pitch);

  // Separable kernel: exp(i k z) exp(-i pi lambda z fy^2) exp(-i pi lambda z fx^2).
  // The carrier phase k*z is reduced modulo 2 pi before exponentiation.
  const double carrier = std::fmod(k * distance, 2.0 * std::numbers::pi);
  std::vector<Complex> ky(rows), kx(cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const double fy = static_cast<double>(fft::signed_frequency(r, rows)) * dfy;
    ky[r] = std::polar(1.0, sign * (carrier - std::numbers::pi * lambda * distance * fy * fy));
  }
  for (std::size_t c = 0; c < cols; ++c) {
    const double fx = static_cast<double>(fft::signed_frequency(c, cols)) * dfx;
    kx[c] = std::polar(1.0, -sign * std::numbers::pi * lambda * distance * fx * fx);
  }

  ComplexArray spectrum = fft::forward(field.data);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) spectrum(r, c) *= ky[r] * kx[c];
  }
  result.field = ComplexField(fft::inverse(std::move(spectrum)), field.pitch);
  return result;
}

double field_energy(const ComplexField& field) {
  double e = 0.0;
  for (const Complex& v : field.data) e += std::norm(v);
  return e;
}

IntensityImage to_intensity(const ComplexField& field) {
  RealArray out(field.shape());
  double peak = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.data()[i] = std::norm(field.data.data()[i]);
    peak = std::max(peak, out.data()[i]);
  }
  return IntensityImage(std::move(out), peak > 0.0 ? peak : 1.0);
}

double normalize_to_unit_max(IntensityImage& image) {
  double peak = 0.0;
  for (double v : image.data) peak = std::max(peak, v);
  if (peak <= 0.0) {
    image.value_scale = 1.0;
    return 1.0;
  }
  for (double& v : image.data) v /= peak;
  image.value_scale = 1.0;
  return peak;
}

}  // namespace specklab
