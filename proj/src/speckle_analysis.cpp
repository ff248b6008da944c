#include "specklab/speckle_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "specklab/errors.hpp"

namespace specklab {
namespace {

double mean_of(const RealArray& a) {
  double s = 0.0;
  for (double v : a) s += v;
  return a.empty() ? 0.0 : s / static_cast<double>(a.size());
}

Array2D<unsigned char> central_exclusion_mask(Shape s, long half_width) {
  Array2D<unsigned char> mask(s, 1);
  const long cr = static_cast<long>(s.rows / 2);
  const long cc = static_cast<long>(s.cols / 2);
  for (long r = cr - half_width; r <= cr + half_width; ++r) {
    for (long c = cc - half_width; c <= cc + half_width; ++c) {
      mask(wrap_index(r, s.rows), wrap_index(c, s.cols)) = 0;
    }
  }
  return mask;
}

}  // namespace

double CorrelationMap::peak_to_background() const {
  return background_mean > 0.0 ? peak_value / background_mean : INFINITY;
}

CorrelationMap autocorrelate(const RealArray& image, bool subtract_mean) {
  RealArray work = image;
  if (subtract_mean) {
    const double m = mean_of(work);
    for (double& v : work) v -= m;
  }
  ComplexArray spectrum = fft::forward(work);
  for (Complex& v : spectrum) v = std::norm(v);
  RealArray lags = fftshift(fft::inverse_real(std::move(spectrum)));

  const std::size_t rows = lags.rows();
  const std::size_t cols = lags.cols();
  const std::size_t cr = rows / 2;
  const std::size_t cc = cols / 2;

  CorrelationMap map;
  map.data = std::move(lags);
  map.peak_value = map.data(cr, cc);
  double bg = 0.0;
  std::size_t count = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const long dr = static_cast<long>(r) - static_cast<long>(cr);
      const long dc = static_cast<long>(c) - static_cast<long>(cc);
      if (std::abs(dr) <= 1 && std::abs(dc) <= 1) continue;
      bg += std::abs(map.data(r, c));
      ++count;
    }
  }
  map.background_mean = count ? bg / static_cast<double>(count) : 0.0;
  return map;
}

CorrelationMap autocorrelate(const IntensityImage& image, bool subtract_mean) {
  return autocorrelate(image.data, subtract_mean);
}

double normalized_cross_correlation(const RealArray& a, const RealArray& b,
                                    const Array2D<unsigned char>& mask) {
  if (a.shape() != b.shape()) throw DimensionError("NCC operands differ in shape");
  const bool masked = !mask.empty();
  if (masked && mask.shape() != a.shape()) throw DimensionError("NCC mask differs in shape");
  double sa = 0.0, sb = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (masked && !mask.data()[i]) continue;
    sa += a.data()[i];
    sb += b.data()[i];
    ++n;
  }
  if (n == 0) return 0.0;
  const double ma = sa / static_cast<double>(n);
  const double mb = sb / static_cast<double>(n);
  double num = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (masked && !mask.data()[i]) continue;
    const double x = a.data()[i] - ma;
    const double y = b.data()[i] - mb;
    num += x * y;
    na += x * x;
    nb += y * y;
  }
  if (na <= 0.0 || nb <= 0.0) return 0.0;
  return std::clamp(num / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

double peak_cross_correlation(const RealArray& a, const RealArray& b, Offset* best_lag) {
  if (a.shape() != b.shape()) throw DimensionError("cross-correlation operands differ in shape");
  if (a == b) {
    if (best_lag) *best_lag = {};
    return 1.0;
  }
  RealArray a0 = a, b0 = b;
  const double ma = mean_of(a0), mb = mean_of(b0);
  for (double& v : a0) v -= ma;
  for (double& v : b0) v -= mb;
  ComplexArray fa = fft::forward(a0);
  const ComplexArray fb = fft::forward(b0);
  for (std::size_t i = 0; i < fa.size(); ++i) fa.data()[i] *= std::conj(fb.data()[i]);
  const RealArray xc = fft::inverse_real(std::move(fa));
  const auto it = std::max_element(xc.begin(), xc.end());
  const auto idx = static_cast<std::size_t>(it - xc.begin());
  const Offset lag{static_cast<long>(idx / xc.cols()), static_cast<long>(idx % xc.cols())};
  if (best_lag) *best_lag = lag;
  return normalized_cross_correlation(a, circular_shift(b, lag));
}

double speckle_contrast(const IntensityImage& image, double central_fraction) {
  if (!(central_fraction > 0.0 && central_fraction <= 1.0)) {
    throw ParameterError("central fraction must lie in (0, 1]");
  }
  const auto h = std::max<std::size_t>(1, static_cast<std::size_t>(image.rows() * central_fraction));
  const auto w = std::max<std::size_t>(1, static_cast<std::size_t>(image.cols() * central_fraction));
  const std::size_t r0 = (image.rows() - h) / 2;
  const std::size_t c0 = (image.cols() - w) / 2;
  double s = 0.0, s2 = 0.0;
  for (std::size_t r = r0; r < r0 + h; ++r) {
    for (std::size_t c = c0; c < c0 + w; ++c) {
      s += image(r, c);
      s2 += image(r, c) * image(r, c);
    }
  }
  const double n = static_cast<double>(h * w);
  const double mu = s / n;
  const double var = std::max(0.0, s2 / n - mu * mu);
  return mu > 0.0 ? std::sqrt(var) / mu : 0.0;
}

Array2D<unsigned char> autocorrelation_support(const RealArray& raw_reference) {
  double peak = 0.0;
  for (double v : raw_reference) peak = std::max(peak, v);
  Array2D<unsigned char> support(raw_reference.shape(), 0);
  const double floor = 1e-9 * peak;
  for (std::size_t i = 0; i < raw_reference.size(); ++i) {
    support.data()[i] = raw_reference.data()[i] > floor ? 1 : 0;
  }
  return support;
}

double ome_identity_score(const CorrelationMap& speckle_autocorr, const RealArray& reference_autocorr,
                          const Array2D<unsigned char>& support) {
  if (speckle_autocorr.data.shape() != reference_autocorr.shape()) {
    throw DimensionError("speckle and reference autocorrelations differ in shape");
  }
  Array2D<unsigned char> mask = central_exclusion_mask(speckle_autocorr.data.shape(), 1);
  if (!support.empty()) {
    if (support.shape() != mask.shape()) throw DimensionError("support mask differs in shape");
    for (std::size_t i = 0; i < mask.size(); ++i) mask.data()[i] &= support.data()[i];
  }
  return normalized_cross_correlation(speckle_autocorr.data, reference_autocorr, mask);
}

RealArray reference_autocorrelation(const SceneLayout& layout) {
  layout.validate();
  RealArray reference(layout.grid);
  for (std::size_t i = 0; i < layout.regions.size(); ++i) {
    const CorrelationMap part = autocorrelate(layout.placed(i), false);
    for (std::size_t j = 0; j < reference.size(); ++j) reference.data()[j] += part.data.data()[j];
  }
  return reference;
}

double ome_identity_score(const IntensityImage& speckle, const SceneLayout& layout) {
  if (speckle.shape() != layout.grid) throw DimensionError("speckle and layout grids differ");
  // Raw and mean-subtracted object autocorrelations differ by a constant,
  // which the NCC removes, so the raw sum doubles as the support source.
  const RealArray reference = reference_autocorrelation(layout);
  return ome_identity_score(autocorrelate(speckle, true), reference,
                            autocorrelation_support(reference));
}

std::string OmeCurve::to_text() const {
  std::ostringstream os;
  os << "# shift correlation\n";
  char line[64];
  for (std::size_t i = 0; i < shifts.size(); ++i) {
    std::snprintf(line, sizeof line, "%ld %.9f\n", shifts[i], correlations[i]);
    os << line;
  }
  return os.str();
}

namespace {

template <typename PsfAt>
OmeCurve run_scan(const OmeScanOptions& options, Shape grid, PsfAt&& psf_at) {
  if (options.max_shift < 0 || options.step <= 0) throw ParameterError("invalid scan range");
  if (static_cast<std::size_t>(options.max_shift) * 2 >= std::min(grid.rows, grid.cols)) {
    throw ParameterError("max_shift must be below half the grid");
  }
  OmeCurve curve;
  curve.threshold = options.threshold;
  const RealArray origin = psf_at(0);
  for (long s = 0; s <= options.max_shift; s += options.step) {
    const double corr = s == 0 ? 1.0 : peak_cross_correlation(origin, psf_at(s));
    curve.shifts.push_back(s);
    curve.correlations.push_back(corr);
    if (curve.range_estimate < 0 && corr < options.threshold) curve.range_estimate = s;
  }
  return curve;
}

}  // namespace

OmeCurve ome_scan(const DiffuserScreen& screen, const OpticalConfig& config, const OmeScanOptions& options) {
  return run_scan(options, config.grid,
                  [&](long s) { return measure_psf(screen, config, {s, s}).data; });
}

OmeCurve ome_scan(const RegionPsfModel& system, const OmeScanOptions& options) {
  return run_scan(options, system.config().grid, [&](long s) {
    // Inside a tile the system is shift invariant: a source moved by (s, s)
    // produces that tile's PSF moved by (s, s).
    const auto [ty, tx] = system.tile_of({s, s});
    return circular_shift(system.psf(ty, tx).data, {s, s});
  });
}

}  // namespace specklab
