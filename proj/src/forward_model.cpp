#include "specklab/forward_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "specklab/errors.hpp"
#include "specklab/rng.hpp"

namespace specklab {
namespace {

void require_grid(Shape actual, Shape expected, const char* what) {
  if (actual != expected) {
    throw DimensionError(std::string(what) + " grid " + std::to_string(actual.rows) + "x" +
                         std::to_string(actual.cols) + " does not match " +
                         std::to_string(expected.rows) + "x" + std::to_string(expected.cols));
  }
}

long floor_div(long a, long b) {
  long q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

IntensityImage clip_and_wrap(RealArray out) {
  for (double& v : out) v = std::max(v, 0.0);
  double peak = 0.0;
  for (double v : out) peak = std::max(peak, v);
  return IntensityImage(std::move(out), peak > 0.0 ? peak : 1.0);
}

}  // namespace

void SceneLayout::validate() const {
  if (regions.empty()) throw ParameterError("scene layout needs at least one region");
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const auto& r = regions[i];
    if (r.offset.row < 0 || r.offset.col < 0 ||
        static_cast<std::size_t>(r.offset.row) + r.object.rows() > grid.rows ||
        static_cast<std::size_t>(r.offset.col) + r.object.cols() > grid.cols) {
      throw ParameterError("region " + std::to_string(i) + " does not fit inside the grid");
    }
  }
}

RealArray SceneLayout::placed(std::size_t i) const {
  const auto& region = regions.at(i);
  RealArray out(grid);
  for (std::size_t r = 0; r < region.object.rows(); ++r) {
    for (std::size_t c = 0; c < region.object.cols(); ++c) {
      out(r + region.offset.row, c + region.offset.col) = region.object(r, c);
    }
  }
  return out;
}

RealArray SceneLayout::union_object() const {
  RealArray out(grid);
  for (const auto& region : regions) {
    for (std::size_t r = 0; r < region.object.rows(); ++r) {
      for (std::size_t c = 0; c < region.object.cols(); ++c) {
        out(r + region.offset.row, c + region.offset.col) += region.object(r, c);
      }
    }
  }
  return out;
}

SceneLayout partition_into_tiles(const IntensityImage& object, long region_size) {
  SceneLayout layout;
  layout.grid = object.shape();
  if (region_size <= 0) {
    layout.regions.push_back({object, {0, 0}, 0, 0});
    return layout;
  }
  const long rows = static_cast<long>(object.rows());
  const long cols = static_cast<long>(object.cols());
  const long cr = rows / 2;
  const long cc = cols / 2;

  std::set<std::pair<long, long>> tiles;
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) {
      if (object(r, c) != 0.0) tiles.insert({floor_div(r - cr, region_size), floor_div(c - cc, region_size)});
    }
  }
  for (const auto& [ty, tx] : tiles) {
    const long r0 = std::max(0L, cr + ty * region_size);
    const long c0 = std::max(0L, cc + tx * region_size);
    const long r1 = std::min(rows, cr + (ty + 1) * region_size);
    const long c1 = std::min(cols, cc + (tx + 1) * region_size);
    IntensityImage patch(Shape{static_cast<std::size_t>(r1 - r0), static_cast<std::size_t>(c1 - c0)});
    patch.value_scale = object.value_scale;
    for (long r = r0; r < r1; ++r) {
      for (long c = c0; c < c1; ++c) patch(r - r0, c - c0) = object(r, c);
    }
    layout.regions.push_back({std::move(patch), {r0, c0}, ty, tx});
  }
  if (layout.regions.empty()) layout.regions.push_back({object, {0, 0}, 0, 0});
  return layout;
}

IntensityImage simulate_speckle_wave(const IntensityImage& object, const DiffuserScreen& screen,
                                     const OpticalConfig& config) {
  config.validate();
  require_grid(object.shape(), config.grid, "object");
  require_grid(screen.shape(), config.grid, "screen");

  ComplexArray amplitude(config.grid);
  for (std::size_t i = 0; i < amplitude.size(); ++i) {
    amplitude.data()[i] = std::sqrt(std::max(object.data.data()[i], 0.0));
  }
  ComplexField field(std::move(amplitude), config.pitch);
  field = fresnel_propagate(field, config.d1, config).field;
  apply_screen(field, screen);
  field = fresnel_propagate(field, config.d2, config).field;
  return to_intensity(field);
}

IntensityImage measure_psf(const DiffuserScreen& screen, const OpticalConfig& config,
                           Offset source_offset) {
  const long r = static_cast<long>(config.grid.rows / 2) + source_offset.row;
  const long c = static_cast<long>(config.grid.cols / 2) + source_offset.col;
  if (r < 0 || c < 0 || r >= static_cast<long>(config.grid.rows) ||
      c >= static_cast<long>(config.grid.cols)) {
    throw ParameterError("point source offset lies outside the grid");
  }
  IntensityImage point(config.grid);
  point(r, c) = 1.0;
  IntensityImage psf = simulate_speckle_wave(point, screen, config);
  double total = 0.0;
  for (double v : psf.data) total += v;
  if (total > 0.0) {
    for (double& v : psf.data) v /= total;
  }
  double peak = 0.0;
  for (double v : psf.data) peak = std::max(peak, v);
  psf.value_scale = peak > 0.0 ? peak : 1.0;
  return psf;
}

ComplexArray kernel_spectrum(const IntensityImage& centred_psf) {
  return fft::forward(ifftshift(centred_psf.data));
}

IntensityImage forward_multi_region(const SceneLayout& layout,
                                    const std::vector<const ComplexArray*>& kernel_spectra) {
  layout.validate();
  if (kernel_spectra.size() != layout.regions.size()) {
    throw ParameterError("need one PSF per region: " + std::to_string(layout.regions.size()) +
                         " regions, " + std::to_string(kernel_spectra.size()) + " PSFs");
  }
  ComplexArray accum(layout.grid);
  ComplexArray buffer(layout.grid);
  for (std::size_t i = 0; i < layout.regions.size(); ++i) {
    require_grid(kernel_spectra[i]->shape(), layout.grid, "PSF");
    const auto& region = layout.regions[i];
    buffer.fill(Complex{});
    for (std::size_t r = 0; r < region.object.rows(); ++r) {
      for (std::size_t c = 0; c < region.object.cols(); ++c) {
        buffer(r + region.offset.row, c + region.offset.col) = region.object(r, c);
      }
    }
    fft::transform(buffer, fft::Direction::forward);
    const Complex* k = kernel_spectra[i]->data();
    for (std::size_t j = 0; j < accum.size(); ++j) accum.data()[j] += buffer.data()[j] * k[j];
  }
  return clip_and_wrap(fft::inverse_real(std::move(accum)));
}

IntensityImage forward_multi_region(const SceneLayout& layout, const PsfSet& psfs) {
  if (psfs.psfs.size() != layout.regions.size()) {
    throw ParameterError("need one PSF per region: " + std::to_string(layout.regions.size()) +
                         " regions, " + std::to_string(psfs.psfs.size()) + " PSFs");
  }
  std::vector<ComplexArray> spectra;
  spectra.reserve(psfs.psfs.size());
  for (const auto& p : psfs.psfs) {
    require_grid(p.shape(), layout.grid, "PSF");
    spectra.push_back(kernel_spectrum(p));
  }
  std::vector<const ComplexArray*> ptrs;
  for (const auto& s : spectra) ptrs.push_back(&s);
  return forward_multi_region(layout, ptrs);
}

BeyondOmeSpeckle make_beyond_ome_speckle(const SceneLayout& layout,
                                         const std::vector<DiffuserScreen>& screens,
                                         const OpticalConfig& config) {
  if (screens.size() != layout.regions.size()) {
    throw ParameterError("need one screen per region: " + std::to_string(layout.regions.size()) +
                         " regions, " + std::to_string(screens.size()) + " screens");
  }
  PsfSet set;
  for (std::size_t i = 0; i < screens.size(); ++i) {
    set.psfs.push_back(measure_psf(screens[i], config));
    set.diffuser_id += (i ? "," : "") + screens[i].id;
  }
  return make_beyond_ome_speckle(layout, set);
}

BeyondOmeSpeckle make_beyond_ome_speckle(const SceneLayout& layout, const PsfSet& psfs) {
  BeyondOmeSpeckle out;
  out.speckle = forward_multi_region(layout, psfs);
  out.psfs = psfs;
  return out;
}

RegionPsfModel::RegionPsfModel(OpticalConfig config, long region_size, double variance,
                               std::uint64_t seed, std::string id)
    : config_(config), region_size_(region_size), variance_(variance), seed_(seed), id_(std::move(id)) {
  config_.validate();
  if (region_size_ <= 0) throw ParameterError("region size must be positive");
  if (!(variance_ > 0.0)) throw ParameterError("diffuser variance must be positive");
}

std::uint64_t RegionPsfModel::tile_seed(long tile_row, long tile_col) const {
  const auto key = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(tile_row)) << 32) |
                   static_cast<std::uint32_t>(tile_col);
  return rng::derive_seed(seed_, key);
}

std::pair<long, long> RegionPsfModel::tile_of(Offset from_centre) const {
  return {floor_div(from_centre.row, region_size_), floor_div(from_centre.col, region_size_)};
}

const RegionPsfModel::Entry& RegionPsfModel::entry(long tile_row, long tile_col) const {
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find({tile_row, tile_col}); it != cache_.end()) return *it->second;
  }
  auto fresh = std::make_unique<Entry>();
  fresh->psf = measure_psf(make_diffuser(config_.grid, variance_, tile_seed(tile_row, tile_col)), config_);
  fresh->spectrum = kernel_spectrum(fresh->psf);
  std::lock_guard lock(mutex_);
  // Another thread may have measured the same tile meanwhile; both results are identical.
  auto [it, inserted] = cache_.try_emplace({tile_row, tile_col}, std::move(fresh));
  return *it->second;
}

const IntensityImage& RegionPsfModel::psf(long tile_row, long tile_col) const {
  return entry(tile_row, tile_col).psf;
}

const ComplexArray& RegionPsfModel::spectrum(long tile_row, long tile_col) const {
  return entry(tile_row, tile_col).spectrum;
}

IntensityImage RegionPsfModel::render(const SceneLayout& layout) const {
  std::vector<const ComplexArray*> kernels;
  kernels.reserve(layout.regions.size());
  for (const auto& region : layout.regions) kernels.push_back(&spectrum(region.tile_row, region.tile_col));
  return forward_multi_region(layout, kernels);
}

}  // namespace specklab
