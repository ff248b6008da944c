#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "specklab/diffuser.hpp"
#include "specklab/optics.hpp"

namespace specklab {

/// One object patch of a scene, placed with its top-left sample at `offset`.
/// tile_row / tile_col record which memory-effect tile the patch came from
/// when the layout was produced by partition_into_tiles.
struct SceneRegion {
  IntensityImage object;
  Offset offset;
  long tile_row = 0;
  long tile_col = 0;
};

/// Scene split into n >= 1 regions, each seen through its own PSF.
struct SceneLayout {
  std::vector<SceneRegion> regions;
  Shape grid;

  /// Throws if a region does not fit the grid or the layout is empty.
  void validate() const;
  /// Region i rendered onto the full grid.
  RealArray placed(std::size_t i) const;
  /// Sum of all placed regions.
  RealArray union_object() const;
};

/// Splits `object` into square tiles of side `region_size` anchored so that a
/// tile corner sits at the grid centre. Only tiles holding nonzero pixels
/// become regions. region_size <= 0 yields a single region covering the grid.
SceneLayout partition_into_tiles(const IntensityImage& object, long region_size);

struct PsfSet {
  std::vector<IntensityImage> psfs;  ///< unit-sum, centred (source at rows/2, cols/2)
  std::string diffuser_id;
};

/// Full wave path: sqrt(object) -> Fresnel(d1) -> screen -> Fresnel(d2) -> |.|^2.
IntensityImage simulate_speckle_wave(const IntensityImage& object, const DiffuserScreen& screen,
                                     const OpticalConfig& config);

/// Unit-sum camera response to a point source at grid centre + source_offset.
IntensityImage measure_psf(const DiffuserScreen& screen, const OpticalConfig& config,
                           Offset source_offset = {});

/// FFT of a centred PSF re-origined to sample (0, 0), ready for circular convolution.
ComplexArray kernel_spectrum(const IntensityImage& centred_psf);

/// I = sum_i (O_i placed) (*) S_i, circular, centred kernels. Clipped at 0.
IntensityImage forward_multi_region(const SceneLayout& layout, const PsfSet& psfs);

/// Same, with kernels given as precomputed kernel_spectrum() results.
IntensityImage forward_multi_region(const SceneLayout& layout,
                                    const std::vector<const ComplexArray*>& kernel_spectra);

struct BeyondOmeSpeckle {
  IntensityImage speckle;
  PsfSet psfs;
};

/// Measures one on-axis PSF per region (screen i for region i), then applies
/// forward_multi_region.
BeyondOmeSpeckle make_beyond_ome_speckle(const SceneLayout& layout,
                                         const std::vector<DiffuserScreen>& screens,
                                         const OpticalConfig& config);
BeyondOmeSpeckle make_beyond_ome_speckle(const SceneLayout& layout, const PsfSet& psfs);

/// Memory-effect region model of one physical diffuser: every tile of side
/// region_size has an independent screen seeded derive_seed(seed, tile_key).
/// PSFs and their spectra are measured on first use and cached; safe to share
/// between threads.
class RegionPsfModel {
 public:
  RegionPsfModel(OpticalConfig config, long region_size, double variance, std::uint64_t seed,
                 std::string id);

  long region_size() const { return region_size_; }
  const std::string& id() const { return id_; }
  const OpticalConfig& config() const { return config_; }

  std::uint64_t tile_seed(long tile_row, long tile_col) const;
  /// Tile containing the sample at grid centre + offset.
  std::pair<long, long> tile_of(Offset from_centre) const;

  const IntensityImage& psf(long tile_row, long tile_col) const;
  const ComplexArray& spectrum(long tile_row, long tile_col) const;

  /// Speckle of a tiled layout with each region seen through its tile's PSF.
  IntensityImage render(const SceneLayout& layout) const;

 private:
  struct Entry {
    IntensityImage psf;
    ComplexArray spectrum;
  };
  const Entry& entry(long tile_row, long tile_col) const;

  OpticalConfig config_;
  long region_size_;
  double variance_;
  std::uint64_t seed_;
  std::string id_;
  mutable std::mutex mutex_;
  mutable std::map<std::pair<long, long>, std::unique_ptr<Entry>> cache_;
};

}  // namespace specklab
