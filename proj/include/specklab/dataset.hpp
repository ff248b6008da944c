#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "specklab/corpus.hpp"
#include "specklab/forward_model.hpp"
#include "specklab/optics.hpp"

namespace specklab {

enum class Split { train, test, any };

const char* to_string(Split s);

/// Corpus indices with i % 7 == 6 form the test pool; the rest the train pool.
bool in_pool(std::size_t glyph_index, Split pool);

struct CompositionParams {
  Shape grid{256, 256};
  long scale = 128;              ///< side of the square composite region, samples
  double glyph_fraction = 0.4;   ///< glyph box side relative to scale
  Split pool = Split::any;
};

struct GlyphPlacement {
  std::size_t glyph = 0;  ///< corpus index
  Offset origin;          ///< top-left of the glyph box on the grid
  long size = 0;          ///< side of the glyph box
};

struct Composition {
  IntensityImage object;
  std::array<GlyphPlacement, 2> glyphs;
};

/// Two corpus glyphs scaled into the composite region centred on the grid.
/// Without overlap the region is split along a random axis and each glyph
/// lives in its own half, so the glyph boxes are disjoint; with overlap both
/// are placed uniformly and merged by pixelwise max. Output values in [0, 1].
/// All draws depend only on `seed`, so the same seed at another scale yields
/// the same glyphs at proportionally scaled positions.
Composition compose_object(const GlyphCorpus& corpus, bool with_overlap, std::uint64_t seed,
                           const CompositionParams& params = {});

/// Supersampled bilinear resize to rows x cols.
RealArray resample(const RealArray& src, std::size_t rows, std::size_t cols);

enum class VarianceMode { one, same, different };

const char* to_string(VarianceMode m);
VarianceMode variance_mode_from_string(const std::string& s);

struct DatasetRecipe {
  std::string name = "custom";
  std::string corpus = "strokes";
  bool with_overlap = false;
  std::size_t diffuser_count = 1;
  VarianceMode variance_mode = VarianceMode::one;
  std::vector<double> variances{1.0};
  std::size_t train_pairs = 0;
  std::size_t test_pairs = 0;
  std::vector<long> train_scales{128};
  std::vector<long> test_scales{128};
  /// Side of the composite in the ground-truth image; 0 = same as the speckle object.
  long gt_scale = 0;
  /// Memory-effect tile side in samples; 0 = single region (within-OME).
  long region_size = 50;
  std::uint64_t seed = 0;
  OpticalConfig optics{};
  bool write_raw = false;

  /// Throws ParameterError on inconsistent settings.
  void validate() const;
  /// Variance of every diffuser in the bank, expanded from the mode.
  std::vector<double> bank_variances() const;
};

/// Presets "1".."4" (simulation datasets), "multiscale", "multidiffuser".
DatasetRecipe preset_recipe(const std::string& name);
std::vector<std::string> preset_names();

/// DMD pixel sizes map to grid samples by this factor.
inline constexpr double kDmdToGrid = 256.0 / 768.0;

struct RegionRecord {
  long tile_row = 0, tile_col = 0;
  Offset offset;
  Shape size;
};

struct ManifestItem {
  std::size_t index = 0;  ///< global, train items first
  Split split = Split::train;
  std::string gt_path;       ///< relative to the manifest directory
  std::string speckle_path;
  std::string gt_raw_path;   ///< empty unless recipe.write_raw
  std::string speckle_raw_path;
  std::string gt_sha256;
  std::string speckle_sha256;
  std::string gt_raw_sha256;
  std::string speckle_raw_sha256;
  std::string diffuser_id;
  long scale = 0;
  double normalization = 1.0;  ///< speckle peak before scaling to [0, 1]
  std::uint64_t seed = 0;
  std::array<std::size_t, 2> glyphs{};
  std::vector<RegionRecord> regions;
};

struct DatasetManifest {
  static constexpr int kFormatVersion = 1;
  DatasetRecipe recipe;
  std::vector<ManifestItem> items;
  int format_version = kFormatVersion;
  std::string content_hash;

  std::size_t count(Split s) const;
};

/// content_hash = SHA-256 of the concatenated lines "<relative path> <sha256>\n"
/// over every data file, sorted by path.
std::string compute_content_hash(const std::vector<ManifestItem>& items);

struct GenerateOptions {
  unsigned threads = 0;  ///< 0 = hardware concurrency
  std::function<void(std::size_t done, std::size_t total)> progress;
};

inline constexpr const char* kManifestName = "manifest.jsonl";

/// Writes images and `manifest.jsonl` under out_dir and returns the manifest.
DatasetManifest generate_dataset(const DatasetRecipe& recipe, const std::filesystem::path& out_dir,
                                 const GenerateOptions& options = {});

/// Item seed for global index i.
std::uint64_t item_seed(const DatasetRecipe& recipe, std::size_t global_index);

struct DatasetItem {
  IntensityImage gt;
  IntensityImage speckle;
  ManifestItem meta;
};

/// Manifest-ordered access to a generated dataset. Every load checks the file
/// digests (IntegrityError names the item) and the grid against the recipe.
class DatasetReader {
 public:
  explicit DatasetReader(const std::filesystem::path& manifest_path);

  const DatasetManifest& manifest() const { return manifest_; }
  std::size_t size() const { return manifest_.items.size(); }
  DatasetItem load(std::size_t i) const;
  void for_each(const std::function<void(const DatasetItem&)>& fn) const;
  /// Recomputes content_hash from the recorded digests; throws IntegrityError on mismatch.
  void verify_content_hash() const;

 private:
  std::filesystem::path root_;
  DatasetManifest manifest_;
};

inline DatasetReader load_dataset(const std::filesystem::path& manifest_path) {
  return DatasetReader(manifest_path);
}

std::string manifest_to_text(const DatasetManifest& manifest);
/// The recipe as a single-line JSON object (the manifest header's "recipe").
std::string recipe_to_text(const DatasetRecipe& recipe);
DatasetManifest manifest_from_text(const std::string& text, const std::string& origin);

}  // namespace specklab
