#include "specklab/dataset.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "specklab/errors.hpp"
#include "specklab/hashing.hpp"
#include "specklab/image_io.hpp"
#include "specklab/parallel.hpp"
#include "specklab/rng.hpp"

namespace specklab {

using nlohmann::json;

const char* to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::test: return "test";
    default: return "any";
  }
}

bool in_pool(std::size_t glyph_index, Split pool) {
  switch (pool) {
    case Split::train: return glyph_index % 7 != 6;
    case Split::test: return glyph_index % 7 == 6;
    default: return true;
  }
}

const char* to_string(VarianceMode m) {
  switch (m) {
    case VarianceMode::one: return "one";
    case VarianceMode::same: return "same";
    default: return "different";
  }
}

VarianceMode variance_mode_from_string(const std::string& s) {
  if (s == "one") return VarianceMode::one;
  if (s == "same") return VarianceMode::same;
  if (s == "different") return VarianceMode::different;
  throw ParameterError("unknown variance mode '" + s + "' (one, same, different)");
}

// ---------------------------------------------------------------------------
// Composition

RealArray resample(const RealArray& src, std::size_t rows, std::size_t cols) {
  RealArray out(rows, cols);
  if (src.empty() || rows == 0 || cols == 0) return out;
  const double sy = static_cast<double>(src.rows()) / static_cast<double>(rows);
  const double sx = static_cast<double>(src.cols()) / static_cast<double>(cols);
  const auto ky = static_cast<std::size_t>(std::max(1.0, std::ceil(sy)));
  const auto kx = static_cast<std::size_t>(std::max(1.0, std::ceil(sx)));
  auto at = [&](long r, long c) {
    if (r < 0 || c < 0 || r >= static_cast<long>(src.rows()) || c >= static_cast<long>(src.cols())) return 0.0;
    return src(r, c);
  };
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      double acc = 0.0;
      for (std::size_t a = 0; a < ky; ++a) {
        const double y = (static_cast<double>(i) + (a + 0.5) / ky) * sy - 0.5;
        const double y0 = std::floor(y);
        const double fy = y - y0;
        for (std::size_t b = 0; b < kx; ++b) {
          const double x = (static_cast<double>(j) + (b + 0.5) / kx) * sx - 0.5;
          const double x0 = std::floor(x);
          const double fx = x - x0;
          const long r = static_cast<long>(y0), c = static_cast<long>(x0);
          acc += (1 - fy) * ((1 - fx) * at(r, c) + fx * at(r, c + 1)) +
                 fy * ((1 - fx) * at(r + 1, c) + fx * at(r + 1, c + 1));
        }
      }
      out(i, j) = acc / static_cast<double>(ky * kx);
    }
  }
  return out;
}

namespace {

std::size_t draw_glyph(const GlyphCorpus& corpus, Split pool, rng::RandomStream& rs) {
  const std::size_t n = corpus.size();
  for (int attempt = 0; attempt < 64; ++attempt) {
    const std::size_t i = rs.below(n);
    if (in_pool(i, pool)) return i;
  }
  // Pools are dense (6/7 or 1/7 of the corpus), so this is practically unreachable.
  const std::size_t start = rs.below(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = (start + k) % n;
    if (in_pool(i, pool)) return i;
  }
  throw InputError("corpus '" + corpus.id() + "' has no glyph in the " + to_string(pool) + " pool");
}

long scaled_position(double u, long span) {
  if (span <= 0) return 0;
  return std::min(span, static_cast<long>(u * static_cast<double>(span + 1)));
}

}  // namespace

Composition compose_object(const GlyphCorpus& corpus, bool with_overlap, std::uint64_t seed,
                           const CompositionParams& params) {
  if (corpus.size() == 0) throw InputError("corpus '" + corpus.id() + "' is empty");
  const long s = params.scale;
  if (s < 2 || static_cast<std::size_t>(s) > std::min(params.grid.rows, params.grid.cols)) {
    throw ParameterError("composite scale " + std::to_string(s) + " does not fit the grid");
  }
  if (!(params.glyph_fraction > 0.0 && params.glyph_fraction <= 0.5)) {
    throw ParameterError("glyph_fraction must lie in (0, 0.5]");
  }
  rng::RandomStream rs(seed);
  const std::size_t ga = draw_glyph(corpus, params.pool, rs);
  const std::size_t gb = draw_glyph(corpus, params.pool, rs);
  const int axis = static_cast<int>(rs.below(2));
  const double u[4] = {rs.uniform(), rs.uniform(), rs.uniform(), rs.uniform()};

  const long c = std::max(1L, std::lround(params.glyph_fraction * static_cast<double>(s)));
  const long half = s / 2;
  long along_a, along_b, across_a, across_b;
  if (with_overlap) {
    along_a = scaled_position(u[0], s - c);
    along_b = scaled_position(u[1], s - c);
  } else {
    along_a = scaled_position(u[0], half - c);
    along_b = half + scaled_position(u[1], s - half - c);
  }
  across_a = scaled_position(u[2], s - c);
  across_b = scaled_position(u[3], s - c);

  const Offset region{static_cast<long>(params.grid.rows - s) / 2, static_cast<long>(params.grid.cols - s) / 2};
  auto origin = [&](long along, long across) {
    return axis == 0 ? Offset{region.row + along, region.col + across}
                     : Offset{region.row + across, region.col + along};
  };

  Composition out;
  out.object = IntensityImage(params.grid);
  out.glyphs[0] = {ga, origin(along_a, across_a), c};
  out.glyphs[1] = {gb, origin(along_b, across_b), c};
  for (const auto& g : out.glyphs) {
    const RealArray scaled = resample(corpus.glyph(g.glyph), c, c);
    for (long r = 0; r < c; ++r) {
      for (long k = 0; k < c; ++k) {
        double& px = out.object(g.origin.row + r, g.origin.col + k);
        px = std::clamp(std::max(px, scaled(r, k)), 0.0, 1.0);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Recipes

void DatasetRecipe::validate() const {
  optics.validate();
  if (diffuser_count == 0) throw ParameterError("diffuser_count must be >= 1");
  switch (variance_mode) {
    case VarianceMode::one:
      if (diffuser_count != 1 || variances.size() != 1) {
        throw ParameterError("variance mode 'one' needs exactly one diffuser and one variance");
      }
      break;
    case VarianceMode::same:
      if (variances.size() != 1) throw ParameterError("variance mode 'same' needs one variance");
      break;
    case VarianceMode::different:
      if (variances.size() != diffuser_count) {
        throw ParameterError("variance mode 'different' needs one variance per diffuser (" +
                             std::to_string(diffuser_count) + "), got " + std::to_string(variances.size()));
      }
      break;
  }
  for (double v : variances) {
    if (!(v > 0.0)) throw ParameterError("diffuser variances must be positive");
  }
  if (train_pairs > 0 && train_scales.empty()) throw ParameterError("train_scales is empty");
  if (test_pairs > 0 && test_scales.empty()) throw ParameterError("test_scales is empty");
  const long side = static_cast<long>(std::min(optics.grid.rows, optics.grid.cols));
  auto check_scale = [&](long sc) {
    if (sc < 2 || sc > side) throw ParameterError("object scale " + std::to_string(sc) + " does not fit the grid");
  };
  for (long sc : train_scales) check_scale(sc);
  for (long sc : test_scales) check_scale(sc);
  if (gt_scale != 0) check_scale(gt_scale);
  if (region_size < 0) throw ParameterError("region_size must be >= 0");
}

std::vector<double> DatasetRecipe::bank_variances() const {
  if (variance_mode == VarianceMode::different) return variances;
  return std::vector<double>(diffuser_count, variances.at(0));
}

std::vector<std::string> preset_names() {
  return {"1", "2", "3", "4", "multiscale", "multidiffuser"};
}

DatasetRecipe preset_recipe(const std::string& name) {
  DatasetRecipe r;
  r.region_size = std::lround(150 * kDmdToGrid);
  if (name == "1") {
    r.name = "dataset-1-no-overlap";
    r.with_overlap = false;
    r.train_pairs = 3000;
    r.test_pairs = 500;
  } else if (name == "2") {
    r.name = "dataset-2-overlap";
    r.with_overlap = true;
    r.train_pairs = 3000;
    r.test_pairs = 500;
  } else if (name == "3") {
    r.name = "dataset-3-same-media";
    r.with_overlap = true;
    r.diffuser_count = 10;
    r.variance_mode = VarianceMode::same;
    r.variances = {1.0};
    r.train_pairs = 30000;
    r.test_pairs = 5000;
  } else if (name == "4") {
    r.name = "dataset-4-different-media";
    r.with_overlap = false;
    r.diffuser_count = 10;
    r.variance_mode = VarianceMode::different;
    r.variances.clear();
    for (int i = 0; i < 10; ++i) r.variances.push_back(0.5 + 0.25 * i);
    r.train_pairs = 30000;
    r.test_pairs = 5000;
  } else if (name == "multiscale") {
    r.name = "multiscale";
    r.with_overlap = true;
    r.train_pairs = 22500;
    r.test_pairs = 7500;
    r.train_scales = {std::lround(300 * kDmdToGrid), std::lround(375 * kDmdToGrid), std::lround(450 * kDmdToGrid)};
    r.test_scales = {std::lround(420 * kDmdToGrid)};
    r.gt_scale = 128;
  } else if (name == "multidiffuser") {
    r.name = "multidiffuser";
    r.with_overlap = true;
    r.diffuser_count = 4;
    r.variance_mode = VarianceMode::same;
    r.variances = {1.0};
    r.train_pairs = 30000;
    r.test_pairs = 2000;
  } else {
    throw ParameterError("unknown preset '" + name + "' (1, 2, 3, 4, multiscale, multidiffuser)");
  }
  return r;
}

std::size_t DatasetManifest::count(Split s) const {
  return static_cast<std::size_t>(std::count_if(items.begin(), items.end(), [&](const ManifestItem& it) {
    return s == Split::any || it.split == s;
  }));
}

std::uint64_t item_seed(const DatasetRecipe& recipe, std::size_t global_index) {
  return rng::derive_seed(rng::derive_seed(recipe.seed, 0x17E3), global_index);
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

json recipe_to_json(const DatasetRecipe& r) {
  return json{{"name", r.name},
              {"corpus", r.corpus},
              {"with_overlap", r.with_overlap},
              {"diffuser_count", r.diffuser_count},
              {"variance_mode", to_string(r.variance_mode)},
              {"variances", r.variances},
              {"train_pairs", r.train_pairs},
              {"test_pairs", r.test_pairs},
              {"train_scales", r.train_scales},
              {"test_scales", r.test_scales},
              {"gt_scale", r.gt_scale},
              {"region_size", r.region_size},
              {"seed", r.seed},
              {"write_raw", r.write_raw},
              {"optics",
               {{"wavelength", r.optics.wavelength},
                {"d1", r.optics.d1},
                {"d2", r.optics.d2},
                {"rows", r.optics.grid.rows},
                {"cols", r.optics.grid.cols},
                {"pitch", r.optics.pitch}}},
              {"max_value", 255}};
}

DatasetRecipe recipe_from_json(const json& j) {
  DatasetRecipe r;
  r.name = j.at("name").get<std::string>();
  r.corpus = j.at("corpus").get<std::string>();
  r.with_overlap = j.at("with_overlap").get<bool>();
  r.diffuser_count = j.at("diffuser_count").get<std::size_t>();
  r.variance_mode = variance_mode_from_string(j.at("variance_mode").get<std::string>());
  r.variances = j.at("variances").get<std::vector<double>>();
  r.train_pairs = j.at("train_pairs").get<std::size_t>();
  r.test_pairs = j.at("test_pairs").get<std::size_t>();
  r.train_scales = j.at("train_scales").get<std::vector<long>>();
  r.test_scales = j.at("test_scales").get<std::vector<long>>();
  r.gt_scale = j.at("gt_scale").get<long>();
  r.region_size = j.at("region_size").get<long>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.write_raw = j.at("write_raw").get<bool>();
  const json& o = j.at("optics");
  r.optics.wavelength = o.at("wavelength").get<double>();
  r.optics.d1 = o.at("d1").get<double>();
  r.optics.d2 = o.at("d2").get<double>();
  r.optics.grid = {o.at("rows").get<std::size_t>(), o.at("cols").get<std::size_t>()};
  r.optics.pitch = o.at("pitch").get<double>();
  return r;
}

json item_to_json(const ManifestItem& it) {
  json regions = json::array();
  for (const auto& reg : it.regions) {
    regions.push_back({{"tile", {reg.tile_row, reg.tile_col}},
                       {"offset", {reg.offset.row, reg.offset.col}},
                       {"size", {reg.size.rows, reg.size.cols}}});
  }
  json j{{"index", it.index},
         {"split", to_string(it.split)},
         {"gt", it.gt_path},
         {"speckle", it.speckle_path},
         {"gt_sha256", it.gt_sha256},
         {"speckle_sha256", it.speckle_sha256},
         {"diffuser_id", it.diffuser_id},
         {"scale", it.scale},
         {"scale_dmd", std::lround(static_cast<double>(it.scale) / kDmdToGrid)},
         {"normalization", it.normalization},
         {"seed", it.seed},
         {"glyphs", {it.glyphs[0], it.glyphs[1]}},
         {"regions", regions}};
  if (!it.gt_raw_path.empty()) {
    j["gt_raw"] = it.gt_raw_path;
    j["gt_raw_sha256"] = it.gt_raw_sha256;
    j["speckle_raw"] = it.speckle_raw_path;
    j["speckle_raw_sha256"] = it.speckle_raw_sha256;
  }
  return j;
}

ManifestItem item_from_json(const json& j) {
  ManifestItem it;
  it.index = j.at("index").get<std::size_t>();
  const auto split = j.at("split").get<std::string>();
  if (split != "train" && split != "test") throw IntegrityError("item split must be train or test");
  it.split = split == "train" ? Split::train : Split::test;
  it.gt_path = j.at("gt").get<std::string>();
  it.speckle_path = j.at("speckle").get<std::string>();
  it.gt_sha256 = j.at("gt_sha256").get<std::string>();
  it.speckle_sha256 = j.at("speckle_sha256").get<std::string>();
  it.diffuser_id = j.at("diffuser_id").get<std::string>();
  it.scale = j.at("scale").get<long>();
  it.normalization = j.at("normalization").get<double>();
  it.seed = j.at("seed").get<std::uint64_t>();
  const auto glyphs = j.at("glyphs").get<std::vector<std::size_t>>();
  if (glyphs.size() != 2) throw IntegrityError("item must record two glyphs");
  it.glyphs = {glyphs[0], glyphs[1]};
  for (const auto& reg : j.at("regions")) {
    RegionRecord rr;
    rr.tile_row = reg.at("tile").at(0).get<long>();
    rr.tile_col = reg.at("tile").at(1).get<long>();
    rr.offset = {reg.at("offset").at(0).get<long>(), reg.at("offset").at(1).get<long>()};
    rr.size = {reg.at("size").at(0).get<std::size_t>(), reg.at("size").at(1).get<std::size_t>()};
    it.regions.push_back(rr);
  }
  if (j.contains("gt_raw")) {
    it.gt_raw_path = j.at("gt_raw").get<std::string>();
    it.gt_raw_sha256 = j.at("gt_raw_sha256").get<std::string>();
    it.speckle_raw_path = j.at("speckle_raw").get<std::string>();
    it.speckle_raw_sha256 = j.at("speckle_raw_sha256").get<std::string>();
  }
  return it;
}

}  // namespace

std::string compute_content_hash(const std::vector<ManifestItem>& items) {
  std::vector<std::pair<std::string, std::string>> files;
  files.reserve(items.size() * 2);
  for (const auto& it : items) {
    files.emplace_back(it.gt_path, it.gt_sha256);
    files.emplace_back(it.speckle_path, it.speckle_sha256);
    if (!it.gt_raw_path.empty()) {
      files.emplace_back(it.gt_raw_path, it.gt_raw_sha256);
      files.emplace_back(it.speckle_raw_path, it.speckle_raw_sha256);
    }
  }
  std::sort(files.begin(), files.end());
  std::string listing;
  for (const auto& [path, digest] : files) listing += path + " " + digest + "\n";
  return sha256_hex(listing);
}

std::string recipe_to_text(const DatasetRecipe& recipe) { return recipe_to_json(recipe).dump(); }

std::string manifest_to_text(const DatasetManifest& manifest) {
  json header{{"format", "specklab-manifest"},
              {"format_version", manifest.format_version},
              {"content_hash", manifest.content_hash},
              {"item_count", manifest.items.size()},
              {"recipe", recipe_to_json(manifest.recipe)}};
  std::string out = header.dump() + "\n";
  for (const auto& it : manifest.items) out += item_to_json(it).dump() + "\n";
  return out;
}

DatasetManifest manifest_from_text(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  DatasetManifest m;
  std::size_t expected = 0;
  std::size_t line_no = 0;
  try {
    if (!std::getline(in, line)) throw IntegrityError(origin + ": empty manifest");
    ++line_no;
    const json header = json::parse(line);
    if (header.at("format").get<std::string>() != "specklab-manifest") {
      throw IntegrityError(origin + ": not a specklab manifest");
    }
    m.format_version = header.at("format_version").get<int>();
    if (m.format_version != DatasetManifest::kFormatVersion) {
      throw IntegrityError(origin + ": unsupported manifest version " + std::to_string(m.format_version));
    }
    m.content_hash = header.at("content_hash").get<std::string>();
    expected = header.at("item_count").get<std::size_t>();
    m.recipe = recipe_from_json(header.at("recipe"));
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      m.items.push_back(item_from_json(json::parse(line)));
    }
  } catch (const json::exception& e) {
    throw IntegrityError(origin + ":" + std::to_string(line_no) + ": malformed manifest record (" + e.what() + ")");
  }
  if (m.items.size() != expected) {
    throw IntegrityError(origin + ": header announces " + std::to_string(expected) + " items, found " +
                         std::to_string(m.items.size()));
  }
  return m;
}

// ---------------------------------------------------------------------------
// Generation

namespace {

std::string item_path(Split split, const char* kind, std::size_t local, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s/%s/%06zu%s", to_string(split), kind, local, ext);
  return buf;
}

// Each item churns through grid-sized temporaries while leaving a few small
// allocations behind (paths, digests, region records). glibc's dynamic mmap
// threshold moves those temporaries onto the main heap, where the survivors
// pin the freed holes and the heap grows by roughly a frame per item until a
// full preset exhausts memory. A fixed threshold keeps them mapped.
void pin_large_allocations_to_mmap() {
#if defined(__GLIBC__)
  static std::once_flag once;
  std::call_once(once, [] { mallopt(M_MMAP_THRESHOLD, 128 * 1024); });
#endif
}

}  // namespace

DatasetManifest generate_dataset(const DatasetRecipe& recipe, const std::filesystem::path& out_dir,
                                 const GenerateOptions& options) {
  recipe.validate();
  pin_large_allocations_to_mmap();
  const auto corpus = open_corpus(recipe.corpus);
  const Shape grid = recipe.optics.grid;
  const auto bank = make_diffuser_bank(recipe.diffuser_count, grid, recipe.bank_variances(),
                                       rng::derive_seed(recipe.seed, 0xD1FF));
  const long tile = recipe.region_size > 0 ? recipe.region_size
                                           : static_cast<long>(std::max(grid.rows, grid.cols));
  std::vector<std::unique_ptr<RegionPsfModel>> systems;
  for (const auto& screen : bank) {
    systems.push_back(std::make_unique<RegionPsfModel>(recipe.optics, tile, screen.variance, screen.seed, screen.id));
  }

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError(out_dir.string(), "cannot create output directory: " + ec.message());

  const std::size_t total = recipe.train_pairs + recipe.test_pairs;
  DatasetManifest manifest;
  manifest.recipe = recipe;
  manifest.items.resize(total);
  std::mutex progress_mutex;
  std::size_t done = 0;

  parallel_for(total, options.threads, [&](std::size_t g) {
    const Split split = g < recipe.train_pairs ? Split::train : Split::test;
    const std::size_t local = split == Split::train ? g : g - recipe.train_pairs;
    const auto& scales = split == Split::train ? recipe.train_scales : recipe.test_scales;

    ManifestItem item;
    item.index = g;
    item.split = split;
    item.scale = scales[local % scales.size()];
    item.seed = item_seed(recipe, g);

    CompositionParams cp;
    cp.grid = grid;
    cp.scale = item.scale;
    cp.pool = split;
    const Composition comp = compose_object(*corpus, recipe.with_overlap, item.seed, cp);
    item.glyphs = {comp.glyphs[0].glyph, comp.glyphs[1].glyph};

    IntensityImage gt = comp.object;
    if (recipe.gt_scale > 0 && recipe.gt_scale != item.scale) {
      cp.scale = recipe.gt_scale;
      gt = compose_object(*corpus, recipe.with_overlap, item.seed, cp).object;
    }

    const SceneLayout layout = recipe.region_size > 0 ? partition_into_tiles(comp.object, recipe.region_size)
                                                      : partition_into_tiles(comp.object, 0);
    const RegionPsfModel& system = *systems[g % systems.size()];
    IntensityImage speckle = system.render(layout);
    item.normalization = normalize_to_unit_max(speckle);
    item.diffuser_id = system.id();
    for (const auto& reg : layout.regions) {
      item.regions.push_back({reg.tile_row, reg.tile_col, reg.offset, reg.object.shape()});
    }

    item.gt_path = item_path(split, "gt", local, ".png");
    item.speckle_path = item_path(split, "speckle", local, ".png");
    const io::Bytes gt_png = io::encode_png(gt);
    const io::Bytes sp_png = io::encode_png(speckle);
    item.gt_sha256 = sha256_hex(gt_png);
    item.speckle_sha256 = sha256_hex(sp_png);
    io::write_file(out_dir / item.gt_path, gt_png);
    io::write_file(out_dir / item.speckle_path, sp_png);
    if (recipe.write_raw) {
      item.gt_raw_path = item_path(split, "gt", local, ".raw");
      item.speckle_raw_path = item_path(split, "speckle", local, ".raw");
      const io::Bytes gt_raw = io::encode_raw(gt.data);
      const io::Bytes sp_raw = io::encode_raw(speckle.data);
      item.gt_raw_sha256 = sha256_hex(gt_raw);
      item.speckle_raw_sha256 = sha256_hex(sp_raw);
      io::write_file(out_dir / item.gt_raw_path, gt_raw);
      io::write_file(out_dir / item.speckle_raw_path, sp_raw);
    }
    manifest.items[g] = std::move(item);

    if (options.progress) {
      std::lock_guard lock(progress_mutex);
      options.progress(++done, total);
    }
  });

  manifest.content_hash = compute_content_hash(manifest.items);
  const std::string text = manifest_to_text(manifest);
  io::write_file(out_dir / kManifestName, io::Bytes(text.begin(), text.end()));
  return manifest;
}

// ---------------------------------------------------------------------------
// Loading

DatasetReader::DatasetReader(const std::filesystem::path& manifest_path)
    : root_(manifest_path.parent_path()) {
  const io::Bytes bytes = io::read_file(manifest_path);
  manifest_ = manifest_from_text(std::string(bytes.begin(), bytes.end()), manifest_path.string());
}

void DatasetReader::verify_content_hash() const {
  const std::string recomputed = compute_content_hash(manifest_.items);
  if (recomputed != manifest_.content_hash) {
    throw IntegrityError("content hash mismatch: manifest records " + manifest_.content_hash +
                         ", items hash to " + recomputed);
  }
}

DatasetItem DatasetReader::load(std::size_t i) const {
  const ManifestItem& meta = manifest_.items.at(i);
  const std::string label = "item " + std::to_string(meta.index) + " (" + to_string(meta.split) + ")";
  auto fetch = [&](const std::string& rel, const std::string& digest) {
    io::Bytes bytes;
    try {
      bytes = io::read_file(root_ / rel);
    } catch (const IoError& e) {
      throw IntegrityError(label + ": " + e.what());
    }
    if (sha256_hex(bytes) != digest) {
      throw IntegrityError(label + ": " + rel + " does not match its recorded digest (truncated or modified)");
    }
    try {
      return io::decode_png(bytes, rel);
    } catch (const Error& e) {
      throw IntegrityError(label + ": " + e.what());
    }
  };

  DatasetItem item;
  item.meta = meta;
  item.gt = fetch(meta.gt_path, meta.gt_sha256);
  item.speckle = fetch(meta.speckle_path, meta.speckle_sha256);
  const Shape grid = manifest_.recipe.optics.grid;
  if (item.gt.shape() != grid || item.speckle.shape() != grid) {
    throw IntegrityError(label + ": image grid does not match the recipe grid");
  }
  return item;
}

void DatasetReader::for_each(const std::function<void(const DatasetItem&)>& fn) const {
  for (std::size_t i = 0; i < size(); ++i) fn(load(i));
}

}  // namespace specklab
