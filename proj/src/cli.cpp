#include "specklab/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <typeinfo>

#include "specklab/dataset.hpp"
#include "specklab/diffuser.hpp"
#include "specklab/errors.hpp"
#include "specklab/forward_model.hpp"
#include "specklab/image_io.hpp"
#include "specklab/metrics.hpp"
#include "specklab/phase_retrieval.hpp"
#include "specklab/speckle_analysis.hpp"

namespace specklab::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fixed(double v, int digits = 9) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

json db_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

void write_text(const fs::path& path, const std::string& text) {
  io::write_file(path, io::Bytes(text.begin(), text.end()));
}

void add_geometry(CLI::App* app, OpticalConfig& cfg, bool with_grid, std::size_t* grid_side) {
  app->add_option("--wavelength", cfg.wavelength, "Illumination wavelength in metres")->check(CLI::PositiveNumber);
  app->add_option("--d1", cfg.d1, "Object-to-diffuser distance in metres")->check(CLI::NonNegativeNumber);
  app->add_option("--d2", cfg.d2, "Diffuser-to-sensor distance in metres")->check(CLI::NonNegativeNumber);
  app->add_option("--pitch", cfg.pitch, "Sample pitch in metres")->check(CLI::PositiveNumber);
  if (with_grid) app->add_option("--grid", *grid_side, "Side of the square simulation grid")->check(CLI::Range(2, 8192));
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string object, out, raw;
  std::uint64_t diffuser_seed = 0;
  double variance = 1.0;
  long region_size = 0;
  OpticalConfig optics;
};

int run_simulate(const SimulateArgs& a, std::ostream& out) {
  const IntensityImage object = io::read_image(a.object);
  OpticalConfig cfg = a.optics;
  cfg.grid = object.shape();
  cfg.validate();
  const long tile = a.region_size > 0 ? a.region_size : static_cast<long>(std::max(cfg.grid.rows, cfg.grid.cols));
  const RegionPsfModel system(cfg, tile, a.variance, a.diffuser_seed, diffuser_id(0, a.variance, a.diffuser_seed));
  const SceneLayout layout = partition_into_tiles(object, a.region_size);
  IntensityImage speckle = system.render(layout);
  const double norm = normalize_to_unit_max(speckle);
  io::write_png(a.out, speckle);
  if (!a.raw.empty()) io::write_raw(a.raw, speckle.data);
  out << "grid " << cfg.grid.rows << "x" << cfg.grid.cols << "\n"
      << "regions " << layout.regions.size() << "\n"
      << "diffuser_id " << system.id() << "\n"
      << "normalization " << norm << "\n"
      << "wrote " << a.out << "\n";
  return kSuccess;
}

// ---------------------------------------------------------------------------

struct DatasetArgs {
  std::string preset = "1";
  std::string out;
  std::string corpus = "strokes";
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::size_t train_pairs = 0, test_pairs = 0, diffuser_count = 1, grid = 256;
  bool with_overlap = false;
  std::string variance_mode;
  std::vector<double> variances;
  std::vector<long> train_scales, test_scales;
  long gt_scale = 0, region_size = 0;
  bool raw = false;
  OpticalConfig optics;
};

int run_dataset(const DatasetArgs& a, const CLI::App& cmd, std::ostream& out, std::ostream& err) {
  DatasetRecipe r = preset_recipe(a.preset);
  auto given = [&](const char* name) { return cmd.count(name) > 0; };
  if (given("--train-pairs")) r.train_pairs = a.train_pairs;
  if (given("--test-pairs")) r.test_pairs = a.test_pairs;
  if (given("--with-overlap")) r.with_overlap = a.with_overlap;
  if (given("--diffuser-count")) r.diffuser_count = a.diffuser_count;
  if (given("--variance-mode")) r.variance_mode = variance_mode_from_string(a.variance_mode);
  if (given("--variances")) r.variances = a.variances;
  if (given("--train-scales")) r.train_scales = a.train_scales;
  if (given("--test-scales")) r.test_scales = a.test_scales;
  if (given("--gt-scale")) r.gt_scale = a.gt_scale;
  if (given("--region-size")) r.region_size = a.region_size;
  if (given("--grid")) r.optics.grid = {a.grid, a.grid};
  if (given("--wavelength")) r.optics.wavelength = a.optics.wavelength;
  if (given("--d1")) r.optics.d1 = a.optics.d1;
  if (given("--d2")) r.optics.d2 = a.optics.d2;
  if (given("--pitch")) r.optics.pitch = a.optics.pitch;
  r.seed = a.seed;
  r.corpus = a.corpus;
  r.write_raw = a.raw;
  r.validate();
  out << "recipe " << recipe_to_text(r) << "\n" << std::flush;

  GenerateOptions opts;
  opts.threads = a.threads;
  const std::size_t total = r.train_pairs + r.test_pairs;
  const std::size_t every = std::max<std::size_t>(1, total / 10);
  opts.progress = [&](std::size_t done, std::size_t n) {
    if (done % every == 0 || done == n) err << "generated " << done << "/" << n << "\n";
  };
  const auto t0 = std::chrono::steady_clock::now();
  const DatasetManifest m = generate_dataset(r, a.out, opts);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out << "train_pairs " << m.count(Split::train) << "\n"
      << "test_pairs " << m.count(Split::test) << "\n"
      << "content_hash " << m.content_hash << "\n"
      << "manifest " << (fs::path(a.out) / kManifestName).string() << "\n"
      << "elapsed_s " << fixed(secs, 3) << "\n"
      << "frames_per_s " << fixed(secs > 0 ? static_cast<double>(total) / secs : 0.0, 1) << "\n";
  return kSuccess;
}

// ---------------------------------------------------------------------------

struct AutocorrArgs {
  std::string image, out, raw, json_report;
  bool keep_mean = false;
};

int run_autocorr(const AutocorrArgs& a, std::ostream& out) {
  const IntensityImage img = io::read_image(a.image);
  const CorrelationMap map = autocorrelate(img, !a.keep_mean);
  const double contrast = speckle_contrast(img);
  out << "peak " << map.peak_value << "\n"
      << "background_mean " << map.background_mean << "\n"
      << "peak_to_background " << map.peak_to_background() << "\n"
      << "speckle_contrast " << contrast << "\n";
  if (!a.out.empty()) {
    io::write_png(a.out, IntensityImage(map.data, map.peak_value > 0 ? map.peak_value : 1.0));
  }
  if (!a.raw.empty()) io::write_raw(a.raw, map.data);
  if (!a.json_report.empty()) {
    json j{{"image", a.image},
           {"subtract_mean", !a.keep_mean},
           {"peak", map.peak_value},
           {"background_mean", map.background_mean},
           {"peak_to_background", map.peak_to_background()},
           {"speckle_contrast", contrast}};
    write_text(a.json_report, j.dump(2) + "\n");
  }
  return kSuccess;
}

// ---------------------------------------------------------------------------

struct OmeScanArgs {
  std::uint64_t diffuser_seed = 0;
  double variance = 1.0;
  long region_size = 0;
  std::size_t grid = 256;
  OmeScanOptions scan;
  OpticalConfig optics;
  std::string out, json_report;
};

int run_ome_scan(const OmeScanArgs& a, std::ostream& out) {
  OpticalConfig cfg = a.optics;
  cfg.grid = {a.grid, a.grid};
  cfg.validate();
  OmeCurve curve;
  std::string model;
  if (a.region_size > 0) {
    const RegionPsfModel system(cfg, a.region_size, a.variance, a.diffuser_seed,
                                diffuser_id(0, a.variance, a.diffuser_seed));
    curve = ome_scan(system, a.scan);
    model = "region";
  } else {
    const DiffuserScreen screen = make_diffuser(cfg.grid, a.variance, a.diffuser_seed);
    curve = ome_scan(screen, cfg, a.scan);
    model = "thin-screen";
  }
  out << curve.to_text();
  out << "range_estimate " << curve.range_estimate << "\n";
  if (!a.out.empty()) write_text(a.out, curve.to_text());
  if (!a.json_report.empty()) {
    json j{{"model", model},
           {"diffuser_seed", a.diffuser_seed},
           {"variance", a.variance},
           {"region_size", a.region_size},
           {"grid", a.grid},
           {"threshold", curve.threshold},
           {"shifts", curve.shifts},
           {"correlations", curve.correlations},
           {"range_estimate", curve.range_estimate}};
    write_text(a.json_report, j.dump(2) + "\n");
  }
  return kSuccess;
}

// ---------------------------------------------------------------------------

struct RetrieveArgs {
  std::string speckle, support = "", out, truth;
  double beta = 0.9;
  std::size_t iters = 600, restarts = 20;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string rule = "hio";
  bool exact = false;
};

Shape parse_support(const std::string& text, Shape grid) {
  if (text.empty()) return {grid.rows / 2, grid.cols / 2};
  std::size_t rows = 0, cols = 0;
  char sep = 0;
  std::istringstream is(text);
  if (!(is >> rows)) throw ParameterError("--support must be N or RxC, got '" + text + "'");
  if (is >> sep) {
    if (sep != 'x' || !(is >> cols)) throw ParameterError("--support must be N or RxC, got '" + text + "'");
  } else {
    cols = rows;
  }
  if (rows == 0 || cols == 0) throw ParameterError("--support must be positive");
  if (rows > grid.rows || cols > grid.cols) {
    throw ParameterError("--support " + text + " exceeds the " + std::to_string(grid.rows) + "x" +
                         std::to_string(grid.cols) + " image");
  }
  return {rows, cols};
}

fs::path residual_log_path(const fs::path& out) {
  fs::path p = out;
  p.replace_extension(".residuals.txt");
  return p;
}

int run_retrieve(const RetrieveArgs& a, std::ostream& out) {
  const IntensityImage input = io::read_image(a.speckle);
  RetrievalProblem p;
  p.magnitude = a.exact ? fourier_magnitude(input.data) : magnitude_from_speckle(input);
  const Shape box = parse_support(a.support, input.shape());
  p.support = centered_box_support(input.shape(), box.rows, box.cols);
  p.beta = a.beta;
  p.max_iters = a.iters;
  p.restarts = a.restarts;
  p.seed = a.seed;
  p.threads = a.threads;
  p.rule = a.rule == "er" ? UpdateRule::error_reduction : UpdateRule::hybrid_input_output;
  const RetrievalResult res = hio_retrieve(p);

  io::write_png(a.out, res.estimate);
  std::string log = "# iteration residual\n";
  for (std::size_t k = 0; k < res.residual_history.size(); ++k) {
    log += std::to_string(k) + " " + fixed(res.residual_history[k]) + "\n";
  }
  log += "# best_restart " + std::to_string(res.best_restart) + "\n";
  for (std::size_t r = 0; r < res.final_residuals.size(); ++r) {
    log += "# restart " + std::to_string(r) + " final_residual " + fixed(res.final_residuals[r]) + "\n";
  }
  const fs::path log_path = residual_log_path(a.out);
  write_text(log_path, log);

  out << "support " << box.rows << "x" << box.cols << "\n"
      << "best_restart " << res.best_restart << "\n"
      << "final_residual " << fixed(res.final_residuals[res.best_restart]) << "\n"
      << "wrote " << a.out << "\n"
      << "residual_log " << log_path.string() << "\n";
  if (!a.truth.empty()) {
    const IntensityImage truth = io::read_image(a.truth);
    const AlignedComparison cmp = align_for_comparison(res.estimate, truth);
    out << "aligned_ncc " << fixed(cmp.ncc) << "\n"
        << "aligned_shift " << cmp.shift.row << " " << cmp.shift.col << (cmp.reflected ? " reflected" : "") << "\n";
  }
  return kSuccess;
}

// ---------------------------------------------------------------------------

struct MetricsArgs {
  std::string restored, truth, json_report;
  SsimParams ssim;
};

bool is_image_file(const fs::path& p) {
  const auto ext = p.extension().string();
  return ext == ".png" || ext == ".raw" || ext == ".f32";
}

std::vector<std::pair<std::string, std::pair<fs::path, fs::path>>> pair_inputs(const fs::path& restored,
                                                                              const fs::path& truth) {
  std::vector<std::pair<std::string, std::pair<fs::path, fs::path>>> pairs;
  const bool rd = fs::is_directory(restored), td = fs::is_directory(truth);
  if (rd != td) throw InputError("metrics needs two files or two directories");
  if (!rd) {
    if (!fs::is_regular_file(restored)) throw InputError(restored.string() + ": no such file");
    if (!fs::is_regular_file(truth)) throw InputError(truth.string() + ": no such file");
    pairs.push_back({restored.filename().string(), {restored, truth}});
    return pairs;
  }
  for (const auto& e : fs::directory_iterator(restored)) {
    if (!e.is_regular_file() || !is_image_file(e.path())) continue;
    const fs::path other = truth / e.path().filename();
    if (!fs::is_regular_file(other)) {
      throw InputError(e.path().filename().string() + " has no counterpart in " + truth.string());
    }
    pairs.push_back({e.path().filename().string(), {e.path(), other}});
  }
  std::sort(pairs.begin(), pairs.end());
  if (pairs.empty()) throw InputError(restored.string() + ": no images to compare");
  return pairs;
}

int run_metrics(const MetricsArgs& a, std::ostream& out) {
  const SsimParams params = a.ssim.resolved();
  const auto pairs = pair_inputs(a.restored, a.truth);
  json rows = json::array();
  double sum_mae = 0, sum_ssim = 0, sum_psnr = 0;
  for (const auto& [name, paths] : pairs) {
    const MetricReport r = evaluate_pair(io::read_image(paths.first), io::read_image(paths.second), params);
    out << "pair " << name << " mae " << fixed(r.mae) << " ssim " << fixed(r.ssim) << " psnr " << format_db(r.psnr)
        << "\n";
    rows.push_back({{"name", name}, {"mae", r.mae}, {"ssim", r.ssim}, {"psnr", db_json(r.psnr)}});
    sum_mae += r.mae;
    sum_ssim += r.ssim;
    sum_psnr += r.psnr;
  }
  const double n = static_cast<double>(pairs.size());
  const double mean_psnr = sum_psnr / n;
  out << "mean count " << pairs.size() << " mae " << fixed(sum_mae / n) << " ssim " << fixed(sum_ssim / n)
      << " psnr " << format_db(mean_psnr) << "\n";
  out << "params max_value " << params.max_value << " window " << params.window << " sigma " << params.sigma
      << " c1 " << params.c1 << " c2 " << params.c2 << " c3 " << params.c3 << " alpha " << params.alpha << " beta "
      << params.beta << " gamma " << params.gamma << "\n";
  if (!a.json_report.empty()) {
    json j{{"params",
            {{"max_value", params.max_value},
             {"window", params.window},
             {"sigma", params.sigma},
             {"alpha", params.alpha},
             {"beta", params.beta},
             {"gamma", params.gamma},
             {"c1", params.c1},
             {"c2", params.c2},
             {"c3", params.c3},
             {"contrast_uses_covariance", params.contrast_uses_covariance}}},
           {"pairs", rows},
           {"aggregate",
            {{"count", pairs.size()}, {"mae", sum_mae / n}, {"ssim", sum_ssim / n}, {"psnr", db_json(mean_psnr)}}}};
    write_text(a.json_report, j.dump(2) + "\n");
  }
  return kSuccess;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Speckle imaging simulation, analysis and reconstruction toolkit", "specklab"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1, 1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Render the speckle frame of an object image");
  simulate->add_option("--object", sim.object, "Object image (PNG or raw sidecar)")->required();
  simulate->add_option("--out", sim.out, "Output speckle PNG")->required();
  simulate->add_option("--raw", sim.raw, "Also write the normalized frame as a raw float sidecar");
  simulate->add_option("--diffuser-seed", sim.diffuser_seed, "Seed of the diffuser screen(s)");
  simulate->add_option("--variance", sim.variance, "Diffuser variance")->check(CLI::PositiveNumber);
  simulate->add_option("--region-size", sim.region_size,
                       "Memory-effect tile side in samples; 0 renders the whole object through one PSF")
      ->check(CLI::NonNegativeNumber);
  add_geometry(simulate, sim.optics, false, nullptr);

  DatasetArgs ds;
  auto* dataset = app.add_subcommand("dataset", "Generate a paired ground-truth / speckle dataset");
  dataset->add_option("--preset", ds.preset, "Recipe preset")
      ->check(CLI::IsMember({"1", "2", "3", "4", "multiscale", "multidiffuser"}));
  dataset->add_option("--out", ds.out, "Output directory")->required();
  dataset->add_option("--seed", ds.seed, "Dataset seed");
  dataset->add_option("--threads", ds.threads, "Worker threads (0 = hardware concurrency)");
  dataset->add_option("--corpus", ds.corpus, "strokes, strokes:<count>:<seed>, an IDX3 file or a PNG directory");
  dataset->add_option("--train-pairs", ds.train_pairs, "Override the number of training pairs");
  dataset->add_option("--test-pairs", ds.test_pairs, "Override the number of test pairs");
  dataset->add_option("--with-overlap", ds.with_overlap, "Override whether the two characters may overlap");
  dataset->add_option("--diffuser-count", ds.diffuser_count, "Override the number of diffusers");
  dataset->add_option("--variance-mode", ds.variance_mode, "Override the variance mode")
      ->check(CLI::IsMember({"one", "same", "different"}));
  dataset->add_option("--variances", ds.variances, "Override the diffuser variances");
  dataset->add_option("--train-scales", ds.train_scales, "Override the training object scales (samples)");
  dataset->add_option("--test-scales", ds.test_scales, "Override the test object scales (samples)");
  dataset->add_option("--gt-scale", ds.gt_scale, "Override the ground-truth object scale (0 = as rendered)");
  dataset->add_option("--region-size", ds.region_size, "Override the memory-effect tile side (0 = single region)");
  dataset->add_flag("--raw", ds.raw, "Also write raw float sidecars");
  add_geometry(dataset, ds.optics, true, &ds.grid);

  AutocorrArgs ac;
  auto* autocorr = app.add_subcommand("autocorr", "Autocorrelation of an image and its speckle statistics");
  autocorr->add_option("--image", ac.image, "Input image")->required();
  autocorr->add_option("--out", ac.out, "Autocorrelation PNG (scaled to its peak)");
  autocorr->add_option("--raw", ac.raw, "Autocorrelation raw float sidecar");
  autocorr->add_option("--json-report", ac.json_report, "Machine-readable report file");
  autocorr->add_flag("--keep-mean", ac.keep_mean, "Do not subtract the mean before correlating");

  OmeScanArgs os;
  auto* ome = app.add_subcommand("ome-scan", "Correlation of the PSF against a shifted point source");
  ome->add_option("--diffuser-seed", os.diffuser_seed, "Seed of the diffuser screen(s)");
  ome->add_option("--variance", os.variance, "Diffuser variance")->check(CLI::PositiveNumber);
  ome->add_option("--region-size", os.region_size, "Scan the tiled region model instead of the thin screen")
      ->check(CLI::NonNegativeNumber);
  ome->add_option("--max-shift", os.scan.max_shift, "Largest diagonal shift in samples")->check(CLI::PositiveNumber);
  ome->add_option("--step", os.scan.step, "Shift increment")->check(CLI::PositiveNumber);
  ome->add_option("--threshold", os.scan.threshold, "Correlation defining the range estimate")
      ->check(CLI::Range(0.0, 1.0));
  ome->add_option("--out", os.out, "Curve text file (shift correlation per line)");
  ome->add_option("--json-report", os.json_report, "Machine-readable report file");
  add_geometry(ome, os.optics, true, &os.grid);

  RetrieveArgs rt;
  auto* retrieve = app.add_subcommand("retrieve", "Phase retrieval from a speckle frame");
  retrieve->add_option("--speckle", rt.speckle, "Speckle image (or the object itself with --exact)")->required();
  retrieve->add_option("--out", rt.out, "Estimate PNG; the residual log is written next to it")->required();
  retrieve->add_option("--support", rt.support, "Centred support box, N or RxC (default: half the frame)");
  retrieve->add_option("--beta", rt.beta, "Feedback parameter")->check(CLI::Range(0.0, 1.0));
  retrieve->add_option("--iters", rt.iters, "Iterations per restart")->check(CLI::PositiveNumber);
  retrieve->add_option("--restarts", rt.restarts, "Random restarts")->check(CLI::PositiveNumber);
  retrieve->add_option("--seed", rt.seed, "Seed of the random starts");
  retrieve->add_option("--threads", rt.threads, "Worker threads for restarts (0 = hardware concurrency)");
  retrieve->add_option("--rule", rt.rule, "Update rule")->check(CLI::IsMember({"hio", "er"}));
  retrieve->add_flag("--exact", rt.exact, "Use the Fourier magnitude of the input image itself");
  retrieve->add_option("--truth", rt.truth, "Ground truth for an alignment-invariant NCC");

  MetricsArgs mt;
  auto* metrics = app.add_subcommand("metrics", "MAE, SSIM and PSNR between restored and ground-truth images");
  metrics->add_option("restored", mt.restored, "Restored image or directory")->required();
  metrics->add_option("truth", mt.truth, "Ground-truth image or directory (paired by filename)")->required();
  metrics->add_option("--max-value", mt.ssim.max_value, "Largest gray value of the decoded images")
      ->check(CLI::PositiveNumber);
  metrics->add_option("--window", mt.ssim.window, "SSIM window side")->check(CLI::PositiveNumber);
  metrics->add_option("--sigma", mt.ssim.sigma, "SSIM Gaussian window sigma")->check(CLI::PositiveNumber);
  metrics->add_flag("--contrast-uses-covariance", mt.ssim.contrast_uses_covariance,
                    "Use the covariance in the SSIM contrast term");
  metrics->add_option("--json-report", mt.json_report, "Machine-readable report file");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUserError;
  }

  CLI::App* chosen = app.get_subcommands().front();
  out << "# specklab " << chosen->get_name() << "\n" << chosen->config_to_str(true, false) << std::flush;

  try {
    if (chosen == simulate) return run_simulate(sim, out);
    if (chosen == dataset) return run_dataset(ds, *dataset, out, err);
    if (chosen == autocorr) return run_autocorr(ac, out);
    if (chosen == ome) return run_ome_scan(os, out);
    if (chosen == retrieve) return run_retrieve(rt, out);
    if (chosen == metrics) return run_metrics(mt, out);
  } catch (const Error& e) {
    // Every specialised error describes bad input or parameters; the bare base
    // class is reserved for library failures.
    const bool user = typeid(e) != typeid(Error);
    err << (user ? "error: " : "internal error: ") << e.what() << "\n";
    return user ? kUserError : kInternalError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternalError;
  }
  err << "internal error: unhandled subcommand\n";
  return kInternalError;
}

int dispatch(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return dispatch(args, std::cout, std::cerr);
}

}  // namespace specklab::cli
