#include "specklab/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "specklab/errors.hpp"
#include "specklab/image_io.hpp"
#include "specklab/rng.hpp"

namespace specklab {
namespace {

std::uint32_t read_be32(const std::vector<std::uint8_t>& b, std::size_t at) {
  return std::uint32_t{b[at]} << 24 | std::uint32_t{b[at + 1]} << 16 | std::uint32_t{b[at + 2]} << 8 |
         std::uint32_t{b[at + 3]};
}

constexpr std::size_t kStrokeCanvas = 28;

}  // namespace

IdxCorpus::IdxCorpus(const std::filesystem::path& path) : path_(path) {
  pixels_ = io::read_file(path);
  if (pixels_.size() < 16 || read_be32(pixels_, 0) != 0x00000803u) {
    throw InputError(path.string() + ": not an IDX3 image file");
  }
  count_ = read_be32(pixels_, 4);
  rows_ = read_be32(pixels_, 8);
  cols_ = read_be32(pixels_, 12);
  if (pixels_.size() != 16 + count_ * rows_ * cols_) {
    throw InputError(path.string() + ": IDX3 payload size does not match its header");
  }
  pixels_.erase(pixels_.begin(), pixels_.begin() + 16);
}

RealArray IdxCorpus::glyph(std::size_t index) const {
  if (index >= count_) throw ParameterError("glyph index out of range");
  RealArray out(rows_, cols_);
  const std::uint8_t* src = pixels_.data() + index * rows_ * cols_;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = src[i] / 255.0;
  return out;
}

DirectoryCorpus::DirectoryCorpus(const std::filesystem::path& dir) : dir_(dir) {
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") files_.push_back(entry.path());
  }
  if (ec) throw InputError(dir.string() + ": " + ec.message());
  std::sort(files_.begin(), files_.end());
}

RealArray DirectoryCorpus::glyph(std::size_t index) const {
  return io::read_png(files_.at(index)).data;
}

StrokeCorpus::StrokeCorpus(std::size_t count, std::uint64_t seed) : count_(count), seed_(seed) {}

std::string StrokeCorpus::id() const {
  std::ostringstream os;
  os << "strokes:" << count_ << ":" << seed_;
  return os.str();
}

RealArray StrokeCorpus::glyph(std::size_t index) const {
  if (index >= count_) throw ParameterError("glyph index out of range");
  rng::RandomStream rs(rng::derive_seed(seed_, index));
  RealArray canvas(kStrokeCanvas, kStrokeCanvas);
  const int strokes = 2 + static_cast<int>(rs.below(2));
  const double pen = rs.uniform(0.9, 1.4);
  const double lo = 5.0, hi = static_cast<double>(kStrokeCanvas) - 6.0;

  double px = rs.uniform(lo, hi), py = rs.uniform(lo, hi);
  for (int s = 0; s < strokes; ++s) {
    // Strokes chain from the previous end point, as a pen would.
    const double x0 = px, y0 = py;
    const double x1 = rs.uniform(lo, hi), y1 = rs.uniform(lo, hi);
    const double x2 = rs.uniform(lo, hi), y2 = rs.uniform(lo, hi);
    const double x3 = rs.uniform(lo, hi), y3 = rs.uniform(lo, hi);
    const double ink = rs.uniform(0.7, 1.0);
    for (int k = 0; k <= 48; ++k) {
      const double t = k / 48.0, u = 1.0 - t;
      const double x = u * u * u * x0 + 3 * u * u * t * x1 + 3 * u * t * t * x2 + t * t * t * x3;
      const double y = u * u * u * y0 + 3 * u * u * t * y1 + 3 * u * t * t * y2 + t * t * t * y3;
      const long r0 = std::max(0L, static_cast<long>(std::floor(y - 3 * pen)));
      const long r1 = std::min<long>(kStrokeCanvas - 1, static_cast<long>(std::ceil(y + 3 * pen)));
      const long c0 = std::max(0L, static_cast<long>(std::floor(x - 3 * pen)));
      const long c1 = std::min<long>(kStrokeCanvas - 1, static_cast<long>(std::ceil(x + 3 * pen)));
      for (long r = r0; r <= r1; ++r) {
        for (long c = c0; c <= c1; ++c) {
          const double d2 = (r - y) * (r - y) + (c - x) * (c - x);
          const double v = ink * std::exp(-d2 / (2.0 * pen * pen));
          canvas(r, c) = std::max(canvas(r, c), v);
        }
      }
    }
    px = x3;
    py = y3;
  }
  // Pen core saturates, edges stay gray.
  for (double& v : canvas) v = std::min(1.0, 1.25 * v);
  for (double& v : canvas) v = v < 0.02 ? 0.0 : v;
  return canvas;
}

std::shared_ptr<const GlyphCorpus> open_corpus(const std::string& spec) {
  if (spec == "strokes") return std::make_shared<StrokeCorpus>();
  if (spec.rfind("strokes:", 0) == 0) {
    std::istringstream is(spec.substr(8));
    std::size_t count = 0;
    std::uint64_t seed = 0;
    char sep = 0;
    if (!(is >> count >> sep >> seed) || sep != ':' || count == 0) {
      throw InputError("corpus spec '" + spec + "' must look like strokes:<count>:<seed>");
    }
    return std::make_shared<StrokeCorpus>(count, seed);
  }
  const std::filesystem::path p(spec);
  if (std::filesystem::is_directory(p)) {
    auto corpus = std::make_shared<DirectoryCorpus>(p);
    if (corpus->size() == 0) throw InputError(spec + ": directory holds no PNG images");
    return corpus;
  }
  if (std::filesystem::is_regular_file(p)) return std::make_shared<IdxCorpus>(p);
  throw InputError("corpus '" + spec + "' not found (expected 'strokes', an IDX3 file or a PNG directory)");
}

}  // namespace specklab
