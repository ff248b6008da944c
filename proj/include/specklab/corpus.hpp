#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "specklab/array2d.hpp"

namespace specklab {

/// Indexed collection of grayscale character images with values in [0, 1].
class GlyphCorpus {
 public:
  virtual ~GlyphCorpus() = default;
  virtual std::size_t size() const = 0;
  virtual RealArray glyph(std::size_t index) const = 0;
  /// Stable identifier recorded in manifests.
  virtual std::string id() const = 0;
};

/// MNIST-style IDX3 image file (magic 0x00000803, big-endian counts, uint8 pixels).
class IdxCorpus final : public GlyphCorpus {
 public:
  explicit IdxCorpus(const std::filesystem::path& path);
  std::size_t size() const override { return count_; }
  RealArray glyph(std::size_t index) const override;
  std::string id() const override { return "idx:" + path_.filename().string(); }

 private:
  std::filesystem::path path_;
  std::size_t count_ = 0, rows_ = 0, cols_ = 0;
  std::vector<std::uint8_t> pixels_;
};

/// Every PNG in a directory, in filename order (external datasets such as faces).
class DirectoryCorpus final : public GlyphCorpus {
 public:
  explicit DirectoryCorpus(const std::filesystem::path& dir);
  std::size_t size() const override { return files_.size(); }
  RealArray glyph(std::size_t index) const override;
  std::string id() const override { return "dir:" + dir_.filename().string(); }

 private:
  std::filesystem::path dir_;
  std::vector<std::filesystem::path> files_;
};

/// Procedural handwriting stand-in: glyph i is 2-3 anti-aliased cubic Bezier
/// pen strokes on a 28x28 canvas, drawn from derive_seed(seed, i).
class StrokeCorpus final : public GlyphCorpus {
 public:
  explicit StrokeCorpus(std::size_t count = 10000, std::uint64_t seed = 0x5EED);
  std::size_t size() const override { return count_; }
  RealArray glyph(std::size_t index) const override;
  std::string id() const override;

 private:
  std::size_t count_;
  std::uint64_t seed_;
};

/// "strokes", "strokes:<count>:<seed>", an IDX3 file, or a PNG directory.
std::shared_ptr<const GlyphCorpus> open_corpus(const std::string& spec);

}  // namespace specklab
