#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "specklab/optics.hpp"

namespace specklab::io {

using Bytes = std::vector<std::uint8_t>;

/// 8-bit grayscale PNG of `image` scaled by 255 / value_scale, rounded,
/// clamped to [0, 255]. The encoding is deterministic (no time chunk, fixed
/// zlib level), so equal images give equal bytes.
Bytes encode_png(const IntensityImage& image);

/// Decodes any PNG libpng understands to gray and returns values in [0, 1]
/// (value 255 -> 1.0), value_scale = 1.
IntensityImage decode_png(const Bytes& bytes, const std::string& origin = "<memory>");

void write_png(const std::filesystem::path& path, const IntensityImage& image);
IntensityImage read_png(const std::filesystem::path& path);

/// Raw float sidecar: 16-byte header ("SPKLRAW1", rows u32 LE, cols u32 LE)
/// followed by rows*cols little-endian IEEE-754 float32, row-major.
Bytes encode_raw(const RealArray& data);
RealArray decode_raw(const Bytes& bytes, const std::string& origin = "<memory>");
void write_raw(const std::filesystem::path& path, const RealArray& data);
RealArray read_raw(const std::filesystem::path& path);

/// Reads a PNG or raw sidecar, picked by extension (.raw / .f32 are raw).
IntensityImage read_image(const std::filesystem::path& path);

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const Bytes& bytes);

/// Quantizes values to the 8-bit grid the PNG path stores: round(v * 255) / 255.
IntensityImage quantize_8bit(const IntensityImage& unit_image);

}  // namespace specklab::io
