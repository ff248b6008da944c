#include "specklab/image_io.hpp"

#include <png.h>
#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "specklab/errors.hpp"

namespace specklab::io {
namespace {

constexpr char kRawMagic[8] = {'S', 'P', 'K', 'L', 'R', 'A', 'W', '1'};

std::uint8_t to_byte(double v, double scale) {
  const double x = std::round(v / scale * 255.0);
  return static_cast<std::uint8_t>(std::clamp(x, 0.0, 255.0));
}

void put_u32(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return std::uint32_t{p[0]} | std::uint32_t{p[1]} << 8 | std::uint32_t{p[2]} << 16 |
         std::uint32_t{p[3]} << 24;
}

struct ReadCursor {
  const Bytes* bytes;
  std::size_t pos;
};

void png_read_from_memory(png_structp png, png_bytep out, png_size_t n) {
  auto* cur = static_cast<ReadCursor*>(png_get_io_ptr(png));
  if (cur->pos + n > cur->bytes->size()) png_error(png, "truncated PNG data");
  std::memcpy(out, cur->bytes->data() + cur->pos, n);
  cur->pos += n;
}

void png_write_to_memory(png_structp png, png_bytep data, png_size_t n) {
  auto* out = static_cast<Bytes*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + n);
}

void png_flush_noop(png_structp) {}

[[noreturn]] void png_throwing_error(png_structp png, png_const_charp msg) {
  auto* err = static_cast<std::string*>(png_get_error_ptr(png));
  if (err) *err = msg;
  png_longjmp(png, 1);
}

void png_silent_warning(png_structp, png_const_charp) {}

}  // namespace

Bytes encode_png(const IntensityImage& image) {
  const std::size_t rows = image.rows();
  const std::size_t cols = image.cols();
  if (rows == 0 || cols == 0) throw ParameterError("cannot encode an empty image");
  std::vector<std::uint8_t> pixels(rows * cols);
  for (std::size_t i = 0; i < pixels.size(); ++i) pixels[i] = to_byte(image.data.data()[i], image.value_scale);

  Bytes out;
  std::string message;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message, png_throwing_error,
                                            png_silent_warning);
  if (!png) throw Error("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error("PNG encode failed: " + message);
  }
  png_set_write_fn(png, &out, png_write_to_memory, png_flush_noop);
  png_set_compression_level(png, Z_BEST_SPEED);
  png_set_IHDR(png, info, static_cast<png_uint_32>(cols), static_cast<png_uint_32>(rows), 8,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::size_t r = 0; r < rows; ++r) png_write_row(png, pixels.data() + r * cols);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

IntensityImage decode_png(const Bytes& bytes, const std::string& origin) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw IntegrityError(origin + ": not a PNG file");
  }
  std::string message;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message, png_throwing_error,
                                           png_silent_warning);
  if (!png) throw Error("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  std::vector<std::uint8_t> pixels;
  std::vector<png_bytep> row_ptrs;
  png_uint_32 width = 0, height = 0;
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IntegrityError(origin + ": corrupt PNG (" + message + ")");
  }
  ReadCursor cursor{&bytes, 0};
  png_set_read_fn(png, &cursor, png_read_from_memory);
  png_read_info(png, info);
  width = png_get_image_width(png, info);
  height = png_get_image_height(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA || color == PNG_COLOR_TYPE_PALETTE) {
    png_set_rgb_to_gray_fixed(png, 1, -1, -1);
  }
  png_read_update_info(png, info);
  if (png_get_channels(png, info) != 1) png_error(png, "unsupported channel layout");
  pixels.resize(std::size_t{width} * height);
  row_ptrs.resize(height);
  for (png_uint_32 r = 0; r < height; ++r) row_ptrs[r] = pixels.data() + std::size_t{r} * width;
  png_read_image(png, row_ptrs.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  RealArray data(height, width);
  for (std::size_t i = 0; i < pixels.size(); ++i) data.data()[i] = pixels[i] / 255.0;
  return IntensityImage(std::move(data), 1.0);
}

void write_png(const std::filesystem::path& path, const IntensityImage& image) {
  write_file(path, encode_png(image));
}

IntensityImage read_png(const std::filesystem::path& path) {
  return decode_png(read_file(path), path.string());
}

Bytes encode_raw(const RealArray& data) {
  static_assert(std::endian::native == std::endian::little, "raw sidecar writer assumes little-endian");
  Bytes out(kRawMagic, kRawMagic + 8);
  put_u32(out, static_cast<std::uint32_t>(data.rows()));
  put_u32(out, static_cast<std::uint32_t>(data.cols()));
  out.resize(16 + data.size() * 4);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto f = static_cast<float>(data.data()[i]);
    std::memcpy(out.data() + 16 + 4 * i, &f, 4);
  }
  return out;
}

RealArray decode_raw(const Bytes& bytes, const std::string& origin) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kRawMagic, 8) != 0) {
    throw IntegrityError(origin + ": missing raw sidecar header");
  }
  const std::uint32_t rows = get_u32(bytes.data() + 8);
  const std::uint32_t cols = get_u32(bytes.data() + 12);
  const std::size_t expected = 16 + std::size_t{rows} * cols * 4;
  if (bytes.size() != expected) {
    throw IntegrityError(origin + ": raw sidecar holds " + std::to_string(bytes.size()) +
                         " bytes, header implies " + std::to_string(expected));
  }
  RealArray out(rows, cols);
  for (std::size_t i = 0; i < out.size(); ++i) {
    float f;
    std::memcpy(&f, bytes.data() + 16 + 4 * i, 4);
    out.data()[i] = f;
  }
  return out;
}

void write_raw(const std::filesystem::path& path, const RealArray& data) {
  write_file(path, encode_raw(data));
}

RealArray read_raw(const std::filesystem::path& path) {
  return decode_raw(read_file(path), path.string());
}

IntensityImage read_image(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".raw" || ext == ".f32") {
    RealArray data = read_raw(path);
    double peak = 0.0;
    for (double v : data) peak = std::max(peak, v);
    return IntensityImage(std::move(data), peak > 1.0 ? peak : 1.0);
  }
  return read_png(path);
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError(path.string(), "read failed");
  return bytes;
}

void write_file(const std::filesystem::path& path, const Bytes& bytes) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError(path.parent_path().string(), "cannot create directory: " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(path.string(), "write failed");
}

IntensityImage quantize_8bit(const IntensityImage& unit_image) {
  IntensityImage out = unit_image;
  for (double& v : out.data) v = to_byte(v, unit_image.value_scale) / 255.0;
  out.value_scale = 1.0;
  return out;
}

}  // namespace specklab::io
