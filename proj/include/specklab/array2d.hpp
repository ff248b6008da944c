#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <new>
#include <span>
#include <utility>
#include <vector>

namespace specklab {

/// Allocator returning 64-byte aligned storage so FFTW plans can assume SIMD
/// alignment for every buffer we hand them.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::size_t alignment = 64;

  AlignedAllocator() noexcept = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    std::size_t bytes = n * sizeof(T);
    bytes = (bytes + alignment - 1) / alignment * alignment;
    void* p = std::aligned_alloc(alignment, bytes == 0 ? alignment : bytes);
    if (p == nullptr) throw std::bad_alloc();
    return static_cast<T*>(p);
  }
  void deallocate(T* p, std::size_t) noexcept { std::free(p); }

  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t size() const { return rows * cols; }
  bool operator==(const Shape&) const = default;
};

/// Dense row-major 2D array.
template <typename T>
class Array2D {
 public:
  using value_type = T;
  using storage_type = std::vector<T, AlignedAllocator<T>>;

  Array2D() = default;
  Array2D(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  explicit Array2D(Shape s, T fill = T{}) : Array2D(s.rows, s.cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  Shape shape() const { return {rows_, cols_}; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<T> flat() { return {data_.data(), data_.size()}; }
  std::span<const T> flat() const { return {data_.data(), data_.size()}; }

  auto begin() { return data_.begin(); }
  auto end() { return data_.end(); }
  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }

  void fill(const T& v) { std::fill(data_.begin(), data_.end(), v); }

  bool operator==(const Array2D& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  storage_type data_;
};

using RealArray = Array2D<double>;

/// Integer sample offset on a grid (row, col). May be negative.
struct Offset {
  long row = 0;
  long col = 0;
  bool operator==(const Offset&) const = default;
};

inline std::size_t wrap_index(long i, std::size_t n) {
  const long m = static_cast<long>(n);
  long r = i % m;
  return static_cast<std::size_t>(r < 0 ? r + m : r);
}

/// Circular shift: out(r + dr, c + dc) = in(r, c).
template <typename T>
Array2D<T> circular_shift(const Array2D<T>& in, Offset by) {
  Array2D<T> out(in.shape());
  for (std::size_t r = 0; r < in.rows(); ++r) {
    const std::size_t rr = wrap_index(static_cast<long>(r) + by.row, in.rows());
    for (std::size_t c = 0; c < in.cols(); ++c) {
      out(rr, wrap_index(static_cast<long>(c) + by.col, in.cols())) = in(r, c);
    }
  }
  return out;
}

/// Point reflection about the origin sample: out(r, c) = in(-r, -c) (circular).
template <typename T>
Array2D<T> point_reflect(const Array2D<T>& in) {
  Array2D<T> out(in.shape());
  for (std::size_t r = 0; r < in.rows(); ++r) {
    const std::size_t rr = (in.rows() - r) % in.rows();
    for (std::size_t c = 0; c < in.cols(); ++c) {
      out(rr, (in.cols() - c) % in.cols()) = in(r, c);
    }
  }
  return out;
}

/// Moves the zero-index sample to (rows/2, cols/2).
template <typename T>
Array2D<T> fftshift(const Array2D<T>& in) {
  return circular_shift(in, {static_cast<long>(in.rows() / 2), static_cast<long>(in.cols() / 2)});
}

/// Inverse of fftshift.
template <typename T>
Array2D<T> ifftshift(const Array2D<T>& in) {
  return circular_shift(in, {-static_cast<long>(in.rows() / 2), -static_cast<long>(in.cols() / 2)});
}

}  // namespace specklab
