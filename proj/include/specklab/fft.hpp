#pragma once

#include <complex>

#include "specklab/array2d.hpp"

namespace specklab {

using Complex = std::complex<double>;
using ComplexArray = Array2D<Complex>;

namespace fft {

enum class Direction { forward, inverse };

/// In-place 2D DFT. Forward is unnormalized; inverse carries the 1/(rows*cols)
/// factor, so inverse(forward(x)) == x up to rounding. Zero frequency at (0, 0).
/// Thread-safe: plans are cached per (shape, direction) under a lock and
/// executed with the new-array interface.
void transform(ComplexArray& data, Direction dir);

ComplexArray forward(const RealArray& real);
ComplexArray forward(ComplexArray data);
ComplexArray inverse(ComplexArray data);

/// Real part of the inverse transform.
RealArray inverse_real(ComplexArray data);

/// Signed frequency index of bin k in an n-point DFT: 0, 1, ..., -2, -1.
inline long signed_frequency(std::size_t k, std::size_t n) {
  return k <= (n - 1) / 2 ? static_cast<long>(k) : static_cast<long>(k) - static_cast<long>(n);
}

}  // namespace fft
}  // namespace specklab
