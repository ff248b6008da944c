#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "specklab/fft.hpp"
#include "specklab/optics.hpp"

namespace specklab {

/// Thin random screen: multiplies the field elementwise at the diffuser plane.
struct DiffuserScreen {
  ComplexArray matrix;
  double variance = 1.0;
  std::uint64_t seed = 0;
  std::string id;

  Shape shape() const { return matrix.shape(); }
};

/// I.i.d. circular-symmetric complex Gaussian entries: real and imaginary
/// parts independent N(0, variance / 2). Entry (r, c) is drawn from Philox
/// block r * cols + c of `seed`, so screens of equal shape and seed differ
/// only by the scale sqrt(variance).
DiffuserScreen make_diffuser(Shape grid, double variance, std::uint64_t seed);

/// `count` screens with seeds derive_seed(base_seed, i). `variances` holds one
/// value (replicated to every screen) or exactly `count` values.
std::vector<DiffuserScreen> make_diffuser_bank(std::size_t count, Shape grid,
                                               const std::vector<double>& variances,
                                               std::uint64_t base_seed);

/// Multiplies the field by the screen in place.
void apply_screen(ComplexField& field, const DiffuserScreen& screen);

std::string diffuser_id(std::size_t index, double variance, std::uint64_t seed);

}  // namespace specklab
