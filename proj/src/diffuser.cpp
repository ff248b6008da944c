#include "specklab/diffuser.hpp"

#include <cmath>
#include <cstdio>

#include "specklab/errors.hpp"
#include "specklab/rng.hpp"

namespace specklab {

std::string diffuser_id(std::size_t index, double variance, std::uint64_t seed) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "diffuser-%03zu-var%.4g-seed%016llx", index, variance,
                static_cast<unsigned long long>(seed));
  return buf;
}

DiffuserScreen make_diffuser(Shape grid, double variance, std::uint64_t seed) {
  if (!(variance > 0.0)) throw ParameterError("diffuser variance must be positive");
  if (grid.rows == 0 || grid.cols == 0) throw ParameterError("diffuser grid must be non-empty");

  DiffuserScreen screen;
  screen.matrix = ComplexArray(grid);
  screen.variance = variance;
  screen.seed = seed;
  screen.id = diffuser_id(0, variance, seed);

  const rng::CounterRng gen(seed);
  const double scale = std::sqrt(variance / 2.0);
  for (std::size_t i = 0; i < screen.matrix.size(); ++i) {
    const auto [re, im] = gen.normal2(i);
    screen.matrix.data()[i] = Complex(scale * re, scale * im);
  }
  return screen;
}

std::vector<DiffuserScreen> make_diffuser_bank(std::size_t count, Shape grid,
                                               const std::vector<double>& variances,
                                               std::uint64_t base_seed) {
  if (variances.size() != 1 && variances.size() != count) {
    throw ParameterError("variance list must have 1 or " + std::to_string(count) +
                         " entries, got " + std::to_string(variances.size()));
  }
  std::vector<DiffuserScreen> bank;
  bank.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double v = variances.size() == 1 ? variances[0] : variances[i];
    const std::uint64_t seed = rng::derive_seed(base_seed, i);
    DiffuserScreen s = make_diffuser(grid, v, seed);
    s.id = diffuser_id(i, v, seed);
    bank.push_back(std::move(s));
  }
  return bank;
}

void apply_screen(ComplexField& field, const DiffuserScreen& screen) {
  if (field.shape() != screen.shape()) throw DimensionError("screen does not match field grid");
  for (std::size_t i = 0; i < field.data.size(); ++i) field.data.data()[i] *= screen.matrix.data()[i];
}

}  // namespace specklab
