#include "specklab/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace specklab::fft {
namespace {

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(std::size_t rows, std::size_t cols, Direction dir) {
    const Key key{rows, cols, dir == Direction::forward};
    std::lock_guard lock(mutex_);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    // FFTW_ESTIMATE leaves the buffer untouched, and the scratch has the same
    // 64-byte alignment as every ComplexArray, so the plan is valid for them.
    ComplexArray scratch(rows, cols);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan = fftw_plan_dft_2d(static_cast<int>(rows), static_cast<int>(cols), buf, buf,
                                      dir == Direction::forward ? FFTW_FORWARD : FFTW_BACKWARD,
                                      FFTW_ESTIMATE);
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  using Key = std::tuple<std::size_t, std::size_t, bool>;
  std::mutex mutex_;
  std::map<Key, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

}  // namespace

void transform(ComplexArray& data, Direction dir) {
  if (data.empty()) return;
  fftw_plan plan = cache().get(data.rows(), data.cols(), dir);
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, buf, buf);
  if (dir == Direction::inverse) {
    const double scale = 1.0 / static_cast<double>(data.size());
    for (auto& v : data) v *= scale;
  }
}

ComplexArray forward(const RealArray& real) {
  ComplexArray out(real.shape());
  for (std::size_t i = 0; i < real.size(); ++i) out.data()[i] = real.data()[i];
  transform(out, Direction::forward);
  return out;
}

ComplexArray forward(ComplexArray data) {
  transform(data, Direction::forward);
  return data;
}

ComplexArray inverse(ComplexArray data) {
  transform(data, Direction::inverse);
  return data;
}

RealArray inverse_real(ComplexArray data) {
  transform(data, Direction::inverse);
  RealArray out(data.shape());
  for (std::size_t i = 0; i < data.size(); ++i) out.data()[i] = data.data()[i].real();
  return out;
}

}  // namespace specklab::fft
