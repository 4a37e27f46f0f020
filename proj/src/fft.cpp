#include "heleshaw/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>

namespace heleshaw::fft {

namespace {

// Plans are created once per (dim, n, sign) with FFTW_ESTIMATE | FFTW_UNALIGNED
// so they can be executed on any caller buffer via fftw_execute_dft.  Plan
// creation is the only non-thread-safe part of FFTW and is guarded here;
// execution on distinct buffers is safe concurrently.
class PlanCache {
 public:
  fftw_plan get(int dim, int n, int sign) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto key = std::make_tuple(dim, n, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;

    const std::size_t total = (dim == 1) ? static_cast<std::size_t>(n)
                                         : static_cast<std::size_t>(n) * n;
    std::vector<std::complex<double>> scratch(total);
    auto* ptr = reinterpret_cast<fftw_complex*>(scratch.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan = (dim == 1) ? fftw_plan_dft_1d(n, ptr, ptr, sign, flags)
                                : fftw_plan_dft_2d(n, n, ptr, ptr, sign, flags);
    if (plan == nullptr) throw std::runtime_error("fftw plan creation failed");
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

void execute(int dim, int n, int sign, std::vector<std::complex<double>>& data) {
  const std::size_t total = (dim == 1) ? static_cast<std::size_t>(n)
                                       : static_cast<std::size_t>(n) * n;
  if (data.size() != total) throw std::invalid_argument("fft: buffer size mismatch");
  fftw_plan plan = cache().get(dim, n, sign);
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, ptr, ptr);
}

}  // namespace

void forward(int dim, int n, std::vector<std::complex<double>>& data) {
  execute(dim, n, FFTW_FORWARD, data);
  const double scale = 1.0 / static_cast<double>(data.size());
  for (auto& c : data) c *= scale;
}

void backward(int dim, int n, std::vector<std::complex<double>>& data) {
  execute(dim, n, FFTW_BACKWARD, data);
}

}  // namespace heleshaw::fft
