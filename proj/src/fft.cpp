#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace camfse::detail {

namespace {

// fftw planning is not thread-safe; execution of an existing plan is.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(int slow, int mid, int fast) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(slow, mid, fast);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;

    const std::size_t n = static_cast<std::size_t>(slow) * mid * fast;
    auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    if (buf == nullptr) throw std::bad_alloc();
    fftw_plan plan =
        fftw_plan_dft_3d(slow, mid, fast, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    if (plan == nullptr) throw std::runtime_error("fftw could not create a plan");
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

}  // namespace

void forward_dft_3d(std::vector<std::complex<double>>& data, int slow, int mid, int fast) {
  if (data.size() != static_cast<std::size_t>(slow) * mid * fast)
    throw std::invalid_argument("dft buffer size mismatch");
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(cache().get(slow, mid, fast), ptr, ptr);
}

}  // namespace camfse::detail
