#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>

namespace tha::detail {
namespace {

struct PlanCache {
  std::mutex mutex;
  std::map<std::pair<std::vector<int>, int>, fftw_plan> plans;

  ~PlanCache() {
    for (auto& [key, plan] : plans) fftw_destroy_plan(plan);
  }

  fftw_plan get(std::span<const int> dims, int sign) {
    std::lock_guard lock(mutex);
    std::pair key{std::vector<int>(dims.begin(), dims.end()), sign};
    if (auto it = plans.find(key); it != plans.end()) return it->second;
    std::size_t total = 1;
    for (int d : dims) total *= static_cast<std::size_t>(d);
    // Planning scratch; FFTW_ESTIMATE does not touch the contents.
    std::vector<fftw_complex> scratch(total);
    fftw_plan plan = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), scratch.data(),
                                   scratch.data(), sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (plan == nullptr) throw std::runtime_error("fftw planning failed");
    plans.emplace(std::move(key), plan);
    return plan;
  }
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

}  // namespace

void dft_inplace(std::span<std::complex<double>> data, std::span<const int> dims, int sign) {
  if (dims.empty()) return;
  fftw_plan plan = cache().get(dims, sign);
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, ptr, ptr);
}

}  // namespace tha::detail
