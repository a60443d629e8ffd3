#pragma once

// Thin wrapper over FFTW. Forward transforms are unnormalized, inverse
// transforms carry the 1/N factor, so inverse(forward(v)) == v.

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

namespace fmcw_isac::fft {

namespace detail {

// Plan creation in FFTW is not thread-safe; execution with new-array
// interfaces is. Plans are created once per (size, sign) and never freed.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(std::size_t n, int sign) {
    std::lock_guard lock(mutex_);
    auto key = std::make_pair(n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::vector<std::complex<double>> scratch(n);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, sign,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  PlanCache() = default;
  std::mutex mutex_;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

inline void execute(std::span<std::complex<double>> data, int sign) {
  if (data.empty()) return;
  fftw_plan plan = PlanCache::instance().get(data.size(), sign);
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, buf, buf);
}

}  // namespace detail

inline void forward_inplace(std::span<std::complex<double>> data) {
  detail::execute(data, FFTW_FORWARD);
}

inline void inverse_inplace(std::span<std::complex<double>> data) {
  detail::execute(data, FFTW_BACKWARD);
  const double scale = data.empty() ? 1.0 : 1.0 / static_cast<double>(data.size());
  for (auto& z : data) z *= scale;
}

inline std::vector<std::complex<double>> forward(std::vector<std::complex<double>> v) {
  forward_inplace(v);
  return v;
}

inline std::vector<std::complex<double>> inverse(std::vector<std::complex<double>> v) {
  inverse_inplace(v);
  return v;
}

}  // namespace fmcw_isac::fft
