#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace fmcw_isac {

using cplx = std::complex<double>;

// One chirp worth of complex baseband samples.
struct ComplexSignal {
  std::vector<cplx> samples;
  double sample_rate_hz = 0.0;

  std::size_t size() const noexcept { return samples.size(); }
  cplx& operator[](std::size_t i) { return samples[i]; }
  const cplx& operator[](std::size_t i) const { return samples[i]; }

  double mean_power() const noexcept {
    if (samples.empty()) return 0.0;
    double acc = 0.0;
    for (const auto& z : samples) acc += std::norm(z);
    return acc / static_cast<double>(samples.size());
  }

  double energy() const noexcept {
    double acc = 0.0;
    for (const auto& z : samples) acc += std::norm(z);
    return acc;
  }
};

inline void require_same_length(const ComplexSignal& a, const ComplexSignal& b,
                                const char* what) {
  if (a.size() != b.size())
    throw std::invalid_argument(std::string(what) + ": length mismatch (" +
                                std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
}

}  // namespace fmcw_isac
