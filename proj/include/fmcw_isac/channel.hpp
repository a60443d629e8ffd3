#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "fmcw_isac/params.hpp"
#include "fmcw_isac/seed.hpp"
#include "fmcw_isac/signal.hpp"

namespace fmcw_isac {

// One point reflector. Delays are whole samples.
struct Target {
  cplx amplitude{1.0, 0.0};
  std::size_t delay_samples = 0;
  double doppler_hz = 0.0;
};

using TargetSet = std::vector<Target>;

// Superposition of delayed, Doppler-shifted copies of s_mod.
//
// The payload is delayed circularly, x[(n-d) mod N], while the chirp is
// delayed as a continuous sweep, exp(j*pi*alpha_norm*(n-d)^2) for every n,
// so that after dechirping each target is exactly
//   a * x[(n-d) mod N] * exp(-j*2*pi*(f_c*tau - alpha*tau^2/2)) * exp(-j*2*pi*alpha_norm*d*n)
// times its Doppler tone. The baseband chirp supplies the alpha*tau^2/2 term
// itself; only the carrier part of the phase is added explicitly.
inline ComplexSignal apply_channel(const ComplexSignal& s_mod, const TargetSet& targets,
                                   const SystemParams& p) {
  const std::size_t n = p.n();
  if (s_mod.size() != n)
    throw std::invalid_argument("apply_channel: signal length " + std::to_string(s_mod.size()) +
                                " != N = " + std::to_string(n));
  ComplexSignal r{std::vector<cplx>(n), p.cfg.sample_rate_hz};
  const double pi = std::numbers::pi;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const Target& tg = targets[t];
    if (tg.delay_samples >= n)
      throw std::invalid_argument("target " + std::to_string(t) + ": delay " +
                                  std::to_string(tg.delay_samples) + " outside [0, N)");
    const std::size_t d = tg.delay_samples;
    const double carrier_cycles =
        std::fmod(p.cfg.carrier_hz * static_cast<double>(d) / p.cfg.sample_rate_hz, 1.0);
    const cplx gain = tg.amplitude * std::polar(1.0, -2.0 * pi * carrier_cycles);
    const double doppler_norm = tg.doppler_hz / p.cfg.sample_rate_hz;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t src = (i + n - d) % n;
      const double ks = static_cast<double>(src);
      // Strip the circularly indexed chirp sample and apply the linearly delayed one.
      const double lag = static_cast<double>(i) - static_cast<double>(d);
      const double chirp_cycles =
          std::fmod(p.alpha_norm * lag * lag, 2.0) - std::fmod(p.alpha_norm * ks * ks, 2.0);
      const double doppler_cycles = std::fmod(doppler_norm * static_cast<double>(i), 1.0);
      r.samples[i] += gain * s_mod.samples[src] *
                      std::polar(1.0, pi * chirp_cycles + 2.0 * pi * doppler_cycles);
    }
  }
  return r;
}

// Circularly-symmetric complex Gaussian noise of total variance `variance`.
inline std::vector<cplx> awgn(std::size_t count, double variance, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, std::sqrt(variance / 2.0));
  std::vector<cplx> w(count);
  for (auto& z : w) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    z = cplx(re, im);
  }
  return w;
}

inline double noise_variance_for_snr(double snr_db) noexcept {
  return std::pow(10.0, -snr_db / 10.0);
}

// Adds noise with variance 10^(-snr_db/10) against unit reference power.
// snr_db == +inf leaves the signal untouched.
inline ComplexSignal add_awgn(ComplexSignal sig, double snr_db, std::uint64_t seed) {
  if (std::isinf(snr_db) && snr_db > 0.0) return sig;
  const auto w = awgn(sig.size(), noise_variance_for_snr(snr_db), seed);
  for (std::size_t i = 0; i < sig.size(); ++i) sig.samples[i] += w[i];
  return sig;
}

}  // namespace fmcw_isac
