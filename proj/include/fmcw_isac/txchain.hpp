#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fmcw_isac/params.hpp"
#include "fmcw_isac/signal.hpp"

namespace fmcw_isac {

// Root-raised-cosine taps, 2*span*sps + 1 long, centered on the middle tap.
struct PulseShape {
  double beta = 0.0;
  std::size_t sps = 1;
  std::size_t span = 0;
  std::vector<double> taps;

  std::size_t center() const noexcept { return taps.size() / 2; }
};

namespace detail {

// Unit-symbol-period RRC impulse response at time t (in symbols).
inline double rrc_value(double t, double beta) {
  constexpr double pi = std::numbers::pi;
  if (std::abs(t) < 1e-12) return 1.0 - beta + 4.0 * beta / pi;
  if (beta > 0.0 && std::abs(std::abs(t) - 1.0 / (4.0 * beta)) < 1e-9) {
    const double a = pi / (4.0 * beta);
    return beta / std::numbers::sqrt2 *
           ((1.0 + 2.0 / pi) * std::sin(a) + (1.0 - 2.0 / pi) * std::cos(a));
  }
  const double x = 4.0 * beta * t;
  return (std::sin(pi * t * (1.0 - beta)) + x * std::cos(pi * t * (1.0 + beta))) /
         (pi * t * (1.0 - x * x));
}

}  // namespace detail

// Energy is normalized to sum(taps^2) == sps: cyclically shaping i.i.d.
// unit-power symbols then yields a chirp with expected mean power exactly 1.
inline PulseShape rrc_taps(double beta, std::size_t sps, std::size_t span) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("rrc beta must lie in [0, 1]");
  if (sps < 1) throw std::invalid_argument("rrc needs at least one sample per symbol");
  if (span < 4) throw std::invalid_argument("rrc span must be at least 4 symbols");

  PulseShape ps{beta, sps, span, {}};
  const std::size_t half = span * sps;
  ps.taps.resize(2 * half + 1);
  double energy = 0.0;
  for (std::size_t i = 0; i < ps.taps.size(); ++i) {
    const double t = (static_cast<double>(i) - static_cast<double>(half)) / static_cast<double>(sps);
    ps.taps[i] = detail::rrc_value(t, beta);
    energy += ps.taps[i] * ps.taps[i];
  }
  const double g = std::sqrt(static_cast<double>(sps) / energy);
  for (auto& v : ps.taps) v *= g;
  // Enforce exact symmetry against rounding in the closed form.
  for (std::size_t i = 0; i < half; ++i) {
    const double m = 0.5 * (ps.taps[i] + ps.taps[ps.taps.size() - 1 - i]);
    ps.taps[i] = ps.taps[ps.taps.size() - 1 - i] = m;
  }
  return ps;
}

inline PulseShape rrc_taps(const SystemParams& p) {
  return rrc_taps(p.cfg.rrc_beta, p.samples_per_symbol, static_cast<std::size_t>(p.cfg.rrc_span));
}

// Circular convolution of the sps-upsampled symbol train with the taps.
// Symbol m is centered on sample m*sps.
inline ComplexSignal shape_symbols(std::span<const cplx> symbols, const PulseShape& ps,
                                   const SystemParams& p) {
  const std::size_t n = p.n();
  if (ps.sps != p.samples_per_symbol)
    throw std::invalid_argument("pulse shape sps does not match system parameters");
  if (symbols.size() * ps.sps != n)
    throw std::invalid_argument("shape_symbols: " + std::to_string(symbols.size()) +
                                " symbols at " + std::to_string(ps.sps) +
                                " sps do not fill " + std::to_string(n) + " samples");

  // Fold the taps onto the chirp circle once; they may be longer than N.
  std::vector<double> folded(n, 0.0);
  const auto c = static_cast<long long>(ps.center());
  const auto nn = static_cast<long long>(n);
  for (std::size_t i = 0; i < ps.taps.size(); ++i) {
    const long long off = ((static_cast<long long>(i) - c) % nn + nn) % nn;
    folded[static_cast<std::size_t>(off)] += ps.taps[i];
  }
  std::vector<std::size_t> support;
  for (std::size_t k = 0; k < n; ++k)
    if (folded[k] != 0.0) support.push_back(k);

  ComplexSignal x{std::vector<cplx>(n), p.cfg.sample_rate_hz};
  for (std::size_t m = 0; m < symbols.size(); ++m) {
    if (symbols[m] == cplx{}) continue;
    const std::size_t base = m * ps.sps;
    for (std::size_t k : support) x.samples[(base + k) % n] += symbols[m] * folded[k];
  }
  return x;
}

// Baseband chirp exp(j*pi*alpha_norm*n^2), the carrier term dropped.
inline ComplexSignal gen_chirp(const SystemParams& p) {
  const std::size_t n = p.n();
  ComplexSignal s{std::vector<cplx>(n), p.cfg.sample_rate_hz};
  for (std::size_t i = 0; i < n; ++i) {
    const double k = static_cast<double>(i);
    const double cycles = std::fmod(p.alpha_norm * k * k, 2.0);
    s.samples[i] = std::polar(1.0, std::numbers::pi * cycles);
  }
  return s;
}

inline ComplexSignal modulate(const ComplexSignal& x, const ComplexSignal& chirp) {
  require_same_length(x, chirp, "modulate");
  ComplexSignal out{std::vector<cplx>(x.size()), chirp.sample_rate_hz};
  for (std::size_t i = 0; i < x.size(); ++i) out.samples[i] = x.samples[i] * chirp.samples[i];
  return out;
}

// x[n] == 1 for every sample: the plain radar waveform.
inline ComplexSignal unmodulated_payload(const SystemParams& p) {
  return ComplexSignal{std::vector<cplx>(p.n(), cplx{1.0, 0.0}), p.cfg.sample_rate_hz};
}

}  // namespace fmcw_isac
