#pragma once

// Sensing receiver: dechirp, alignment (RVPC), compensation, periodogram,
// range-Doppler map and ISNR measurement.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "fmcw_isac/fft.hpp"
#include "fmcw_isac/params.hpp"
#include "fmcw_isac/signal.hpp"

namespace fmcw_isac {

inline ComplexSignal dechirp(const ComplexSignal& r, const ComplexSignal& chirp) {
  require_same_length(r, chirp, "dechirp");
  ComplexSignal out{std::vector<cplx>(r.size()), r.sample_rate_hz};
  for (std::size_t i = 0; i < r.size(); ++i)
    out.samples[i] = r.samples[i] * std::conj(chirp.samples[i]);
  return out;
}

// Allpass gains over FFT-ordered bins.
struct AlignmentFilter {
  std::vector<cplx> gain;
  double alpha_norm = 0.0;
};

// Signed bin index: k for k < N/2, k - N otherwise.
inline long long signed_bin(std::size_t k, std::size_t n) noexcept {
  return k < n / 2 ? static_cast<long long>(k) : static_cast<long long>(k) - static_cast<long long>(n);
}

// G[k] = exp(-j*pi*f_k^2/alpha) at the signed bin frequency f_k.
//
// Dechirping with conj(s) puts an echo of delay tau at beat frequency
// -alpha*tau. The group delay of this filter is +f/alpha, so the payload copy
// riding on that beat is advanced by exactly tau and all echoes line up with
// the undelayed reference.
inline AlignmentFilter alignment_filter(std::size_t n, double alpha_norm) {
  if (!(alpha_norm > 0.0)) throw std::invalid_argument("alignment filter needs alpha_norm > 0");
  AlignmentFilter f{std::vector<cplx>(n), alpha_norm};
  const double nn = static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double kappa = static_cast<double>(signed_bin(k, n));
    const double half_cycles = std::fmod(kappa * kappa / (nn * nn * alpha_norm), 2.0);
    f.gain[k] = std::polar(1.0, -std::numbers::pi * half_cycles);
  }
  return f;
}

inline AlignmentFilter alignment_filter(const SystemParams& p) {
  return alignment_filter(p.n(), p.alpha_norm);
}

inline ComplexSignal apply_alignment(const ComplexSignal& sig, const AlignmentFilter& f) {
  if (sig.size() != f.gain.size())
    throw std::invalid_argument("apply_alignment: length mismatch");
  ComplexSignal out = sig;
  fft::forward_inplace(out.samples);
  for (std::size_t k = 0; k < out.size(); ++k) out.samples[k] *= f.gain[k];
  fft::inverse_inplace(out.samples);
  return out;
}

// Transmit-side copy of the alignment: the known payload x becomes x~.
inline ComplexSignal disperse_reference(const ComplexSignal& x, const AlignmentFilter& f) {
  return apply_alignment(x, f);
}

// r_comp[n] = r_al[n] / x~[n]. With clamp_eps > 0, references smaller than
// clamp_eps in magnitude are replaced by clamp_eps at the same phase.
inline ComplexSignal compensate(const ComplexSignal& r_al, const ComplexSignal& x_tilde,
                                double clamp_eps = 0.0) {
  require_same_length(r_al, x_tilde, "compensate");
  if (!(clamp_eps >= 0.0)) throw std::invalid_argument("clamp_eps must be >= 0");
  ComplexSignal out{std::vector<cplx>(r_al.size()), r_al.sample_rate_hz};
  for (std::size_t i = 0; i < r_al.size(); ++i) {
    cplx den = x_tilde.samples[i];
    const double mag = std::abs(den);
    if (clamp_eps > 0.0 && mag < clamp_eps) {
      den = mag > 0.0 ? den * (clamp_eps / mag) : cplx(clamp_eps, 0.0);
    } else if (mag == 0.0) {
      throw std::domain_error("compensate: reference sample " + std::to_string(i) +
                              " is exactly zero");
    }
    out.samples[i] = r_al.samples[i] / den;
  }
  return out;
}

struct Periodogram {
  std::vector<double> bins;
  double bin_width_hz = 0.0;

  std::size_t size() const noexcept { return bins.size(); }
};

// |FFT(sig)|^2, rectangular window.
inline Periodogram periodogram(const ComplexSignal& sig) {
  auto spec = fft::forward(sig.samples);
  Periodogram per;
  per.bins.resize(spec.size());
  for (std::size_t k = 0; k < spec.size(); ++k) per.bins[k] = std::norm(spec[k]);
  per.bin_width_hz = spec.empty() ? 0.0 : sig.sample_rate_hz / static_cast<double>(spec.size());
  return per;
}

// Row-major P x N matrix, one chirp per row.
template <typename T>
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<T> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}

  T& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

// Range-Doppler power map: fast-time FFT per chirp, slow-time inverse FFT
// per range bin, squared magnitude.
inline Matrix<double> rdm(const Matrix<cplx>& chirps) {
  if (chirps.rows < 1) throw std::invalid_argument("rdm needs at least one chirp");
  Matrix<cplx> work = chirps;
  for (std::size_t r = 0; r < work.rows; ++r)
    fft::forward_inplace(std::span(work.data).subspan(r * work.cols, work.cols));
  std::vector<cplx> column(work.rows);
  for (std::size_t c = 0; c < work.cols; ++c) {
    for (std::size_t r = 0; r < work.rows; ++r) column[r] = work(r, c);
    fft::inverse_inplace(column);
    for (std::size_t r = 0; r < work.rows; ++r) work(r, c) = column[r];
  }
  Matrix<double> out(work.rows, work.cols);
  for (std::size_t i = 0; i < work.data.size(); ++i) out.data[i] = std::norm(work.data[i]);
  return out;
}

enum class NoiseFloorMethod {
  // Median of non-peak bins over ln 2: unbiased for exponential bins and
  // insensitive to the heavy tail of compensated noise.
  Median,
  // Plain mean of non-peak bins, kept for comparison.
  Mean,
};

struct MetricsReport {
  std::size_t peak_bin = 0;
  double peak_power = 0.0;
  double noise_floor = 0.0;
  double isnr_db = 0.0;
  std::size_t est_delay_samples = 0;
};

// FFT bin where a target at `delay_samples` lands after dechirping.
inline std::size_t beat_bin(std::size_t n, double alpha_norm, std::size_t delay_samples) {
  const double kb = alpha_norm * static_cast<double>(delay_samples) * static_cast<double>(n);
  const auto k = static_cast<long long>(std::llround(kb));
  const auto nn = static_cast<long long>(n);
  return static_cast<std::size_t>(((nn - k) % nn + nn) % nn);
}

inline MetricsReport measure_isnr(const Periodogram& per, std::size_t guard, double alpha_norm,
                                  NoiseFloorMethod method = NoiseFloorMethod::Median) {
  const std::size_t n = per.size();
  if (n <= 2 * guard + 1)
    throw std::invalid_argument("measure_isnr: guard " + std::to_string(guard) +
                                " too large for " + std::to_string(n) + " bins");
  MetricsReport m;
  m.peak_bin = static_cast<std::size_t>(
      std::distance(per.bins.begin(), std::max_element(per.bins.begin(), per.bins.end())));
  const double nn = static_cast<double>(n);
  m.peak_power = per.bins[m.peak_bin] / (nn * nn);

  std::vector<double> rest;
  rest.reserve(n - 2 * guard - 1);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t dist = std::min((k + n - m.peak_bin) % n, (m.peak_bin + n - k) % n);
    if (dist > guard) rest.push_back(per.bins[k]);
  }
  if (method == NoiseFloorMethod::Median) {
    const std::size_t mid = rest.size() / 2;
    std::nth_element(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(mid), rest.end());
    double med = rest[mid];
    if (rest.size() % 2 == 0) {
      const double lower = *std::max_element(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(mid));
      med = 0.5 * (med + lower);
    }
    m.noise_floor = med / (nn * std::numbers::ln2);
  } else {
    m.noise_floor = std::accumulate(rest.begin(), rest.end(), 0.0) /
                    static_cast<double>(rest.size()) / nn;
  }
  m.isnr_db = m.noise_floor > 0.0 ? 10.0 * std::log10(nn * m.peak_power / m.noise_floor)
                                  : std::numeric_limits<double>::infinity();
  const double shift = static_cast<double>((n - m.peak_bin) % n);
  m.est_delay_samples = static_cast<std::size_t>(std::llround(shift / (alpha_norm * nn)));
  return m;
}

// Complete sensing receive path for one chirp.
struct SensingReceiver {
  SystemParams params;
  ComplexSignal chirp;
  AlignmentFilter filter;
  double clamp_eps = 0.0;

  struct Stages {
    ComplexSignal r_if;
    ComplexSignal r_al;
    ComplexSignal x_tilde;
    ComplexSignal r_comp;
  };

  // r: received chirp; x: the known transmit payload.
  Stages process(const ComplexSignal& r, const ComplexSignal& x) const {
    Stages s;
    s.r_if = dechirp(r, chirp);
    s.r_al = apply_alignment(s.r_if, filter);
    s.x_tilde = disperse_reference(x, filter);
    s.r_comp = compensate(s.r_al, s.x_tilde, clamp_eps);
    return s;
  }
};

inline SensingReceiver make_receiver(const SystemParams& p, const ComplexSignal& chirp,
                                     double clamp_eps = 0.0) {
  return SensingReceiver{p, chirp, alignment_filter(p), clamp_eps};
}

}  // namespace fmcw_isac
