#pragma once

// Distribution diagnostics for the dispersed reference x~: magnitude
// histograms, Rayleigh fits, binned KL divergence against CN(0,1), and
// Kolmogorov-Smirnov distances.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fmcw_isac/signal.hpp"

namespace fmcw_isac::stats {

struct MagnitudeHistogram {
  std::vector<double> edges;
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;

  std::size_t bins() const noexcept { return counts.size(); }
  double width() const noexcept { return edges.empty() ? 0.0 : edges[1] - edges[0]; }
  double center(std::size_t i) const noexcept { return 0.5 * (edges[i] + edges[i + 1]); }

  // Histograms with identical edges merge by adding counts.
  void merge(const MagnitudeHistogram& other) {
    if (other.edges != edges) throw std::invalid_argument("histogram edges differ");
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
    total += other.total;
  }
};

inline MagnitudeHistogram empty_histogram(std::size_t bins, double r_max) {
  if (bins < 10) throw std::invalid_argument("histogram needs at least 10 bins");
  if (!(r_max > 0.0)) throw std::invalid_argument("histogram r_max must be positive");
  MagnitudeHistogram h;
  h.edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i)
    h.edges[i] = r_max * static_cast<double>(i) / static_cast<double>(bins);
  h.counts.assign(bins, 0);
  return h;
}

inline std::size_t bin_of(double r, std::size_t bins, double r_max) noexcept {
  const double pos = r * static_cast<double>(bins) / r_max;
  if (!(pos >= 0.0)) return 0;
  return std::min(bins - 1, static_cast<std::size_t>(pos));
}

// Uniform bins on [0, r_max]; magnitudes beyond r_max fall in the last bin.
inline MagnitudeHistogram magnitude_histogram(std::span<const cplx> samples, std::size_t bins,
                                              double r_max) {
  MagnitudeHistogram h = empty_histogram(bins, r_max);
  for (const auto& z : samples) ++h.counts[bin_of(std::abs(z), bins, r_max)];
  h.total = samples.size();
  return h;
}

inline double rayleigh_pdf(double r, double scale) noexcept {
  const double s2 = scale * scale;
  return r / s2 * std::exp(-r * r / (2.0 * s2));
}

inline double rayleigh_cdf(double r, double scale) noexcept {
  return r <= 0.0 ? 0.0 : -std::expm1(-r * r / (2.0 * scale * scale));
}

// Maximum-likelihood Rayleigh scale sqrt(mean|z|^2 / 2).
inline double rayleigh_fit(std::span<const cplx> samples) {
  if (samples.empty()) throw std::invalid_argument("rayleigh_fit: empty input");
  double acc = 0.0;
  for (const auto& z : samples) acc += std::norm(z);
  return std::sqrt(acc / static_cast<double>(samples.size()) / 2.0);
}

// Magnitude law of CN(0,1): Rayleigh with scale 1/sqrt(2).
inline constexpr double unit_cn_rayleigh_scale = 0.70710678118654752440;

struct KlEstimate {
  double d_kl = 0.0;
  std::size_t bins_used = 0;
  std::size_t samples = 0;

  // Expected value of the plug-in estimator when the samples truly follow
  // the reference: (B - 1) / (2 n).
  double bias_floor() const noexcept {
    return samples == 0 ? 0.0
                        : (static_cast<double>(bins_used) - 1.0) / (2.0 * static_cast<double>(samples));
  }
};

inline constexpr std::size_t min_kl_samples = 10'000;

// Binned KL divergence of the sample magnitudes against the CN(0,1)
// magnitude law. The last cell's reference mass includes the tail beyond
// r_max, matching how the histogram folds overflow into it.
inline KlEstimate kl_divergence_from_histogram(const MagnitudeHistogram& h) {
  if (h.total < min_kl_samples)
    throw std::invalid_argument("kl divergence needs at least " + std::to_string(min_kl_samples) +
                                " samples, got " + std::to_string(h.total));
  const std::size_t b = h.bins();
  KlEstimate est{0.0, b, static_cast<std::size_t>(h.total)};
  const double n = static_cast<double>(h.total);
  for (std::size_t i = 0; i < b; ++i) {
    if (h.counts[i] == 0) continue;
    const double lo = h.edges[i];
    const double hi = h.edges[i + 1];
    double q = i + 1 == b ? std::exp(-lo * lo) : std::exp(-lo * lo) - std::exp(-hi * hi);
    q = std::max(q, 1e-300);
    const double p = static_cast<double>(h.counts[i]) / n;
    est.d_kl += p * std::log(p / q);
  }
  est.d_kl = std::max(est.d_kl, 0.0);
  return est;
}

inline KlEstimate kl_divergence_vs_cn(std::span<const cplx> samples, std::size_t bins = 100,
                                      double r_max = 4.0) {
  if (samples.size() < min_kl_samples)
    throw std::invalid_argument("kl divergence needs at least " + std::to_string(min_kl_samples) +
                                " samples, got " + std::to_string(samples.size()));
  return kl_divergence_from_histogram(magnitude_histogram(samples, bins, r_max));
}

namespace detail {

// Two-sided KS distance between the empirical CDF of sorted `x` and `cdf`.
template <typename Cdf>
double ks_sorted(const std::vector<double>& x, Cdf&& cdf) {
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max(d, std::max(static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n));
  }
  return d;
}

}  // namespace detail

// KS distance between the sample phases and Uniform(-pi, pi].
inline double phase_uniformity(std::span<const cplx> samples) {
  if (samples.size() < min_kl_samples)
    throw std::invalid_argument("phase_uniformity needs at least " +
                                std::to_string(min_kl_samples) + " samples");
  std::vector<double> phases(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) phases[i] = std::arg(samples[i]);
  std::sort(phases.begin(), phases.end());
  constexpr double pi = std::numbers::pi;
  return detail::ks_sorted(phases, [](double t) { return std::clamp((t + pi) / (2.0 * pi), 0.0, 1.0); });
}

// KS distance between |z| and the Rayleigh law fitted by rayleigh_fit.
inline double ks_rayleigh(std::span<const cplx> samples) {
  const double scale = rayleigh_fit(samples);
  std::vector<double> mags(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) mags[i] = std::abs(samples[i]);
  std::sort(mags.begin(), mags.end());
  if (scale == 0.0) return 1.0;
  return detail::ks_sorted(mags, [scale](double r) { return rayleigh_cdf(r, scale); });
}

}  // namespace fmcw_isac::stats
