#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fmcw_isac/parallel.hpp"
#include "fmcw_isac/seed.hpp"
#include "fmcw_isac/signal.hpp"

namespace fmcw_isac {

enum class Modulation { Psk, SquareQam };

// Unit-power symbol alphabet with Gray bit labels.
//
// PSK: point i sits at angle 2*pi*i/order and carries label gray(i).
// SquareQAM: point i = row*side + col, where row indexes the in-phase level and
// col the quadrature level, both ordered from the most positive amplitude
// downwards. The label is gray(row) followed by gray(col), so the in-phase
// bits come first and bit 0 on an axis selects the positive half-plane.
struct Constellation {
  Modulation kind = Modulation::Psk;
  std::size_t order = 0;
  unsigned bits_per_symbol = 0;
  std::vector<cplx> points;
  std::vector<std::uint32_t> labels;
  std::vector<std::size_t> point_of_label;

  std::string name() const {
    if (kind == Modulation::SquareQam && order == 4) return "qpsk";
    return (kind == Modulation::Psk ? std::to_string(order) + "psk"
                                    : std::to_string(order) + "qam");
  }

  double mean_power() const noexcept {
    double acc = 0.0;
    for (const auto& z : points) acc += std::norm(z);
    return points.empty() ? 0.0 : acc / static_cast<double>(points.size());
  }
};

inline constexpr std::uint32_t gray_encode(std::uint32_t v) noexcept { return v ^ (v >> 1); }

inline Constellation build_constellation(Modulation kind, std::size_t order) {
  if (order < 2 || !std::has_single_bit(order) || order > 65536)
    throw std::invalid_argument("constellation order must be a power of two >= 2, got " +
                                std::to_string(order));
  Constellation c;
  c.kind = kind;
  c.order = order;
  c.bits_per_symbol = static_cast<unsigned>(std::countr_zero(order));
  c.points.resize(order);
  c.labels.resize(order);

  if (kind == Modulation::Psk) {
    for (std::size_t i = 0; i < order; ++i) {
      const double phi = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(order);
      c.points[i] = std::polar(1.0, phi);
      c.labels[i] = gray_encode(static_cast<std::uint32_t>(i));
    }
    // Exact values on the axes keep BPSK at {+1, -1}.
    for (auto& z : c.points) {
      if (std::abs(z.real()) < 1e-15) z.real(0.0);
      if (std::abs(z.imag()) < 1e-15) z.imag(0.0);
    }
  } else {
    if (order != 4 && order != 16 && order != 64 && order != 256)
      throw std::invalid_argument("square QAM supports orders 4, 16, 64, 256; got " +
                                  std::to_string(order));
    const unsigned axis_bits = c.bits_per_symbol / 2;
    const std::size_t side = std::size_t{1} << axis_bits;
    // Mean power of the odd-integer grid is 2*(side^2 - 1)/3.
    const double scale = 1.0 / std::sqrt(2.0 * (static_cast<double>(side * side) - 1.0) / 3.0);
    for (std::size_t row = 0; row < side; ++row) {
      for (std::size_t col = 0; col < side; ++col) {
        const double re = static_cast<double>(side - 1) - 2.0 * static_cast<double>(row);
        const double im = static_cast<double>(side - 1) - 2.0 * static_cast<double>(col);
        const std::size_t i = row * side + col;
        c.points[i] = cplx(re * scale, im * scale);
        c.labels[i] = (gray_encode(static_cast<std::uint32_t>(row)) << axis_bits) |
                      gray_encode(static_cast<std::uint32_t>(col));
      }
    }
  }

  c.point_of_label.assign(order, order);
  for (std::size_t i = 0; i < order; ++i) c.point_of_label[c.labels[i]] = i;
  return c;
}

// Bits are one per byte (0 or 1), most significant label bit first.
inline std::vector<cplx> map_bits(std::span<const std::uint8_t> bits, const Constellation& c) {
  const unsigned k = c.bits_per_symbol;
  if (bits.size() % k != 0)
    throw std::invalid_argument("bit count " + std::to_string(bits.size()) +
                                " is not a multiple of " + std::to_string(k));
  std::vector<cplx> out(bits.size() / k);
  for (std::size_t s = 0; s < out.size(); ++s) {
    std::uint32_t label = 0;
    for (unsigned b = 0; b < k; ++b) label = (label << 1) | (bits[s * k + b] & 1u);
    out[s] = c.points[c.point_of_label[label]];
  }
  return out;
}

// Index of the nearest point; ties go to the lowest index.
inline std::size_t nearest_point(cplx z, const Constellation& c) noexcept {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    const double d = std::norm(z - c.points[i]);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

inline std::vector<std::uint8_t> demap_hard(std::span<const cplx> symbols, const Constellation& c) {
  const unsigned k = c.bits_per_symbol;
  std::vector<std::uint8_t> bits(symbols.size() * k);
  for (std::size_t s = 0; s < symbols.size(); ++s) {
    const std::uint32_t label = c.labels[nearest_point(symbols[s], c)];
    for (unsigned b = 0; b < k; ++b) bits[s * k + b] = (label >> (k - 1 - b)) & 1u;
  }
  return bits;
}

inline std::vector<std::uint8_t> random_bits(std::size_t count, Rng& rng) {
  std::vector<std::uint8_t> bits(count);
  std::uint64_t word = 0;
  for (std::size_t i = 0; i < count; ++i) {
    if (i % 64 == 0) word = rng();
    bits[i] = static_cast<std::uint8_t>(word & 1u);
    word >>= 1;
  }
  return bits;
}

// Uniformly drawn symbols from the alphabet.
inline std::vector<cplx> random_symbols(const Constellation& c, std::size_t count, Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, c.order - 1);
  std::vector<cplx> out(count);
  for (auto& z : out) z = c.points[pick(rng)];
  return out;
}

struct BerCurve {
  std::vector<double> ebn0_db;
  std::vector<double> ber;
  std::vector<std::uint64_t> bits_simulated;
  std::vector<std::uint64_t> errors_counted;
};

struct BerOptions {
  std::uint64_t min_bits = 100'000;
  std::uint64_t min_errors = 100;
  // Hard cap so high-SNR points terminate; BER may then be reported as 0.
  std::uint64_t max_bits = 10'000'000;
};

namespace detail {

struct BerPoint {
  std::uint64_t bits = 0;
  std::uint64_t errors = 0;
};

inline BerPoint simulate_ber_point(const Constellation& c, double ebn0_db,
                                   const BerOptions& opt, std::uint64_t seed) {
  const unsigned k = c.bits_per_symbol;
  const double noise_var = 1.0 / (k * std::pow(10.0, ebn0_db / 10.0));
  const double sigma = std::sqrt(noise_var / 2.0);
  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, sigma);

  constexpr std::size_t block_symbols = 4096;
  BerPoint acc;
  while (acc.bits < opt.max_bits &&
         (acc.bits < opt.min_bits || acc.errors < opt.min_errors)) {
    auto bits = random_bits(block_symbols * k, rng);
    auto symbols = map_bits(bits, c);
    for (auto& z : symbols) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      z += cplx(re, im);
    }
    const auto decided = demap_hard(symbols, c);
    for (std::size_t i = 0; i < bits.size(); ++i) acc.errors += (bits[i] != decided[i]);
    acc.bits += bits.size();
  }
  return acc;
}

}  // namespace detail

// Uncoded hard-decision BER over complex AWGN, one sample per symbol and
// per-symbol noise variance 1/(log2|C| * Eb/N0). `seed_of_point(i)` supplies
// the stream seed of grid point i; points run in parallel.
template <std::invocable<std::size_t> SeedFn>
BerCurve simulate_awgn_ber(const Constellation& c, std::span<const double> ebn0_grid,
                           const BerOptions& opt, SeedFn&& seed_of_point,
                           unsigned workers = default_workers()) {
  if (opt.min_bits < 10'000) throw std::invalid_argument("min_bits must be at least 1e4");
  BerCurve curve;
  curve.ebn0_db.assign(ebn0_grid.begin(), ebn0_grid.end());
  curve.ber.resize(ebn0_grid.size());
  curve.bits_simulated.resize(ebn0_grid.size());
  curve.errors_counted.resize(ebn0_grid.size());
  parallel_for(
      ebn0_grid.size(),
      [&](std::size_t i) {
        const auto pt = detail::simulate_ber_point(c, ebn0_grid[i], opt, seed_of_point(i));
        curve.bits_simulated[i] = pt.bits;
        curve.errors_counted[i] = pt.errors;
        curve.ber[i] = static_cast<double>(pt.errors) / static_cast<double>(pt.bits);
      },
      workers);
  return curve;
}

inline BerCurve simulate_awgn_ber(const Constellation& c, std::span<const double> ebn0_grid,
                                  const BerOptions& opt, std::uint64_t seed) {
  return simulate_awgn_ber(c, ebn0_grid, opt, [seed](std::size_t i) {
    return derive_seed(seed, ExperimentId::Ber, i, 0);
  });
}

}  // namespace fmcw_isac
