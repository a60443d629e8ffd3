#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace fmcw_isac {

// Raw chirp and sampling geometry as supplied by the user or a config file.
struct SystemConfig {
  double carrier_hz = 77e9;
  double bandwidth_hz = 2e9;
  double sample_rate_hz = 200e6;
  std::size_t samples_per_chirp = 1024;
  double symbol_rate_baud = 50e6;
  double rrc_beta = 0.3;
  int rrc_span = 8;
};

// Config plus every scalar derived from it. Build with derive_params().
struct SystemParams {
  SystemConfig cfg;
  double sample_period_s = 0.0;
  double chirp_duration_s = 0.0;
  double slope_hz_per_s = 0.0;
  double alpha_norm = 0.0;
  std::size_t samples_per_symbol = 0;
  std::size_t symbols_per_chirp = 0;
  double bin_width_hz = 0.0;

  std::size_t n() const noexcept { return cfg.samples_per_chirp; }
};

inline constexpr bool is_power_of_two(std::size_t v) noexcept {
  return v != 0 && (v & (v - 1)) == 0;
}

namespace detail {

// Rounds `ratio` to the nearest positive integer, or returns 0 when it is not
// integral to within a relative 1e-9.
inline std::size_t exact_ratio(double ratio) noexcept {
  if (!(ratio >= 0.5) || !std::isfinite(ratio)) return 0;
  const double r = std::round(ratio);
  if (std::abs(ratio - r) > 1e-9 * r) return 0;
  return static_cast<std::size_t>(r);
}

}  // namespace detail

inline SystemParams derive_params(const SystemConfig& cfg) {
  if (!is_power_of_two(cfg.samples_per_chirp))
    throw std::invalid_argument("samples_per_chirp must be a power of two, got " +
                                std::to_string(cfg.samples_per_chirp));
  if (!(cfg.sample_rate_hz > 0.0))
    throw std::invalid_argument("sample rate must be positive");
  if (!(cfg.bandwidth_hz > 0.0))
    throw std::invalid_argument("chirp bandwidth must be positive");
  if (!(cfg.symbol_rate_baud > 0.0))
    throw std::invalid_argument("symbol rate must be positive");
  if (!(cfg.rrc_beta >= 0.0 && cfg.rrc_beta <= 1.0))
    throw std::invalid_argument("rrc_beta must lie in [0, 1]");

  const std::size_t sps = detail::exact_ratio(cfg.sample_rate_hz / cfg.symbol_rate_baud);
  if (sps == 0)
    throw std::invalid_argument("sample rate / symbol rate is not a positive integer");
  if (cfg.samples_per_chirp % sps != 0)
    throw std::invalid_argument("samples per symbol (" + std::to_string(sps) +
                                ") does not divide samples_per_chirp");

  SystemParams p;
  p.cfg = cfg;
  const auto n = static_cast<double>(cfg.samples_per_chirp);
  p.sample_period_s = 1.0 / cfg.sample_rate_hz;
  p.chirp_duration_s = n / cfg.sample_rate_hz;
  p.slope_hz_per_s = cfg.bandwidth_hz / p.chirp_duration_s;
  p.alpha_norm = p.slope_hz_per_s / (cfg.sample_rate_hz * cfg.sample_rate_hz);
  p.samples_per_symbol = sps;
  p.symbols_per_chirp = cfg.samples_per_chirp / sps;
  p.bin_width_hz = cfg.sample_rate_hz / n;

  const double alt = (cfg.bandwidth_hz / cfg.sample_rate_hz) / n;
  if (std::abs(p.alpha_norm - alt) > 1e-12 * alt)
    throw std::logic_error("normalized slope paths disagree");
  return p;
}

// Returns a copy of `cfg` whose bandwidth realizes the requested normalized
// slope at fixed sample rate and chirp length.
inline SystemConfig with_alpha_norm(SystemConfig cfg, double alpha_norm) {
  if (!(alpha_norm > 0.0)) throw std::invalid_argument("alpha_norm must be positive");
  cfg.bandwidth_hz =
      alpha_norm * static_cast<double>(cfg.samples_per_chirp) * cfg.sample_rate_hz;
  return cfg;
}

}  // namespace fmcw_isac
