#include <gtest/gtest.h>

#include <random>

#include "fmcw_isac/params.hpp"

using namespace fmcw_isac;

TEST(DeriveParams, DefaultGeometry) {
  SystemConfig cfg;  // f_s = 200 MHz, B = 2 GHz, N = 1024, R = 50 MBd
  const auto p = derive_params(cfg);
  EXPECT_NEAR(p.alpha_norm, 10.0 / 1024.0, 1e-15);
  EXPECT_NEAR(p.chirp_duration_s, 5.12e-6, 1e-18);
  EXPECT_NEAR(p.slope_hz_per_s / 3.90625e14, 1.0, 1e-12);
  EXPECT_EQ(p.samples_per_symbol, 4u);
  EXPECT_EQ(p.symbols_per_chirp, 256u);
  EXPECT_DOUBLE_EQ(p.bin_width_hz, 200e6 / 1024.0);
  EXPECT_NEAR(p.chirp_duration_s * cfg.sample_rate_hz, 1024.0, 1e-9);
}

TEST(DeriveParams, BandwidthEqualToSampleRate) {
  SystemConfig cfg;
  cfg.bandwidth_hz = cfg.sample_rate_hz;
  EXPECT_NEAR(derive_params(cfg).alpha_norm, 1.0 / 1024.0, 1e-18);
}

TEST(DeriveParams, RejectsInvalidGeometry) {
  SystemConfig cfg;
  cfg.samples_per_chirp = 1000;
  EXPECT_THROW(derive_params(cfg), std::invalid_argument);

  cfg = SystemConfig{};
  cfg.symbol_rate_baud = 30e6;  // 200/30 not integral
  EXPECT_THROW(derive_params(cfg), std::invalid_argument);

  cfg = SystemConfig{};
  cfg.samples_per_chirp = 16;
  cfg.symbol_rate_baud = 200e6 / 32;  // sps = 32 > N
  EXPECT_THROW(derive_params(cfg), std::invalid_argument);

  cfg = SystemConfig{};
  cfg.rrc_beta = 1.5;
  EXPECT_THROW(derive_params(cfg), std::invalid_argument);
  cfg.rrc_beta = -0.1;
  EXPECT_THROW(derive_params(cfg), std::invalid_argument);
}

TEST(DeriveParams, SlopeIdentityHoldsForRandomConfigs) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> bw(1e6, 5e9);
  std::uniform_int_distribution<int> log_n(4, 14);
  for (int i = 0; i < 500; ++i) {
    SystemConfig cfg;
    cfg.bandwidth_hz = bw(rng);
    cfg.samples_per_chirp = std::size_t{1} << log_n(rng);
    cfg.symbol_rate_baud = cfg.sample_rate_hz / 4;
    const auto p = derive_params(cfg);
    const double lhs = p.alpha_norm * static_cast<double>(cfg.samples_per_chirp);
    EXPECT_NEAR(lhs / (cfg.bandwidth_hz / cfg.sample_rate_hz), 1.0, 1e-12);
    const auto again = derive_params(cfg);
    EXPECT_EQ(again.alpha_norm, p.alpha_norm);
  }
}

TEST(WithAlphaNorm, RealizesRequestedSlope) {
  for (double a : {1.0 / 2048, 1e-3, 1.0 / 32}) {
    const auto p = derive_params(with_alpha_norm(SystemConfig{}, a));
    EXPECT_NEAR(p.alpha_norm / a, 1.0, 1e-12);
  }
  EXPECT_THROW(with_alpha_norm(SystemConfig{}, 0.0), std::invalid_argument);
}
