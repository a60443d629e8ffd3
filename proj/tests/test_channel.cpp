#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fmcw_isac/channel.hpp"
#include "fmcw_isac/constellation.hpp"
#include "fmcw_isac/rx.hpp"
#include "fmcw_isac/txchain.hpp"

using namespace fmcw_isac;

namespace {

SystemParams small_params(std::size_t n = 64) {
  SystemConfig cfg;
  cfg.samples_per_chirp = n;
  return derive_params(cfg);
}

ComplexSignal random_payload(const SystemParams& p, std::uint64_t seed) {
  Rng rng(seed);
  const auto c = build_constellation(Modulation::SquareQam, 16);
  return shape_symbols(random_symbols(c, p.symbols_per_chirp, rng), rrc_taps(p), p);
}

}  // namespace

TEST(Channel, DechirpedEchoMatchesClosedForm) {
  const auto p = small_params(1024);
  const auto s = gen_chirp(p);
  const auto x = random_payload(p, 1);
  const Target tg{cplx(0.5, -0.25), 37, 0.0};
  const auto r_if = dechirp(apply_channel(modulate(x, s), {tg}, p), s);
  const double pi = std::numbers::pi;
  const double d = 37.0;
  const double carrier = p.cfg.carrier_hz * d / p.cfg.sample_rate_hz;
  for (std::size_t i = 0; i < p.n(); ++i) {
    const double n = static_cast<double>(i);
    const double ph = -2 * pi * carrier + pi * p.alpha_norm * (d * d - 2 * d * n);
    const cplx expect = tg.amplitude * x[(i + p.n() - 37) % p.n()] * std::polar(1.0, ph);
    EXPECT_NEAR(std::abs(r_if[i] - expect), 0.0, 1e-7) << i;
  }
}

TEST(Channel, ZeroDelayUnitTargetIsIdentity) {
  const auto p = small_params();
  const auto s = gen_chirp(p);
  const auto sm = modulate(random_payload(p, 2), s);
  const auto r = apply_channel(sm, {Target{}}, p);
  for (std::size_t i = 0; i < p.n(); ++i) EXPECT_NEAR(std::abs(r[i] - sm[i]), 0.0, 1e-12);
}

TEST(Channel, SuperpositionOfTargets) {
  const auto p = small_params();
  const auto sm = modulate(random_payload(p, 3), gen_chirp(p));
  const Target a{cplx(1.0, 0.0), 5, 1e6}, b{cplx(0.2, 0.7), 19, -3e5};
  const auto ra = apply_channel(sm, {a}, p), rb = apply_channel(sm, {b}, p), rab = apply_channel(sm, {a, b}, p);
  for (std::size_t i = 0; i < p.n(); ++i) EXPECT_NEAR(std::abs(rab[i] - ra[i] - rb[i]), 0.0, 1e-12);
  EXPECT_EQ(apply_channel(sm, {}, p).mean_power(), 0.0);
}

TEST(Channel, DopplerIsATone) {
  const auto p = small_params();
  const auto sm = modulate(random_payload(p, 4), gen_chirp(p));
  const double fd = 2.5e6;
  const auto r0 = apply_channel(sm, {Target{cplx(1, 0), 7, 0.0}}, p);
  const auto r1 = apply_channel(sm, {Target{cplx(1, 0), 7, fd}}, p);
  for (std::size_t i = 0; i < p.n(); ++i) {
    const cplx tone = std::polar(1.0, 2 * std::numbers::pi * fd * static_cast<double>(i) / p.cfg.sample_rate_hz);
    EXPECT_NEAR(std::abs(r1[i] - r0[i] * tone), 0.0, 1e-9);
  }
}

TEST(Channel, PreservesEnergyPerTarget) {
  const auto p = small_params();
  const auto sm = modulate(random_payload(p, 5), gen_chirp(p));
  const auto r = apply_channel(sm, {Target{cplx(0.6, 0.8), 40, 0.0}}, p);
  EXPECT_NEAR(r.energy() / sm.energy(), 1.0, 1e-12);
}

TEST(Channel, RejectsBadInput) {
  const auto p = small_params();
  const auto sm = modulate(random_payload(p, 6), gen_chirp(p));
  EXPECT_THROW(apply_channel(sm, {Target{cplx(1, 0), 64, 0.0}}, p), std::invalid_argument);
  ComplexSignal shorter{std::vector<cplx>(32), p.cfg.sample_rate_hz};
  EXPECT_THROW(apply_channel(shorter, {Target{}}, p), std::invalid_argument);
}

TEST(Noise, VarianceAndCircularity) {
  const auto w = awgn(200'000, 0.5, 42);
  double p = 0.0, re2 = 0.0, im2 = 0.0;
  cplx pseudo{};
  cplx mean{};
  for (const auto& z : w) {
    p += std::norm(z);
    re2 += z.real() * z.real();
    im2 += z.imag() * z.imag();
    pseudo += z * z;
    mean += z;
  }
  const double n = static_cast<double>(w.size());
  EXPECT_NEAR(p / n, 0.5, 0.01);
  EXPECT_NEAR(re2 / n, 0.25, 0.005);
  EXPECT_NEAR(im2 / n, 0.25, 0.005);
  EXPECT_LT(std::abs(pseudo / n), 0.01);
  EXPECT_LT(std::abs(mean / n), 0.01);
}

TEST(Noise, SeedDeterminismAndDistinctness) {
  EXPECT_EQ(awgn(64, 1.0, 9), awgn(64, 1.0, 9));
  EXPECT_NE(awgn(64, 1.0, 9), awgn(64, 1.0, 10));
  EXPECT_NE(derive_seed(1, ExperimentId::IsnrSurface, 0, 1), derive_seed(1, ExperimentId::IsnrSurface, 1, 0));
  EXPECT_NE(derive_seed(1, ExperimentId::IsnrSurface, 0, 0), derive_seed(1, ExperimentId::KlSweep, 0, 0));
  EXPECT_NE(derive_seed(1, ExperimentId::Ber, 0, 0), derive_seed(2, ExperimentId::Ber, 0, 0));
}

TEST(Noise, SnrConvention) {
  EXPECT_DOUBLE_EQ(noise_variance_for_snr(0.0), 1.0);
  EXPECT_NEAR(noise_variance_for_snr(10.0), 0.1, 1e-15);
  EXPECT_NEAR(noise_variance_for_snr(-10.0), 10.0, 1e-12);
  const auto p = small_params();
  const auto s = gen_chirp(p);
  const auto same = add_awgn(s, std::numeric_limits<double>::infinity(), 1);
  EXPECT_EQ(same.samples, s.samples);
}
