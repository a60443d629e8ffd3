#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fmcw_isac/channel.hpp"
#include "fmcw_isac/constellation.hpp"
#include "fmcw_isac/fft.hpp"
#include "fmcw_isac/rx.hpp"
#include "fmcw_isac/txchain.hpp"
#include "oracles.hpp"

using namespace fmcw_isac;

namespace {

SystemParams geometry(std::size_t n, double alpha_norm) {
  SystemConfig cfg;
  cfg.samples_per_chirp = n;
  return derive_params(with_alpha_norm(cfg, alpha_norm));
}

std::vector<cplx> random_vector(std::size_t n, std::uint64_t seed) {
  return awgn(n, 1.0, seed);
}

ComplexSignal payload(const SystemParams& p, std::size_t order, std::uint64_t seed) {
  Rng rng(seed);
  const auto c = build_constellation(Modulation::SquareQam, order);
  return shape_symbols(random_symbols(c, p.symbols_per_chirp, rng), rrc_taps(p), p);
}

}  // namespace

TEST(Fft, MatchesDirectDft) {
  for (std::size_t n : {1u, 2u, 8u, 64u, 48u, 100u}) {
    const auto x = random_vector(n, n);
    const auto ref = oracle::dft(x);
    const auto got = fft::forward(x);
    for (std::size_t k = 0; k < n; ++k) EXPECT_NEAR(std::abs(got[k] - ref[k]), 0.0, 1e-9) << n;
    const auto back = fft::inverse(got);
    const auto iref = oracle::idft(ref);
    for (std::size_t k = 0; k < n; ++k) {
      EXPECT_NEAR(std::abs(back[k] - x[k]), 0.0, 1e-12);
      EXPECT_NEAR(std::abs(iref[k] - x[k]), 0.0, 1e-9);
    }
  }
}

TEST(Fft, ParsevalAndLinearity) {
  const auto x = random_vector(1024, 1), y = random_vector(1024, 2);
  const auto fx = fft::forward(x), fy = fft::forward(y);
  double ex = 0.0, efx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    ex += std::norm(x[i]);
    efx += std::norm(fx[i]);
  }
  EXPECT_NEAR(efx / (1024.0 * ex), 1.0, 1e-12);
  std::vector<cplx> s(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) s[i] = x[i] + cplx(0, 3) * y[i];
  const auto fs = fft::forward(s);
  for (std::size_t k = 0; k < x.size(); ++k) EXPECT_NEAR(std::abs(fs[k] - fx[k] - cplx(0, 3) * fy[k]), 0.0, 1e-9);
}

TEST(Fft, ImpulseAndToneOnGrid) {
  std::vector<cplx> imp(16, cplx{});
  imp[0] = 1.0;
  for (const auto& z : fft::forward(imp)) EXPECT_NEAR(std::abs(z - cplx(1, 0)), 0.0, 1e-15);
  std::vector<cplx> tone(16);
  for (std::size_t i = 0; i < 16; ++i) tone[i] = std::polar(1.0, 2 * std::numbers::pi * 3 * i / 16.0);
  const auto per = periodogram(ComplexSignal{tone, 1.0});
  EXPECT_NEAR(per.bins[3], 256.0, 1e-9);
  for (std::size_t k = 0; k < 16; ++k)
    if (k != 3) {
      EXPECT_LT(per.bins[k], 1e-20);
    }
}

TEST(Alignment, UnitModulusAndExampleValue) {
  const auto f = alignment_filter(1024, 10.0 / 1024.0);
  for (const auto& g : f.gain) EXPECT_NEAR(std::abs(g), 1.0, 1e-12);
  EXPECT_EQ(f.gain[0], cplx(1.0, 0.0));
  // kappa = -512: pi * 512^2 / (1024^2 * 10/1024) = 25.6 pi.
  EXPECT_NEAR(f.gain[512].real(), std::cos(1.6 * std::numbers::pi), 1e-9);
  EXPECT_NEAR(f.gain[512].imag(), -std::sin(1.6 * std::numbers::pi), 1e-9);
  EXPECT_NEAR(std::abs(f.gain[512] - cplx(0.30901699437, 0.95105651630)), 0.0, 1e-9);
  EXPECT_NEAR(std::abs(f.gain[1] - f.gain[1023]), 0.0, 1e-12);
  EXPECT_THROW(alignment_filter(64, 0.0), std::invalid_argument);
}

TEST(Alignment, SignedBins) {
  EXPECT_EQ(signed_bin(0, 8), 0);
  EXPECT_EQ(signed_bin(3, 8), 3);
  EXPECT_EQ(signed_bin(4, 8), -4);
  EXPECT_EQ(signed_bin(7, 8), -1);
}

TEST(Alignment, ConservesEnergy) {
  const auto p = geometry(1024, 10.0 / 1024.0);
  const auto f = alignment_filter(p);
  const ComplexSignal x{random_vector(1024, 5), p.cfg.sample_rate_hz};
  EXPECT_NEAR(apply_alignment(x, f).energy() / x.energy(), 1.0, 1e-12);
}

TEST(Alignment, ConstantIsFixedPoint) {
  const auto p = geometry(256, 1.0 / 512.0);
  const auto ones = unmodulated_payload(p);
  const auto xt = disperse_reference(ones, alignment_filter(p));
  for (const auto& z : xt.samples) EXPECT_NEAR(std::abs(z - cplx(1, 0)), 0.0, 1e-12);
}

TEST(Alignment, GroupDelayAdvancesToneCarriedPayload) {
  // A band-limited payload riding on beat bin -K (K = alpha_norm*N*d) comes
  // out of the filter advanced by d samples, up to a constant phase.
  const auto p = geometry(1024, 10.0 / 1024.0);
  const auto f = alignment_filter(p);
  auto spec = random_vector(p.n(), 3);
  for (std::size_t k = 0; k < p.n(); ++k)
    if (std::abs(signed_bin(k, p.n())) > 150) spec[k] = 0.0;
  const ComplexSignal x{fft::inverse(spec), p.cfg.sample_rate_hz};
  const auto xa = apply_alignment(x, f);
  for (std::size_t d : {1u, 7u, 25u}) {
    ComplexSignal y{std::vector<cplx>(p.n()), p.cfg.sample_rate_hz};
    for (std::size_t i = 0; i < p.n(); ++i)
      y.samples[i] = x[(i + p.n() - d) % p.n()] *
                     std::polar(1.0, -2 * std::numbers::pi * p.alpha_norm * double(d) * double(i));
    const auto ya = apply_alignment(y, f);
    const cplx ratio = ya[0] / xa[0];
    EXPECT_NEAR(std::abs(ratio), 1.0, 1e-9);
    for (std::size_t i = 0; i < p.n(); ++i) {
      const cplx tone = std::polar(1.0, -2 * std::numbers::pi * p.alpha_norm * double(d) * double(i));
      EXPECT_NEAR(std::abs(ya[i] - ratio * xa[i] * tone), 0.0, 1e-9) << "d=" << d << " i=" << i;
    }
  }
}

TEST(Compensate, DivisionAndZeroHandling) {
  ComplexSignal num{{cplx(2, 0), cplx(0, 4), cplx(1, 1)}, 1.0};
  ComplexSignal den{{cplx(1, 0), cplx(0, 2), cplx(0, 0)}, 1.0};
  try {
    compensate(num, den);
    FAIL() << "expected domain_error";
  } catch (const std::domain_error& e) {
    EXPECT_NE(std::string(e.what()).find("2"), std::string::npos);
  }
  const auto out = compensate(num, den, 0.5);
  EXPECT_EQ(out[0], cplx(2, 0));
  EXPECT_EQ(out[1], cplx(2, 0));
  EXPECT_NEAR(std::abs(out[2] - cplx(2, 2)), 0.0, 1e-15);
  EXPECT_THROW(compensate(num, den, -1.0), std::invalid_argument);
}

TEST(Metrics, BeatBin) {
  EXPECT_EQ(beat_bin(1024, 10.0 / 1024.0, 25), 774u);
  EXPECT_EQ(beat_bin(1024, 1.0 / 1024.0, 256), 768u);
  EXPECT_EQ(beat_bin(64, 1.0 / 64.0, 0), 0u);
}

TEST(Metrics, IsnrOfPureToneIsInfinite) {
  std::vector<double> bins(64, 0.0);
  bins[10] = 64.0 * 64.0;
  const auto m = measure_isnr(Periodogram{bins, 1.0}, 3, 1.0 / 64.0);
  EXPECT_EQ(m.peak_bin, 10u);
  EXPECT_DOUBLE_EQ(m.peak_power, 1.0);
  EXPECT_TRUE(std::isinf(m.isnr_db));
  EXPECT_EQ(m.est_delay_samples, 54u);
  EXPECT_THROW(measure_isnr(Periodogram{std::vector<double>(7, 1.0), 1.0}, 3, 0.1), std::invalid_argument);
}

TEST(Metrics, GuardExcludesCircularNeighbours) {
  std::vector<double> bins(32, 1.0);
  bins[0] = 100.0;
  bins[31] = bins[1] = 50.0;
  const auto m = measure_isnr(Periodogram{bins, 1.0}, 1, 1.0 / 32.0, NoiseFloorMethod::Mean);
  EXPECT_NEAR(m.noise_floor, 1.0 / 32.0, 1e-15);
}

TEST(Metrics, MedianFloorIsUnbiasedForExponentialBins) {
  // White noise of variance s2 gives exponential periodogram bins of mean N*s2.
  const std::size_t n = 1 << 16;
  const ComplexSignal w{awgn(n, 0.3, 77), 1.0};
  const auto m = measure_isnr(periodogram(w), 3, 1.0 / double(n));
  EXPECT_NEAR(m.noise_floor / 0.3, 1.0, 0.03);
  const auto mm = measure_isnr(periodogram(w), 3, 1.0 / double(n), NoiseFloorMethod::Mean);
  EXPECT_NEAR(mm.noise_floor / 0.3, 1.0, 0.02);
}

TEST(Receiver, NoiselessRecoveryMatchesBruteForce) {
  const auto p = geometry(64, 1.0 / 64.0);
  const auto link_chirp = gen_chirp(p);
  const auto rx = make_receiver(p, link_chirp);
  for (std::size_t d = 0; d < 64; d += 7) {
    const auto x = payload(p, 64, 100 + d);
    const Target tg{std::polar(0.8, 0.3), d, 0.0};
    const auto r = apply_channel(modulate(x, link_chirp), {tg}, p);
    const auto st = rx.process(r, x);
    const auto m = measure_isnr(periodogram(st.r_comp), 3, p.alpha_norm);
    EXPECT_EQ(m.est_delay_samples % 64, d);
    EXPECT_EQ(m.peak_bin, beat_bin(64, p.alpha_norm, d));
    EXPECT_EQ(oracle::delay_by_exhaustive_division(st.r_if.samples, x.samples), d);
  }
}

// Max deviation of r_comp from a pure beat tone for one noiseless target.
double tone_residual(double alpha_norm, std::size_t d) {
  const auto p = geometry(1024, alpha_norm);
  const auto s = gen_chirp(p);
  const auto rx = make_receiver(p, s);
  const auto x = payload(p, 16, 9);
  const auto st = rx.process(apply_channel(modulate(x, s), {Target{cplx(1, 0), d, 0.0}}, p), x);
  const cplx first = st.r_comp[0];
  double worst = std::abs(std::abs(first) - 1.0);
  for (std::size_t i = 0; i < p.n(); ++i) {
    const cplx tone = std::polar(1.0, -2 * std::numbers::pi * alpha_norm * double(d) * double(i));
    worst = std::max(worst, std::abs(st.r_comp[i] - first * tone));
  }
  return worst;
}

TEST(Receiver, CompensatedOutputIsPureTone) {
  // With alpha_norm = 1/N the filter is periodic in the bin index: exact.
  for (std::size_t d : {0u, 25u, 300u, 1000u}) EXPECT_LT(tone_residual(1.0 / 1024.0, d), 1e-9) << d;
  // Otherwise only the truncated pulse's out-of-band tail wraps.
  EXPECT_LT(tone_residual(10.0 / 1024.0, 25), 1e-2);
}

TEST(Receiver, RadarPathIsAlignmentOnly) {
  const auto p = geometry(1024, 10.0 / 1024.0);
  const auto s = gen_chirp(p);
  const auto rx = make_receiver(p, s);
  const auto ones = unmodulated_payload(p);
  auto r = apply_channel(modulate(ones, s), {Target{cplx(1, 0), 25, 0.0}}, p);
  r = add_awgn(r, 0.0, 3);
  const auto st = rx.process(r, ones);
  const auto a = periodogram(st.r_comp), b = periodogram(st.r_if);
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a.bins[k] / b.bins[k], 1.0, 1e-9);
}

TEST(Rdm, DopplerLandsInSlowTimeBin) {
  const std::size_t rows = 8, cols = 16;
  Matrix<cplx> m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      m(r, c) = std::polar(1.0, 2 * std::numbers::pi * (3.0 * c / cols - 2.0 * r / rows));
  const auto out = rdm(m);
  std::size_t best = 0;
  for (std::size_t i = 0; i < out.data.size(); ++i)
    if (out.data[i] > out.data[best]) best = i;
  EXPECT_EQ(best / cols, 2u);
  EXPECT_EQ(best % cols, 3u);
  EXPECT_NEAR(out.data[best], double(cols * cols), 1e-9);
  EXPECT_THROW(rdm(Matrix<cplx>(0, 4)), std::invalid_argument);
}
