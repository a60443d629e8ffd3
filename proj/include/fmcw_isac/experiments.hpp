#pragma once

// Seeded experiment runners. Each produces one or more CSV tables with fixed
// column schemas; results depend only on the config (never on worker count).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "fmcw_isac/channel.hpp"
#include "fmcw_isac/config.hpp"
#include "fmcw_isac/constellation.hpp"
#include "fmcw_isac/parallel.hpp"
#include "fmcw_isac/params.hpp"
#include "fmcw_isac/rx.hpp"
#include "fmcw_isac/seed.hpp"
#include "fmcw_isac/stats.hpp"
#include "fmcw_isac/txchain.hpp"

namespace fmcw_isac {

struct CsvTable {
  std::vector<std::string> comments;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw std::out_of_range("no column '" + name + "'");
    return static_cast<std::size_t>(it - columns.begin());
  }

  std::vector<double> values(const std::string& name) const {
    const std::size_t c = column(name);
    std::vector<double> v;
    v.reserve(rows.size());
    for (const auto& r : rows) v.push_back(r[c]);
    return v;
  }

  std::string to_string() const {
    std::string out;
    for (const auto& c : comments) out += "# " + c + "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
    out += "\n";
    char buf[64];
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.10g", r[i]);
        if (i) out += ",";
        out += buf;
      }
      out += "\n";
    }
    return out;
  }
};

struct CsvOutput {
  std::string path;
  CsvTable table;
};

inline void write_csv(const CsvOutput& out) {
  namespace fs = std::filesystem;
  const fs::path path(out.path);
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + out.path + "'");
  f << out.table.to_string();
  if (!f) throw std::runtime_error("write failed for '" + out.path + "'");
}

inline std::string provenance_comment(const ExperimentConfig& cfg) {
  return "seed=" + std::to_string(cfg.seed) + " config_hash=" + config_hash(cfg);
}

// Everything needed to push one chirp through transmitter, channel and
// sensing receiver.
struct Link {
  SystemParams params;
  PulseShape pulse;
  ComplexSignal chirp;
  SensingReceiver receiver;

  explicit Link(const SystemConfig& cfg, double clamp_eps = 0.0)
      : params(derive_params(cfg)),
        pulse(rrc_taps(params)),
        chirp(gen_chirp(params)),
        receiver(make_receiver(params, chirp, clamp_eps)) {}

  ComplexSignal payload(const Constellation& c, Rng& rng) const {
    const auto symbols = random_symbols(c, params.symbols_per_chirp, rng);
    return shape_symbols(symbols, pulse, params);
  }

  // Channel output plus `noise` (may be empty for a noiseless chirp).
  ComplexSignal received(const ComplexSignal& x, const TargetSet& targets,
                         std::span<const cplx> noise) const {
    ComplexSignal r = apply_channel(modulate(x, chirp), targets, params);
    if (!noise.empty()) {
      if (noise.size() != r.size()) throw std::invalid_argument("noise length mismatch");
      for (std::size_t i = 0; i < r.size(); ++i) r.samples[i] += noise[i];
    }
    return r;
  }
};

// Noise realization for one chirp; empty at snr_db == +inf.
inline std::vector<cplx> chirp_noise(std::size_t n, double snr_db, std::uint64_t seed) {
  if (std::isinf(snr_db) && snr_db > 0.0) return {};
  return awgn(n, noise_variance_for_snr(snr_db), seed);
}

struct ChirpResult {
  SensingReceiver::Stages stages;
  Periodogram spectrum;
  MetricsReport metrics;
};

inline ChirpResult run_chirp(const Link& link, const ComplexSignal& x, const TargetSet& targets,
                             std::span<const cplx> noise, std::size_t guard,
                             NoiseFloorMethod method = NoiseFloorMethod::Median) {
  ChirpResult res;
  res.stages = link.receiver.process(link.received(x, targets, noise), x);
  res.spectrum = periodogram(res.stages.r_comp);
  res.metrics = measure_isnr(res.spectrum, guard, link.params.alpha_norm, method);
  return res;
}

inline unsigned workers_of(const ExperimentConfig& cfg) {
  return cfg.workers == 0 ? default_workers() : cfg.workers;
}

// ---------------------------------------------------------------------------
// BER

inline std::vector<CsvOutput> run_ber(const ExperimentConfig& cfg) {
  if (cfg.experiment != ExperimentKind::Ber) throw ConfigError("experiment", "expected ber");
  if (cfg.grids.ebn0_db.empty()) throw ConfigError("grids.ebn0_db", "empty grid");
  const bool published_schema = cfg.constellations == std::vector<std::string>{"16psk", "16qam"};

  CsvTable t;
  t.comments.push_back(provenance_comment(cfg));
  t.columns.push_back(published_schema ? "snr" : "ebn0_db");
  std::vector<BerCurve> curves;
  for (std::size_t ci = 0; ci < cfg.constellations.size(); ++ci) {
    const Constellation c = parse_constellation(cfg.constellations[ci]);
    if (published_schema) {
      t.columns.push_back(cfg.constellations[ci]);
    } else {
      t.columns.push_back("ber_" + std::string(c.kind == Modulation::Psk ? "psk" : "qam") +
                          std::to_string(c.order));
    }
    curves.push_back(simulate_awgn_ber(
        c, cfg.grids.ebn0_db, cfg.ber,
        [&](std::size_t i) { return derive_seed(cfg.seed, ExperimentId::Ber, ci * 1'000'000 + i, 0); },
        workers_of(cfg)));
  }
  for (std::size_t i = 0; i < cfg.grids.ebn0_db.size(); ++i) {
    std::vector<double> row{cfg.grids.ebn0_db[i]};
    for (const auto& c : curves) row.push_back(c.ber[i]);
    t.rows.push_back(std::move(row));
  }
  return {{cfg.out_path, std::move(t)}};
}

// ---------------------------------------------------------------------------
// Spectrum: radar-only, ISAC before alignment and ISAC after RVPC.

inline double to_db_normalized(double v, double peak) {
  if (peak <= 0.0 || v <= 0.0) return -300.0;
  return std::max(-300.0, 10.0 * std::log10(v / peak));
}

inline std::vector<CsvOutput> run_spectrum(const ExperimentConfig& cfg) {
  if (cfg.experiment != ExperimentKind::Spectrum) throw ConfigError("experiment", "expected spectrum");
  const Link link(cfg.effective_system(), cfg.clamp_eps);
  const std::size_t n = link.params.n();
  const Constellation c = parse_constellation(cfg.constellations.at(0));

  Rng payload_rng(derive_seed(cfg.seed, ExperimentId::Spectrum, 0, 0));
  const ComplexSignal x = link.payload(c, payload_rng);
  const ComplexSignal ones = unmodulated_payload(link.params);
  const auto noise = chirp_noise(n, cfg.snr_db, derive_seed(cfg.seed, ExperimentId::Spectrum, 0, 1));

  const auto radar = link.receiver.process(link.received(ones, cfg.targets, noise), ones);
  const auto isac = link.receiver.process(link.received(x, cfg.targets, noise), x);
  const std::vector<Periodogram> traces{periodogram(radar.r_if), periodogram(isac.r_if),
                                        periodogram(isac.r_comp)};
  std::vector<double> peaks;
  for (const auto& p : traces) peaks.push_back(*std::max_element(p.bins.begin(), p.bins.end()));

  CsvTable t;
  t.comments.push_back(provenance_comment(cfg));
  t.comments.push_back("single chirp; power in dB relative to each trace's maximum");
  t.columns = {"freq", "X", "Xmod", "X_rvpc"};
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = (i + n / 2) % n;  // fftshift: start at -N/2
    const double freq = static_cast<double>(signed_bin(k, n)) / static_cast<double>(n);
    std::vector<double> row{freq};
    for (std::size_t tr = 0; tr < traces.size(); ++tr)
      row.push_back(to_db_normalized(traces[tr].bins[k], peaks[tr]));
    t.rows.push_back(std::move(row));
  }
  return {{cfg.out_path, std::move(t)}};
}

// ---------------------------------------------------------------------------
// Dispersion: time traces of |x| and |x~| plus the pooled |x~| histogram.

inline std::string with_suffix(const std::string& path, const std::string& suffix) {
  namespace fs = std::filesystem;
  fs::path p(path);
  const std::string ext = p.has_extension() ? p.extension().string() : ".csv";
  return (p.parent_path() / (p.stem().string() + suffix + ext)).string();
}

inline std::vector<CsvOutput> run_dispersion(const ExperimentConfig& cfg) {
  if (cfg.experiment != ExperimentKind::Dispersion)
    throw ConfigError("experiment", "expected dispersion");
  const Link link(cfg.effective_system(), cfg.clamp_eps);
  const std::size_t n = link.params.n();
  std::vector<CsvOutput> outputs;

  for (std::size_t ci = 0; ci < cfg.constellations.size(); ++ci) {
    const Constellation c = parse_constellation(cfg.constellations[ci]);
    std::vector<cplx> pooled;
    pooled.reserve(n * cfg.trials);
    CsvTable trace;
    trace.comments.push_back(provenance_comment(cfg));
    trace.comments.push_back("t in microseconds; first chirp of " + c.name());
    trace.columns = {"t", "stream", "rvpc"};
    for (std::size_t chirp = 0; chirp < cfg.trials; ++chirp) {
      Rng rng(derive_seed(cfg.seed, ExperimentId::Dispersion, ci, chirp));
      const ComplexSignal x = link.payload(c, rng);
      const ComplexSignal xt = disperse_reference(x, link.receiver.filter);
      if (chirp == 0) {
        for (std::size_t i = 0; i < n; ++i)
          trace.rows.push_back({static_cast<double>(i) * link.params.sample_period_s * 1e6,
                                std::abs(x.samples[i]), std::abs(xt.samples[i])});
      }
      pooled.insert(pooled.end(), xt.samples.begin(), xt.samples.end());
    }
    const auto hist = stats::magnitude_histogram(pooled, cfg.hist_bins, cfg.hist_r_max);
    const double scale = stats::rayleigh_fit(pooled);
    CsvTable h;
    h.comments.push_back(provenance_comment(cfg));
    h.comments.push_back(c.name() + " |x~| over " + std::to_string(cfg.trials) +
                         " chirps; rayleigh scale=" + std::to_string(scale));
    h.columns = {"abs", "counts", "rayleigh"};
    const double norm = static_cast<double>(hist.total) * hist.width();
    for (std::size_t b = 0; b < hist.bins(); ++b) {
      const double r = hist.center(b);
      h.rows.push_back({r, static_cast<double>(hist.counts[b]) / norm, stats::rayleigh_pdf(r, scale)});
    }
    outputs.push_back({with_suffix(cfg.out_path, "_" + c.name() + "_trace"), std::move(trace)});
    outputs.push_back({with_suffix(cfg.out_path, "_" + c.name() + "_hist"), std::move(h)});
  }
  return outputs;
}

// ---------------------------------------------------------------------------
// KL sweep over normalized slope, symbol rate and payload alphabet.

struct KlColumn {
  std::string name;
  double symbol_rate = 0.0;
  std::string constellation;
};

// Column suffix is samples per symbol, except that the default rate grid
// {50, 25, 12.5} MBd keeps the published labels 4, 8, 32.
inline std::vector<KlColumn> kl_columns(const ExperimentConfig& cfg) {
  const bool published_grid = cfg.grids.symbol_rates == std::vector<double>{50e6, 25e6, 12.5e6} &&
                              cfg.system.sample_rate_hz == 200e6;
  const char* published_suffix[] = {"4", "8", "32"};
  std::vector<KlColumn> cols;
  for (std::size_t ri = 0; ri < cfg.grids.symbol_rates.size(); ++ri) {
    const double rate = cfg.grids.symbol_rates[ri];
    SystemConfig sys = cfg.system;
    sys.symbol_rate_baud = rate;
    const auto sps = derive_params(sys).samples_per_symbol;
    const std::string suffix = published_grid ? published_suffix[ri] : std::to_string(sps);
    for (const auto& name : cfg.constellations) {
      const auto c = parse_constellation(name);
      std::string prefix = c.name();
      if (prefix == "16qam") prefix = "qam";
      cols.push_back({prefix + suffix, rate, name});
    }
  }
  return cols;
}

// Each column reuses the same payload chirps at every slope, so differences
// along a column reflect the slope and not payload resampling.
inline std::vector<CsvOutput> run_kl_sweep(const ExperimentConfig& cfg) {
  if (cfg.experiment != ExperimentKind::KlSweep) throw ConfigError("experiment", "expected kl_sweep");
  if (cfg.grids.alpha_norm.empty()) throw ConfigError("grids.alpha_norm", "empty grid");
  if (cfg.grids.symbol_rates.empty()) throw ConfigError("grids.symbol_rates", "empty grid");
  const auto cols = kl_columns(cfg);
  const auto& slopes = cfg.grids.alpha_norm;
  std::vector<double> result(slopes.size() * cols.size(), 0.0);

  parallel_for(
      result.size(),
      [&](std::size_t cell) {
        const std::size_t si = cell / cols.size();
        const std::size_t ci = cell % cols.size();
        SystemConfig sys = with_alpha_norm(cfg.system, slopes[si]);
        sys.symbol_rate_baud = cols[ci].symbol_rate;
        const Link link(sys);
        const Constellation c = parse_constellation(cols[ci].constellation);
        auto hist = stats::empty_histogram(cfg.hist_bins, cfg.hist_r_max);
        for (std::size_t chirp = 0; chirp < cfg.trials; ++chirp) {
          Rng rng(derive_seed(cfg.seed, ExperimentId::KlSweep, ci, chirp));
          const auto xt = disperse_reference(link.payload(c, rng), link.receiver.filter);
          hist.merge(stats::magnitude_histogram(xt.samples, cfg.hist_bins, cfg.hist_r_max));
        }
        result[cell] = stats::kl_divergence_from_histogram(hist).d_kl;
      },
      workers_of(cfg));

  CsvTable t;
  t.comments.push_back(provenance_comment(cfg));
  t.comments.push_back("KL divergence of |x~| against CN(0,1) magnitudes in nats; " +
                       std::to_string(cfg.trials) + " chirps per point");
  t.columns.push_back("slope");
  for (const auto& c : cols) t.columns.push_back(c.name);
  for (std::size_t si = 0; si < slopes.size(); ++si) {
    std::vector<double> row{slopes[si]};
    for (std::size_t ci = 0; ci < cols.size(); ++ci) row.push_back(result[si * cols.size() + ci]);
    t.rows.push_back(std::move(row));
  }
  return {{cfg.out_path, std::move(t)}};
}

// ---------------------------------------------------------------------------
// ISNR surface over constellation order and SNR, ISAC vs. radar baseline.

struct IsnrCell {
  std::size_t order = 0;
  double snr_db = 0.0;
  double isnr_db = 0.0;
  double isnr_unmod_db = 0.0;
  std::vector<double> trial_isnr_db;
  std::vector<double> trial_isnr_unmod_db;
};

// Trial t at SNR index s uses the same noise for every order and for the
// radar baseline; payloads are independent per (order, SNR, trial).
inline std::vector<IsnrCell> isnr_surface_cells(const ExperimentConfig& cfg) {
  if (cfg.grids.orders.empty()) throw ConfigError("grids.orders", "empty grid");
  if (cfg.grids.snr_db.empty()) throw ConfigError("grids.snr_db", "empty grid");
  const Link link(cfg.effective_system(), cfg.clamp_eps);
  const std::size_t n = link.params.n();
  const ComplexSignal ones = unmodulated_payload(link.params);
  const auto& snrs = cfg.grids.snr_db;

  std::vector<Constellation> alphabets;
  for (std::size_t i = 0; i < cfg.grids.orders.size(); ++i) {
    try {
      alphabets.push_back(build_constellation(Modulation::SquareQam, cfg.grids.orders[i]));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("grids.orders[" + std::to_string(i) + "]", e.what());
    }
  }

  std::vector<IsnrCell> cells(alphabets.size() * snrs.size());
  for (std::size_t cell = 0; cell < cells.size(); ++cell) {
    cells[cell].order = alphabets[cell / snrs.size()].order;
    cells[cell].snr_db = snrs[cell % snrs.size()];
    cells[cell].trial_isnr_db.resize(cfg.trials);
    cells[cell].trial_isnr_unmod_db.resize(cfg.trials);
  }

  constexpr std::uint64_t payload_tag = std::uint64_t{1} << 32;
  parallel_for(
      cells.size() * cfg.trials,
      [&](std::size_t job) {
        const std::size_t cell = job / cfg.trials;
        const std::size_t trial = job % cfg.trials;
        const std::size_t si = cell % snrs.size();
        const Constellation& c = alphabets[cell / snrs.size()];
        const auto noise =
            chirp_noise(n, snrs[si], derive_seed(cfg.seed, ExperimentId::IsnrSurface, si, trial));
        Rng rng(derive_seed(cfg.seed, ExperimentId::IsnrSurface, payload_tag + cell, trial));
        const ComplexSignal x = link.payload(c, rng);
        cells[cell].trial_isnr_db[trial] =
            run_chirp(link, x, cfg.targets, noise, cfg.guard, cfg.noise_floor).metrics.isnr_db;
        cells[cell].trial_isnr_unmod_db[trial] =
            run_chirp(link, ones, cfg.targets, noise, cfg.guard, cfg.noise_floor).metrics.isnr_db;
      },
      workers_of(cfg));

  for (auto& cell : cells) {
    const double t = static_cast<double>(cfg.trials);
    cell.isnr_db = std::accumulate(cell.trial_isnr_db.begin(), cell.trial_isnr_db.end(), 0.0) / t;
    cell.isnr_unmod_db =
        std::accumulate(cell.trial_isnr_unmod_db.begin(), cell.trial_isnr_unmod_db.end(), 0.0) / t;
  }
  return cells;
}

inline std::vector<CsvOutput> run_isnr_surface(const ExperimentConfig& cfg) {
  if (cfg.experiment != ExperimentKind::IsnrSurface)
    throw ConfigError("experiment", "expected isnr_surface");
  const auto cells = isnr_surface_cells(cfg);
  CsvTable t;
  t.comments.push_back(provenance_comment(cfg));
  t.comments.push_back("ISNR columns are means of per-trial dB values over " +
                       std::to_string(cfg.trials) + " trials");
  t.columns = {"snr", "M_Sym", "ISNR", "ISNR_unmod"};
  for (const auto& c : cells)
    t.rows.push_back({c.snr_db, static_cast<double>(c.order), c.isnr_db, c.isnr_unmod_db});
  return {{cfg.out_path, std::move(t)}};
}

inline std::vector<CsvOutput> run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.experiment) {
    case ExperimentKind::Ber: return run_ber(cfg);
    case ExperimentKind::Spectrum: return run_spectrum(cfg);
    case ExperimentKind::Dispersion: return run_dispersion(cfg);
    case ExperimentKind::KlSweep: return run_kl_sweep(cfg);
    case ExperimentKind::IsnrSurface: return run_isnr_surface(cfg);
  }
  throw std::logic_error("unhandled experiment");
}

}  // namespace fmcw_isac
