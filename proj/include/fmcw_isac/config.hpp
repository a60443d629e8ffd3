#pragma once

// JSON experiment configuration. Every key is optional; missing keys take the
// per-experiment defaults from default_config(). Unknown keys are rejected.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "fmcw_isac/channel.hpp"
#include "fmcw_isac/constellation.hpp"
#include "fmcw_isac/params.hpp"
#include "fmcw_isac/rx.hpp"

namespace fmcw_isac {

using json = nlohmann::json;

// Configuration problem attributable to one key (dotted path).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error("config key '" + key + "': " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

enum class ExperimentKind { Ber, Spectrum, Dispersion, KlSweep, IsnrSurface };

inline std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Ber: return "ber";
    case ExperimentKind::Spectrum: return "spectrum";
    case ExperimentKind::Dispersion: return "dispersion";
    case ExperimentKind::KlSweep: return "kl_sweep";
    case ExperimentKind::IsnrSurface: return "isnr_surface";
  }
  return "?";
}

inline ExperimentKind parse_experiment_kind(const std::string& s) {
  for (auto k : {ExperimentKind::Ber, ExperimentKind::Spectrum, ExperimentKind::Dispersion,
                 ExperimentKind::KlSweep, ExperimentKind::IsnrSurface})
    if (to_string(k) == s) return k;
  throw ConfigError("experiment", "unknown experiment '" + s + "'");
}

// Accepts "bpsk", "qpsk", "<n>psk", "<n>qam". "qpsk" is square 4-QAM.
inline Constellation parse_constellation(const std::string& s) {
  if (s == "bpsk") return build_constellation(Modulation::Psk, 2);
  if (s == "qpsk") return build_constellation(Modulation::SquareQam, 4);
  const auto tail = s.size() >= 3 ? s.substr(s.size() - 3) : std::string{};
  if (tail != "psk" && tail != "qam") throw std::invalid_argument("unknown constellation '" + s + "'");
  std::size_t order = 0;
  try {
    std::size_t used = 0;
    order = std::stoul(s.substr(0, s.size() - 3), &used);
    if (used != s.size() - 3) throw std::invalid_argument("");
  } catch (const std::exception&) {
    throw std::invalid_argument("unknown constellation '" + s + "'");
  }
  return build_constellation(tail == "psk" ? Modulation::Psk : Modulation::SquareQam, order);
}

struct Grids {
  std::vector<double> snr_db;
  std::vector<double> ebn0_db;
  std::vector<std::size_t> orders;
  std::vector<double> symbol_rates;
  std::vector<double> alpha_norm;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::IsnrSurface;
  SystemConfig system;
  // When set, overrides system bandwidth so that alpha_norm takes this value.
  double alpha_norm = 0.0;
  Grids grids;
  std::vector<std::string> constellations;
  TargetSet targets;
  std::size_t trials = 1;
  std::uint64_t seed = 1;
  std::string out_path;
  double snr_db = 30.0;
  std::size_t guard = 3;
  double clamp_eps = 0.0;
  NoiseFloorMethod noise_floor = NoiseFloorMethod::Median;
  BerOptions ber;
  std::size_t hist_bins = 100;
  double hist_r_max = 4.0;
  unsigned workers = 0;

  SystemConfig effective_system() const {
    return alpha_norm > 0.0 ? with_alpha_norm(system, alpha_norm) : system;
  }
};

inline std::vector<double> linspace_step(double first, double last, double step) {
  std::vector<double> v;
  const auto count = static_cast<std::size_t>(std::llround((last - first) / step)) + 1;
  for (std::size_t i = 0; i < count; ++i) v.push_back(first + step * static_cast<double>(i));
  return v;
}

inline ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.experiment = kind;
  switch (kind) {
    case ExperimentKind::Ber:
      c.grids.ebn0_db = linspace_step(-10.0, 20.0, 0.5);
      c.constellations = {"16psk", "16qam"};
      c.out_path = "ber.csv";
      break;
    case ExperimentKind::Spectrum:
      // B_ch = f_s gives alpha_norm = 1/N, so tau = 256 Ts lands on bin N - 256.
      c.system.bandwidth_hz = c.system.sample_rate_hz;
      c.targets = {Target{{1.0, 0.0}, 256, 0.0}};
      c.snr_db = 30.0;
      c.constellations = {"16qam"};
      c.out_path = "spectrum.csv";
      break;
    case ExperimentKind::Dispersion:
      c.alpha_norm = 1.0 / 2048.0;
      c.constellations = {"qpsk", "16qam"};
      c.trials = 128;
      c.out_path = "dispersion.csv";
      break;
    case ExperimentKind::KlSweep:
      for (int e = 11; e >= 5; --e) c.grids.alpha_norm.push_back(std::ldexp(1.0, -e));
      c.grids.symbol_rates = {50e6, 25e6, 12.5e6};
      c.constellations = {"qpsk", "16qam"};
      c.trials = 1024;
      c.out_path = "kl_div_rrc.csv";
      break;
    case ExperimentKind::IsnrSurface:
      c.grids.orders = {4, 16, 64, 256};
      c.grids.snr_db = linspace_step(-20.0, 20.0, 2.0);
      // alpha_norm*N = 10 here, so d = 25 sits on bin N - 250 without wrapping.
      c.targets = {Target{{1.0, 0.0}, 25, 0.0}};
      c.trials = 200;
      c.out_path = "stats1024.csv";
      break;
  }
  return c;
}

namespace detail {

inline void check_keys(const json& obj, const std::string& prefix,
                       const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(prefix.empty() ? "<root>" : prefix, "expected an object");
  for (const auto& [k, v] : obj.items())
    if (!allowed.count(k)) throw ConfigError(prefix.empty() ? k : prefix + "." + k, "unknown key");
}

inline double get_number(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError(key, "expected a number");
  return v.get<double>();
}

inline std::uint64_t get_count(const json& v, const std::string& key) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
    throw ConfigError(key, "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

inline std::vector<double> get_numbers(const json& v, const std::string& key) {
  if (!v.is_array() || v.empty()) throw ConfigError(key, "expected a non-empty array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(get_number(v[i], key + "[" + std::to_string(i) + "]"));
  return out;
}

}  // namespace detail

inline SystemConfig parse_system(const json& j, SystemConfig cfg, const std::string& prefix) {
  using namespace detail;
  check_keys(j, prefix, {"f_c", "B_ch", "f_s", "N", "symbol_rate", "rrc_beta", "rrc_span"});
  if (j.contains("f_c")) cfg.carrier_hz = get_number(j["f_c"], prefix + ".f_c");
  if (j.contains("B_ch")) cfg.bandwidth_hz = get_number(j["B_ch"], prefix + ".B_ch");
  if (j.contains("f_s")) cfg.sample_rate_hz = get_number(j["f_s"], prefix + ".f_s");
  if (j.contains("N")) cfg.samples_per_chirp = get_count(j["N"], prefix + ".N");
  if (j.contains("symbol_rate")) cfg.symbol_rate_baud = get_number(j["symbol_rate"], prefix + ".symbol_rate");
  if (j.contains("rrc_beta")) cfg.rrc_beta = get_number(j["rrc_beta"], prefix + ".rrc_beta");
  if (j.contains("rrc_span")) cfg.rrc_span = static_cast<int>(get_count(j["rrc_span"], prefix + ".rrc_span"));
  return cfg;
}

inline ExperimentConfig parse_config(const json& j) {
  using namespace detail;
  if (!j.is_object()) throw ConfigError("<root>", "expected a JSON object");
  if (!j.contains("experiment") || !j["experiment"].is_string())
    throw ConfigError("experiment", "missing or not a string");
  ExperimentConfig c = default_config(parse_experiment_kind(j["experiment"].get<std::string>()));

  check_keys(j, "", {"experiment", "system", "alpha_norm", "grids", "constellations", "targets",
                     "trials", "seed", "out_path", "snr_db", "guard", "clamp_eps", "noise_floor",
                     "ber", "histogram", "workers"});
  if (j.contains("system")) c.system = parse_system(j["system"], c.system, "system");
  if (j.contains("alpha_norm")) {
    c.alpha_norm = get_number(j["alpha_norm"], "alpha_norm");
    if (!(c.alpha_norm > 0.0)) throw ConfigError("alpha_norm", "must be positive");
  }
  if (j.contains("grids")) {
    const auto& g = j["grids"];
    check_keys(g, "grids", {"snr_db", "ebn0_db", "orders", "symbol_rates", "alpha_norm"});
    if (g.contains("snr_db")) c.grids.snr_db = get_numbers(g["snr_db"], "grids.snr_db");
    if (g.contains("ebn0_db")) c.grids.ebn0_db = get_numbers(g["ebn0_db"], "grids.ebn0_db");
    if (g.contains("symbol_rates")) c.grids.symbol_rates = get_numbers(g["symbol_rates"], "grids.symbol_rates");
    if (g.contains("alpha_norm")) c.grids.alpha_norm = get_numbers(g["alpha_norm"], "grids.alpha_norm");
    if (g.contains("orders")) {
      if (!g["orders"].is_array() || g["orders"].empty())
        throw ConfigError("grids.orders", "expected a non-empty array of integers");
      c.grids.orders.clear();
      for (std::size_t i = 0; i < g["orders"].size(); ++i)
        c.grids.orders.push_back(get_count(g["orders"][i], "grids.orders[" + std::to_string(i) + "]"));
    }
  }
  if (j.contains("constellations")) {
    const auto& v = j["constellations"];
    if (!v.is_array() || v.empty()) throw ConfigError("constellations", "expected a non-empty array");
    c.constellations.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::string key = "constellations[" + std::to_string(i) + "]";
      if (!v[i].is_string()) throw ConfigError(key, "expected a string");
      try {
        parse_constellation(v[i].get<std::string>());
      } catch (const std::invalid_argument& e) {
        throw ConfigError(key, e.what());
      }
      c.constellations.push_back(v[i].get<std::string>());
    }
  }
  if (j.contains("targets")) {
    const auto& v = j["targets"];
    if (!v.is_array()) throw ConfigError("targets", "expected an array");
    c.targets.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::string key = "targets[" + std::to_string(i) + "]";
      check_keys(v[i], key, {"a_real", "a_imag", "d", "f_D"});
      Target t;
      const double re = v[i].contains("a_real") ? get_number(v[i]["a_real"], key + ".a_real") : 1.0;
      const double im = v[i].contains("a_imag") ? get_number(v[i]["a_imag"], key + ".a_imag") : 0.0;
      t.amplitude = cplx(re, im);
      if (std::abs(t.amplitude) == 0.0) throw ConfigError(key + ".a_real", "target amplitude must be nonzero");
      if (!v[i].contains("d")) throw ConfigError(key + ".d", "missing delay");
      t.delay_samples = get_count(v[i]["d"], key + ".d");
      if (v[i].contains("f_D")) t.doppler_hz = get_number(v[i]["f_D"], key + ".f_D");
      c.targets.push_back(t);
    }
  }
  if (j.contains("trials")) c.trials = get_count(j["trials"], "trials");
  if (j.contains("seed")) c.seed = get_count(j["seed"], "seed");
  if (j.contains("out_path")) {
    if (!j["out_path"].is_string()) throw ConfigError("out_path", "expected a string");
    c.out_path = j["out_path"].get<std::string>();
  }
  if (j.contains("snr_db")) c.snr_db = get_number(j["snr_db"], "snr_db");
  if (j.contains("guard")) c.guard = get_count(j["guard"], "guard");
  if (j.contains("clamp_eps")) {
    c.clamp_eps = get_number(j["clamp_eps"], "clamp_eps");
    if (c.clamp_eps < 0.0) throw ConfigError("clamp_eps", "must be >= 0");
  }
  if (j.contains("noise_floor")) {
    const auto& v = j["noise_floor"];
    if (v == "median") c.noise_floor = NoiseFloorMethod::Median;
    else if (v == "mean") c.noise_floor = NoiseFloorMethod::Mean;
    else throw ConfigError("noise_floor", "expected \"median\" or \"mean\"");
  }
  if (j.contains("ber")) {
    const auto& b = j["ber"];
    check_keys(b, "ber", {"min_bits", "min_errors", "max_bits"});
    if (b.contains("min_bits")) c.ber.min_bits = get_count(b["min_bits"], "ber.min_bits");
    if (b.contains("min_errors")) c.ber.min_errors = get_count(b["min_errors"], "ber.min_errors");
    if (b.contains("max_bits")) c.ber.max_bits = get_count(b["max_bits"], "ber.max_bits");
    if (c.ber.min_bits < 10'000) throw ConfigError("ber.min_bits", "must be at least 10000");
  }
  if (j.contains("histogram")) {
    const auto& h = j["histogram"];
    check_keys(h, "histogram", {"bins", "r_max"});
    if (h.contains("bins")) c.hist_bins = get_count(h["bins"], "histogram.bins");
    if (h.contains("r_max")) c.hist_r_max = get_number(h["r_max"], "histogram.r_max");
    if (c.hist_bins < 10) throw ConfigError("histogram.bins", "must be at least 10");
    if (!(c.hist_r_max > 0.0)) throw ConfigError("histogram.r_max", "must be positive");
  }
  if (j.contains("workers")) c.workers = static_cast<unsigned>(get_count(j["workers"], "workers"));

  if (c.trials < 1) throw ConfigError("trials", "must be at least 1");
  try {
    derive_params(c.effective_system());
  } catch (const std::invalid_argument& e) {
    throw ConfigError("system", e.what());
  }
  for (std::size_t i = 0; i < c.targets.size(); ++i)
    if (c.targets[i].delay_samples >= c.system.samples_per_chirp)
      throw ConfigError("targets[" + std::to_string(i) + "].d", "delay must be below N");
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("--config", std::string("invalid JSON in '") + path + "': " + e.what());
  }
  return parse_config(j);
}

// Canonical JSON form of a config; its hash labels output files.
inline json to_json(const ExperimentConfig& c) {
  json j;
  j["experiment"] = to_string(c.experiment);
  j["system"] = {{"f_c", c.system.carrier_hz},      {"B_ch", c.system.bandwidth_hz},
                 {"f_s", c.system.sample_rate_hz},  {"N", c.system.samples_per_chirp},
                 {"symbol_rate", c.system.symbol_rate_baud}, {"rrc_beta", c.system.rrc_beta},
                 {"rrc_span", c.system.rrc_span}};
  if (c.alpha_norm > 0.0) j["alpha_norm"] = c.alpha_norm;
  j["grids"] = json::object();
  const auto put_grid = [&](const char* key, const auto& v) {
    if (!v.empty()) j["grids"][key] = v;
  };
  put_grid("snr_db", c.grids.snr_db);
  put_grid("ebn0_db", c.grids.ebn0_db);
  put_grid("orders", c.grids.orders);
  put_grid("symbol_rates", c.grids.symbol_rates);
  put_grid("alpha_norm", c.grids.alpha_norm);
  if (!c.constellations.empty()) j["constellations"] = c.constellations;
  j["targets"] = json::array();
  for (const auto& t : c.targets)
    j["targets"].push_back({{"a_real", t.amplitude.real()}, {"a_imag", t.amplitude.imag()},
                            {"d", t.delay_samples}, {"f_D", t.doppler_hz}});
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  j["snr_db"] = c.snr_db;
  j["guard"] = c.guard;
  j["clamp_eps"] = c.clamp_eps;
  j["noise_floor"] = c.noise_floor == NoiseFloorMethod::Median ? "median" : "mean";
  j["ber"] = {{"min_bits", c.ber.min_bits}, {"min_errors", c.ber.min_errors}, {"max_bits", c.ber.max_bits}};
  j["histogram"] = {{"bins", c.hist_bins}, {"r_max", c.hist_r_max}};
  return j;
}

// FNV-1a over the canonical dump. Excludes out_path and workers, which do
// not affect results.
inline std::string config_hash(const ExperimentConfig& c) {
  const std::string text = to_json(c).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace fmcw_isac
