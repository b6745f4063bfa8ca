#pragma once

// JSON run configuration. Frequencies in MHz (kHz for decay rates), times in
// us, lengths in um; the 2 pi is applied on load. Every key is optional and
// defaults to the paper's operating point. Unknown keys are rejected.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "afmgate/errors.hpp"
#include "afmgate/gate.hpp"
#include "afmgate/model.hpp"
#include "afmgate/presets.hpp"
#include "afmgate/thermal.hpp"

namespace afmgate {

struct SpectrumSection {
  int nu = 3;
  int grid = 201;
  bool follow_envelope = false;
};

struct EvolveSection {
  int nu = 5;
  int output_every = 160;  // CSV row decimation; propagation always samples every step
};

struct SweepSection {
  std::vector<int> n_atoms{3, 4, 5, 6};
  std::vector<double> tau_us;
};

struct FitSection {
  std::vector<int> nu{3, 5, 7};
  std::vector<double> tau_us;
};

struct ThermalSection {
  double temperature_uk = 1.0;
  int trials = 500;
  double position_sigma_um = 0.0;
  double mass_kg = rb87_mass_kg;
};

struct TransferSection {
  double omega_sd_mhz = 50.0;
  std::optional<double> b_prime_mhz;  // default -lambda B
};

struct RunConfig {
  ProtocolConfig protocol = paper_protocol(5);
  CTable c_nu = paper_c_table();
  std::uint64_t seed = 1;
  SpectrumSection spectrum;
  EvolveSection evolve;
  SweepSection sweep;
  FitSection fit_c;
  ThermalSection thermal;
  TransferSection transfer;
};

inline std::vector<double> linear_grid(double start, double stop, double step) {
  if (!(step > 0.0) || stop < start) throw ConfigError("grid needs step > 0 and stop >= start");
  const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> g;
  for (long i = 0; i < n; ++i) g.push_back(start + static_cast<double>(i) * step);
  return g;
}

inline std::vector<double> default_sweep_taus() { return linear_grid(0.5, 3.0, 0.1); }
inline std::vector<double> default_fit_taus() { return linear_grid(0.2, 2.0, 0.2); }

namespace detail {

using nlohmann::json;

/// 1-based line of the last component of a dotted path, found by scanning
/// for quoted keys in order. 0 if not found.
inline int locate_line(const std::string& text, const std::vector<std::string>& path) {
  std::size_t pos = 0;
  std::size_t found = std::string::npos;
  for (const auto& key : path) {
    const auto p = text.find("\"" + key + "\"", pos);
    if (p == std::string::npos) break;
    found = p;
    pos = p + key.size() + 2;
  }
  if (found == std::string::npos) return 0;
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(found), '\n'));
}

/// ConfigError that already carries its source position.
struct LocatedConfigError : ConfigError {
  using ConfigError::ConfigError;
};

class Reader {
 public:
  Reader(std::string source, std::string text) : source_(std::move(source)), text_(std::move(text)) {}

  [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& what) const {
    std::string dotted;
    for (const auto& p : path) dotted += (dotted.empty() ? "" : ".") + p;
    const int line = locate_line(text_, path);
    std::ostringstream msg;
    msg << source_;
    if (line > 0) msg << ":" << line;
    msg << ": " << (dotted.empty() ? "<root>" : dotted) << ": " << what;
    throw LocatedConfigError(msg.str());
  }

  void check_keys(const json& obj, const std::vector<std::string>& path, const std::set<std::string>& allowed) const {
    if (!obj.is_object()) fail(path, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it)
      if (!allowed.count(it.key())) {
        auto p = path;
        p.push_back(it.key());
        fail(p, "unknown key");
      }
  }

  template <class T>
  T get(const json& obj, const std::vector<std::string>& path, const std::string& key, T fallback) const {
    if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
    auto p = path;
    p.push_back(key);
    const json& v = obj.at(key);
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) fail(p, "expected true or false");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) fail(p, "expected an integer");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) fail(p, "expected a number");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) fail(p, "expected a string");
      }
      return v.get<T>();
    } catch (const json::exception& e) {
      fail(p, e.what());
    }
  }

  std::vector<double> grid(const json& obj, const std::vector<std::string>& path, const std::string& key,
                           std::vector<double> fallback) const {
    if (!obj.contains(key)) return fallback;
    auto p = path;
    p.push_back(key);
    const json& v = obj.at(key);
    std::vector<double> out;
    if (v.is_array()) {
      for (const auto& x : v) {
        if (!x.is_number()) fail(p, "grid entries must be numbers");
        out.push_back(x.get<double>());
      }
    } else if (v.is_object()) {
      check_keys(v, p, {"start", "stop", "step"});
      const double start = get<double>(v, p, "start", 0.0);
      const double stop = get<double>(v, p, "stop", 0.0);
      const double step = get<double>(v, p, "step", 0.0);
      try {
        out = linear_grid(start, stop, step);
      } catch (const ConfigError& e) {
        fail(p, e.what());
      }
    } else {
      fail(p, "expected a list or {start, stop, step}");
    }
    if (out.empty()) fail(p, "grid is empty");
    for (double x : out)
      if (!(x > 0.0)) fail(p, "durations must be positive");
    return out;
  }

  std::vector<int> ints(const json& obj, const std::vector<std::string>& path, const std::string& key,
                        std::vector<int> fallback) const {
    if (!obj.contains(key)) return fallback;
    auto p = path;
    p.push_back(key);
    const json& v = obj.at(key);
    if (!v.is_array() || v.empty()) fail(p, "expected a non-empty list of integers");
    std::vector<int> out;
    for (const auto& x : v) {
      if (!x.is_number_integer()) fail(p, "expected integers");
      out.push_back(x.get<int>());
    }
    return out;
  }

  const std::string& text() const { return text_; }

 private:
  std::string source_;
  std::string text_;
};

}  // namespace detail

/// Parse a configuration document; source names the file in messages.
inline RunConfig parse_config(const std::string& text, const std::string& source = "config") {
  using nlohmann::json;
  detail::Reader rd(source, text);
  json root;
  try {
    root = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    const auto byte = static_cast<long>(e.byte);
    const long upto = std::min<long>(byte > 0 ? byte - 1 : 0, static_cast<long>(text.size()));
    const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + upto, '\n'));
    throw ConfigError(source + ":" + std::to_string(line) + ": malformed JSON: " + e.what());
  }
  if (!root.is_object()) rd.fail({}, "top level must be an object");
  rd.check_keys(root, {}, {"chain", "interaction", "pulse", "decay", "protocol", "c_nu", "seed", "spectrum",
                           "evolve", "sweep", "fit_c", "thermal", "transfer"});
  const json empty = json::object();
  auto section = [&](const char* name) -> const json& {
    if (!root.contains(name)) return empty;
    if (!root.at(name).is_object()) rd.fail({name}, "expected an object");
    return root.at(name);
  };

  using P = PaperParameters;
  RunConfig rc;
  const json& jc = section("chain");
  rd.check_keys(jc, {"chain"}, {"n_atoms", "spacing_um"});
  const json& ji = section("interaction");
  rd.check_keys(ji, {"interaction"}, {"b_mhz", "c6_mhz_um6", "lambda", "range_cutoff"});
  const json& jp = section("pulse");
  rd.check_keys(jp, {"pulse"}, {"omega0_mhz", "delta0_mhz", "tau_us", "sigma_us"});
  const json& jd = section("decay");
  rd.check_keys(jd, {"decay"}, {"gamma_r_khz", "gamma_rp_khz"});
  const json& jr = section("protocol");
  rd.check_keys(jr, {"protocol"}, {"model", "dt_us", "steps_per_pulse", "include_decay"});

  auto guarded = [&](const std::vector<std::string>& path, auto&& make) {
    try {
      return make();
    } catch (const detail::LocatedConfigError&) {
      throw;
    } catch (const std::exception& e) {
      rd.fail(path, e.what());
    }
  };

  const ChainConfig chain = guarded({"chain"}, [&] {
    return ChainConfig(rd.get<int>(jc, {"chain"}, "n_atoms", 5), rd.get<double>(jc, {"chain"}, "spacing_um", P::spacing_um));
  });
  const InteractionConfig inter = guarded({"interaction"}, [&] {
    const double lambda = rd.get<double>(ji, {"interaction"}, "lambda", 1.0);
    std::optional<int> cutoff;
    if (ji.contains("range_cutoff") && !ji.at("range_cutoff").is_null())
      cutoff = rd.get<int>(ji, {"interaction"}, "range_cutoff", 0);
    if (ji.contains("b_mhz") && ji.contains("c6_mhz_um6"))
      rd.fail({"interaction", "c6_mhz_um6"}, "give either b_mhz or c6_mhz_um6, not both");
    if (ji.contains("c6_mhz_um6"))
      return InteractionConfig(two_pi * rd.get<double>(ji, {"interaction"}, "c6_mhz_um6", 0.0), chain.spacing_um(),
                               lambda, cutoff);
    return InteractionConfig::from_nearest_neighbor(
        Frequency::from_mhz(rd.get<double>(ji, {"interaction"}, "b_mhz", P::b_mhz)), chain.spacing_um(), lambda, cutoff);
  });
  const PulseProfile pulse = guarded({"pulse"}, [&] {
    std::optional<double> sigma;
    if (jp.contains("sigma_us")) sigma = rd.get<double>(jp, {"pulse"}, "sigma_us", 0.0);
    return PulseProfile(Frequency::from_mhz(rd.get<double>(jp, {"pulse"}, "omega0_mhz", P::omega0_mhz)),
                        Frequency::from_mhz(rd.get<double>(jp, {"pulse"}, "delta0_mhz", P::delta0_mhz)),
                        rd.get<double>(jp, {"pulse"}, "tau_us", 1.0), sigma);
  });
  const DecayConfig decay = guarded({"decay"}, [&] {
    return DecayConfig(Frequency::from_khz(rd.get<double>(jd, {"decay"}, "gamma_r_khz", P::gamma_khz)),
                       Frequency::from_khz(rd.get<double>(jd, {"decay"}, "gamma_rp_khz", P::gamma_khz)));
  });
  rc.protocol = guarded({"protocol"}, [&] {
    const ModelKind model = parse_model_kind(rd.get<std::string>(jr, {"protocol"}, "model", "vdw"));
    std::optional<double> dt;
    if (jr.contains("dt_us") && jr.contains("steps_per_pulse"))
      rd.fail({"protocol", "steps_per_pulse"}, "give either dt_us or steps_per_pulse, not both");
    if (jr.contains("dt_us")) dt = rd.get<double>(jr, {"protocol"}, "dt_us", 0.0);
    if (jr.contains("steps_per_pulse")) {
      const int steps = rd.get<int>(jr, {"protocol"}, "steps_per_pulse", 0);
      if (steps < 1) rd.fail({"protocol", "steps_per_pulse"}, "must be positive");
      dt = pulse.tau() / steps;
    }
    return ProtocolConfig(chain, inter, pulse, decay, model, dt, rd.get<bool>(jr, {"protocol"}, "include_decay", true));
  });

  if (root.contains("c_nu")) {
    const json& jn = root.at("c_nu");
    if (!jn.is_object()) rd.fail({"c_nu"}, "expected an object mapping nu to c");
    rc.c_nu.clear();
    for (auto it = jn.begin(); it != jn.end(); ++it) {
      int nu = 0;
      try {
        std::size_t used = 0;
        nu = std::stoi(it.key(), &used);
        if (used != it.key().size()) throw std::invalid_argument("trailing characters");
      } catch (const std::exception&) {
        rd.fail({"c_nu", it.key()}, "keys must be integers");
      }
      const double c = rd.get<double>(jn, {"c_nu"}, it.key(), 0.0);
      if (!(c > 0.0)) rd.fail({"c_nu", it.key()}, "must be positive");
      rc.c_nu[nu] = c;
    }
  }
  if (root.contains("seed")) {
    if (!root.at("seed").is_number_unsigned()) rd.fail({"seed"}, "expected a non-negative integer");
    rc.seed = root.at("seed").get<std::uint64_t>();
  }

  const json& js = section("spectrum");
  rd.check_keys(js, {"spectrum"}, {"nu", "grid", "follow_envelope"});
  rc.spectrum.nu = rd.get<int>(js, {"spectrum"}, "nu", rc.spectrum.nu);
  rc.spectrum.grid = rd.get<int>(js, {"spectrum"}, "grid", rc.spectrum.grid);
  rc.spectrum.follow_envelope = rd.get<bool>(js, {"spectrum"}, "follow_envelope", false);
  if (rc.spectrum.nu < 1 || rc.spectrum.nu > 12) rd.fail({"spectrum", "nu"}, "must be in 1..12");
  if (rc.spectrum.grid < 3) rd.fail({"spectrum", "grid"}, "must be >= 3");

  const json& je = section("evolve");
  rd.check_keys(je, {"evolve"}, {"nu", "output_every"});
  rc.evolve.nu = rd.get<int>(je, {"evolve"}, "nu", rc.evolve.nu);
  rc.evolve.output_every = rd.get<int>(je, {"evolve"}, "output_every", rc.evolve.output_every);
  if (rc.evolve.nu < 1 || rc.evolve.nu > 12) rd.fail({"evolve", "nu"}, "must be in 1..12");
  if (rc.evolve.output_every < 1) rd.fail({"evolve", "output_every"}, "must be >= 1");

  const json& jw = section("sweep");
  rd.check_keys(jw, {"sweep"}, {"n_atoms", "tau_us"});
  rc.sweep.n_atoms = rd.ints(jw, {"sweep"}, "n_atoms", rc.sweep.n_atoms);
  rc.sweep.tau_us = rd.grid(jw, {"sweep"}, "tau_us", default_sweep_taus());
  for (int n : rc.sweep.n_atoms)
    if (n < 3 || n > 10) rd.fail({"sweep", "n_atoms"}, "atom counts must be in 3..10");

  const json& jf = section("fit_c");
  rd.check_keys(jf, {"fit_c"}, {"nu", "tau_us"});
  rc.fit_c.nu = rd.ints(jf, {"fit_c"}, "nu", rc.fit_c.nu);
  rc.fit_c.tau_us = rd.grid(jf, {"fit_c"}, "tau_us", default_fit_taus());
  for (int n : rc.fit_c.nu)
    if (n < 1 || n > 11 || n % 2 == 0) rd.fail({"fit_c", "nu"}, "entries must be odd and <= 11");

  const json& jt = section("thermal");
  rd.check_keys(jt, {"thermal"}, {"temperature_uk", "trials", "position_sigma_um", "mass_kg"});
  rc.thermal.temperature_uk = rd.get<double>(jt, {"thermal"}, "temperature_uk", rc.thermal.temperature_uk);
  rc.thermal.trials = rd.get<int>(jt, {"thermal"}, "trials", rc.thermal.trials);
  rc.thermal.position_sigma_um = rd.get<double>(jt, {"thermal"}, "position_sigma_um", 0.0);
  rc.thermal.mass_kg = rd.get<double>(jt, {"thermal"}, "mass_kg", rc.thermal.mass_kg);
  if (rc.thermal.temperature_uk < 0.0) rd.fail({"thermal", "temperature_uk"}, "must be non-negative");
  if (rc.thermal.trials < 1) rd.fail({"thermal", "trials"}, "must be >= 1");
  if (rc.thermal.position_sigma_um < 0.0) rd.fail({"thermal", "position_sigma_um"}, "must be non-negative");
  if (!(rc.thermal.mass_kg > 0.0)) rd.fail({"thermal", "mass_kg"}, "must be positive");

  const json& jx = section("transfer");
  rd.check_keys(jx, {"transfer"}, {"omega_sd_mhz", "b_prime_mhz"});
  rc.transfer.omega_sd_mhz = rd.get<double>(jx, {"transfer"}, "omega_sd_mhz", rc.transfer.omega_sd_mhz);
  if (jx.contains("b_prime_mhz")) rc.transfer.b_prime_mhz = rd.get<double>(jx, {"transfer"}, "b_prime_mhz", 0.0);
  if (rc.transfer.omega_sd_mhz == 0.0) rd.fail({"transfer", "omega_sd_mhz"}, "must be nonzero");
  return rc;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open configuration file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

}  // namespace afmgate
