// afmgate command-line front end.
//
// Every subcommand resolves a RunConfig (defaults, then --config, then flags),
// computes in memory and writes its files only when everything succeeded.
// Exit codes: 0 ok, 2 configuration, 3 runtime, 4 fit quality.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "afmgate/afmgate.hpp"

#ifndef AFMGATE_GIT_DESCRIBE
#define AFMGATE_GIT_DESCRIBE "unknown"
#endif

using namespace afmgate;
using ojson = nlohmann::ordered_json;

namespace {

constexpr int exit_config = 2;
constexpr int exit_runtime = 3;
constexpr int exit_fit = 4;

struct Globals {
  std::string config_path;
  std::string out_dir = "afmgate_out";
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  std::optional<std::string> model;
  bool dump_matrix = false;
};

struct ThermalFlags {
  std::optional<double> temp_uk;
  std::optional<int> trials;
  std::optional<double> tau_us;
};

double mhz(double rad_per_us) { return Frequency::from_rad_per_us(rad_per_us).mhz(); }

RunConfig resolve(const Globals& g) {
  RunConfig rc = g.config_path.empty() ? parse_config("{}", "<defaults>") : load_config(g.config_path);
  if (g.seed) rc.seed = *g.seed;
  if (g.model) {
    try {
      rc.protocol = rc.protocol.with_model(parse_model_kind(*g.model));
    } catch (const std::exception& e) {
      throw ConfigError(std::string("--model: ") + e.what());
    }
  }
  if (g.jobs < 0) throw ConfigError("--jobs must be >= 0 (0 = all cores)");
  return rc;
}

/// Resolved parameters, repeated at the top of every CSV.
void describe(CsvTable& t, const RunConfig& rc) {
  const auto& p = rc.protocol;
  t.comment("model", std::string(to_string(p.model())));
  t.comment("n_atoms", std::to_string(p.chain().n_atoms()));
  t.comment("spacing_um", p.chain().spacing_um());
  t.comment("b_mhz", p.interaction().b_nn().mhz());
  t.comment("c6_mhz_um6", mhz(p.interaction().c6()));
  t.comment("lambda", p.interaction().lambda());
  t.comment("range_cutoff", p.interaction().range_cutoff() ? std::to_string(*p.interaction().range_cutoff()) : "none");
  t.comment("omega0_mhz", p.pulse().omega0().mhz());
  t.comment("delta0_mhz", p.pulse().delta0().mhz());
  t.comment("tau_us", p.pulse().tau());
  t.comment("sigma_us", p.pulse().sigma());
  t.comment("gamma_r_khz", p.decay().gamma_r().khz());
  t.comment("gamma_rp_khz", p.decay().gamma_rp().khz());
  t.comment("include_decay", p.include_decay() ? "true" : "false");
  t.comment("steps_per_pulse", std::to_string(p.steps_per_pulse()));
  t.comment("dt_us", p.dt());
  t.comment("seed", std::to_string(rc.seed));
}

ojson cplx_json(cplx z) { return ojson::array({z.real(), z.imag()}); }

std::string matrix_csv(const OperatorMatrix& h, const Basis& basis) {
  CsvTable t({"row", "col", "row_state", "col_state", "re_mhz", "im_mhz"});
  t.comment("dim", std::to_string(h.dim()));
  for (Eigen::Index i = 0; i < h.dim(); ++i)
    for (Eigen::Index j = 0; j < h.dim(); ++j) {
      const cplx z = h.entries(i, j);
      if (z == cplx(0.0)) continue;
      t.row() << static_cast<long>(i) << static_cast<long>(j)
              << to_bitstring(basis[static_cast<std::size_t>(i)], basis.nu())
              << to_bitstring(basis[static_cast<std::size_t>(j)], basis.nu()) << mhz(z.real()) << mhz(z.imag());
    }
  return t.str();
}

// ---------------------------------------------------------------------------

void cmd_spectrum(const RunConfig& rc, const Globals& g, OutputSet& out) {
  const auto& p = rc.protocol;
  const int nu = rc.spectrum.nu;
  const ModelBuilder model(p.model(), nu, p.interaction());
  ScanOptions so;
  so.follow_envelope = rc.spectrum.follow_envelope;
  so.jobs = g.jobs;
  const auto scan = scan_spectrum(model, p.pulse(), rc.spectrum.grid, so);

  CsvTable t({"delta_mhz", "omega_mhz", "k", "energy_mhz", "symmetry", "predecessor", "eta_1k", "eta_mk"});
  describe(t, rc);
  t.comment("nu", std::to_string(nu));
  t.comment("grid", std::to_string(rc.spectrum.grid));
  t.comment("follow_envelope", so.follow_envelope ? "true" : "false");
  auto opt = [](const std::optional<double>& x) { return x ? fmt_num(*x) : std::string(); };
  for (std::size_t i = 0; i < scan.points(); ++i)
    for (Eigen::Index k = 0; k < scan.levels(); ++k) {
      const auto kk = static_cast<std::size_t>(k);
      t.row() << mhz(scan.delta_grid[i]) << mhz(scan.omega_grid[i]) << static_cast<long>(k + 1)
              << mhz(scan.eigenvalues[i][k]) << to_string(scan.symmetry[i][kk])
              << static_cast<long>(scan.predecessor[i][kk] + 1) << opt(scan.eta_first[i][kk])
              << opt(scan.eta_last[i][kk]);
    }
  out.add("spectrum.csv", t.str());

  ojson s;
  s["nu"] = nu;
  s["model"] = std::string(to_string(p.model()));
  s["dim"] = model.dim();
  try {
    const auto gap = min_gap(model, p.pulse());
    s["min_gap"] = {{"partner_level", gap.partner_index},
                    {"gap_mhz", gap.gap / (2.0 * std::numbers::pi)},
                    {"delta_at_min_mhz", mhz(gap.delta_at_min)},
                    {"kappa", gap.kappa}};
  } catch (const DomainError& e) {
    s["min_gap"] = nullptr;
  }
  out.add("summary.json", s.dump(2) + "\n");

  if (g.dump_matrix) out.add("matrix.csv", matrix_csv(model.hamiltonian(p.pulse().omega0(), Frequency{}), model.basis()));
}

void cmd_evolve(const RunConfig& rc, const Globals& g, OutputSet& out) {
  const auto& p = rc.protocol;
  const int nu = rc.evolve.nu;
  const auto run = run_protocol(nu, p);
  const auto& tr = run.trajectory;
  const auto& ph = run.phases;

  std::vector<std::string> cols{"t_us", "segment", "norm"};
  for (const auto& n : tr.population_names) cols.push_back("P_" + n);
  for (const char* c : {"phi_total", "phi_dyn", "phi_geom", "phase_valid"}) cols.push_back(c);
  CsvTable t(cols);
  describe(t, rc);
  t.comment("nu", std::to_string(nu));
  t.comment("output_every", std::to_string(rc.evolve.output_every));
  const std::size_t n = tr.samples();
  const auto every = static_cast<std::size_t>(rc.evolve.output_every);
  std::size_t local = 0;  // sample index within the current segment
  for (std::size_t i = 0; i < n; ++i, ++local) {
    if (i > 0 && tr.segment[i] != tr.segment[i - 1]) local = 0;
    const bool last_of_segment = i + 1 == n || tr.segment[i] != tr.segment[i + 1];
    if (local % every != 0 && !last_of_segment) continue;
    auto& r = t.row();
    r << tr.times[i] << tr.segment[i] << tr.norm[i];
    for (const auto& pop : tr.populations) r << pop[i];
    r << ph.phi_total[i] << ph.phi_dynamical[i] << ph.phi_geometric[i] << (ph.valid[i] ? 1 : 0);
  }
  out.add("evolve.csv", t.str());

  ojson s;
  s["nu"] = nu;
  s["model"] = std::string(to_string(p.model()));
  s["final_norm"] = tr.norm.back();
  s["ground_overlap"] = cplx_json(run.ground_overlap);
  s["final_ground_population"] = std::norm(run.ground_overlap);
  s["phi_total_wrapped"] = wrap_phase(ph.final_total());
  s["phi_dyn"] = ph.final_dynamical();
  s["phi_geom_wrapped"] = wrap_phase(ph.final_geometric());
  out.add("summary.json", s.dump(2) + "\n");

  if (g.dump_matrix) {
    ChainDynamics dyn(p.model(), nu, p.interaction());
    const auto segs = protocol_segments(p);
    out.add("matrix.csv", matrix_csv(dyn.dense(segs[0], 0.5 * p.pulse().tau()), dyn.basis()));
  }
}

ojson error_model_json(const ErrorModel& m) {
  ojson j;
  j["mu"] = m.mu;
  j["nu_dominant"] = m.nu_dominant;
  j["nu_bar"] = m.nu_bar;
  j["gamma_khz"] = Frequency::from_rad_per_us(m.gamma).khz();
  j["e_decay"] = m.e_decay;
  j["e_leakage"] = m.e_leakage;
  j["e_leakage_all_channels"] = m.e_leakage_full ? ojson(*m.e_leakage_full) : ojson(nullptr);
  j["e_model"] = m.total();
  j["tau_opt_us"] = m.tau_opt ? ojson(*m.tau_opt) : ojson(nullptr);
  j["e_min"] = m.e_min ? ojson(*m.e_min) : ojson(nullptr);
  j["lambda1"] = m.lambda1;
  j["lambda2"] = m.lambda2;
  return j;
}

void cmd_gate(const RunConfig& rc, const Globals& g, OutputSet& out) {
  const auto& p = rc.protocol;
  const int n = p.chain().n_atoms();
  GateOptions go;
  go.jobs = g.jobs;
  const auto rep = assemble_gate(n, p, go);
  const auto labels = {"00", "01", "10", "11"};
  ojson j;
  j["n_atoms"] = n;
  j["model"] = std::string(to_string(p.model()));
  j["tau_us"] = p.pulse().tau();
  j["include_decay"] = p.include_decay();
  ojson u, raw, target;
  int i = 0;
  const auto tgt = gate_target(n);
  for (const char* l : labels) {
    u[l] = cplx_json(rep.u[i]);
    raw[l] = cplx_json(rep.per_input[i]);
    target[l] = cplx_json(tgt[i]);
    ++i;
  }
  j["u"] = u;
  j["amplitudes"] = raw;
  j["target"] = target;
  j["global_phase_removed"] = cplx_json(rep.global_phase_removed);
  j["fidelity"] = rep.fidelity;
  j["infidelity"] = rep.infidelity;
  try {
    j["error_model"] = error_model_json(error_model(n, p, rc.c_nu));
  } catch (const ConfigError&) {
    j["error_model"] = nullptr;  // no Landau-Zener constant for this N
  }
  out.add("gate.json", j.dump(2) + "\n");
}

void cmd_sweep(const RunConfig& rc, const Globals& g, OutputSet& out) {
  struct Job {
    int n;
    double tau;
  };
  std::vector<Job> jobs;
  for (int n : rc.sweep.n_atoms)
    for (double tau : rc.sweep.tau_us) jobs.push_back({n, tau});
  // Validate constants up front so a missing c_nu fails as a config error.
  for (int n : rc.sweep.n_atoms) lookup_c(rc.c_nu, dominant_channel(n).nu);
  const auto rows = parallel_map(jobs.size(), g.jobs, [&](std::size_t k) {
    return sweep_point(jobs[k].n, rc.protocol, jobs[k].tau, rc.c_nu);
  });

  CsvTable t({"n_atoms", "tau_us", "e_numeric", "fidelity", "e_decay", "e_leakage", "e_model"});
  describe(t, rc);
  for (const auto& r : rows) t.row() << r.n_atoms << r.tau << r.e_numeric << r.fidelity << r.e_decay << r.e_leakage << r.e_model;
  out.add("sweep.csv", t.str());

  ojson s = ojson::array();
  for (int n : rc.sweep.n_atoms) {
    const SweepRow* best = nullptr;
    for (const auto& r : rows)
      if (r.n_atoms == n && (!best || r.e_numeric < best->e_numeric)) best = &r;
    ojson e;
    e["n_atoms"] = n;
    e["tau_min_us"] = best->tau;
    e["e_min_numeric"] = best->e_numeric;
    e["fidelity_max"] = best->fidelity;
    const auto m = error_model(n, rc.protocol, rc.c_nu);
    e["tau_opt_us"] = m.tau_opt ? ojson(*m.tau_opt) : ojson(nullptr);
    e["e_min_model"] = m.e_min ? ojson(*m.e_min) : ojson(nullptr);
    s.push_back(e);
  }
  out.add("summary.json", s.dump(2) + "\n");
}

void cmd_thermal(RunConfig rc, const Globals& g, const ThermalFlags& f, OutputSet& out) {
  if (f.temp_uk) rc.thermal.temperature_uk = *f.temp_uk;
  if (f.trials) rc.thermal.trials = *f.trials;
  if (f.tau_us) {
    const auto& p = rc.protocol.pulse();
    const int steps = rc.protocol.steps_per_pulse();
    rc.protocol = rc.protocol.with_pulse(PulseProfile(p.omega0(), p.delta0(), *f.tau_us), *f.tau_us / steps);
  }
  if (rc.protocol.model() != ModelKind::FullVdw) throw ConfigError("thermal runs need --model vdw");
  const ThermalConfig th(rc.thermal.temperature_uk * 1e-6, rc.thermal.trials, rc.seed, rc.thermal.position_sigma_um,
                         rc.thermal.mass_kg);
  const int n = rc.protocol.chain().n_atoms();
  const auto rep = thermal_monte_carlo(n, rc.protocol, th, g.jobs);

  CsvTable t({"trial", "rejected", "delta_phi", "fidelity", "infidelity"});
  describe(t, rc);
  t.comment("temperature_uk", rc.thermal.temperature_uk);
  t.comment("trials", std::to_string(rc.thermal.trials));
  t.comment("position_sigma_um", rc.thermal.position_sigma_um);
  t.comment("mass_kg", rc.thermal.mass_kg);
  t.comment("v_th_um_per_us", th.v_th());
  double fsum = 0.0;
  for (std::size_t i = 0; i < rep.trials.size(); ++i) {
    const auto& tr = rep.trials[i];
    t.row() << i << tr.rejected << tr.delta_phi << tr.fidelity << 1.0 - tr.fidelity;
  }
  for (const auto& tr : rep.trials) fsum += tr.fidelity;
  t.row() << "summary" << rep.rejected << rep.delta_phi_mean_abs << fsum / static_cast<double>(rep.trials.size())
          << rep.fidelity_loss;
  out.add("thermal.csv", t.str());

  ojson s;
  s["n_atoms"] = n;
  s["tau_us"] = rc.protocol.pulse().tau();
  s["temperature_uk"] = rc.thermal.temperature_uk;
  s["trials"] = rep.trials.size();
  s["rejected_draws"] = rep.rejected;
  s["v_th_um_per_us"] = th.v_th();
  s["delta_phi_mean_abs"] = rep.delta_phi_mean_abs;
  s["delta_phi_rms"] = rep.delta_phi_rms;
  s["static_fidelity"] = rep.static_fidelity;
  s["fidelity_loss"] = rep.fidelity_loss;
  s["fidelity_loss_stderr"] = rep.fidelity_loss_stderr;
  s["dephasing_loss"] = rep.dephasing_loss;
  s["dephasing_loss_stderr"] = rep.dephasing_loss_stderr;
  s["analytic_delta_b2_khz"] = Frequency::from_rad_per_us(rep.analytic.delta_b2).khz();
  s["analytic_delta_phi"] = rep.analytic.delta_phi;
  out.add("summary.json", s.dump(2) + "\n");
}

void cmd_fit_c(const RunConfig& rc, const Globals& g, OutputSet& out) {
  const auto cfg = rc.protocol.with_decay(false);
  std::vector<CFit> fits;
  for (int nu : rc.fit_c.nu) fits.push_back(fit_c_nu(nu, cfg, rc.fit_c.tau_us, g.jobs));

  CsvTable t({"nu", "tau_us", "x", "e_leak", "used"});
  describe(t, rc);
  for (const auto& f : fits)
    for (const auto& pt : f.points) t.row() << f.nu << pt.tau << pt.x << pt.e_leak << (pt.used ? 1 : 0);
  out.add("fit_c.csv", t.str());

  const auto paper = paper_c_table();
  ojson s;
  for (const auto& f : fits) {
    ojson e;
    e["c"] = f.c;
    e["intercept"] = f.intercept;
    e["r2"] = f.r2;
    e["reference"] = paper.count(f.nu) ? ojson(paper.at(f.nu)) : ojson(nullptr);
    s[std::to_string(f.nu)] = e;
  }
  out.add("fit_c.json", s.dump(2) + "\n");
}

void cmd_basis_dump(const RunConfig& rc, const Globals& g, std::optional<int> nu_flag, OutputSet& out) {
  const int nu = nu_flag.value_or(rc.protocol.chain().n_atoms());
  const ModelBuilder model(rc.protocol.model(), nu, rc.protocol.interaction());
  const Basis& b = model.basis();
  CsvTable t({"index", "bitstring", "n_rydberg", "parity"});
  t.comment("nu", std::to_string(nu));
  t.comment("basis", b.constrained() ? "blockade" : "full");
  for (std::size_t i = 0; i < b.size(); ++i) t.row() << i << to_bitstring(b[i], nu) << rydberg_count(b[i]) << parity_sign(b[i]);
  out.add("basis.csv", t.str());
  if (g.dump_matrix)
    out.add("matrix.csv", matrix_csv(model.hamiltonian(rc.protocol.pulse().omega0(), Frequency{}), b));
}

void cmd_transfer(const RunConfig& rc, OutputSet& out) {
  const auto& inter = rc.protocol.interaction();
  const Frequency b = inter.b_nn();
  const Frequency bp = rc.transfer.b_prime_mhz ? Frequency::from_mhz(*rc.transfer.b_prime_mhz)
                                               : Frequency::from_rad_per_us(-inter.lambda() * b.value());
  const Frequency wsd = Frequency::from_mhz(rc.transfer.omega_sd_mhz);
  ojson j;
  j["b_mhz"] = b.mhz();
  j["b_prime_mhz"] = bp.mhz();
  j["omega_sd_mhz"] = wsd.mhz();
  j["transfer_error"] = transfer_error(b, bp, wsd);
  j["compensating_detuning_mhz"] = compensating_detuning(b / 64.0, bp / 64.0).mhz();
  out.add("transfer.json", j.dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rydberg-chain AFM gate simulator"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  ThermalFlags tf;
  std::optional<int> basis_nu;
  app.add_option("--config", g.config_path, "JSON configuration file");
  app.add_option("--out", g.out_dir, "output directory")->capture_default_str();
  app.add_option("--seed", g.seed, "RNG seed (overrides the config)");
  app.add_option("--jobs", g.jobs, "worker threads, 0 = all cores")->capture_default_str();
  app.add_option("--model", g.model, "pxp, vdw or corrections");
  app.add_flag("--dump-matrix", g.dump_matrix, "also write the Hamiltonian as matrix.csv");

  auto* spectrum = app.add_subcommand("spectrum", "eigenvalues, symmetry and coupling along the sweep");
  auto* evolve = app.add_subcommand("evolve", "populations and phases during the two-pulse protocol");
  auto* gate = app.add_subcommand("gate", "gate diagonal, fidelity and error model");
  auto* sweep = app.add_subcommand("sweep", "gate error against pulse duration");
  auto* thermal = app.add_subcommand("thermal", "Monte Carlo over thermal atomic motion");
  thermal->add_option("--temp-uK", tf.temp_uk, "temperature in microkelvin");
  thermal->add_option("--trials", tf.trials, "number of Monte Carlo trials");
  thermal->add_option("--tau-us", tf.tau_us, "pulse duration in microseconds");
  auto* fit = app.add_subcommand("fit-c", "fit Landau-Zener constants from numerical leakage");
  auto* basis = app.add_subcommand("basis-dump", "list the basis states of the model");
  basis->add_option("--nu", basis_nu, "number of atoms (default: chain length)");
  auto* transfer = app.add_subcommand("transfer-error", "r -> r' transfer error estimate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : exit_config;
  }

  auto* sub = app.get_subcommands().front();
  try {
    const RunConfig rc = resolve(g);
    OutputSet out(g.out_dir);
    if (sub == spectrum) cmd_spectrum(rc, g, out);
    else if (sub == evolve) cmd_evolve(rc, g, out);
    else if (sub == gate) cmd_gate(rc, g, out);
    else if (sub == sweep) cmd_sweep(rc, g, out);
    else if (sub == thermal) cmd_thermal(rc, g, tf, out);
    else if (sub == fit) cmd_fit_c(rc, g, out);
    else if (sub == basis) cmd_basis_dump(rc, g, basis_nu, out);
    else if (sub == transfer) cmd_transfer(rc, out);

    RunManifest m;
    m.command = sub->get_name();
    m.config_path = g.config_path;
    m.output_dir = g.out_dir;
    m.git_describe = AFMGATE_GIT_DESCRIBE;
    m.seed = rc.seed;
    m.timestamp = utc_timestamp();
    out.commit(m);
    std::cout << "wrote " << g.out_dir << "\n";
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const FitQualityError& e) {
    std::cerr << "fit quality: " << e.what() << "\n";
    return exit_fit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_runtime;
  }
}
