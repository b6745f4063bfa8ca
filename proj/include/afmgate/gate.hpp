#pragma once

// Two-qubit gate from four protocol runs, average fidelity, and the
// closed-form error model (decay, Landau-Zener leakage, optimal duration).

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "afmgate/errors.hpp"
#include "afmgate/evolution.hpp"
#include "afmgate/model.hpp"
#include "afmgate/parallel.hpp"

namespace afmgate {

using GateDiagonal = Eigen::Vector4cd;  // |00>, |01>, |10>, |11>

/// CZ = diag(1,1,1,-1) for odd N; for even N the protocol realises CZ up to
/// qubit flips, diag(-1,1,1,1).
inline GateDiagonal gate_target(int n_atoms) {
  GateDiagonal t;
  if (n_atoms % 2) t << 1.0, 1.0, 1.0, -1.0;
  else t << -1.0, 1.0, 1.0, 1.0;
  return t;
}

/// F = (Tr M M^dagger + |Tr M|^2) / 20 with M = target^dagger U (both diagonal).
inline double average_fidelity(const GateDiagonal& u, const GateDiagonal& target) {
  for (int i = 0; i < 4; ++i)
    if (std::abs(u[i]) > 1.0 + 1e-9) throw DomainError("gate entries must satisfy |u| <= 1");
  const GateDiagonal m = target.conjugate().cwiseProduct(u);
  const double f = (m.squaredNorm() + std::norm(m.sum())) / 20.0;
  return std::clamp(f, 0.0, 1.0);
}

inline double average_fidelity(const GateDiagonal& u) { return average_fidelity(u, gate_target(3)); }

inline double average_fidelity(const Eigen::Matrix4cd& u, const GateDiagonal& target) {
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (i != j && u(i, j) != cplx(0.0)) throw DomainError("gate matrix must be diagonal");
  return average_fidelity(GateDiagonal(u.diagonal()), target);
}

struct GateReport {
  int n_atoms = 0;
  GateDiagonal per_input;        // raw <G_nu|psi(tau_tot)> per input
  GateDiagonal u;                // per_input with the |01> phase divided out
  cplx global_phase_removed;     // the unit factor divided out
  double fidelity = 0.0;
  double infidelity = 0.0;

  Eigen::Matrix4cd u_matrix() const { return u.asDiagonal(); }
};

/// Active chain of one gate input: atoms first..first+nu-1 (0-based) of the N-atom chain.
struct GateInput {
  int first_atom;
  int nu;
};

inline std::array<GateInput, 4> gate_inputs(int n_atoms) {
  return {GateInput{1, n_atoms - 2}, GateInput{1, n_atoms - 1}, GateInput{0, n_atoms - 1},
          GateInput{0, n_atoms}};
}

struct GateOptions {
  int jobs = 1;
  /// Optional atomic motion for an input's active atoms (thermal runs).
  std::function<std::optional<AtomMotion>(const GateInput&)> motion;
  /// Check the |01>/|10> agreement (disabled for asymmetric motion).
  bool check_mirror = true;
};

inline GateReport gate_from_amplitudes(int n_atoms, const GateDiagonal& amps) {
  GateReport r;
  r.n_atoms = n_atoms;
  r.per_input = amps;
  const double mag = std::abs(amps[1]);
  r.global_phase_removed = mag > 0.0 ? amps[1] / mag : cplx(1.0);
  r.u = amps / r.global_phase_removed;
  r.fidelity = average_fidelity(r.u, gate_target(n_atoms));
  r.infidelity = 1.0 - r.fidelity;
  return r;
}

inline GateReport assemble_gate(int n_atoms, const ProtocolConfig& cfg, const GateOptions& opt = {}) {
  if (n_atoms < 3) throw DomainError("gate needs N >= 3");
  const auto inputs = gate_inputs(n_atoms);
  auto amps = parallel_map(4, opt.jobs, [&](std::size_t i) {
    RunOptions ro;
    ro.observables = false;
    ro.phases = false;
    ro.sample_every = cfg.steps_per_pulse();
    if (opt.motion) ro.motion = opt.motion(inputs[i]);
    return run_protocol(inputs[i].nu, cfg, ro).ground_overlap;
  });
  GateDiagonal d;
  for (int i = 0; i < 4; ++i) d[i] = amps[static_cast<std::size_t>(i)];
  if (opt.check_mirror && std::abs(d[1] - d[2]) > 1e-8)
    throw NumericalError("inputs |01> and |10> disagree; chain inversion symmetry broken");
  return gate_from_amplitudes(n_atoms, d);
}

// ---------------------------------------------------------------------------
// Closed-form error model.

using CTable = std::map<int, double>;

inline CTable paper_c_table() { return {{3, 0.43}, {5, 0.28}, {7, 0.19}}; }

/// E_decay = 1 - exp(-nu_bar Gamma tau_tot / 2).
inline double decay_error(int n_atoms, Frequency gamma_mean, double tau_tot) {
  if (gamma_mean.value() < 0.0 || tau_tot < 0.0) throw DomainError("decay inputs must be non-negative");
  return -std::expm1(-0.5 * mean_rydberg_number(n_atoms) * gamma_mean.value() * tau_tot);
}

/// p_LZ = exp(-2 pi (gap/2)^2 / (2 Delta0 / tau)).
inline double lz_probability(Frequency gap, Frequency delta0, double tau) {
  if (!(delta0.value() > 0.0) || tau < 0.0) throw DomainError("Landau-Zener inputs must be positive");
  const double half = 0.5 * gap.value();
  return std::exp(-2.0 * std::numbers::pi * half * half * tau / (2.0 * delta0.value()));
}

/// exp(-c Omega0^2 tau / Delta0), the same exponent with c = pi kappa^2 / 4.
inline double lz_probability_c(double c, const PulseProfile& p) {
  const double w = p.omega0().value();
  return std::exp(-c * w * w * p.tau() / p.delta0().value());
}

inline double kappa_to_c(double kappa) { return std::numbers::pi * kappa * kappa / 4.0; }

/// Dominant leakage channel: (mu, nu) = (1, N) for odd N and (2, N - 1) for even N.
struct LeakageChannel {
  double mu;
  int nu;
};

inline LeakageChannel dominant_channel(int n_atoms) {
  return n_atoms % 2 ? LeakageChannel{1.0, n_atoms} : LeakageChannel{2.0, n_atoms - 1};
}

inline double lookup_c(const CTable& c, int nu) {
  auto it = c.find(nu);
  if (it == c.end()) throw ConfigError("no Landau-Zener constant c_" + std::to_string(nu) + " available");
  return it->second;
}

struct LeakageEstimate {
  double dominant = 0.0;
  /// (4/2^2)[p(N-2) + 2 p(N-1) + p(N)]; empty unless c is known for all three nu.
  std::optional<double> full;
};

inline LeakageEstimate leakage_error(int n_atoms, const CTable& c, const PulseProfile& pulse) {
  const auto ch = dominant_channel(n_atoms);
  LeakageEstimate e;
  e.dominant = std::min(1.0, ch.mu * lz_probability_c(lookup_c(c, ch.nu), pulse));
  const int nus[3] = {n_atoms - 2, n_atoms - 1, n_atoms};
  if (c.count(nus[0]) && c.count(nus[1]) && c.count(nus[2])) {
    const double sum = lz_probability_c(c.at(nus[0]), pulse) + 2.0 * lz_probability_c(c.at(nus[1]), pulse) +
                       lz_probability_c(c.at(nus[2]), pulse);
    e.full = std::min(1.0, 4.0 / 4.0 * sum);
  }
  return e;
}

struct OptimalDuration {
  double tau_opt;
  double e_min;
};

/// tau_opt = (1/c)(Delta0/Omega0^2) ln(mu c Omega0^2 / (nu_bar Gamma Delta0)),
/// E_min = (nu_bar/c)(Gamma Delta0/Omega0^2)[1 + ln(...)], with tau_tot = 2 tau.
inline OptimalDuration optimal_tau(int n_atoms, const CTable& c, Frequency omega0, Frequency delta0,
                                   Frequency gamma) {
  const auto ch = dominant_channel(n_atoms);
  const double cn = lookup_c(c, ch.nu);
  const double nub = mean_rydberg_number(n_atoms);
  const double w2 = omega0.value() * omega0.value();
  const double d0 = delta0.value();
  const double g = gamma.value();
  if (!(g > 0.0)) throw RegimeError("optimal duration diverges without decay");
  const double arg = ch.mu * cn * w2 / (nub * g * d0);
  if (!(arg > 1.0)) throw RegimeError("decay dominates at every pulse duration (log argument <= 1)");
  const double l = std::log(arg);
  return {d0 / (cn * w2) * l, nub * g * d0 / (cn * w2) * (1.0 + l)};
}

/// E_min with Omega0 = lambda1 B, Delta0 = lambda2 B.
inline double e_min_vs_interaction(int n_atoms, const CTable& c, double lambda1, double lambda2,
                                   Frequency gamma, Frequency b) {
  if (!(lambda1 > 0.0 && lambda1 < lambda2 && lambda2 < 1.0))
    throw DomainError("need 0 < lambda1 < lambda2 < 1");
  const auto ch = dominant_channel(n_atoms);
  const double cn = lookup_c(c, ch.nu);
  const double nub = mean_rydberg_number(n_atoms);
  const double ratio = gamma.value() / std::abs(b.value());
  const double arg = ch.mu * cn * lambda1 * lambda1 / (nub * lambda2) / ratio;
  if (!(arg > 1.0)) throw RegimeError("decay dominates at every pulse duration (log argument <= 1)");
  return nub * lambda2 / (cn * lambda1 * lambda1) * ratio * (1.0 + std::log(arg));
}

/// Large-N form: C N^3 (Gamma/B)[1 + ln(4 B / (C N^3 Gamma))] with B = C6 N^6 / L^6
/// and C = lambda2 / (2 c lambda1^2), c the asymptotic constant in c_N = c / N^2.
inline double scaling_emin(double length_um, int n_atoms, double c6, Frequency gamma, double c,
                           double lambda1, double lambda2, bool with_log = true) {
  if (!(length_um > 0.0) || n_atoms < 2 || !(c6 != 0.0)) throw DomainError("invalid scaling inputs");
  const double big_c = lambda2 / (2.0 * c * lambda1 * lambda1);
  const double n3 = std::pow(double(n_atoms), 3);
  const double b = std::abs(c6) * std::pow(double(n_atoms), 6) / std::pow(length_um, 6);
  const double base = big_c * n3 * gamma.value() / b;
  return with_log ? base * (1.0 + std::log(4.0 * b / (big_c * n3 * gamma.value()))) : base;
}

/// |(B - B') / (2^6 Omega_SD)|^2.
inline double transfer_error(Frequency b, Frequency b_prime, Frequency omega_sd) {
  if (omega_sd.value() == 0.0) throw DomainError("two-photon Rabi frequency must be nonzero");
  const double x = (b.value() - b_prime.value()) / (64.0 * omega_sd.value());
  return x * x;
}

/// delta_SD = 2 (B_2 - B_2').
inline Frequency compensating_detuning(Frequency b2, Frequency b2_prime) { return 2.0 * (b2 - b2_prime); }

struct ErrorModel {
  int n_atoms = 0;
  CTable c_nu;
  double mu = 0.0;
  int nu_dominant = 0;
  double nu_bar = 0.0;
  double gamma = 0.0;  // rad/us
  double e_decay = 0.0;
  double e_leakage = 0.0;
  std::optional<double> e_leakage_full;
  std::optional<double> tau_opt;
  std::optional<double> e_min;
  double lambda1 = 0.0;
  double lambda2 = 0.0;

  double total() const { return e_decay + e_leakage; }
};

/// Error model of the configured protocol; E_decay is zero when decay is off.
inline ErrorModel error_model(int n_atoms, const ProtocolConfig& cfg, const CTable& c) {
  ErrorModel m;
  m.n_atoms = n_atoms;
  m.c_nu = c;
  const auto ch = dominant_channel(n_atoms);
  m.mu = ch.mu;
  m.nu_dominant = ch.nu;
  m.nu_bar = mean_rydberg_number(n_atoms);
  const double tau = cfg.pulse().tau();
  const double tau2 = cfg.second_pulse().tau();
  const Frequency g = cfg.include_decay() ? cfg.decay().gamma_mean(tau, tau2) : Frequency{};
  m.gamma = g.value();
  m.e_decay = decay_error(n_atoms, g, tau + tau2);
  const auto leak = leakage_error(n_atoms, c, cfg.pulse());
  m.e_leakage = leak.dominant;
  m.e_leakage_full = leak.full;
  try {
    const auto opt = optimal_tau(n_atoms, c, cfg.pulse().omega0(), cfg.pulse().delta0(), g);
    m.tau_opt = opt.tau_opt;
    m.e_min = opt.e_min;
  } catch (const RegimeError&) {
  }
  const double b = std::abs(cfg.interaction().b_nn().value());
  if (b > 0.0) {
    m.lambda1 = cfg.pulse().omega0().value() / b;
    m.lambda2 = cfg.pulse().delta0().value() / b;
  }
  return m;
}

// ---------------------------------------------------------------------------
// Landau-Zener constant from numerical leakage.

struct CFitPoint {
  double tau;
  double x;       // Omega0^2 tau / Delta0
  double e_leak;  // 1 - |<G|psi(tau_tot)>|^2
  bool used;
};

struct CFit {
  int nu = 0;
  double c = 0.0;
  double intercept = 0.0;  // ln of the prefactor
  double r2 = 0.0;
  std::vector<CFitPoint> points;
};

inline constexpr double fit_window_low = 1e-4;
inline constexpr double fit_window_high = 0.3;

/// Slope of ln E_leak against Omega0^2 tau / Delta0 over the points with
/// E_leak inside (1e-4, 0.3). cfg supplies everything except tau; decay is ignored.
inline CFit fit_c_nu(int nu, const ProtocolConfig& cfg, const std::vector<double>& tau_grid, int jobs = 1) {
  if (nu % 2 == 0) throw DomainError("Landau-Zener constants are fitted for odd nu");
  const auto& p = cfg.pulse();
  const int steps = cfg.steps_per_pulse();
  auto pts = parallel_map(tau_grid.size(), jobs, [&](std::size_t i) {
    const double tau = tau_grid[i];
    const PulseProfile pi(p.omega0(), p.delta0(), tau);
    const auto c = cfg.with_decay(false).with_pulse(pi, tau / steps);
    const cplx g = parity_roundtrip_check(nu, c);
    const double w = p.omega0().value();
    return CFitPoint{tau, w * w * tau / p.delta0().value(), 1.0 - std::norm(g), false};
  });
  CFit fit;
  fit.nu = nu;
  std::vector<double> xs, ys;
  for (auto& pt : pts) {
    pt.used = pt.e_leak > fit_window_low && pt.e_leak < fit_window_high;
    if (pt.used) {
      xs.push_back(pt.x);
      ys.push_back(std::log(pt.e_leak));
    }
  }
  fit.points = pts;
  if (xs.size() < 3) throw FitQualityError("fewer than 3 durations inside the leakage fit window");
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i], my += ys[i];
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  fit.c = -slope;
  fit.intercept = my - slope * mx;
  fit.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  if (fit.r2 < 0.95 || !(fit.c > 0.0))
    throw FitQualityError("leakage fit for nu = " + std::to_string(nu) + " is poor (R^2 = " +
                          std::to_string(fit.r2) + ")");
  return fit;
}

// ---------------------------------------------------------------------------

struct SweepRow {
  int n_atoms;
  double tau;
  double e_numeric;
  double fidelity;
  double e_decay;
  double e_leakage;
  double e_model;
};

inline SweepRow sweep_point(int n_atoms, const ProtocolConfig& base, double tau, const CTable& c) {
  const auto& p = base.pulse();
  const PulseProfile pt(p.omega0(), p.delta0(), tau);
  const auto cfg = base.with_pulse(pt, tau / base.steps_per_pulse());
  const auto g = assemble_gate(n_atoms, cfg);
  const auto m = error_model(n_atoms, cfg, c);
  return {n_atoms, tau, g.infidelity, g.fidelity, m.e_decay, m.e_leakage, m.total()};
}

}  // namespace afmgate
