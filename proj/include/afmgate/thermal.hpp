#pragma once

// Thermal motion: ballistic atoms with Gaussian velocities, interactions
// recomputed from the instantaneous positions during the whole protocol.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

#include "afmgate/errors.hpp"
#include "afmgate/gate.hpp"
#include "afmgate/model.hpp"
#include "afmgate/parallel.hpp"
#include "afmgate/rng.hpp"

namespace afmgate {

inline constexpr double boltzmann_j_per_k = 1.380649e-23;
inline constexpr double rb87_mass_kg = 1.443160895e-25;

class ThermalConfig {
 public:
  ThermalConfig(double temperature_k, int trials, std::uint64_t seed, double position_sigma_um = 0.0,
                double mass_kg = rb87_mass_kg)
      : temperature_k_(temperature_k), mass_kg_(mass_kg), position_sigma_um_(position_sigma_um),
        trials_(trials), seed_(seed) {
    if (temperature_k < 0.0) throw ConfigError("temperature must be non-negative");
    if (!(mass_kg > 0.0)) throw ConfigError("atomic mass must be positive");
    if (position_sigma_um < 0.0) throw ConfigError("position spread must be non-negative");
    if (trials < 1) throw ConfigError("need at least one Monte Carlo trial");
  }

  double temperature_k() const { return temperature_k_; }
  double mass_kg() const { return mass_kg_; }
  double position_sigma_um() const { return position_sigma_um_; }
  int trials() const { return trials_; }
  std::uint64_t seed() const { return seed_; }

  /// sqrt(k_B T / m); m/s is numerically um/us.
  double v_th() const { return std::sqrt(boltzmann_j_per_k * temperature_k_ / mass_kg_); }

  ThermalConfig with_trials(int n) const {
    ThermalConfig c = *this;
    if (n < 1) throw ConfigError("need at least one Monte Carlo trial");
    c.trials_ = n;
    return c;
  }

 private:
  double temperature_k_;
  double mass_kg_;
  double position_sigma_um_;
  int trials_;
  std::uint64_t seed_;
};

/// Positions (um) and velocities (um/us) of all N atoms of the chain.
struct ThermalDraw {
  std::vector<double> x0;
  std::vector<double> v;
};

/// Draw for one trial; attempt > 0 redraws after a rejected sample.
inline ThermalDraw sample_kinematics(const ThermalConfig& cfg, const ChainConfig& chain, std::uint64_t trial,
                                     std::uint64_t attempt = 0) {
  const CounterRng rng(cfg.seed(), trial * 1024 + attempt);
  const int n = chain.n_atoms();
  ThermalDraw d{std::vector<double>(static_cast<std::size_t>(n)), std::vector<double>(static_cast<std::size_t>(n))};
  for (int i = 0; i < n; ++i) {
    const auto u = static_cast<std::uint64_t>(i);
    d.x0[static_cast<std::size_t>(i)] = i * chain.spacing_um() + cfg.position_sigma_um() * rng.normal(2 * u);
    d.v[static_cast<std::size_t>(i)] = cfg.v_th() * rng.normal(2 * u + 1);
  }
  return d;
}

inline ThermalDraw static_draw(const ChainConfig& chain) {
  ThermalDraw d;
  for (int i = 0; i < chain.n_atoms(); ++i) {
    d.x0.push_back(i * chain.spacing_um());
    d.v.push_back(0.0);
  }
  return d;
}

/// Gate for one draw. Throws DomainError if two atoms meet during the protocol.
inline GateReport run_thermal_trial(int n_atoms, const ProtocolConfig& cfg, const ThermalDraw& draw, int jobs = 1) {
  if (cfg.model() != ModelKind::FullVdw) throw MisuseError("thermal runs need the van der Waals model");
  if (static_cast<int>(draw.x0.size()) != n_atoms || static_cast<int>(draw.v.size()) != n_atoms)
    throw DomainError("draw must cover every atom");
  const double t_end = cfg.total_time();
  for (int i = 0; i + 1 < n_atoms; ++i) {
    const auto a = static_cast<std::size_t>(i), b = a + 1;
    const double gap0 = draw.x0[b] - draw.x0[a];
    const double gap1 = gap0 + (draw.v[b] - draw.v[a]) * t_end;
    if (!(gap0 > 0.0 && gap1 > 0.0)) throw DomainError("atoms cross during the protocol; sample rejected");
  }
  GateOptions opt;
  opt.jobs = jobs;
  opt.check_mirror = false;
  opt.motion = [&](const GateInput& in) -> std::optional<AtomMotion> {
    AtomMotion m;
    for (int i = in.first_atom; i < in.first_atom + in.nu; ++i) {
      m.x0.push_back(draw.x0[static_cast<std::size_t>(i)]);
      m.v.push_back(draw.v[static_cast<std::size_t>(i)]);
    }
    return m;
  };
  return assemble_gate(n_atoms, cfg, opt);
}

struct DephasingEstimate {
  double delta_b2;   // rad/us
  double delta_phi;  // rad
};

/// delta B_2 = B_2 3 sqrt(2) v_th tau / a,  delta phi = delta B_2 tau.
inline DephasingEstimate analytic_dephasing(const ThermalConfig& cfg, const ChainConfig& chain,
                                            const InteractionConfig& interaction, double tau) {
  const double b2 = std::abs(interaction.pair_strength(2));
  const double db2 = b2 * 3.0 * std::sqrt(2.0) * cfg.v_th() * tau / chain.spacing_um();
  return {db2, db2 * tau};
}

struct ThermalTrial {
  GateDiagonal u;
  double fidelity;
  double delta_phi;  // arg(u_11 / u_11,static)
  int rejected;      // redraws before this trial was accepted
};

struct ThermalReport {
  std::vector<ThermalTrial> trials;
  std::vector<double> delta_phi_samples;
  double delta_phi_rms = 0.0;
  double delta_phi_mean_abs = 0.0;
  double static_fidelity = 0.0;
  /// mean 1 - F over trials (includes the static error of the protocol).
  double fidelity_loss = 0.0;
  double fidelity_loss_stderr = 0.0;
  /// mean F_static - F over trials (motion-induced part only).
  double dephasing_loss = 0.0;
  double dephasing_loss_stderr = 0.0;
  DephasingEstimate analytic{};
  int rejected = 0;
};

namespace detail {
inline std::pair<double, double> mean_and_stderr(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  const double mean = pairwise_sum(x) / n;
  std::vector<double> sq(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) sq[i] = (x[i] - mean) * (x[i] - mean);
  const double var = x.size() > 1 ? pairwise_sum(sq) / (n - 1.0) : 0.0;
  return {mean, std::sqrt(var / n)};
}
}  // namespace detail

inline ThermalReport thermal_monte_carlo(int n_atoms, const ProtocolConfig& cfg, const ThermalConfig& th,
                                         int jobs = 1) {
  ThermalReport rep;
  const auto stat = run_thermal_trial(n_atoms, cfg, static_draw(cfg.chain()));
  rep.static_fidelity = stat.fidelity;
  const cplx ref11 = stat.u[3];
  rep.trials = parallel_map(static_cast<std::size_t>(th.trials()), jobs, [&](std::size_t i) {
    for (std::uint64_t attempt = 0; attempt < 1000; ++attempt) {
      try {
        const auto g = run_thermal_trial(n_atoms, cfg, sample_kinematics(th, cfg.chain(), i, attempt));
        return ThermalTrial{g.u, g.fidelity, std::arg(g.u[3] / ref11), static_cast<int>(attempt)};
      } catch (const DomainError&) {
      }
    }
    throw NumericalError("thermal sampling rejected 1000 consecutive draws");
  });
  std::vector<double> loss, deph, sq;
  for (const auto& t : rep.trials) {
    rep.delta_phi_samples.push_back(t.delta_phi);
    loss.push_back(1.0 - t.fidelity);
    deph.push_back(rep.static_fidelity - t.fidelity);
    sq.push_back(t.delta_phi * t.delta_phi);
    rep.rejected += t.rejected;
  }
  std::vector<double> absphi(rep.delta_phi_samples.size());
  for (std::size_t i = 0; i < absphi.size(); ++i) absphi[i] = std::abs(rep.delta_phi_samples[i]);
  const double n = static_cast<double>(rep.trials.size());
  rep.delta_phi_rms = std::sqrt(pairwise_sum(sq) / n);
  rep.delta_phi_mean_abs = pairwise_sum(absphi) / n;
  std::tie(rep.fidelity_loss, rep.fidelity_loss_stderr) = detail::mean_and_stderr(loss);
  std::tie(rep.dephasing_loss, rep.dephasing_loss_stderr) = detail::mean_and_stderr(deph);
  rep.analytic = analytic_dephasing(th, cfg.chain(), cfg.interaction(), cfg.pulse().tau());
  return rep;
}

}  // namespace afmgate
