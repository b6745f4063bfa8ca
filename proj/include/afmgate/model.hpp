#pragma once

// Configuration records and the chirped pulse shared by every other module.
// All records validate on construction and are immutable afterwards.

#include <cmath>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>

#include "afmgate/errors.hpp"
#include "afmgate/units.hpp"

namespace afmgate {

class ChainConfig {
 public:
  ChainConfig(int n_atoms, double spacing_um) : n_atoms_(n_atoms), spacing_um_(spacing_um) {
    if (n_atoms < 3) throw ConfigError("chain needs at least 3 atoms (two qubits and a bus)");
    if (!(spacing_um > 0.0)) throw ConfigError("lattice spacing must be positive");
  }

  int n_atoms() const { return n_atoms_; }
  double spacing_um() const { return spacing_um_; }
  /// Qubit separation L = (N - 1) a.
  double length_um() const { return (n_atoms_ - 1) * spacing_um_; }

 private:
  int n_atoms_;
  double spacing_um_;
};

/// van der Waals couplings B_ij = B / |i - j|^6 with B = C6 / a^6.
///
/// lambda is the magnitude ratio of the second-step interaction,
/// B' = -lambda B. range_cutoff drops pairs with |i - j| above it.
class InteractionConfig {
 public:
  /// c6 in (rad/us) um^6, signed.
  InteractionConfig(double c6, double spacing_um, double lambda = 1.0,
                    std::optional<int> range_cutoff = std::nullopt)
      : c6_(c6), spacing_um_(spacing_um), lambda_(lambda), range_cutoff_(range_cutoff) {
    if (!(spacing_um > 0.0)) throw ConfigError("lattice spacing must be positive");
    if (!(lambda > 0.0)) throw ConfigError("interaction ratio lambda must be positive");
    if (range_cutoff && *range_cutoff < 1) throw ConfigError("range cutoff must be >= 1");
    b_nn_ = c6_ / std::pow(spacing_um_, 6);
  }

  static InteractionConfig from_nearest_neighbor(Frequency b, double spacing_um = 1.0,
                                                 double lambda = 1.0,
                                                 std::optional<int> range_cutoff = std::nullopt) {
    InteractionConfig cfg(b.value() * std::pow(spacing_um, 6), spacing_um, lambda, range_cutoff);
    cfg.b_nn_ = b.value();
    return cfg;
  }

  double c6() const { return c6_; }
  double spacing_um() const { return spacing_um_; }
  Frequency b_nn() const { return Frequency::from_rad_per_us(b_nn_); }
  double lambda() const { return lambda_; }
  std::optional<int> range_cutoff() const { return range_cutoff_; }

  /// B / d^6 for lattice distance d >= 1, zero past the cutoff.
  double pair_strength(int distance) const {
    if (distance < 1) throw DomainError("pair distance must be >= 1");
    if (range_cutoff_ && distance > *range_cutoff_) return 0.0;
    const double d = distance;
    return b_nn_ / (d * d * d * d * d * d);
  }

  /// Next-nearest-neighbour strength B_2 = B / 2^6.
  Frequency b2() const { return Frequency::from_rad_per_us(pair_strength(2)); }

  /// Interaction of the second step: C6' = -lambda C6.
  InteractionConfig second_step() const {
    InteractionConfig out = *this;
    out.c6_ = -lambda_ * c6_;
    out.b_nn_ = -lambda_ * b_nn_;
    return out;
  }

  InteractionConfig with_cutoff(std::optional<int> cutoff) const {
    InteractionConfig out = *this;
    if (cutoff && *cutoff < 1) throw ConfigError("range cutoff must be >= 1");
    out.range_cutoff_ = cutoff;
    return out;
  }

  InteractionConfig with_nearest_neighbor(Frequency b) const {
    return from_nearest_neighbor(b, spacing_um_, lambda_, range_cutoff_);
  }

 private:
  double c6_;
  double spacing_um_;
  double lambda_;
  std::optional<int> range_cutoff_;
  double b_nn_ = 0.0;
};

/// Sites are labelled 1..N as in the chain picture; only |i - j| matters.
inline Frequency interaction_strength(const InteractionConfig& cfg, int i, int j) {
  if (i == j) throw DomainError("self-interaction is undefined");
  if (i < 1 || j < 1) throw DomainError("site labels start at 1");
  return Frequency::from_rad_per_us(cfg.pair_strength(std::abs(i - j)));
}

inline Frequency interaction_strength(const ChainConfig& chain, const InteractionConfig& cfg,
                                      int i, int j) {
  if (i > chain.n_atoms() || j > chain.n_atoms()) throw DomainError("site outside the chain");
  return interaction_strength(cfg, i, j);
}

/// Flat-top amplitude with linear chirp:
///   Omega(t) = Omega0 (exp(-(t - tau/2)^8 / sigma^8) - e0) / (1 - e0),  e0 = exp(-(tau / 2 sigma)^8)
///   Delta(t) = beta (t - tau/2),  beta = 2 Delta0 / tau
class PulseProfile {
 public:
  static constexpr double default_sigma_ratio = 0.385;

  PulseProfile(Frequency omega0, Frequency delta0, double tau_us,
               std::optional<double> sigma_us = std::nullopt)
      : omega0_(omega0), delta0_(delta0), tau_(tau_us),
        sigma_(sigma_us.value_or(default_sigma_ratio * tau_us)) {
    if (!(tau_us > 0.0)) throw ConfigError("pulse duration must be positive");
    if (!(sigma_ > 0.0)) throw ConfigError("flat-top width must be positive");
    const double half = 0.5 * tau_ / sigma_;
    edge_ = std::exp(-pow8(half));
    if (!(edge_ < 1.0)) throw ConfigError("flat-top width too large for the pulse duration");
  }

  Frequency omega0() const { return omega0_; }
  Frequency delta0() const { return delta0_; }
  double tau() const { return tau_; }
  double sigma() const { return sigma_; }
  /// Chirp rate in rad/us^2.
  double beta() const { return 2.0 * delta0_.value() / tau_; }
  /// Offset exp(-(tau / 2 sigma)^8) subtracted so that Omega vanishes at the edges.
  double edge_offset() const { return edge_; }

  /// Second-step pulse for interaction ratio lambda: Omega0' = lambda Omega0,
  /// Delta0' = lambda Delta0, tau' = tau / lambda (sigma scales with tau).
  PulseProfile rescaled(double lambda) const {
    if (!(lambda > 0.0)) throw DomainError("rescaling factor must be positive");
    return PulseProfile(omega0_ * lambda, delta0_ * lambda, tau_ / lambda, sigma_ / lambda);
  }

  static constexpr double pow8(double x) {
    const double x2 = x * x;
    const double x4 = x2 * x2;
    return x4 * x4;
  }

 private:
  Frequency omega0_;
  Frequency delta0_;
  double tau_;
  double sigma_;
  double edge_ = 0.0;
};

namespace detail {
inline void check_pulse_time(const PulseProfile& p, double t) {
  if (!(t >= 0.0 && t <= p.tau())) throw DomainError("time outside the pulse window [0, tau]");
}
}  // namespace detail

inline Frequency pulse_omega(const PulseProfile& p, double t) {
  detail::check_pulse_time(p, t);
  const double half = 0.5 * p.tau();
  const double u = (t - half) / p.sigma();
  const double e0 = p.edge_offset();
  double shape = (std::exp(-PulseProfile::pow8(u)) - e0) / (1.0 - e0);
  if (shape < 0.0) shape = 0.0;
  return p.omega0() * shape;
}

/// dOmega/dt in rad/us^2.
inline double pulse_omega_rate(const PulseProfile& p, double t) {
  detail::check_pulse_time(p, t);
  const double u = (t - 0.5 * p.tau()) / p.sigma();
  const double u7 = PulseProfile::pow8(u) / (u == 0.0 ? 1.0 : u);
  const double ds = -8.0 * (u == 0.0 ? 0.0 : u7) / p.sigma() * std::exp(-PulseProfile::pow8(u));
  return p.omega0().value() * ds / (1.0 - p.edge_offset());
}

inline Frequency pulse_delta(const PulseProfile& p, double t) {
  detail::check_pulse_time(p, t);
  // Delta0 (2t - tau) / tau hits -Delta0, 0, +Delta0 exactly at the three anchor times.
  return p.delta0() * ((2.0 * t - p.tau()) / p.tau());
}

class DecayConfig {
 public:
  DecayConfig() = default;
  DecayConfig(Frequency gamma_r, Frequency gamma_rp) : gamma_r_(gamma_r), gamma_rp_(gamma_rp) {
    if (gamma_r.value() < 0.0 || gamma_rp.value() < 0.0)
      throw ConfigError("decay rates must be non-negative");
  }

  Frequency gamma_r() const { return gamma_r_; }
  Frequency gamma_rp() const { return gamma_rp_; }

  /// Gamma = (Gamma_r tau + Gamma_r' tau') / (tau + tau').
  Frequency gamma_mean(double tau, double tau_prime) const {
    return (gamma_r_ * tau + gamma_rp_ * tau_prime) / (tau + tau_prime);
  }

 private:
  Frequency gamma_r_{};
  Frequency gamma_rp_{};
};

enum class ModelKind { Pxp, FullVdw, PxpPlusCorrections };

inline std::string_view to_string(ModelKind m) {
  switch (m) {
    case ModelKind::Pxp: return "pxp";
    case ModelKind::FullVdw: return "vdw";
    case ModelKind::PxpPlusCorrections: return "corrections";
  }
  return "?";
}

inline ModelKind parse_model_kind(std::string_view s) {
  if (s == "pxp" || s == "PXP") return ModelKind::Pxp;
  if (s == "vdw" || s == "full_vdw" || s == "FULL_VDW") return ModelKind::FullVdw;
  if (s == "corrections" || s == "PXP_PLUS_CORRECTIONS") return ModelKind::PxpPlusCorrections;
  throw ConfigError("unknown model '" + std::string(s) + "' (expected pxp, vdw or corrections)");
}

class ProtocolConfig {
 public:
  // tau / 32000: halving the step moves final amplitudes by < 1e-8 at the
  // paper operating point (tau / 4000 leaves ~3e-6 for nu = 5).
  static constexpr int default_steps_per_pulse = 32000;
  static constexpr int min_steps_per_pulse = 1000;

  ProtocolConfig(ChainConfig chain, InteractionConfig interaction, PulseProfile pulse,
                 DecayConfig decay = {}, ModelKind model = ModelKind::FullVdw,
                 std::optional<double> dt_us = std::nullopt, bool include_decay = false)
      : chain_(chain), interaction_(interaction), pulse_(pulse), decay_(decay), model_(model),
        dt_(dt_us.value_or(pulse.tau() / default_steps_per_pulse)), include_decay_(include_decay) {
    if (!(dt_ > 0.0)) throw ConfigError("integrator step must be positive");
    const double steps = pulse_.tau() / dt_;
    steps_ = static_cast<int>(std::llround(steps));
    if (steps_ < min_steps_per_pulse * (1.0 - 1e-12))
      throw ConfigError("integrator step exceeds tau / 1000");
    if (std::abs(steps - steps_) > 1e-9 * steps)
      throw ConfigError("integrator step must divide the pulse duration evenly");
    if (std::abs(interaction_.spacing_um() - chain_.spacing_um()) > 1e-12 * chain_.spacing_um())
      throw ConfigError("interaction and chain disagree on the lattice spacing");
  }

  const ChainConfig& chain() const { return chain_; }
  const InteractionConfig& interaction() const { return interaction_; }
  const PulseProfile& pulse() const { return pulse_; }
  const DecayConfig& decay() const { return decay_; }
  ModelKind model() const { return model_; }
  double dt() const { return dt_; }
  bool include_decay() const { return include_decay_; }
  int steps_per_pulse() const { return steps_; }

  /// Second pulse (lambda-rescaled) and total gate time tau + tau / lambda.
  PulseProfile second_pulse() const { return pulse_.rescaled(interaction_.lambda()); }
  double total_time() const { return pulse_.tau() + second_pulse().tau(); }

  ProtocolConfig with_model(ModelKind m) const {
    ProtocolConfig out = *this;
    out.model_ = m;
    return out;
  }
  ProtocolConfig with_decay(bool on) const {
    ProtocolConfig out = *this;
    out.include_decay_ = on;
    return out;
  }
  ProtocolConfig with_interaction(const InteractionConfig& i) const {
    return ProtocolConfig(chain_, i, pulse_, decay_, model_, dt_, include_decay_);
  }
  ProtocolConfig with_pulse(const PulseProfile& p, std::optional<double> dt_us = std::nullopt) const {
    return ProtocolConfig(chain_, interaction_, p, decay_, model_, dt_us, include_decay_);
  }
  ProtocolConfig with_steps(int steps_per_pulse) const {
    return ProtocolConfig(chain_, interaction_, pulse_, decay_, model_,
                          pulse_.tau() / steps_per_pulse, include_decay_);
  }
  ProtocolConfig with_chain(const ChainConfig& c) const {
    return ProtocolConfig(c, interaction_, pulse_, decay_, model_, dt_, include_decay_);
  }

 private:
  ChainConfig chain_;
  InteractionConfig interaction_;
  PulseProfile pulse_;
  DecayConfig decay_;
  ModelKind model_;
  double dt_;
  bool include_decay_;
  int steps_ = 0;
};

/// Average of ceil(nu / 2) over the four gate inputs nu = N-2, N-1, N-1, N.
/// Equals N/2 - 1/4 for every N.
inline double mean_rydberg_number(int n_atoms) {
  if (n_atoms < 3) throw DomainError("mean Rydberg number needs N >= 3");
  auto ceil_half = [](int nu) { return (nu + 1) / 2; };
  const int sum = ceil_half(n_atoms - 2) + 2 * ceil_half(n_atoms - 1) + ceil_half(n_atoms);
  return sum / 4.0;
}

}  // namespace afmgate
