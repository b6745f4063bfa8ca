#pragma once

// Fixed-step RK4 propagation of the two-pulse protocol with phase bookkeeping.
//
// The Hamiltonian is never assembled during propagation: the drive acts
// through the cached flip-partner lists and everything else is diagonal.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "afmgate/basis.hpp"
#include "afmgate/errors.hpp"
#include "afmgate/hamiltonian.hpp"
#include "afmgate/model.hpp"

namespace afmgate {

/// One pulse of the protocol. Local pulse time is t - t0.
struct Segment {
  double t0 = 0.0;
  PulseProfile pulse;
  double c6_scale = 1.0;  // +1 in step I, -lambda in step II
  double gamma = 0.0;     // decay rate of the Rydberg level in use
  int steps = 0;

  double t1() const { return t0 + pulse.tau(); }
  double dt() const { return pulse.tau() / steps; }
};

/// Ballistic motion of the active atoms along the chain (um, um/us).
struct AtomMotion {
  std::vector<double> x0;
  std::vector<double> v;
};

/// Matrix-free H(t) for the PXP or van der Waals chain.
class ChainDynamics {
 public:
  ChainDynamics(ModelKind kind, int nu, const InteractionConfig& interaction)
      : kind_(kind), interaction_(interaction) {
    if (kind == ModelKind::PxpPlusCorrections)
      throw MisuseError("the corrected PXP model is for static spectra only; propagate with pxp or vdw");
    structure_ = std::make_shared<ChainStructure>(kind == ModelKind::FullVdw ? build_full_basis(nu)
                                                                             : build_blockade_basis(nu));
    if (kind == ModelKind::FullVdw)
      static_diag_ = structure_->pair_diagonal(
          [&](int a, int b) { return interaction_.pair_strength(b - a); });
    else
      static_diag_ = Eigen::VectorXd::Zero(structure_->dim());
  }

  /// Replace the lattice positions by moving atoms; B_ij follows C6 / |x_i - x_j|^6.
  void set_motion(AtomMotion motion) {
    if (kind_ != ModelKind::FullVdw) throw MisuseError("atomic motion needs the van der Waals model");
    if (static_cast<int>(motion.x0.size()) != nu() || static_cast<int>(motion.v.size()) != nu())
      throw DomainError("motion must list every active atom");
    motion_ = std::move(motion);
  }

  ModelKind kind() const { return kind_; }
  const ChainStructure& structure() const { return *structure_; }
  const Basis& basis() const { return structure_->basis(); }
  int nu() const { return structure_->nu(); }
  Eigen::Index dim() const { return structure_->dim(); }
  bool moving() const { return motion_.has_value(); }

  struct Coefficients {
    double omega;
    Eigen::VectorXcd diag;  // -Delta n_r + interaction - (i/2) gamma n_r
  };

  Coefficients coefficients(const Segment& seg, double t) const {
    const double local = std::clamp(t - seg.t0, 0.0, seg.pulse.tau());
    const double w = pulse_omega(seg.pulse, local).value();
    const double d = pulse_delta(seg.pulse, local).value();
    const Eigen::VectorXd& n = structure_->rydberg_numbers();
    Eigen::VectorXd real = -d * n + seg.c6_scale * interaction_diagonal(t);
    Coefficients c{w, Eigen::VectorXcd(dim())};
    c.diag.real() = real;
    c.diag.imag() = -0.5 * seg.gamma * n;
    return c;
  }

  /// out = H psi for given coefficients.
  void apply(const Coefficients& c, const Eigen::VectorXcd& psi, Eigen::VectorXcd& out) const {
    const auto& off = structure_->partner_offsets();
    const auto& part = structure_->partners();
    const double half = 0.5 * c.omega;
    for (Eigen::Index k = 0; k < dim(); ++k) {
      cplx acc = c.diag[k] * psi[k];
      if (half != 0.0) {
        cplx s = 0.0;
        for (auto p = off[static_cast<std::size_t>(k)]; p < off[static_cast<std::size_t>(k) + 1]; ++p) s += psi[part[p]];
        acc += half * s;
      }
      out[k] = acc;
    }
  }

  /// <psi|H_herm|psi> / <psi|psi>, decay term excluded.
  double energy(const Coefficients& c, const Eigen::VectorXcd& psi) const {
    Coefficients herm{c.omega, c.diag.real().cast<cplx>()};
    Eigen::VectorXcd hpsi(dim());
    apply(herm, psi, hpsi);
    return psi.dot(hpsi).real() / psi.squaredNorm();
  }

  /// Dense H at time t (for diagnostics and dumps).
  OperatorMatrix dense(const Segment& seg, double t) const {
    const auto c = coefficients(seg, t);
    Eigen::MatrixXcd h = (c.omega * structure_->drive_matrix()).cast<cplx>();
    h.diagonal() += c.diag;
    return {h, structure_->tag(), seg.gamma == 0.0};
  }

 private:
  Eigen::VectorXd interaction_diagonal(double t) const {
    if (!motion_) return static_diag_;
    const auto& m = *motion_;
    const double c6 = interaction_.c6();
    return structure_->pair_diagonal([&](int a, int b) {
      if (auto cut = interaction_.range_cutoff(); cut && b - a > *cut) return 0.0;
      const double r = std::abs((m.x0[b] + m.v[b] * t) - (m.x0[a] + m.v[a] * t));
      const double r2 = r * r;
      return c6 / (r2 * r2 * r2);
    });
  }

  ModelKind kind_;
  InteractionConfig interaction_;
  std::shared_ptr<ChainStructure> structure_;
  Eigen::VectorXd static_diag_;
  std::optional<AtomMotion> motion_;
};

struct Observables {
  /// Named basis states whose populations are recorded at every sample.
  std::vector<std::pair<std::string, BasisState>> states;
  /// Named vectors in basis order; population |<v|psi>|^2.
  std::vector<std::pair<std::string, Eigen::VectorXcd>> vectors;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<int> segment;           // segment id of each sample
  std::vector<double> norm;           // ||psi||
  std::vector<cplx> overlap;          // <psi(0)|psi(t)>
  std::vector<double> energy;         // <H> under the sample's segment Hamiltonian
  std::vector<std::string> population_names;
  std::vector<std::vector<double>> populations;  // [name][sample]
  std::vector<Eigen::VectorXcd> states;          // filled only when requested
  Eigen::VectorXcd final_state;

  std::size_t samples() const { return times.size(); }
};

struct PropagateOptions {
  int sample_every = 1;
  bool store_states = false;
  Observables observables;
};

namespace detail {

inline void record(Trajectory& tr, const ChainDynamics& dyn, const ChainDynamics::Coefficients& c,
                   const Eigen::VectorXcd& psi, const Eigen::VectorXcd& psi0, double t, int seg,
                   const PropagateOptions& opt) {
  tr.times.push_back(t);
  tr.segment.push_back(seg);
  tr.norm.push_back(psi.norm());
  tr.overlap.push_back(psi0.dot(psi));
  tr.energy.push_back(dyn.energy(c, psi));
  std::size_t idx = 0;
  for (const auto& [name, s] : opt.observables.states)
    tr.populations[idx++].push_back(std::norm(psi[static_cast<Eigen::Index>(dyn.basis().index_of(s))]));
  for (const auto& [name, v] : opt.observables.vectors) tr.populations[idx++].push_back(std::norm(v.dot(psi)));
  if (opt.store_states) tr.states.push_back(psi);
}

}  // namespace detail

/// RK4 over consecutive segments. Segment boundaries are sampled twice,
/// once with each adjacent Hamiltonian, so that per-segment quadratures close.
inline Trajectory propagate(const ChainDynamics& dyn, const Eigen::VectorXcd& psi0,
                            const std::vector<Segment>& segments, const PropagateOptions& opt = {}) {
  if (psi0.size() != dyn.dim()) throw DomainError("initial state has the wrong dimension");
  if (std::abs(psi0.norm() - 1.0) > 1e-12) throw DomainError("initial state must be normalized");
  if (opt.sample_every < 1) throw DomainError("sample_every must be >= 1");
  Trajectory tr;
  for (const auto& [name, s] : opt.observables.states) tr.population_names.push_back(name);
  for (const auto& [name, v] : opt.observables.vectors) tr.population_names.push_back(name);
  tr.populations.resize(tr.population_names.size());

  Eigen::VectorXcd psi = psi0;
  Eigen::VectorXcd k1(dyn.dim()), k2(dyn.dim()), k3(dyn.dim()), k4(dyn.dim()), tmp(dyn.dim());
  const cplx minus_i(0.0, -1.0);
  for (std::size_t si = 0; si < segments.size(); ++si) {
    const Segment& seg = segments[si];
    if (seg.steps < 1) throw DomainError("segment needs at least one step");
    const double dt = seg.dt();
    auto c0 = dyn.coefficients(seg, seg.t0);
    detail::record(tr, dyn, c0, psi, psi0, seg.t0, static_cast<int>(si), opt);
    for (int n = 0; n < seg.steps; ++n) {
      const double t = seg.t0 + n * dt;
      const auto cm = dyn.coefficients(seg, t + 0.5 * dt);
      auto c1 = dyn.coefficients(seg, n + 1 == seg.steps ? seg.t1() : t + dt);
      dyn.apply(c0, psi, k1);
      k1 *= minus_i;
      tmp = psi + (0.5 * dt) * k1;
      dyn.apply(cm, tmp, k2);
      k2 *= minus_i;
      tmp = psi + (0.5 * dt) * k2;
      dyn.apply(cm, tmp, k3);
      k3 *= minus_i;
      tmp = psi + dt * k3;
      dyn.apply(c1, tmp, k4);
      k4 *= minus_i;
      psi += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      const double nrm = psi.squaredNorm();
      if (!std::isfinite(nrm) || nrm > 1e6) {
        std::ostringstream msg;
        msg << "amplitudes diverged in segment " << si << " at step " << n + 1 << " (t = " << t + dt
            << " us, |psi|^2 = " << nrm << ")";
        throw NumericalError(msg.str());
      }
      if ((n + 1) % opt.sample_every == 0 || n + 1 == seg.steps)
        detail::record(tr, dyn, c1, psi, psi0, seg.t0 + (n + 1) * dt, static_cast<int>(si), opt);
      c0 = std::move(c1);
    }
  }
  tr.final_state = psi;
  return tr;
}

struct PhaseRecord {
  std::vector<double> times;
  std::vector<double> phi_total;       // unwrapped arg <psi(0)|psi(t)>
  std::vector<double> phi_dynamical;   // -int <H> dt
  std::vector<double> phi_geometric;   // phi_total - phi_dynamical
  std::vector<bool> valid;             // |<psi(0)|psi(t)>| / ||psi(t)|| > 0.1

  double final_total() const { return phi_total.back(); }
  double final_dynamical() const { return phi_dynamical.back(); }
  double final_geometric() const { return phi_geometric.back(); }
};

inline double wrap_phase(double x) {
  const double two_pi_ = 2.0 * std::numbers::pi;
  double y = std::fmod(x + std::numbers::pi, two_pi_);
  if (y < 0) y += two_pi_;
  return y - std::numbers::pi;
}

/// Total phase by nearest-branch unwrapping, dynamical phase by trapezoid
/// quadrature of <H> within each segment.
inline PhaseRecord phase_decomposition(const Trajectory& tr, double overlap_threshold = 0.1) {
  PhaseRecord rec;
  const std::size_t n = tr.samples();
  if (n == 0) return rec;
  double max_step_phase = 0.0;
  double phi = std::arg(tr.overlap[0]);
  double phid = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) {
      const double raw = std::arg(tr.overlap[i]);
      phi += wrap_phase(raw - wrap_phase(phi));
      if (tr.segment[i] == tr.segment[i - 1]) {
        const double h = tr.times[i] - tr.times[i - 1];
        phid -= 0.5 * h * (tr.energy[i] + tr.energy[i - 1]);
        max_step_phase = std::max(max_step_phase, h * std::max(std::abs(tr.energy[i]), std::abs(tr.energy[i - 1])));
      }
    }
    rec.times.push_back(tr.times[i]);
    rec.phi_total.push_back(phi);
    rec.phi_dynamical.push_back(phid);
    rec.phi_geometric.push_back(phi - phid);
    rec.valid.push_back(std::abs(tr.overlap[i]) > overlap_threshold * tr.norm[i]);
  }
  if (max_step_phase >= std::numbers::pi / 4)
    throw NumericalError("trajectory sampled too coarsely for phase bookkeeping (max |<H>| dt >= pi/4)");
  return rec;
}

// ---------------------------------------------------------------------------

/// Step I on [0, tau] with +B, step II on [tau, tau + tau'] with -lambda B.
inline std::vector<Segment> protocol_segments(const ProtocolConfig& cfg) {
  const double g1 = cfg.include_decay() ? cfg.decay().gamma_r().value() : 0.0;
  const double g2 = cfg.include_decay() ? cfg.decay().gamma_rp().value() : 0.0;
  const double lambda = cfg.interaction().lambda();
  return {Segment{0.0, cfg.pulse(), 1.0, g1, cfg.steps_per_pulse()},
          Segment{cfg.pulse().tau(), cfg.second_pulse(), -lambda, g2, cfg.steps_per_pulse()}};
}

inline Eigen::VectorXcd ground_state(const Basis& basis) {
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis.size()));
  psi[static_cast<Eigen::Index>(basis.index_of(0))] = 1.0;
  return psi;
}

/// |G>, |A> and, for even nu, the AFM-manifold sine states aleph_k.
inline Observables default_observables(const Basis& basis) {
  Observables obs;
  const int nu = basis.nu();
  obs.states.push_back({"G", 0});
  obs.states.push_back({"A", afm_state(nu)});
  if (nu % 2 == 0 && nu >= 2) {
    const int full = nu / 2 + 1;
    for (int k = 1; k <= std::min(full, 2); ++k) {
      Eigen::VectorXd c(full);
      for (int j = 1; j <= full; ++j)
        c[j - 1] = std::sqrt(2.0 / (full + 1)) * std::sin(k * j * std::numbers::pi / (full + 1));
      Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis.size()));
      for (int j = 1; j <= full; ++j)
        v[static_cast<Eigen::Index>(basis.index_of(afm_configuration(nu, j)))] = c[j - 1];
      obs.vectors.push_back({"aleph_" + std::to_string(k), v});
    }
  }
  return obs;
}

struct ProtocolRun {
  Trajectory trajectory;
  PhaseRecord phases;
  cplx ground_overlap;  // <G|psi(tau + tau')>
};

struct RunOptions {
  int sample_every = 1;
  bool store_states = false;
  bool observables = true;
  bool phases = true;  // needs sample_every small enough for phase_decomposition
  std::optional<AtomMotion> motion;
};

inline ProtocolRun run_protocol(int nu, const ProtocolConfig& cfg, const RunOptions& ro = {}) {
  ChainDynamics dyn(cfg.model(), nu, cfg.interaction());
  if (ro.motion) dyn.set_motion(*ro.motion);
  PropagateOptions po;
  po.sample_every = ro.sample_every;
  po.store_states = ro.store_states;
  if (ro.observables) po.observables = default_observables(dyn.basis());
  const auto psi0 = ground_state(dyn.basis());
  ProtocolRun run;
  run.trajectory = propagate(dyn, psi0, protocol_segments(cfg), po);
  if (ro.phases) run.phases = phase_decomposition(run.trajectory);
  run.ground_overlap = psi0.dot(run.trajectory.final_state);
  return run;
}

/// <G|psi(tau + tau')> for the Hermitian protocol; phase nu_r pi mod 2pi and
/// magnitude 1 - leakage in the adiabatic regime.
inline cplx parity_roundtrip_check(int nu, const ProtocolConfig& cfg) {
  if (cfg.include_decay()) throw MisuseError("parity round trip is defined without decay");
  ChainDynamics dyn(cfg.model(), nu, cfg.interaction());
  PropagateOptions po;
  po.sample_every = cfg.steps_per_pulse();
  const auto psi0 = ground_state(dyn.basis());
  const auto tr = propagate(dyn, psi0, protocol_segments(cfg), po);
  return psi0.dot(tr.final_state);
}

/// |b|^2: population left after the first pulse in configurations whose
/// parity differs from (-1)^{ceil(nu/2)}.
inline double single_pulse_wrong_parity(int nu, const ProtocolConfig& cfg) {
  ChainDynamics dyn(cfg.model(), nu, cfg.interaction());
  PropagateOptions po;
  po.sample_every = cfg.steps_per_pulse();
  const auto psi0 = ground_state(dyn.basis());
  auto segs = protocol_segments(cfg);
  segs.pop_back();
  const auto tr = propagate(dyn, psi0, segs, po);
  const int target = ((nu + 1) / 2) % 2 ? -1 : 1;
  double wrong = 0.0;
  for (std::size_t k = 0; k < dyn.basis().size(); ++k)
    if (parity_sign(dyn.basis()[k]) != target) wrong += std::norm(tr.final_state[static_cast<Eigen::Index>(k)]);
  return wrong;
}

}  // namespace afmgate
