#pragma once

// Dense Hamiltonians for the PXP, van der Waals and corrected-PXP chain
// models, the tridiagonal AFM-manifold models, and the decay operator.
//
// Every model is a sum of fixed structures with scalar coefficients:
//   H = Omega * D + (-Delta) * N + I - S_B(Omega, Delta) * M_B - S_2B(Omega, Delta) * M_2B
// D = (1/2) sum_i P X_i P (or plain X_i / 2 without blockade), N = sum_i n_i.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <vector>

#include "afmgate/basis.hpp"
#include "afmgate/errors.hpp"
#include "afmgate/model.hpp"
#include "afmgate/units.hpp"

namespace afmgate {

using cplx = std::complex<double>;

struct BasisTag {
  int nu = 0;
  BasisKind kind = BasisKind::Full;
  bool operator==(const BasisTag&) const = default;
};

struct OperatorMatrix {
  Eigen::MatrixXcd entries;
  BasisTag basis_tag;
  bool hermitian = true;

  Eigen::Index dim() const { return entries.rows(); }

  /// max|H - H^dagger| / max|H| (0 for the zero matrix).
  double hermiticity_defect() const {
    const double scale = entries.cwiseAbs().maxCoeff();
    if (scale == 0.0) return 0.0;
    return (entries - entries.adjoint()).cwiseAbs().maxCoeff() / scale;
  }
};

/// Flip-partner list and occupation data for one basis, shared by the
/// dense builders and the matrix-free propagator.
class ChainStructure {
 public:
  explicit ChainStructure(Basis basis) : basis_(std::move(basis)) {
    const int nu = basis_.nu();
    const std::size_t dim = basis_.size();
    offsets_.reserve(dim + 1);
    offsets_.push_back(0);
    n_r_.resize(static_cast<Eigen::Index>(dim));
    for (std::size_t k = 0; k < dim; ++k) {
      const BasisState s = basis_[k];
      n_r_[static_cast<Eigen::Index>(k)] = rydberg_count(s);
      for (int i = 0; i < nu; ++i) {
        const BasisState t = s ^ (BasisState{1} << i);
        if (basis_.contains(t)) partners_.push_back(static_cast<std::uint32_t>(basis_.index_of(t)));
      }
      offsets_.push_back(static_cast<std::uint32_t>(partners_.size()));
    }
    for (int a = 0; a < nu; ++a)
      for (int b = a + 1; b < nu; ++b) pairs_.push_back({a, b});
  }

  const Basis& basis() const { return basis_; }
  int nu() const { return basis_.nu(); }
  Eigen::Index dim() const { return static_cast<Eigen::Index>(basis_.size()); }
  BasisTag tag() const { return {basis_.nu(), basis_.kind()}; }
  const Eigen::VectorXd& rydberg_numbers() const { return n_r_; }

  const std::vector<std::uint32_t>& partner_offsets() const { return offsets_; }
  const std::vector<std::uint32_t>& partners() const { return partners_; }

  struct Pair {
    int a, b;
  };
  const std::vector<Pair>& pairs() const { return pairs_; }

  /// Drive structure D with matrix elements 1/2 between single-flip partners.
  Eigen::MatrixXd drive_matrix() const {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(dim(), dim());
    for (Eigen::Index k = 0; k < dim(); ++k)
      for (auto p = offsets_[k]; p < offsets_[k + 1]; ++p) d(partners_[p], k) = 0.5;
    return d;
  }

  /// sum over occupied pairs of strength(a, b), with 0-based atom indices.
  Eigen::VectorXd pair_diagonal(const std::function<double(int, int)>& strength) const {
    std::vector<double> w(pairs_.size());
    for (std::size_t p = 0; p < pairs_.size(); ++p) w[p] = strength(pairs_[p].a, pairs_[p].b);
    return pair_diagonal(w);
  }

  /// Same, with strengths listed in pairs() order.
  Eigen::VectorXd pair_diagonal(const std::vector<double>& w) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(dim());
    for (Eigen::Index k = 0; k < dim(); ++k) {
      const BasisState s = basis_[static_cast<std::size_t>(k)];
      double acc = 0.0;
      for (std::size_t p = 0; p < pairs_.size(); ++p)
        if ((s >> pairs_[p].a & 1u) && (s >> pairs_[p].b & 1u)) acc += w[p];
      out[k] = acc;
    }
    return out;
  }

 private:
  Basis basis_;
  std::vector<std::uint32_t> offsets_;
  std::vector<std::uint32_t> partners_;
  Eigen::VectorXd n_r_;
  std::vector<Pair> pairs_;
};

/// Second-order shifts of the corrected PXP model.
struct LevelShifts {
  double s_b;   // Omega^2 / (4 (B - Delta))
  double s_2b;  // Omega^2 / (4 (2B - Delta))
};

inline void check_shift_resonance(double b, double delta) {
  const double tol = 1e-6 * std::abs(b);
  if (std::abs(delta - b) <= tol || std::abs(delta - 2.0 * b) <= tol)
    throw SingularShiftError("detuning resonant with B or 2B; second-order shifts diverge");
}

inline LevelShifts level_shifts(double omega, double delta, double b) {
  check_shift_resonance(b, delta);
  return {omega * omega / (4.0 * (b - delta)), omega * omega / (4.0 * (2.0 * b - delta))};
}

namespace detail {

/// Padded occupation with n_0 = n_{nu+1} = 0 (P = 1, Q = 0 outside the chain); site in 0..nu+1.
inline int occ(BasisState s, int nu, int site) {
  if (site < 1 || site > nu) return 0;
  return static_cast<int>(s >> (site - 1) & 1u);
}

}  // namespace detail

/// Chain model on a fixed basis; the Hamiltonian depends on (Omega, Delta) only.
class ModelBuilder {
 public:
  ModelBuilder(ModelKind kind, int nu, const InteractionConfig& interaction)
      : ModelBuilder(kind,
                     kind == ModelKind::FullVdw ? build_full_basis(nu) : build_blockade_basis(nu),
                     interaction) {}

  ModelBuilder(ModelKind kind, Basis basis, const InteractionConfig& interaction)
      : kind_(kind), interaction_(interaction),
        structure_(std::make_shared<ChainStructure>(std::move(basis))) {
    const bool constrained = structure_->basis().constrained();
    if (kind == ModelKind::FullVdw && constrained)
      throw MisuseError("the van der Waals model needs the unconstrained basis");
    if (kind != ModelKind::FullVdw && !constrained)
      throw MisuseError("blockade models need the blockade-constrained basis");
    drive_ = structure_->drive_matrix();
    const auto dim = structure_->dim();
    interaction_diag_ = Eigen::VectorXd::Zero(dim);
    if (kind == ModelKind::FullVdw) {
      interaction_diag_ = structure_->pair_diagonal(
          [&](int a, int b) { return interaction_.pair_strength(b - a); });
    } else if (kind == ModelKind::PxpPlusCorrections) {
      build_correction_structure();
    }
  }

  ModelKind kind() const { return kind_; }
  const InteractionConfig& interaction() const { return interaction_; }
  const ChainStructure& structure() const { return *structure_; }
  std::shared_ptr<const ChainStructure> shared_structure() const { return structure_; }
  const Basis& basis() const { return structure_->basis(); }
  Eigen::Index dim() const { return structure_->dim(); }

  const Eigen::MatrixXd& drive() const { return drive_; }
  const Eigen::VectorXd& interaction_diagonal() const { return interaction_diag_; }

  OperatorMatrix hamiltonian(Frequency omega, Frequency delta) const {
    const double w = omega.value();
    const double d = delta.value();
    Eigen::MatrixXd h = w * drive_;
    h.diagonal() += -d * structure_->rydberg_numbers() + interaction_diag_;
    if (kind_ == ModelKind::PxpPlusCorrections) {
      const auto sh = level_shifts(w, d, interaction_.b_nn().value());
      h -= sh.s_b * sb_ + sh.s_2b * s2b_;
    }
    return wrap(h);
  }

  /// dH/dDelta.
  OperatorMatrix d_delta(Frequency omega, Frequency delta) const {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim(), dim());
    h.diagonal() = -structure_->rydberg_numbers();
    if (kind_ == ModelKind::PxpPlusCorrections) {
      const double w = omega.value(), d = delta.value(), b = interaction_.b_nn().value();
      check_shift_resonance(b, d);
      const double ds_b = w * w / (4.0 * (b - d) * (b - d));
      const double ds_2b = w * w / (4.0 * (2.0 * b - d) * (2.0 * b - d));
      h -= ds_b * sb_ + ds_2b * s2b_;
    }
    return wrap(h);
  }

  /// dH/dOmega.
  OperatorMatrix d_omega(Frequency omega, Frequency delta) const {
    Eigen::MatrixXd h = drive_;
    if (kind_ == ModelKind::PxpPlusCorrections) {
      const double w = omega.value(), d = delta.value(), b = interaction_.b_nn().value();
      check_shift_resonance(b, d);
      h -= (w / (2.0 * (b - d))) * sb_ + (w / (2.0 * (2.0 * b - d))) * s2b_;
    }
    return wrap(h);
  }

 private:
  OperatorMatrix wrap(const Eigen::MatrixXd& h) const {
    return {h.cast<cplx>(), structure_->tag(), true};
  }

  // B_2 sum Q_i Q_{i+2};  S_B: P P Q + Q P P shifts and hopping across (i, i+1);  S_2B: Q P Q.
  void build_correction_structure() {
    const Basis& basis = structure_->basis();
    const int nu = basis.nu();
    const auto dim = structure_->dim();
    const double b2 = interaction_.pair_strength(2);
    sb_ = Eigen::MatrixXd::Zero(dim, dim);
    s2b_ = Eigen::MatrixXd::Zero(dim, dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
      const BasisState s = basis[static_cast<std::size_t>(k)];
      auto q = [&](int site) { return detail::occ(s, nu, site); };
      auto p = [&](int site) { return 1 - detail::occ(s, nu, site); };
      for (int i = 1; i + 2 <= nu; ++i)
        if (q(i) && q(i + 2)) interaction_diag_[k] += b2;
      for (int i = 1; i <= nu; ++i) {
        sb_(k, k) += p(i - 1) * p(i) * q(i + 1) + q(i - 1) * p(i) * p(i + 1);
        s2b_(k, k) += q(i - 1) * p(i) * q(i + 1);
      }
      // Hopping runs over every bond (i, i+1), i = 1..nu-1, so that the
      // operator stays mirror symmetric with P_{nu+1} = 1.
      for (int i = 1; i + 1 <= nu; ++i) {
        if (!p(i - 1) || !p(i + 2) || q(i) == q(i + 1)) continue;
        const BasisState t = s ^ (BasisState{1} << (i - 1)) ^ (BasisState{1} << i);
        if (basis.contains(t)) sb_(static_cast<Eigen::Index>(basis.index_of(t)), k) += 1.0;
      }
    }
  }

  ModelKind kind_;
  InteractionConfig interaction_;
  std::shared_ptr<ChainStructure> structure_;
  Eigen::MatrixXd drive_;
  Eigen::VectorXd interaction_diag_;
  Eigen::MatrixXd sb_;
  Eigen::MatrixXd s2b_;
};

inline OperatorMatrix build_pxp(Frequency omega, Frequency delta, const Basis& basis) {
  if (!basis.constrained()) throw MisuseError("PXP Hamiltonian needs a blockade-constrained basis");
  return ModelBuilder(ModelKind::Pxp, basis, InteractionConfig(0.0, 1.0))
      .hamiltonian(omega, delta);
}

inline OperatorMatrix build_vdw(Frequency omega, Frequency delta,
                                const InteractionConfig& interaction, const Basis& basis) {
  if (basis.constrained()) throw MisuseError("van der Waals Hamiltonian needs the full basis");
  return ModelBuilder(ModelKind::FullVdw, basis, interaction).hamiltonian(omega, delta);
}

inline OperatorMatrix build_corrections(Frequency omega, Frequency delta,
                                        const InteractionConfig& interaction,
                                        const Basis& basis) {
  if (!basis.constrained())
    throw MisuseError("corrected PXP Hamiltonian needs a blockade-constrained basis");
  return ModelBuilder(ModelKind::PxpPlusCorrections, basis, interaction).hamiltonian(omega, delta);
}

inline OperatorMatrix build_model(ModelKind kind, Frequency omega, Frequency delta,
                                  const InteractionConfig& interaction, int nu) {
  return ModelBuilder(kind, nu, interaction).hamiltonian(omega, delta);
}

// ---------------------------------------------------------------------------
// AFM manifold of an even chain in the regime Delta >> Omega.

enum class AfmMode { Pxp, VdwDegenerate, VdwSplit };

/// Configuration |a_j>, j = 1..nu/2+1: excitations on sites 1,3,..,2j-3 and 2j,2j+2,..,nu
/// (1-based). |a_1> = |1r1r..r>, |a_{nu/2+1}> = |r1r1..1>, the rest carry one r11r defect.
inline BasisState afm_configuration(int nu, int j) {
  if (nu % 2 != 0) throw DomainError("AFM manifold is defined for even nu");
  if (j < 1 || j > nu / 2 + 1) throw DomainError("configuration index out of range");
  BasisState s = 0;
  for (int site = 1; site <= 2 * j - 3; site += 2) s |= BasisState{1} << (site - 1);
  for (int site = 2 * j; site <= nu; site += 2) s |= BasisState{1} << (site - 1);
  return s;
}

class AfmManifoldModel {
 public:
  AfmManifoldModel(int nu, Frequency omega, Frequency delta, const InteractionConfig& interaction)
      : nu_(nu) {
    if (nu < 2 || nu % 2 != 0) throw DomainError("AFM manifold model needs even nu >= 2");
    const double w = omega.value();
    delta_ = delta.value();
    if (delta_ == 0.0) throw SingularShiftError("S = Omega^2 / (4 Delta) diverges at Delta = 0");
    b2_ = interaction.pair_strength(2);
    s_ = w * w / (4.0 * delta_);
    const auto sh = level_shifts(w, delta_, interaction.b_nn().value());
    s_b_ = sh.s_b;
    s_2b_ = sh.s_2b;
  }

  int nu() const { return nu_; }
  int n_rydberg() const { return nu_ / 2; }
  double s() const { return s_; }
  double s_b() const { return s_b_; }
  double s_2b() const { return s_2b_; }
  double j_hop() const { return s_ + s_b_; }
  double b2() const { return b2_; }

  /// -nu_r (Delta + S) + (nu_r - 1)(B_2 - S_2B) - S_B
  double e_ordered() const {
    const int r = n_rydberg();
    return -r * (delta_ + s_) + (r - 1) * (b2_ - s_2b_) - s_b_;
  }
  /// -nu_r (Delta + S) + (nu_r - 2)(B_2 - S_2B) - 2 S_B
  double e_defect() const {
    const int r = n_rydberg();
    return -r * (delta_ + s_) + (r - 2) * (b2_ - s_2b_) - 2.0 * s_b_;
  }
  /// Diagonal of the PXP manifold model.
  double e_pxp() const { return -n_rydberg() * (delta_ + s_); }

  /// Degenerate when the hopping bandwidth exceeds the ordered/defect offset.
  AfmMode regime() const {
    return 4.0 * std::abs(j_hop()) >= std::abs(e_ordered() - e_defect()) ? AfmMode::VdwDegenerate
                                                                         : AfmMode::VdwSplit;
  }

 private:
  int nu_;
  double delta_ = 0.0;
  double b2_ = 0.0;
  double s_ = 0.0, s_b_ = 0.0, s_2b_ = 0.0;
};

/// Tridiagonal defect-hopping Hamiltonian.
///  Pxp:           size nu/2+1, diagonal -nu_r (Delta + S), hopping -S.
///  VdwDegenerate: size nu/2+1, ends at E_o, bulk at E_d, hopping -J.
///  VdwSplit:      size nu/2-1 over the bulk-defect configurations a_2..a_{nu/2}, diagonal E_d, hopping -J.
inline OperatorMatrix build_afm_effective(int nu, Frequency omega, Frequency delta,
                                          const InteractionConfig& interaction, AfmMode mode) {
  const AfmManifoldModel m(nu, omega, delta, interaction);
  const int full = nu / 2 + 1;
  const int n = mode == AfmMode::VdwSplit ? full - 2 : full;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  const double hop = mode == AfmMode::Pxp ? -m.s() : -m.j_hop();
  for (int i = 0; i < n; ++i) {
    double diag = mode == AfmMode::Pxp ? m.e_pxp() : m.e_defect();
    if (mode == AfmMode::VdwDegenerate && (i == 0 || i == n - 1)) diag = m.e_ordered();
    h(i, i) = diag;
    if (i + 1 < n) h(i, i + 1) = h(i + 1, i) = hop;
  }
  return {h.cast<cplx>(), {nu, BasisKind::Blockade}, true};
}

// ---------------------------------------------------------------------------
// Decay.

/// Diagonal gamma * n_r(s).
inline OperatorMatrix decay_operator(const Basis& basis, Frequency gamma) {
  if (gamma.value() < 0.0) throw DomainError("decay rate must be non-negative");
  const auto dim = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXcd l = Eigen::MatrixXcd::Zero(dim, dim);
  for (Eigen::Index k = 0; k < dim; ++k)
    l(k, k) = gamma.value() * rydberg_count(basis[static_cast<std::size_t>(k)]);
  return {l, {basis.nu(), basis.kind()}, true};
}

/// H - (i/2) L.
inline OperatorMatrix effective_hamiltonian(const OperatorMatrix& h, const OperatorMatrix& l) {
  if (!(h.basis_tag == l.basis_tag) || h.dim() != l.dim())
    throw MisuseError("Hamiltonian and decay operator live on different bases");
  OperatorMatrix out = h;
  out.entries -= cplx(0.0, 0.5) * l.entries;
  out.hermitian = l.entries.cwiseAbs().maxCoeff() == 0.0 && h.hermitian;
  return out;
}

}  // namespace afmgate
