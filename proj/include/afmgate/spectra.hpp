#pragma once

// Adiabatic spectra: sorted eigensystems, gauge-tracked scans over the
// detuning, non-adiabatic couplings eta, minimum gaps, and the closed-form
// AFM-manifold bands.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "afmgate/basis.hpp"
#include "afmgate/errors.hpp"
#include "afmgate/hamiltonian.hpp"
#include "afmgate/model.hpp"
#include "afmgate/parallel.hpp"

namespace afmgate {

struct EigenSystem {
  Eigen::VectorXd values;    // ascending
  Eigen::MatrixXcd vectors;  // column k belongs to values[k]
};

inline EigenSystem eig_sorted(const OperatorMatrix& h) {
  if (!h.hermitian || h.hermiticity_defect() > 1e-12)
    throw MisuseError("eig_sorted needs a Hermitian matrix");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h.entries);
  if (solver.info() != Eigen::Success) throw NumericalError("eigensolver did not converge");
  EigenSystem out{solver.eigenvalues(), solver.eigenvectors()};
  const double norm = std::max(h.entries.cwiseAbs().maxCoeff() * std::sqrt(double(h.dim())), 1e-300);
  const Eigen::MatrixXcd residual = h.entries * out.vectors - out.vectors * out.values.asDiagonal();
  for (Eigen::Index k = 0; k < residual.cols(); ++k)
    if (residual.col(k).norm() > 1e-10 * norm) throw NumericalError("eigenpair residual too large");
  const Eigen::MatrixXcd gram = out.vectors.adjoint() * out.vectors;
  if ((gram - Eigen::MatrixXcd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() > 1e-10)
    throw NumericalError("eigenvectors not orthonormal");
  return out;
}

enum class Symmetry { Symmetric, Antisymmetric, Mixed };

inline const char* to_string(Symmetry s) {
  switch (s) {
    case Symmetry::Symmetric: return "S";
    case Symmetry::Antisymmetric: return "A";
    case Symmetry::Mixed: return "M";
  }
  return "?";
}

/// <v|I|v> for a state given in basis order.
inline double inversion_expectation(const Eigen::VectorXcd& v, const std::vector<std::size_t>& perm) {
  cplx acc = 0.0;
  for (std::size_t k = 0; k < perm.size(); ++k)
    acc += std::conj(v[static_cast<Eigen::Index>(perm[k])]) * v[static_cast<Eigen::Index>(k)];
  return acc.real();
}

inline Symmetry classify_symmetry(const Eigen::VectorXcd& v, const Basis& basis) {
  const double x = inversion_expectation(v, basis.inversion_permutation());
  if (std::abs(x) < 1.0 - 1e-6) return Symmetry::Mixed;
  return x > 0.0 ? Symmetry::Symmetric : Symmetry::Antisymmetric;
}

struct ScanOptions {
  /// false: Omega held at Omega0 across the grid. true: Omega follows the
  /// pulse envelope at the time t(Delta) of the linear chirp.
  bool follow_envelope = false;
  int jobs = 1;
};

struct SpectrumScan {
  std::vector<double> delta_grid;
  std::vector<double> omega_grid;
  std::vector<Eigen::VectorXd> eigenvalues;
  std::vector<Eigen::MatrixXcd> eigenvectors;
  /// Sorted index at point i-1 of the branch continued by sorted index k at point i.
  std::vector<std::vector<int>> predecessor;
  /// eta_{1k} and eta_{mk}; empty for k = l and at degeneracies.
  std::vector<std::vector<std::optional<double>>> eta_first;
  std::vector<std::vector<std::optional<double>>> eta_last;
  std::vector<std::vector<Symmetry>> symmetry;

  std::size_t points() const { return delta_grid.size(); }
  Eigen::Index levels() const { return eigenvalues.empty() ? 0 : eigenvalues.front().size(); }
};

namespace detail {

/// Rotate every degenerate cluster of eigenvectors onto inversion eigenstates.
inline void split_degenerate_by_inversion(EigenSystem& es, const std::vector<std::size_t>& perm,
                                          double tol) {
  const Eigen::Index m = es.values.size();
  Eigen::Index start = 0;
  while (start < m) {
    Eigen::Index end = start + 1;
    while (end < m && es.values[end] - es.values[end - 1] < tol) ++end;
    const Eigen::Index size = end - start;
    if (size > 1) {
      Eigen::MatrixXcd block = es.vectors.middleCols(start, size);
      Eigen::MatrixXcd inv_block(block.rows(), size);
      for (std::size_t k = 0; k < perm.size(); ++k)
        inv_block.row(static_cast<Eigen::Index>(perm[k])) = block.row(static_cast<Eigen::Index>(k));
      const Eigen::MatrixXcd c = block.adjoint() * inv_block;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> s(0.5 * (c + c.adjoint()));
      es.vectors.middleCols(start, size) = block * s.eigenvectors();
    }
    start = end;
  }
}

inline std::optional<double> eta_entry(const Eigen::MatrixXcd& dt_h, const Eigen::VectorXd& e,
                                       Eigen::Index l, Eigen::Index k, double tol, double norm) {
  if (l == k) return std::nullopt;
  const double gap = e[k] - e[l];
  if (std::abs(gap) < tol) return std::nullopt;
  const double amp = std::abs(dt_h(l, k)) / gap;
  return amp * amp * norm;
}

}  // namespace detail

/// Delta swept uniformly over [-Delta0, Delta0].
inline SpectrumScan scan_spectrum(const ModelBuilder& model, const PulseProfile& pulse,
                                  int grid_size, const ScanOptions& opts = {}) {
  if (grid_size < 3) throw DomainError("spectrum scan needs at least 3 grid points");
  const double d0 = pulse.delta0().value();
  if (d0 == 0.0) throw DomainError("spectrum scan needs a nonzero chirp amplitude");
  const double beta = pulse.beta();
  const double tau = pulse.tau();
  const double omega0 = pulse.omega0().value();
  const double degeneracy_tol = 1e-9 * (omega0 != 0.0 ? std::abs(omega0) : std::abs(d0));
  const auto perm = model.basis().inversion_permutation();

  SpectrumScan scan;
  const auto n = static_cast<std::size_t>(grid_size);
  scan.delta_grid.resize(n);
  scan.omega_grid.resize(n);
  std::vector<double> omega_rate(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = -d0 + 2.0 * d0 * static_cast<double>(i) / static_cast<double>(n - 1);
    scan.delta_grid[i] = d;
    if (opts.follow_envelope) {
      const double t = std::clamp(0.5 * tau + d / beta, 0.0, tau);
      scan.omega_grid[i] = pulse_omega(pulse, t).value();
      omega_rate[i] = pulse_omega_rate(pulse, t);
    } else {
      scan.omega_grid[i] = omega0;
    }
  }

  struct Point {
    EigenSystem es;
    Eigen::MatrixXcd dt_h;  // <alpha_l| dH/dt |alpha_k>
  };
  auto points = parallel_map(n, opts.jobs, [&](std::size_t i) {
    const auto w = Frequency::from_rad_per_us(scan.omega_grid[i]);
    const auto d = Frequency::from_rad_per_us(scan.delta_grid[i]);
    Point p{eig_sorted(model.hamiltonian(w, d)), {}};
    detail::split_degenerate_by_inversion(p.es, perm, degeneracy_tol);
    Eigen::MatrixXcd dh = beta * model.d_delta(w, d).entries;
    if (omega_rate[i] != 0.0) dh += omega_rate[i] * model.d_omega(w, d).entries;
    p.dt_h = p.es.vectors.adjoint() * dh * p.es.vectors;
    return p;
  });

  // Sequential gauge pass: continue each state from its best-overlap predecessor
  // and make that overlap real positive.
  const Eigen::Index m = points.front().es.values.size();
  scan.predecessor.assign(n, std::vector<int>(static_cast<std::size_t>(m)));
  for (Eigen::Index k = 0; k < m; ++k) scan.predecessor[0][static_cast<std::size_t>(k)] = static_cast<int>(k);
  for (std::size_t i = 1; i < n; ++i) {
    const Eigen::MatrixXcd ov = points[i - 1].es.vectors.adjoint() * points[i].es.vectors;
    for (Eigen::Index k = 0; k < m; ++k) {
      Eigen::Index best = 0;
      ov.col(k).cwiseAbs().maxCoeff(&best);
      scan.predecessor[i][static_cast<std::size_t>(k)] = static_cast<int>(best);
      const cplx o = ov(best, k);
      if (std::abs(o) > 0.0) {
        const cplx phase = std::conj(o) / std::abs(o);
        points[i].es.vectors.col(k) *= phase;
        points[i].dt_h.col(k) *= phase;
        points[i].dt_h.row(k) *= std::conj(phase);
      }
    }
  }

  const double eta_norm = tau / d0;
  for (std::size_t i = 0; i < n; ++i) {
    auto& p = points[i];
    std::vector<std::optional<double>> first(static_cast<std::size_t>(m)), last(static_cast<std::size_t>(m));
    std::vector<Symmetry> sym(static_cast<std::size_t>(m));
    for (Eigen::Index k = 0; k < m; ++k) {
      first[static_cast<std::size_t>(k)] = detail::eta_entry(p.dt_h, p.es.values, 0, k, degeneracy_tol, std::abs(eta_norm));
      last[static_cast<std::size_t>(k)] = detail::eta_entry(p.dt_h, p.es.values, m - 1, k, degeneracy_tol, std::abs(eta_norm));
      const Eigen::VectorXcd v = p.es.vectors.col(k);
      const double x = inversion_expectation(v, perm);
      sym[static_cast<std::size_t>(k)] = std::abs(x) < 1.0 - 1e-6 ? Symmetry::Mixed
                                         : x > 0.0                ? Symmetry::Symmetric
                                                                  : Symmetry::Antisymmetric;
    }
    scan.eigenvalues.push_back(std::move(p.es.values));
    scan.eigenvectors.push_back(std::move(p.es.vectors));
    scan.eta_first.push_back(std::move(first));
    scan.eta_last.push_back(std::move(last));
    scan.symmetry.push_back(std::move(sym));
  }
  return scan;
}

struct GapReport {
  int nu = 0;
  double delta_at_min = 0.0;
  double gap = 0.0;
  double kappa = 0.0;
  int partner_index = 0;  // 1-based level index k of E_k - E_1
};

/// k = 2 for odd nu, nu/2 + 2 for even nu.
inline int gap_partner_index(int nu) { return nu % 2 ? 2 : nu / 2 + 2; }

/// min over Delta in [-Delta0, Delta0] of E_k - E_1 at Omega = Omega0.
inline GapReport min_gap(const ModelBuilder& model, const PulseProfile& pulse, int grid_size = 201) {
  const int nu = model.basis().nu();
  const int k = gap_partner_index(nu);
  if (k > model.dim()) throw DomainError("basis too small for the gap partner level");
  if (grid_size < 3) throw DomainError("gap search needs at least 3 grid points");
  const double d0 = std::abs(pulse.delta0().value());
  const auto w = pulse.omega0();
  auto gap_at = [&](double d) {
    const auto es = eig_sorted(model.hamiltonian(w, Frequency::from_rad_per_us(d)));
    return es.values[k - 1] - es.values[0];
  };
  std::vector<double> grid(static_cast<std::size_t>(grid_size)), gaps(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid[i] = -d0 + 2.0 * d0 * static_cast<double>(i) / static_cast<double>(grid.size() - 1);
    gaps[i] = gap_at(grid[i]);
  }
  const auto imin = static_cast<std::size_t>(std::min_element(gaps.begin(), gaps.end()) - gaps.begin());
  double lo = grid[imin == 0 ? 0 : imin - 1];
  double hi = grid[std::min(imin + 1, grid.size() - 1)];
  // Golden-section on the directly evaluated gap inside the bracketing cells.
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = gap_at(x1), f2 = gap_at(x2);
  while (hi - lo > 1e-10 * std::max(d0, 1.0)) {
    if (f1 < f2) {
      hi = x2; x2 = x1; f2 = f1;
      x1 = hi - g * (hi - lo); f1 = gap_at(x1);
    } else {
      lo = x1; x1 = x2; f1 = f2;
      x2 = lo + g * (hi - lo); f2 = gap_at(x2);
    }
  }
  GapReport r;
  r.nu = nu;
  r.partner_index = k;
  r.delta_at_min = 0.5 * (lo + hi);
  r.gap = gap_at(r.delta_at_min);
  if (gaps[imin] < r.gap) {
    r.delta_at_min = grid[imin];
    r.gap = gaps[imin];
  }
  if (!(r.gap > 0.0)) throw NumericalError("gap closed; branch tracking failed");
  r.kappa = r.gap / std::abs(w.value());
  return r;
}

// ---------------------------------------------------------------------------

struct AfmLevel {
  std::string label;              // "aleph_k" or "ordered_+" / "ordered_-"
  double energy = 0.0;
  Eigen::VectorXd coefficients;   // over |a_1> .. |a_{nu/2+1}>
};

/// Closed-form AFM-manifold levels sorted by energy.
inline std::vector<AfmLevel> afm_analytic_spectrum(int nu, Frequency omega, Frequency delta,
                                                   const InteractionConfig& interaction, AfmMode mode) {
  const AfmManifoldModel m(nu, omega, delta, interaction);
  const int full = nu / 2 + 1;
  std::vector<AfmLevel> out;
  const double pi = std::numbers::pi;
  if (mode == AfmMode::VdwSplit) {
    const int n = full - 2;
    for (int k = 1; k <= n; ++k) {
      AfmLevel lv{"aleph_" + std::to_string(k), m.e_defect() - 2.0 * m.j_hop() * std::cos(k * pi / (n + 1)),
                  Eigen::VectorXd::Zero(full)};
      for (int j = 1; j <= n; ++j)
        lv.coefficients[j] = std::sqrt(2.0 / (n + 1)) * std::sin(k * j * pi / (n + 1));
      out.push_back(std::move(lv));
    }
    for (int sign : {+1, -1}) {
      AfmLevel lv{sign > 0 ? "ordered_+" : "ordered_-", m.e_ordered(), Eigen::VectorXd::Zero(full)};
      lv.coefficients[0] = 1.0 / std::sqrt(2.0);
      lv.coefficients[full - 1] = sign / std::sqrt(2.0);
      out.push_back(std::move(lv));
    }
  } else {
    const double base = mode == AfmMode::Pxp ? m.e_pxp() : m.e_defect();
    const double hop = mode == AfmMode::Pxp ? m.s() : m.j_hop();
    for (int k = 1; k <= full; ++k) {
      AfmLevel lv{"aleph_" + std::to_string(k), base - 2.0 * hop * std::cos(k * pi / (full + 1)),
                  Eigen::VectorXd::Zero(full)};
      for (int j = 1; j <= full; ++j)
        lv.coefficients[j - 1] = std::sqrt(2.0 / (full + 1)) * std::sin(k * j * pi / (full + 1));
      out.push_back(std::move(lv));
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const AfmLevel& a, const AfmLevel& b) { return a.energy < b.energy; });
  return out;
}

/// Embed manifold coefficients into a chain basis.
inline Eigen::VectorXcd embed_afm_state(const Eigen::VectorXd& coefficients, const Basis& basis) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis.size()));
  for (Eigen::Index j = 0; j < coefficients.size(); ++j)
    v[static_cast<Eigen::Index>(basis.index_of(afm_configuration(basis.nu(), static_cast<int>(j) + 1)))] =
        coefficients[j];
  return v;
}

}  // namespace afmgate
