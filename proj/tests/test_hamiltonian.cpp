#include <catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <random>

#include "afmgate/hamiltonian.hpp"
#include "afmgate/spectra.hpp"

using namespace afmgate;
using namespace afmgate::literals;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Eigen::VectorXd eigvals(const OperatorMatrix& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h.entries, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

// Reference builder of the corrected PXP model, written out term by term
// on padded occupation lists.
Eigen::MatrixXd reference_corrections(int nu, double w, double d, double b) {
  const auto basis = build_blockade_basis(nu);
  const auto dim = static_cast<Eigen::Index>(basis.size());
  const double sb = w * w / (4 * (b - d)), s2b = w * w / (4 * (2 * b - d)), b2 = b / 64;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index k = 0; k < dim; ++k) {
    const BasisState s = basis[static_cast<std::size_t>(k)];
    std::vector<int> n(static_cast<std::size_t>(nu + 2), 0);
    for (int i = 1; i <= nu; ++i) n[static_cast<std::size_t>(i)] = (s >> (i - 1)) & 1;
    auto Q = [&](int i) { return n[static_cast<std::size_t>(i)]; };
    auto P = [&](int i) { return 1 - n[static_cast<std::size_t>(i)]; };
    double diag = 0;
    for (int i = 1; i <= nu; ++i) diag -= d * Q(i);
    for (int i = 1; i <= nu - 2; ++i) diag += b2 * Q(i) * Q(i + 2);
    for (int i = 1; i <= nu; ++i) {
      diag -= sb * (P(i - 1) * P(i) * Q(i + 1) + Q(i - 1) * P(i) * P(i + 1));
      diag -= s2b * Q(i - 1) * P(i) * Q(i + 1);
    }
    h(k, k) = diag;
    for (int i = 1; i <= nu; ++i) {
      const BasisState t = s ^ (1u << (i - 1));
      if (basis.contains(t)) h(static_cast<Eigen::Index>(basis.index_of(t)), k) += w / 2;
    }
    for (int i = 1; i <= nu - 1; ++i) {
      if (!(P(i - 1) && P(i + 2)) || Q(i) == Q(i + 1)) continue;
      const BasisState t = s ^ (1u << (i - 1)) ^ (1u << i);
      h(static_cast<Eigen::Index>(basis.index_of(t)), k) -= sb;
    }
  }
  return h;
}

}  // namespace

TEST_CASE("two-atom matrices", "[hamiltonian]") {
  const double w = 3.0, d = 1.5, b = 40.0;
  const auto inter = InteractionConfig::from_nearest_neighbor(Frequency::from_rad_per_us(b));
  // basis order: 00, 10, 01 (bit 0 = leftmost atom)
  const auto pxp = build_pxp(Frequency::from_rad_per_us(w), Frequency::from_rad_per_us(d), build_blockade_basis(2));
  Eigen::Matrix3d expect;
  expect << 0, w / 2, w / 2, w / 2, -d, 0, w / 2, 0, -d;
  CHECK((pxp.entries.real() - expect).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(pxp.entries.imag().cwiseAbs().maxCoeff() == 0.0);

  const auto vdw = build_vdw(Frequency::from_rad_per_us(w), Frequency::from_rad_per_us(d), inter, build_full_basis(2));
  Eigen::Matrix4d e4;
  e4 << 0, w / 2, w / 2, 0, w / 2, -d, 0, w / 2, w / 2, 0, -d, w / 2, 0, w / 2, w / 2, -2 * d + b;
  CHECK((vdw.entries.real() - e4).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("corrected PXP matches the term-by-term reference", "[hamiltonian]") {
  for (int nu : {2, 3, 4, 5, 6, 7}) {
    const double w = 2.0, d = 7.0, b = 30.0;
    const auto inter = InteractionConfig::from_nearest_neighbor(Frequency::from_rad_per_us(b));
    const auto h = build_corrections(Frequency::from_rad_per_us(w), Frequency::from_rad_per_us(d), inter,
                                     build_blockade_basis(nu));
    CHECK((h.entries.real() - reference_corrections(nu, w, d, b)).cwiseAbs().maxCoeff() < 1e-13);
    CHECK(h.hermiticity_defect() == 0.0);
  }
}

TEST_CASE("models commute with chain inversion", "[hamiltonian]") {
  const auto inter = InteractionConfig::from_nearest_neighbor(45_MHz, 4.0);
  for (auto kind : {ModelKind::Pxp, ModelKind::FullVdw, ModelKind::PxpPlusCorrections})
    for (int nu : {3, 4, 5, 6}) {
      const ModelBuilder m(kind, nu, inter);
      const auto h = m.hamiltonian(8_MHz, 5_MHz).entries;
      const auto perm = m.basis().inversion_permutation();
      Eigen::MatrixXcd ph(h.rows(), h.cols());
      for (Eigen::Index i = 0; i < h.rows(); ++i)
        for (Eigen::Index j = 0; j < h.cols(); ++j)
          ph(static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)]),
             static_cast<Eigen::Index>(perm[static_cast<std::size_t>(j)])) = h(i, j);
      CHECK((ph - h).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("spectrum mirror symmetry under (Delta, B) -> (-Delta, -B)", "[hamiltonian]") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int nu = 1 + trial % 6;
    const auto w = Frequency::from_mhz(5 + 5 * u(gen));
    const auto d = Frequency::from_mhz(30 * u(gen));
    const auto b = Frequency::from_mhz(60 * u(gen));
    const auto inter = InteractionConfig::from_nearest_neighbor(b, 4.0);
    const auto minus = InteractionConfig::from_nearest_neighbor(-b, 4.0);
    const auto e1 = eigvals(build_model(ModelKind::FullVdw, w, d, inter, nu));
    const auto e2 = eigvals(build_model(ModelKind::FullVdw, w, -d, minus, nu));
    CHECK((e1 + e2.reverse()).cwiseAbs().maxCoeff() < 1e-10);
    const auto p1 = eigvals(build_model(ModelKind::Pxp, w, d, inter, nu));
    const auto p2 = eigvals(build_model(ModelKind::Pxp, w, -d, inter, nu));
    CHECK((p1 + p2.reverse()).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("strong nearest-neighbour blockade reproduces PXP", "[hamiltonian]") {
  // With only nearest-neighbour coupling, the low Fibonacci block of the vdW
  // spectrum approaches PXP with O(Omega^2 / B) corrections.
  const int nu = 5;
  const double big = 1e5;
  const auto inter = InteractionConfig::from_nearest_neighbor(Frequency::from_rad_per_us(big), 1.0, 1.0, 1);
  const auto w = 8_MHz, d = 3_MHz;
  const auto ev = eigvals(build_model(ModelKind::FullVdw, w, d, inter, nu));
  const auto ep = eigvals(build_model(ModelKind::Pxp, w, d, inter, nu));
  const double bound = 4 * w.value() * w.value() / big;
  for (Eigen::Index k = 0; k < ep.size(); ++k) CHECK(std::abs(ev[k] - ep[k]) < bound);
}

TEST_CASE("parameter derivatives match finite differences", "[hamiltonian]") {
  const auto inter = InteractionConfig::from_nearest_neighbor(45_MHz, 4.0);
  const double h = 1e-5;
  for (auto kind : {ModelKind::Pxp, ModelKind::FullVdw, ModelKind::PxpPlusCorrections}) {
    const ModelBuilder m(kind, 4, inter);
    const double w = 30.0, d = 60.0;
    auto H = [&](double a, double b) {
      return m.hamiltonian(Frequency::from_rad_per_us(a), Frequency::from_rad_per_us(b)).entries;
    };
    const Eigen::MatrixXcd fd_d = (H(w, d + h) - H(w, d - h)) / (2 * h);
    const Eigen::MatrixXcd fd_w = (H(w + h, d) - H(w - h, d)) / (2 * h);
    const auto fw = Frequency::from_rad_per_us(w), fd = Frequency::from_rad_per_us(d);
    CHECK((m.d_delta(fw, fd).entries - fd_d).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((m.d_omega(fw, fd).entries - fd_w).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("level shifts and their singularities", "[hamiltonian]") {
  const auto sh = level_shifts(2.0, 10.0, 30.0);
  CHECK_THAT(sh.s_b, WithinRel(4.0 / 80.0, 1e-15));
  CHECK_THAT(sh.s_2b, WithinRel(4.0 / 200.0, 1e-15));
  CHECK_THROWS_AS(level_shifts(2.0, 30.0, 30.0), SingularShiftError);
  CHECK_THROWS_AS(level_shifts(2.0, 60.0 + 1e-6, 30.0), SingularShiftError);
  const auto inter = InteractionConfig::from_nearest_neighbor(Frequency::from_rad_per_us(30.0));
  CHECK_THROWS_AS(build_model(ModelKind::PxpPlusCorrections, Frequency::from_rad_per_us(1.0),
                              Frequency::from_rad_per_us(30.0), inter, 4),
                  SingularShiftError);
  CHECK_THROWS_AS(AfmManifoldModel(4, Frequency::from_rad_per_us(1.0), Frequency{}, inter), SingularShiftError);
}

TEST_CASE("basis and model must agree", "[hamiltonian]") {
  const auto inter = InteractionConfig::from_nearest_neighbor(45_MHz);
  CHECK_THROWS_AS(ModelBuilder(ModelKind::FullVdw, build_blockade_basis(4), inter), MisuseError);
  CHECK_THROWS_AS(ModelBuilder(ModelKind::Pxp, build_full_basis(4), inter), MisuseError);
  CHECK_THROWS_AS(build_vdw(1_MHz, 1_MHz, inter, build_blockade_basis(3)), MisuseError);
}

TEST_CASE("AFM manifold energies", "[hamiltonian]") {
  const auto w = Frequency::from_rad_per_us(1.0), d = Frequency::from_rad_per_us(10.0);
  const auto inter = InteractionConfig::from_nearest_neighbor(Frequency::from_rad_per_us(30.0));
  const AfmManifoldModel m(6, w, d, inter);
  const double s = 1.0 / 40, sb = 1.0 / 80, s2b = 1.0 / 200, b2 = 30.0 / 64;
  CHECK_THAT(m.s(), WithinRel(s, 1e-15));
  CHECK_THAT(m.j_hop(), WithinRel(s + sb, 1e-15));
  CHECK_THAT(m.e_ordered(), WithinAbs(-3 * (10 + s) + 2 * (b2 - s2b) - sb, 1e-12));
  CHECK_THAT(m.e_defect(), WithinAbs(-3 * (10 + s) + (b2 - s2b) - 2 * sb, 1e-12));
  CHECK_THAT(m.e_ordered() - m.e_defect(), WithinAbs((b2 - s2b) + sb, 1e-12));

  // nu = 4 PXP: -2(Delta + S) -+ sqrt(2) S and -2(Delta + S)
  const auto e = eigvals(build_afm_effective(4, w, d, inter, AfmMode::Pxp));
  CHECK_THAT(e[0], WithinAbs(-2 * (10 + s) - std::sqrt(2.0) * s, 1e-13));
  CHECK_THAT(e[1], WithinAbs(-2 * (10 + s), 1e-13));
  CHECK_THAT(e[2], WithinAbs(-2 * (10 + s) + std::sqrt(2.0) * s, 1e-13));

  CHECK(to_bitstring(afm_configuration(4, 1), 4) == "0101");
  CHECK(to_bitstring(afm_configuration(4, 2), 4) == "1001");
  CHECK(to_bitstring(afm_configuration(4, 3), 4) == "1010");
  CHECK(to_bitstring(afm_configuration(6, 2), 6) == "100101");
  CHECK_THROWS_AS(afm_configuration(5, 1), DomainError);
}

TEST_CASE("decay operator makes the generator non-Hermitian", "[hamiltonian]") {
  const auto basis = build_blockade_basis(4);
  const auto h = build_pxp(8_MHz, 2_MHz, basis);
  const auto l = decay_operator(basis, 0.5_kHz);
  for (Eigen::Index k = 0; k < l.dim(); ++k)
    CHECK_THAT(l.entries(k, k).real(), WithinRel((0.5_kHz).value() * rydberg_count(basis[static_cast<std::size_t>(k)]), 1e-15));
  const auto heff = effective_hamiltonian(h, l);
  CHECK_FALSE(heff.hermitian);
  CHECK(effective_hamiltonian(h, decay_operator(basis, Frequency{})).hermitian);
  CHECK_THROWS_AS(eig_sorted(heff), MisuseError);
  CHECK_THROWS_AS(effective_hamiltonian(h, decay_operator(build_blockade_basis(5), 0.5_kHz)), MisuseError);
}
