#include <catch_amalgamated.hpp>

#include "afmgate/gate.hpp"
#include "afmgate/presets.hpp"

using namespace afmgate;
using namespace afmgate::literals;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("average fidelity", "[gate]") {
  const GateDiagonal cz = gate_target(3);
  CHECK_THAT(average_fidelity(cz), WithinAbs(1.0, 1e-15));
  CHECK_THAT(average_fidelity(gate_target(4), gate_target(4)), WithinAbs(1.0, 1e-15));
  // identity against CZ: |Tr M| = 2, Tr MM^dagger = 4 -> (4 + 4) / 20
  CHECK_THAT(average_fidelity(GateDiagonal::Ones()), WithinAbs(0.4, 1e-15));
  // uniform damping r: (4 r^2 + 16 r^2) / 20
  CHECK_THAT(average_fidelity(GateDiagonal(0.9 * cz)), WithinAbs(0.81, 1e-15));
  // global phase drops out
  CHECK_THAT(average_fidelity(GateDiagonal(std::polar(1.0, 0.3) * cz)), WithinAbs(1.0, 1e-15));
  // phase error theta on |11>: (4 + |3 + e^{i theta}|^2) / 20
  const double th = 0.1;
  GateDiagonal u = cz;
  u[3] *= std::polar(1.0, th);
  CHECK_THAT(average_fidelity(u), WithinAbs((4 + std::norm(3.0 + std::polar(1.0, th))) / 20, 1e-15));
  CHECK_THROWS_AS(average_fidelity(GateDiagonal(1.1 * cz)), DomainError);

  Eigen::Matrix4cd full = cz.asDiagonal();
  CHECK_THAT(average_fidelity(full, cz), WithinAbs(1.0, 1e-15));
  full(0, 1) = 0.1;
  CHECK_THROWS_AS(average_fidelity(full, cz), DomainError);
}

TEST_CASE("gate inputs and targets", "[gate]") {
  const auto in = gate_inputs(5);
  CHECK(in[0].first_atom == 1);
  CHECK(in[0].nu == 3);
  CHECK(in[1].nu == 4);
  CHECK(in[2].first_atom == 0);
  CHECK(in[2].nu == 4);
  CHECK(in[3].nu == 5);
  CHECK(gate_target(5)[3] == cplx(-1.0));
  CHECK(gate_target(6)[0] == cplx(-1.0));
  CHECK(gate_target(6)[3] == cplx(1.0));
}

TEST_CASE("amplitudes to report", "[gate]") {
  GateDiagonal a;
  const cplx ph = std::polar(1.0, 1.2);
  a << 0.99 * ph, 0.98 * ph, 0.98 * ph, -0.97 * ph;
  const auto r = gate_from_amplitudes(3, a);
  CHECK(std::abs(r.global_phase_removed - ph) < 1e-15);
  CHECK(std::abs(r.u[1] - cplx(0.98)) < 1e-15);
  CHECK(std::abs(r.u[3] - cplx(-0.97)) < 1e-15);
  CHECK_THAT(r.infidelity, WithinAbs(1.0 - r.fidelity, 0.0));
}

TEST_CASE("closed-form error model", "[gate]") {
  const auto c = paper_c_table();
  const auto g = 0.5_kHz;
  // 1 - exp(-nu_bar Gamma tau_tot / 2), nu_bar(5) = 9/4, tau_tot = 2
  CHECK_THAT(decay_error(5, g, 2.0), WithinRel(-std::expm1(-0.5 * 2.25 * g.value() * 2.0), 1e-15));
  CHECK_THAT(decay_error(5, g, 2.0), WithinRel(7.043659794041692e-3, 1e-12));
  CHECK_THAT(decay_error(3, g, 2.0), WithinRel(3.919290271836726e-3, 1e-12));

  const PulseProfile p(8_MHz, 20_MHz, 1.0);
  const double x = p.omega0().value() * p.omega0().value() / p.delta0().value();
  CHECK_THAT(lz_probability_c(0.28, p), WithinRel(std::exp(-0.28 * x), 1e-15));
  CHECK_THAT(leakage_error(5, c, p).dominant, WithinRel(3.589529888867309e-3, 1e-12));
  CHECK_THAT(leakage_error(4, c, p).dominant, WithinRel(2 * std::exp(-0.43 * x), 1e-14));
  CHECK_FALSE(leakage_error(5, c, p).full.has_value());
  CHECK_THROWS_AS(leakage_error(9, c, p), ConfigError);

  // Landau-Zener exponent: kappa form and c form agree
  const double kappa = 0.7;
  const auto gap = Frequency::from_rad_per_us(kappa * p.omega0().value());
  CHECK_THAT(lz_probability(gap, p.delta0(), 1.0), WithinRel(lz_probability_c(kappa_to_c(kappa), p), 1e-14));

  CHECK(dominant_channel(5).mu == 1.0);
  CHECK(dominant_channel(5).nu == 5);
  CHECK(dominant_channel(6).mu == 2.0);
  CHECK(dominant_channel(6).nu == 5);
}

TEST_CASE("optimal duration minimises the model", "[gate]") {
  const auto c = paper_c_table();
  const auto g = 0.5_kHz;
  const std::pair<int, std::pair<double, double>> frozen[] = {{3, {0.8902659822802743, 3.950281453369833e-3}},
                                                                {4, {0.9315207645512582, 5.757204046306713e-3}},
                                                                {5, {1.186584896464328, 9.643054742726970e-3}},
                                                                {6, {1.274062649767717, 1.254170933127508e-2}}};
  for (const auto& [n, ref] : frozen) {
    const auto opt = optimal_tau(n, c, 8_MHz, 20_MHz, g);
    CHECK_THAT(opt.tau_opt, WithinRel(ref.first, 1e-12));
    CHECK_THAT(opt.e_min, WithinRel(ref.second, 1e-12));
    // brute-force minimum of the linearised model nu_bar Gamma tau + mu p_LZ
    const auto ch = dominant_channel(n);
    auto model = [&](double tau) {
      const PulseProfile p(8_MHz, 20_MHz, tau);
      return mean_rydberg_number(n) * g.value() * tau + ch.mu * lz_probability_c(c.at(ch.nu), p);
    };
    double best_tau = 0, best = 1e300;
    for (int i = 1; i <= 300000; ++i) {
      const double tau = i * 1e-5;
      if (const double e = model(tau); e < best) best = e, best_tau = tau;
    }
    CHECK_THAT(opt.tau_opt, WithinAbs(best_tau, 2e-5));
    CHECK_THAT(opt.e_min, WithinRel(best, 1e-8));
  }
  CHECK_THROWS_AS(optimal_tau(5, c, 8_MHz, 20_MHz, Frequency{}), RegimeError);
  CHECK_THROWS_AS(optimal_tau(5, c, 8_MHz, 20_MHz, 5_MHz), RegimeError);
}

TEST_CASE("interaction-scaled minimum error", "[gate]") {
  const auto c = paper_c_table();
  const auto b = 45_MHz, g = 0.5_kHz;
  const double l1 = 8.0 / 45, l2 = 20.0 / 45;
  CHECK_THAT(e_min_vs_interaction(5, c, l1, l2, g, b), WithinRel(optimal_tau(5, c, 8_MHz, 20_MHz, g).e_min, 1e-12));
  CHECK_THROWS_AS(e_min_vs_interaction(5, c, 0.5, 0.4, g, b), DomainError);

  // B = C6 N^6 / L^6 equals C6 / a^6 when L = N a
  const double c6 = (45_MHz).value() * 4096.0;
  const double e = scaling_emin(20.0, 5, c6, g, 0.28 * 25, l1, l2, false);
  const double big_c = l2 / (2 * 0.28 * 25 * l1 * l1);
  CHECK_THAT(e, WithinRel(big_c * 125 * g.value() / (45_MHz).value(), 1e-12));
  CHECK(scaling_emin(20.0, 5, c6, g, 7.0, l1, l2, true) > e);
}

TEST_CASE("transfer error", "[gate]") {
  CHECK_THAT(transfer_error(45_MHz, -45_MHz, 50_MHz), WithinRel(7.91015625e-4, 1e-14));
  CHECK(transfer_error(45_MHz, 45_MHz, 50_MHz) == 0.0);
  CHECK_THAT(compensating_detuning(1_MHz, -1_MHz).mhz(), WithinRel(4.0, 1e-14));
  CHECK_THROWS_AS(transfer_error(45_MHz, 45_MHz, Frequency{}), DomainError);
}

TEST_CASE("assembled gate for N = 3", "[gate]") {
  const auto cfg = paper_protocol(3);
  const auto rep = assemble_gate(3, cfg);
  CHECK(std::abs(rep.per_input[1] - rep.per_input[2]) < 1e-8);
  CHECK(rep.fidelity > 0.99);
  CHECK(rep.u[3].real() < 0.0);
  GateOptions par;
  par.jobs = 2;
  const auto rep2 = assemble_gate(3, cfg, par);
  CHECK(rep2.u == rep.u);

  const auto m = error_model(3, cfg, paper_c_table());
  CHECK(m.e_decay == 0.0);
  CHECK_FALSE(m.tau_opt.has_value());
  const auto md = error_model(3, cfg.with_decay(true), paper_c_table());
  CHECK(md.e_decay > 0.0);
  CHECK(md.tau_opt.has_value());
}

TEST_CASE("leakage fit on a short duration grid", "[gate]") {
  const auto cfg = paper_protocol(3).with_steps(1000);
  std::vector<double> taus;
  for (double t = 0.2; t <= 1.0001; t += 0.2) taus.push_back(t);
  const auto fit = fit_c_nu(3, cfg, taus);
  CHECK(fit.points.size() == taus.size());
  for (const auto& pt : fit.points)
    CHECK(pt.used == (pt.e_leak > fit_window_low && pt.e_leak < fit_window_high));
  CHECK(fit.c > 0.3);
  CHECK(fit.c < 0.6);
  CHECK_THROWS_AS(fit_c_nu(4, cfg, taus), DomainError);
  CHECK_THROWS_AS(fit_c_nu(3, cfg, {0.2}), FitQualityError);
}
