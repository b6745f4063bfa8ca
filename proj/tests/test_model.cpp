#include <catch_amalgamated.hpp>

#include <cmath>

#include "afmgate/model.hpp"
#include "afmgate/presets.hpp"

using namespace afmgate;
using namespace afmgate::literals;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("frequency conversions", "[model]") {
  CHECK_THAT((8_MHz).value(), WithinRel(2.0 * M_PI * 8.0, 1e-15));
  CHECK_THAT((0.5_kHz).mhz(), WithinRel(5e-4, 1e-15));
  CHECK_THAT((20_MHz / 8_MHz), WithinRel(2.5, 1e-15));
  CHECK((-(3_MHz)).mhz() == -3.0);
}

TEST_CASE("pulse envelope and chirp", "[model]") {
  const PulseProfile p(8_MHz, 20_MHz, 1.0);
  CHECK(p.sigma() == 0.385);

  // independent evaluation of the flat-top super-Gaussian
  auto omega = [](double t) {
    const double sig = 0.385, e0 = std::exp(-std::pow(0.5 / sig, 8));
    return 2 * M_PI * 8 * (std::exp(-std::pow((t - 0.5) / sig, 8)) - e0) / (1 - e0);
  };
  for (double t : {0.0, 0.1, 0.25, 0.5, 0.6, 0.9, 1.0})
    CHECK_THAT(pulse_omega(p, t).value(), WithinAbs(omega(t), 1e-12));
  CHECK_THAT(pulse_omega(p, 0.25).value(), WithinRel(48.70092739821879, 1e-13));
  CHECK(pulse_omega(p, 0.25).value() == pulse_omega(p, 0.75).value());
  CHECK(pulse_omega(p, 0.0).value() == 0.0);
  CHECK(pulse_omega(p, 1.0).value() == 0.0);
  CHECK_THAT(pulse_omega(p, 0.5).value(), WithinRel((8_MHz).value(), 1e-14));

  CHECK_THAT(pulse_delta(p, 0.0).mhz(), WithinAbs(-20.0, 1e-12));
  CHECK_THAT(pulse_delta(p, 0.5).mhz(), WithinAbs(0.0, 1e-12));
  CHECK_THAT(pulse_delta(p, 1.0).mhz(), WithinAbs(20.0, 1e-12));

  const double h = 1e-5;
  for (double t : {0.2, 0.33, 0.7})
    CHECK_THAT(pulse_omega_rate(p, t), WithinRel((omega(t + h) - omega(t - h)) / (2 * h), 1e-6));

  CHECK_THROWS_AS(pulse_omega(p, -1e-3), DomainError);
  CHECK_THROWS_AS(pulse_delta(p, 1.001), DomainError);
}

TEST_CASE("rescaled pulse keeps the swept area", "[model]") {
  const PulseProfile p(8_MHz, 20_MHz, 1.0);
  const auto q = p.rescaled(2.0);
  CHECK_THAT(q.omega0().mhz(), WithinRel(16.0, 1e-15));
  CHECK_THAT(q.delta0().mhz(), WithinRel(40.0, 1e-15));
  CHECK_THAT(q.tau(), WithinRel(0.5, 1e-15));
  CHECK_THAT(q.sigma(), WithinRel(0.385 * 0.5, 1e-15));
  CHECK_THAT(pulse_omega(q, 0.125).value(), WithinRel(2.0 * pulse_omega(p, 0.25).value(), 1e-13));
}

TEST_CASE("pair interactions", "[model]") {
  const auto cfg = InteractionConfig::from_nearest_neighbor(45_MHz, 4.0);
  CHECK_THAT(interaction_strength(cfg, 1, 2).mhz(), WithinRel(45.0, 1e-14));
  CHECK_THAT(interaction_strength(cfg, 3, 1).mhz(), WithinRel(45.0 / 64.0, 1e-14));
  CHECK_THAT(interaction_strength(cfg, 1, 4).mhz(), WithinRel(45.0 / 729.0, 1e-14));
  CHECK_THAT(cfg.c6(), WithinRel((45_MHz).value() * 4096.0, 1e-14));
  CHECK_THROWS_AS(interaction_strength(cfg, 2, 2), DomainError);

  const auto cut = cfg.with_cutoff(2);
  CHECK(interaction_strength(cut, 1, 4).value() == 0.0);
  CHECK(interaction_strength(cut, 1, 3).value() == cfg.b2().value());

  const auto s2 = InteractionConfig::from_nearest_neighbor(45_MHz, 4.0, 2.0).second_step();
  CHECK_THAT(s2.b_nn().mhz(), WithinRel(-90.0, 1e-14));

  const ChainConfig chain(5, 4.0);
  CHECK_THROWS_AS(interaction_strength(chain, cfg, 1, 6), DomainError);
  CHECK_THROWS_AS(InteractionConfig(1.0, 4.0, -1.0), ConfigError);
  CHECK_THROWS_AS(InteractionConfig(1.0, 4.0, 1.0, 0), ConfigError);
}

TEST_CASE("protocol validation", "[model]") {
  const auto cfg = paper_protocol(5);
  CHECK(cfg.steps_per_pulse() == 32000);
  CHECK_THAT(cfg.total_time(), WithinRel(2.0, 1e-15));
  CHECK_THAT(paper_protocol(5, 1.0, ModelKind::FullVdw, false, 2.0).total_time(), WithinRel(1.5, 1e-15));
  CHECK_THROWS_AS(cfg.with_steps(500), ConfigError);
  CHECK_THROWS_AS(cfg.with_pulse(cfg.pulse(), 0.3e-3), ConfigError);
  CHECK_THROWS_AS(ChainConfig(2, 4.0), ConfigError);
  CHECK_THROWS_AS(cfg.with_chain(ChainConfig(5, 5.0)), ConfigError);
  CHECK(parse_model_kind("corrections") == ModelKind::PxpPlusCorrections);
  CHECK(to_string(ModelKind::Pxp) == "pxp");
  CHECK_THROWS(parse_model_kind("ising"));
}

TEST_CASE("mean Rydberg number over the four inputs", "[model]") {
  // (ceil((N-2)/2) + 2 ceil((N-1)/2) + ceil(N/2)) / 4
  for (int n = 3; n <= 12; ++n) {
    const double expect = ((n - 1) / 2 + 2 * (n / 2) + (n + 1) / 2) / 4.0;
    CHECK(mean_rydberg_number(n) == expect);
  }
  CHECK(mean_rydberg_number(8) == 3.75);
}
