#pragma once

// The operating point used throughout the paper's figures:
// Omega0 = 2pi x 8 MHz, Delta0 = 2pi x 20 MHz, |B| = 2pi x 45 MHz, a = 4 um,
// Gamma_r = Gamma_r' = 2pi x 0.5 kHz.

#include "afmgate/model.hpp"
#include "afmgate/units.hpp"

namespace afmgate {

struct PaperParameters {
  static constexpr double omega0_mhz = 8.0;
  static constexpr double delta0_mhz = 20.0;
  static constexpr double b_mhz = 45.0;
  static constexpr double spacing_um = 4.0;
  static constexpr double gamma_khz = 0.5;
};

inline ProtocolConfig paper_protocol(int n_atoms, double tau_us = 1.0, ModelKind model = ModelKind::FullVdw,
                                     bool include_decay = false, double lambda = 1.0) {
  using P = PaperParameters;
  const ChainConfig chain(n_atoms, P::spacing_um);
  const auto inter = InteractionConfig::from_nearest_neighbor(Frequency::from_mhz(P::b_mhz), P::spacing_um, lambda);
  const PulseProfile pulse(Frequency::from_mhz(P::omega0_mhz), Frequency::from_mhz(P::delta0_mhz), tau_us);
  const DecayConfig decay(Frequency::from_khz(P::gamma_khz), Frequency::from_khz(P::gamma_khz));
  return ProtocolConfig(chain, inter, pulse, decay, model, std::nullopt, include_decay);
}

}  // namespace afmgate
