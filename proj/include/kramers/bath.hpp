#pragma once

#include <cmath>
#include <string>

#include "kramers/constants.hpp"
#include "kramers/error.hpp"

namespace kramers {

// Thermal environment seen by the oscillating degree of freedom. When
// zero_point is set the effective diffusion energy includes the T=0
// half-quantum of the mode at hbar_omega_a_ev; otherwise the bath is purely
// classical and the diffusion energy is k_B T.
struct Bath {
  double temperature_k = 0.0;
  double hbar_omega_a_ev = 0.0;
  double gamma_reduced = 0.0; // friction in units of omega_a
  bool zero_point = true;
};

inline void validate(const Bath& b) {
  if (!std::isfinite(b.temperature_k) || b.temperature_k < 0) {
    throw invalid_input("bath: temperature_K must be finite and >= 0");
  }
  if (!std::isfinite(b.hbar_omega_a_ev) || b.hbar_omega_a_ev <= 0) {
    throw invalid_input("bath: hbar_omega_a_eV must be finite and > 0");
  }
  if (!std::isfinite(b.gamma_reduced) || b.gamma_reduced < 0) {
    throw invalid_input("bath: gamma_reduced must be finite and >= 0");
  }
}

// coth(a) for a > 0 without overflow or catastrophic cancellation.
inline double stable_coth(double a) {
  if (!(a > 0)) throw invalid_input("stable_coth: argument must be > 0");
  if (a > 20.0) return 1.0 + 2.0 * std::exp(-2.0 * a);
  if (a < 1e-6) return 1.0 / a + a / 3.0;
  return 1.0 / std::tanh(a);
}

// Energy density of the radiation field per unit angular frequency,
// zero-point term plus Planck term, in eV * s / m^3.
inline double spectral_density(double omega_rad_s, double temperature_k) {
  if (!(omega_rad_s > 0)) {
    throw invalid_input("spectral_density: omega must be > 0");
  }
  if (!(temperature_k >= 0)) {
    throw invalid_input("spectral_density: temperature must be >= 0");
  }
  namespace c = constants;
  double hw = c::hbar_ev_s * omega_rad_s;
  double prefac = omega_rad_s * omega_rad_s /
                  (M_PI * M_PI * std::pow(c::speed_of_light_m_per_s, 3));
  double planck = 0.0;
  if (temperature_k > 0) {
    double x = hw / (c::k_boltzmann_ev_per_k * temperature_k);
    // expm1 keeps the classical x -> 0 limit accurate.
    planck = hw / std::expm1(x);
  }
  return prefac * (0.5 * hw + planck);
}

// Effective diffusion energy D(T) in eV. With zero-point fluctuations,
// D = (hbar omega_a / 2) coth(hbar omega_a / 2 k_B T), which tends to the
// half-quantum at T = 0 and to k_B T classically.
inline double diffusion_energy(const Bath& b) {
  validate(b);
  namespace c = constants;
  if (!b.zero_point) return c::k_boltzmann_ev_per_k * b.temperature_k;
  double half = 0.5 * b.hbar_omega_a_ev;
  if (b.temperature_k == 0) return half;
  double a = half / (c::k_boltzmann_ev_per_k * b.temperature_k);
  return half * stable_coth(a);
}

struct RadiationGamma {
  double gamma_reduced; // gamma / omega_a
  bool weak_coupling;   // true when the reduced friction is < 1e-2
};

// Radiation-reaction friction of an oscillating charge, gamma =
// 2 e^2 omega_a^2 / (3 m c^3), expressed in units of omega_a:
// gamma / omega_a = (2/3)(e^2/hbar c)(hbar omega_a / m c^2). The coupling
// e^2/hbar c is passed in so charges other than e are representable; the
// energies are the mode quantum and the rest mass, both in eV.
inline RadiationGamma radiation_gamma(double charge_squared_over_hbar_c,
                                      double hbar_omega_a_ev,
                                      double mass_energy_ev) {
  if (!(charge_squared_over_hbar_c > 0)) {
    throw invalid_input("radiation_gamma: coupling must be > 0");
  }
  if (!(hbar_omega_a_ev > 0)) {
    throw invalid_input("radiation_gamma: hbar_omega_a_eV must be > 0");
  }
  if (!(mass_energy_ev > 0)) {
    throw invalid_input("radiation_gamma: mass_energy_eV must be > 0");
  }
  double g = (2.0 / 3.0) * charge_squared_over_hbar_c *
             (hbar_omega_a_ev / mass_energy_ev);
  return {g, g <= 1e-2};
}

} // namespace kramers
