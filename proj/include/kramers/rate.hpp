#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "kramers/bath.hpp"
#include "kramers/constants.hpp"
#include "kramers/error.hpp"
#include "kramers/potential.hpp"
#include "kramers/units.hpp"

namespace kramers {

enum class RateMethod {
  analytic_full,
  analytic_low_friction,
  arrhenius,
  monte_carlo,
  fokker_planck,
};

inline std::string to_string(RateMethod m) {
  switch (m) {
    case RateMethod::analytic_full: return "analytic-full";
    case RateMethod::analytic_low_friction: return "analytic-low-friction";
    case RateMethod::arrhenius: return "arrhenius";
    case RateMethod::monte_carlo: return "monte-carlo";
    case RateMethod::fokker_planck: return "fokker-planck";
  }
  throw invalid_input("unknown rate method tag");
}

inline RateMethod rate_method_from_string(const std::string& s) {
  if (s == "analytic-full") return RateMethod::analytic_full;
  if (s == "analytic-low-friction") return RateMethod::analytic_low_friction;
  if (s == "arrhenius") return RateMethod::arrhenius;
  if (s == "monte-carlo") return RateMethod::monte_carlo;
  if (s == "fokker-planck") return RateMethod::fokker_planck;
  throw invalid_input("unknown rate method tag: " + s);
}

// Everything the analytic rate needs: well geometry in reduced units, the
// bath that sets D(T) and the friction, and the particle mass. The units
// member converts the bath's diffusion energy (eV) into reduced energy.
struct RateInputs {
  WellFeatures features;
  Bath bath;
  double mass = 1.0;
  ReducedUnits units{};
};

inline double reduced_diffusion_energy(const RateInputs& in) {
  return diffusion_energy(in.bath) / in.units.energy_scale_ev;
}

inline double reduced_gamma(const RateInputs& in) {
  return in.bath.gamma_reduced;
}

struct EscapeRateEstimate {
  double kappa = 0.0;
  RateMethod method = RateMethod::analytic_full;
  double uncertainty = 0.0; // standard error; 0 for analytic results
  std::map<std::string, double> diagnostics;
  std::vector<std::string> warnings;
};

// Positive root of alpha^2 - gamma*alpha - omega_b^2 = 0; the decay
// constant of the barrier-top boundary layer. Satisfies alpha - gamma > 0.
inline double alpha_root(double gamma, double omega_b) {
  if (!(omega_b > 0)) throw invalid_input("alpha_root: omega_b must be > 0");
  if (!(gamma >= 0)) throw invalid_input("alpha_root: gamma must be >= 0");
  return 0.5 * gamma + std::sqrt(0.25 * gamma * gamma + omega_b * omega_b);
}

// Normalized boundary-layer profile across the barrier top as a function of
// y = p - alpha*m*(x - x_b): a Gaussian integral running from -infinity to
// y, equal to (1 + erf(y * sqrt((alpha-gamma)/(2 m gamma D)))) / 2.
inline double boundary_layer_f(double y, const RateInputs& in) {
  double gamma = reduced_gamma(in);
  if (gamma == 0) throw error("boundary layer undefined at zero friction");
  double d = reduced_diffusion_energy(in);
  if (!(d > 0)) throw invalid_input("boundary_layer_f: D must be > 0");
  double alpha = alpha_root(gamma, in.features.omega_b);
  double scale = std::sqrt((alpha - gamma) / (2.0 * in.mass * gamma * d));
  return 0.5 * (1.0 + std::erf(y * scale));
}

// Steady probability flux over the barrier for a well distribution with
// normalization C (well bottom taken as the energy zero).
inline double barrier_flux(const RateInputs& in, double normalization) {
  double gamma = reduced_gamma(in);
  if (gamma == 0) throw error("boundary layer undefined at zero friction");
  double d = reduced_diffusion_energy(in);
  if (!(d > 0)) throw invalid_input("barrier_flux: D must be > 0");
  double alpha = alpha_root(gamma, in.features.omega_b);
  return normalization * std::sqrt((alpha - gamma) / alpha) * d *
         std::exp(-in.features.delta_u / d);
}

// Population of the harmonic well for the same normalization C.
inline double well_population(const RateInputs& in, double normalization) {
  double d = reduced_diffusion_energy(in);
  if (!(d > 0)) throw invalid_input("well_population: D must be > 0");
  return normalization * 2.0 * M_PI * d / in.features.omega_a;
}

namespace detail {

inline void attach_common_diagnostics(EscapeRateEstimate& est,
                                      const RateInputs& in, double d) {
  est.diagnostics["D"] = d;
  est.diagnostics["barrier_ratio"] = in.features.delta_u / d;
  est.diagnostics["omega_ratio"] = in.features.omega_b / in.features.omega_a;
  if (in.features.delta_u / d < 3.0) {
    est.warnings.push_back(
        "barrier ratio dU/D below 3: escape is not rare, the quasi-stationary "
        "rate formula is unreliable");
  }
}

} // namespace detail

// Escape rate in reduced inverse time:
//   kappa = (omega_a / 2 pi omega_b) (sqrt(gamma^2/4 + omega_b^2) - gamma/2)
//           * exp(-dU/D).
// gamma = 0 uses the low-friction limit (omega_a/2pi) exp(-dU/D), which is
// the same number; a classical bath at T = 0 gives exactly zero.
inline EscapeRateEstimate rate_full(const RateInputs& in) {
  const WellFeatures& f = in.features;
  if (!(f.delta_u > 0) || !(f.omega_a > 0) || !(f.omega_b > 0)) {
    throw invalid_input("rate_full: well features must be positive");
  }
  double gamma = reduced_gamma(in);
  if (!(gamma >= 0) || !std::isfinite(gamma)) {
    throw invalid_input("rate_full: gamma must be finite and >= 0");
  }
  double d = reduced_diffusion_energy(in);

  EscapeRateEstimate est;
  if (d == 0) {
    // Classical bath at T = 0: no fluctuations, no escape.
    est.kappa = 0.0;
    est.method = RateMethod::arrhenius;
    est.diagnostics["D"] = 0.0;
    return est;
  }

  double alpha = alpha_root(gamma, f.omega_b);
  double prefactor;
  if (gamma == 0) {
    prefactor = f.omega_a / (2.0 * M_PI);
    est.method = in.bath.zero_point ? RateMethod::analytic_low_friction
                                    : RateMethod::arrhenius;
  } else {
    prefactor = f.omega_a / (2.0 * M_PI * f.omega_b) * (alpha - gamma);
    est.method = in.bath.zero_point ? RateMethod::analytic_full
                                    : RateMethod::arrhenius;
  }
  est.kappa = prefactor * std::exp(-f.delta_u / d);
  est.diagnostics["alpha"] = alpha;
  est.diagnostics["prefactor"] = prefactor;
  detail::attach_common_diagnostics(est, in, d);
  return est;
}

// Physical-units escape rate (s^-1) in the low-friction form used for
// fitting measured curves: kappa(T) = (omega_a/2pi) exp(-dU/D(T)) with
// omega_a = hbar_omega_a / hbar and D(T) from the zero-point bath (or k_B T
// for the classical comparison curve).
inline EscapeRateEstimate rate_paper_fit(double temperature_k,
                                         double hbar_omega_a_ev,
                                         double delta_u_ev, bool zero_point) {
  if (!(hbar_omega_a_ev > 0)) {
    throw invalid_input("rate_paper_fit: hbar_omega_a_eV must be > 0");
  }
  if (!(delta_u_ev > 0)) {
    throw invalid_input("rate_paper_fit: delta_u_eV must be > 0");
  }
  Bath bath;
  bath.temperature_k = temperature_k;
  bath.hbar_omega_a_ev = hbar_omega_a_ev;
  bath.zero_point = zero_point;
  validate(bath);

  double omega_a = hbar_omega_a_ev / constants::hbar_ev_s; // rad/s
  double d = diffusion_energy(bath);                        // eV

  EscapeRateEstimate est;
  est.method =
      zero_point ? RateMethod::analytic_low_friction : RateMethod::arrhenius;
  est.diagnostics["omega_a_rad_s"] = omega_a;
  est.diagnostics["prefactor"] = omega_a / (2.0 * M_PI);
  est.diagnostics["D"] = d;
  if (d == 0) {
    est.kappa = 0.0; // classical bath at T = 0
    return est;
  }
  est.diagnostics["barrier_ratio"] = delta_u_ev / d;
  est.kappa = omega_a / (2.0 * M_PI) * std::exp(-delta_u_ev / d);
  return est;
}

} // namespace kramers
