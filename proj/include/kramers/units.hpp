#pragma once

#include <cmath>

#include "kramers/error.hpp"

namespace kramers {

// Simulation cores run in reduced units (typically m = 1, omega_a = 1).
// ReducedUnits records how many physical units one reduced unit is worth.
struct ReducedUnits {
  double energy_scale_ev = 1.0;  // eV per reduced energy unit
  double time_scale_s = 1.0;     // seconds per reduced time unit
  double length_scale_m = 1.0;   // meters per reduced length unit

  double mass_scale() const {
    return energy_scale_ev * time_scale_s * time_scale_s /
           (length_scale_m * length_scale_m);
  }
  double momentum_scale() const {
    return energy_scale_ev * time_scale_s / length_scale_m;
  }
};

inline void validate(const ReducedUnits& u) {
  if (!(u.energy_scale_ev > 0) || !(u.time_scale_s > 0) ||
      !(u.length_scale_m > 0)) {
    throw invalid_input("ReducedUnits: all scales must be strictly positive");
  }
  if (!std::isfinite(u.mass_scale()) || !(u.mass_scale() > 0)) {
    throw invalid_input("ReducedUnits: derived mass scale is not finite");
  }
}

enum class Dimension {
  energy,
  time,
  length,
  frequency,
  rate,
  mass,
  momentum,
  position,
};

// Physical units per reduced unit for the given dimension.
inline double unit_scale(Dimension dim, const ReducedUnits& u) {
  switch (dim) {
    case Dimension::energy:
      return u.energy_scale_ev;
    case Dimension::time:
      return u.time_scale_s;
    case Dimension::length:
    case Dimension::position:
      return u.length_scale_m;
    case Dimension::frequency: // rad/s and 1/s both scale as inverse time
    case Dimension::rate:
      return 1.0 / u.time_scale_s;
    case Dimension::mass:
      return u.mass_scale();
    case Dimension::momentum:
      return u.momentum_scale();
  }
  throw invalid_input("unknown dimension tag");
}

inline double to_reduced(double value, Dimension dim, const ReducedUnits& u) {
  validate(u);
  return value / unit_scale(dim, u);
}

inline double to_physical(double value, Dimension dim, const ReducedUnits& u) {
  validate(u);
  return value * unit_scale(dim, u);
}

} // namespace kramers
