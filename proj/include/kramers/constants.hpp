#pragma once

// CODATA values, fixed at compile time. Everything downstream quotes energies
// in eV, times in seconds, temperatures in Kelvin.
namespace kramers::constants {

inline constexpr double k_boltzmann_ev_per_k = 8.617333262e-5;
inline constexpr double hbar_ev_s = 6.582119569e-16;
inline constexpr double fine_structure = 7.2973525693e-3; // e^2 / hbar c
inline constexpr double speed_of_light_m_per_s = 2.99792458e8;

} // namespace kramers::constants
