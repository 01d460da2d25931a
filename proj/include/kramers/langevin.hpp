#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kramers/bath.hpp"
#include "kramers/error.hpp"
#include "kramers/parallel.hpp"
#include "kramers/potential.hpp"
#include "kramers/rng.hpp"
#include "kramers/units.hpp"

namespace kramers {

enum class InitialCondition { well_bottom_rest, well_thermal };

inline std::string to_string(InitialCondition ic) {
  switch (ic) {
    case InitialCondition::well_bottom_rest: return "well-bottom-rest";
    case InitialCondition::well_thermal: return "well-thermal";
  }
  throw invalid_input("unknown initial condition tag");
}

inline InitialCondition initial_condition_from_string(const std::string& s) {
  if (s == "well-bottom-rest") return InitialCondition::well_bottom_rest;
  if (s == "well-thermal") return InitialCondition::well_thermal;
  throw invalid_input("unknown initial condition tag: " + s);
}

struct SimulationConfig {
  Potential potential;
  Bath bath;
  double dt = 0.0;
  double absorb_at = 0.0;       // absorbing boundary x_c, must exceed x_b
  double max_time = 0.0;        // per-trajectory time cap
  std::uint64_t n_trajectories = 0;
  std::uint64_t seed = 0;
  InitialCondition initial_condition = InitialCondition::well_thermal;
  std::optional<double> reflect_at; // reflecting wall for equilibrium runs
  ReducedUnits units{};
};

struct PhaseState {
  double x = 0.0;
  double p = 0.0;
};

// Per-step constants of the splitting integrator: deterministic half-kick /
// half-drift around an exact Ornstein-Uhlenbeck momentum refresh, so the
// harmonic-well stationary momentum variance is m*D independent of dt.
struct StepCoefficients {
  double dt;
  double mass;
  double ou_decay;   // exp(-gamma dt)
  double noise_amp;  // sqrt((1 - ou_decay^2) m D)
};

inline StepCoefficients make_step_coefficients(double mass, double gamma,
                                               double diffusion_energy,
                                               double dt) {
  if (!(dt > 0)) throw invalid_input("step: dt must be > 0");
  if (!(mass > 0)) throw invalid_input("step: mass must be > 0");
  if (!(gamma >= 0) || !(diffusion_energy >= 0)) {
    throw invalid_input("step: gamma and D must be >= 0");
  }
  StepCoefficients c;
  c.dt = dt;
  c.mass = mass;
  c.ou_decay = std::exp(-gamma * dt);
  c.noise_amp =
      std::sqrt((1.0 - c.ou_decay * c.ou_decay) * mass * diffusion_energy);
  return c;
}

inline StepCoefficients make_step_coefficients(const SimulationConfig& cfg) {
  double d = diffusion_energy(cfg.bath) / cfg.units.energy_scale_ev;
  return make_step_coefficients(cfg.potential.mass, cfg.bath.gamma_reduced, d,
                                cfg.dt);
}

// One integrator step; noise is a standard normal draw (ignored at gamma=0,
// where the scheme reduces to velocity Verlet).
inline PhaseState step(PhaseState s, const Potential& pot,
                       const StepCoefficients& c, double noise) {
  if (!std::isfinite(s.x) || !std::isfinite(s.p)) {
    throw error("trajectory diverged");
  }
  double half_dt = 0.5 * c.dt;
  s.p -= half_dt * evaluate(pot, s.x).u_prime;
  s.x += half_dt * s.p / c.mass;
  s.p = c.ou_decay * s.p + c.noise_amp * noise;
  s.x += half_dt * s.p / c.mass;
  s.p -= half_dt * evaluate(pot, s.x).u_prime;
  return s;
}

inline PhaseState step(PhaseState s, const SimulationConfig& cfg,
                       double noise) {
  return step(s, cfg.potential, make_step_coefficients(cfg), noise);
}

struct FptHistogramBin {
  double t_lo = 0.0;
  double t_hi = 0.0;
  std::uint64_t count = 0;
};

struct FptStatistics {
  std::uint64_t n_escaped = 0;
  std::uint64_t n_censored = 0;  // hit max_time without crossing absorb_at
  std::uint64_t n_diverged = 0;  // discarded non-finite trajectories
  double mean_fpt = 0.0;
  double kappa = 0.0;        // 1 / mean_fpt
  double kappa_stderr = 0.0; // delta-method standard error
  bool biased = false;       // censored fraction exceeded 10%
  std::vector<FptHistogramBin> histogram;
  std::map<std::string, double> diagnostics;
  std::vector<std::string> warnings;
};

namespace detail {

inline void check_dt_bound(double dt, double frequency_scale) {
  double bound = 0.05 / frequency_scale;
  if (!(dt > 0)) throw invalid_input("simulation: dt must be > 0");
  if (dt > bound) {
    throw invalid_input("simulation: dt exceeds stability bound 0.05/max(" +
                        std::to_string(frequency_scale) + ") = " +
                        std::to_string(bound));
  }
}

inline PhaseState draw_initial(const SimulationConfig& cfg,
                               const WellFeatures& f, double d,
                               std::mt19937_64& rng) {
  if (cfg.initial_condition == InitialCondition::well_bottom_rest || d == 0) {
    return {f.x_a, 0.0};
  }
  // Thermal state of the harmonic well, restricted to the well side of the
  // barrier.
  double sigma_x = std::sqrt(d / (cfg.potential.mass * f.omega_a * f.omega_a));
  double sigma_p = std::sqrt(cfg.potential.mass * d);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    double x = f.x_a + sigma_x * normal(rng);
    if (x < f.x_b) return {x, sigma_p * normal(rng)};
  }
  throw error("could not sample a well-restricted initial condition");
}

} // namespace detail

inline void validate(const SimulationConfig& cfg, const WellFeatures& f) {
  validate(cfg.potential);
  validate(cfg.bath);
  validate(cfg.units);
  double freq_scale =
      std::max({f.omega_a, f.omega_b, cfg.bath.gamma_reduced});
  detail::check_dt_bound(cfg.dt, freq_scale);
  if (!(cfg.absorb_at > f.x_b)) {
    throw invalid_input(
        "simulation: absorbing boundary must lie beyond the barrier top");
  }
  if (cfg.n_trajectories < 1) {
    throw invalid_input("simulation: n_trajectories must be >= 1");
  }
  if (!(cfg.max_time > 0)) {
    throw invalid_input("simulation: max_time must be > 0");
  }
}

// First-passage Monte Carlo: independent trajectories from the initial
// condition until absorption at x >= absorb_at or the time cap. The per
// trajectory RNG stream is derived from (seed, index), so the result is
// bit-identical for any thread count.
inline FptStatistics estimate_rate(const SimulationConfig& cfg) {
  WellFeatures f = analyze(cfg.potential);
  validate(cfg, f);
  double d = diffusion_energy(cfg.bath) / cfg.units.energy_scale_ev;
  StepCoefficients coeff = make_step_coefficients(
      cfg.potential.mass, cfg.bath.gamma_reduced, d, cfg.dt);
  const std::uint64_t n = cfg.n_trajectories;
  const std::uint64_t max_steps =
      static_cast<std::uint64_t>(std::ceil(cfg.max_time / cfg.dt));

  enum : std::int8_t { escaped = 0, censored = 1, diverged = 2 };
  std::vector<double> fpt(n, 0.0);
  std::vector<std::int8_t> status(n, censored);

  parallel_for(n, [&](std::size_t i) {
    auto rng = stream_for(cfg.seed, i);
    std::normal_distribution<double> normal(0.0, 1.0);
    PhaseState s;
    try {
      s = detail::draw_initial(cfg, f, d, rng);
      for (std::uint64_t k = 0; k < max_steps; ++k) {
        s = step(s, cfg.potential, coeff, normal(rng));
        if (s.x >= cfg.absorb_at) {
          fpt[i] = (k + 1) * cfg.dt;
          status[i] = escaped;
          return;
        }
      }
      status[i] = censored;
    } catch (const error&) {
      status[i] = diverged;
    }
  });

  FptStatistics st;
  double sum = 0.0, sum_sq = 0.0, max_t = 0.0;
  for (std::uint64_t i = 0; i < n; ++i) {
    switch (status[i]) {
      case escaped:
        ++st.n_escaped;
        sum += fpt[i];
        sum_sq += fpt[i] * fpt[i];
        max_t = std::max(max_t, fpt[i]);
        break;
      case censored: ++st.n_censored; break;
      default: ++st.n_diverged; break;
    }
  }
  if (st.n_escaped == 0) {
    throw error("no escapes observed; raise max_time or lower barrier");
  }
  double ne = static_cast<double>(st.n_escaped);
  st.mean_fpt = sum / ne;
  st.kappa = 1.0 / st.mean_fpt;
  if (st.n_escaped >= 2) {
    double var = (sum_sq - sum * sum / ne) / (ne - 1.0);
    var = std::max(var, 0.0);
    double se_mean = std::sqrt(var / ne);
    st.kappa_stderr = st.kappa * st.kappa * se_mean;
  }
  double censored_fraction = static_cast<double>(st.n_censored) / n;
  if (censored_fraction > 0.10) {
    st.biased = true;
    st.warnings.push_back(
        "more than 10% of trajectories were censored at max_time; the rate "
        "estimate is biased high");
  }
  if (st.n_diverged > 0) {
    st.warnings.push_back(std::to_string(st.n_diverged) +
                          " trajectories diverged and were discarded");
  }
  double barrier_ratio = d > 0 ? f.delta_u / d
                               : std::numeric_limits<double>::infinity();
  if (barrier_ratio < 3.0) {
    st.warnings.push_back(
        "barrier ratio dU/D below 3: escape is not rare, kappa = 1/mean FPT "
        "is only a sanity value");
  }
  st.diagnostics["absorb_at"] = cfg.absorb_at;
  st.diagnostics["barrier_ratio"] = barrier_ratio;
  st.diagnostics["censored_fraction"] = censored_fraction;
  st.diagnostics["D"] = d;

  // 50-bin histogram of the observed first-passage times.
  const int n_bins = 50;
  if (max_t > 0) {
    st.histogram.resize(n_bins);
    double width = max_t / n_bins;
    for (int b = 0; b < n_bins; ++b) {
      st.histogram[b].t_lo = b * width;
      st.histogram[b].t_hi = (b + 1) * width;
    }
    for (std::uint64_t i = 0; i < n; ++i) {
      if (status[i] != escaped) continue;
      int b = std::min(static_cast<int>(fpt[i] / width), n_bins - 1);
      ++st.histogram[b].count;
    }
  }
  return st;
}

struct EquilibriumMoments {
  double mean_energy = 0.0;       // <p^2/2m + U(x) - U(x_min)>
  double position_variance = 0.0;
  double momentum_variance = 0.0;
};

// Long-run sample moments in (or restricted to) a potential well; with the
// zero-point bath the mean energy converges to D(T). Works on potentials
// with no barrier (pure harmonic), unlike the rate estimators.
inline EquilibriumMoments equilibrium_moments(const SimulationConfig& cfg,
                                              double burn_in,
                                              std::uint64_t samples) {
  validate(cfg.potential);
  validate(cfg.bath);
  if (samples == 0) throw invalid_input("equilibrium_moments: samples == 0");

  // Deepest minimum of U; no barrier required.
  double bound = detail::uprime_root_bound(cfg.potential);
  auto roots = detail::critical_points(cfg.potential, -bound, bound);
  double x_min = 0.0, u_min = std::numeric_limits<double>::infinity();
  bool found = false;
  for (double r : roots) {
    if (second_derivative(cfg.potential, r) > 0) {
      double u = evaluate(cfg.potential, r).u;
      if (u < u_min) {
        u_min = u;
        x_min = r;
        found = true;
      }
    }
  }
  if (!found) throw error("potential has no minimum to equilibrate in");

  double omega0 =
      std::sqrt(second_derivative(cfg.potential, x_min) / cfg.potential.mass);
  detail::check_dt_bound(cfg.dt,
                         std::max(omega0, cfg.bath.gamma_reduced));

  double d = diffusion_energy(cfg.bath) / cfg.units.energy_scale_ev;
  StepCoefficients coeff = make_step_coefficients(
      cfg.potential.mass, cfg.bath.gamma_reduced, d, cfg.dt);
  auto rng = stream_for(cfg.seed, 0);
  std::normal_distribution<double> normal(0.0, 1.0);

  PhaseState s{x_min, 0.0};
  auto advance = [&] {
    s = step(s, cfg.potential, coeff, normal(rng));
    if (cfg.reflect_at && s.x > *cfg.reflect_at) {
      s.x = 2.0 * *cfg.reflect_at - s.x;
      s.p = -s.p;
    }
  };
  const auto burn_steps = static_cast<std::uint64_t>(burn_in / cfg.dt);
  for (std::uint64_t k = 0; k < burn_steps; ++k) advance();

  double sx = 0, sxx = 0, sp = 0, spp = 0, se = 0;
  for (std::uint64_t k = 0; k < samples; ++k) {
    advance();
    double dx = s.x - x_min;
    sx += dx;
    sxx += dx * dx;
    sp += s.p;
    spp += s.p * s.p;
    se += s.p * s.p / (2.0 * cfg.potential.mass) +
          (evaluate(cfg.potential, s.x).u - u_min);
  }
  double inv_n = 1.0 / static_cast<double>(samples);
  EquilibriumMoments m;
  m.mean_energy = se * inv_n;
  m.position_variance = sxx * inv_n - (sx * inv_n) * (sx * inv_n);
  m.momentum_variance = spp * inv_n - (sp * inv_n) * (sp * inv_n);
  return m;
}

} // namespace kramers
