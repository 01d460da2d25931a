#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "kramers/bath.hpp"
#include "kramers/error.hpp"
#include "kramers/potential.hpp"
#include "kramers/units.hpp"

namespace kramers {

// Inputs of the phase-space solver: the full potential (the grid needs
// U'(x) pointwise, not just the well features), the bath, and the unit
// system that converts the bath's diffusion energy to reduced energy.
struct FpProblem {
  Potential potential;
  Bath bath;
  ReducedUnits units{};
};

inline double reduced_diffusion_energy(const FpProblem& pr) {
  return diffusion_energy(pr.bath) / pr.units.energy_scale_ev;
}

struct GridSpec {
  double x_min = 0.0;
  double x_max = 0.0;
  double p_max = 0.0;
  int nx = 256;
  int np = 256;
};

inline void validate(const GridSpec& g) {
  if (!(g.x_min < g.x_max)) {
    throw invalid_input("grid: x_min must be < x_max");
  }
  if (!(g.p_max > 0)) throw invalid_input("grid: p_max must be > 0");
  if (g.nx < 4 || g.np < 4) {
    throw invalid_input("grid: nx and np must be at least 4");
  }
}

// Finite-volume density W(x, p) on cell centers; x rows, p contiguous.
// Left x wall is closed (no flux), the right x wall either absorbs (mass
// accumulates in `absorbed`) or reflects; the p walls are closed, with the
// drift pointing inward there so the truncation is benign.
struct PhaseSpaceGrid {
  GridSpec spec;
  std::vector<double> w;
  double absorbed = 0.0;
  double time = 0.0;

  double dx() const { return (spec.x_max - spec.x_min) / spec.nx; }
  double dp() const { return 2.0 * spec.p_max / spec.np; }
  double x_center(int i) const { return spec.x_min + (i + 0.5) * dx(); }
  // Centered form: pairs (j, np-1-j) are exact negations, so odd moments of
  // symmetric data cancel to the last bit.
  double p_center(int j) const { return (j + 0.5 - 0.5 * spec.np) * dp(); }
  double& at(int i, int j) { return w[static_cast<std::size_t>(i) * spec.np + j]; }
  double at(int i, int j) const {
    return w[static_cast<std::size_t>(i) * spec.np + j];
  }

  double interior_mass() const {
    double s = 0.0;
    for (double v : w) s += v;
    return s * dx() * dp();
  }

  // Probability of the region x <= x_cut (cell centers), the well
  // population when x_cut is the barrier position.
  double mass_up_to(double x_cut) const {
    double s = 0.0;
    for (int i = 0; i < spec.nx; ++i) {
      if (x_center(i) > x_cut) break;
      for (int j = 0; j < spec.np; ++j) s += at(i, j);
    }
    return s * dx() * dp();
  }
};

inline PhaseSpaceGrid make_grid(const GridSpec& spec) {
  validate(spec);
  PhaseSpaceGrid g;
  g.spec = spec;
  g.w.assign(static_cast<std::size_t>(spec.nx) * spec.np, 0.0);
  return g;
}

// Default window: the well Gaussian fits with room to spare and the
// absorbing edge sits well beyond the barrier.
inline GridSpec default_grid_spec(const FpProblem& pr, int nx = 256,
                                  int np = 256) {
  WellFeatures f = analyze(pr.potential);
  double d = reduced_diffusion_energy(pr);
  if (!(d > 0)) throw invalid_input("default_grid_spec: D must be > 0");
  double sigma_x = std::sqrt(d / pr.potential.mass) / f.omega_a;
  double sigma_p = std::sqrt(pr.potential.mass * d);
  GridSpec spec;
  spec.x_min = f.x_a - 4.0 * sigma_x;
  spec.x_max = f.x_b + 2.0 * (f.x_b - f.x_a);
  spec.p_max = 6.0 * sigma_p;
  spec.nx = nx;
  spec.np = np;
  return spec;
}

// Thermal Gaussian of the harmonic well, truncated at the barrier and
// normalized to unit mass.
inline void init_well_gaussian(PhaseSpaceGrid& g, const FpProblem& pr) {
  WellFeatures f = analyze(pr.potential);
  double d = reduced_diffusion_energy(pr);
  if (!(d > 0)) throw invalid_input("init_well_gaussian: D must be > 0");
  double m = pr.potential.mass;
  for (int i = 0; i < g.spec.nx; ++i) {
    double x = g.x_center(i);
    double ux = 0.5 * m * f.omega_a * f.omega_a * (x - f.x_a) * (x - f.x_a);
    for (int j = 0; j < g.spec.np; ++j) {
      double p = g.p_center(j);
      double h = p * p / (2.0 * m) + ux;
      g.at(i, j) = x <= f.x_b ? std::exp(-h / d) : 0.0;
    }
  }
  double mass = g.interior_mass();
  if (!(mass > 0)) throw error("well gaussian has no support on the grid");
  for (double& v : g.w) v /= mass;
}

namespace detail {

inline double max_abs_uprime(const PhaseSpaceGrid& g, const Potential& pot) {
  double m = 0.0;
  for (int i = 0; i < g.spec.nx; ++i) {
    m = std::max(m, std::abs(evaluate(pot, g.x_center(i)).u_prime));
  }
  return m;
}

// Limited slope for second-order reconstruction; vanishes at extrema so
// face values stay within the neighbor range (keeps W nonnegative).
inline double limited_slope(double wl, double wc, double wr) {
  double d1 = wc - wl;
  double d2 = wr - wc;
  double prod = d1 * d2;
  return prod > 0 ? 2.0 * prod / (d1 + d2) : 0.0;
}

} // namespace detail

// Largest dt accepted by evolve: 0.5 min(dx m / p_max, dp / max|U'|,
// dp^2 / (2 m gamma D)); entries without a finite constraint are skipped.
inline double stability_limit(const PhaseSpaceGrid& g, const FpProblem& pr) {
  double m = pr.potential.mass;
  double limit = 0.5 * g.dx() * m / g.spec.p_max;
  double max_up = detail::max_abs_uprime(g, pr.potential);
  if (max_up > 0) limit = std::min(limit, 0.5 * g.dp() / max_up);
  double nu = m * pr.bath.gamma_reduced * reduced_diffusion_energy(pr);
  if (nu > 0) limit = std::min(limit, 0.25 * g.dp() * g.dp() / nu);
  return limit;
}

// Stricter step that also keeps the combined advection + diffusion update
// positivity-preserving (sum of per-direction Courant numbers <= 0.4).
inline double suggested_dt(const PhaseSpaceGrid& g, const FpProblem& pr) {
  double m = pr.potential.mass;
  double gamma = pr.bath.gamma_reduced;
  double nu = m * gamma * reduced_diffusion_energy(pr);
  double rate = g.spec.p_max / m / g.dx() +
                (detail::max_abs_uprime(g, pr.potential) +
                 gamma * g.spec.p_max) /
                    g.dp() +
                2.0 * nu / (g.dp() * g.dp());
  return 0.4 / rate;
}

enum class RightBoundary { absorbing, reflecting };

// Advances W by `steps` explicit conservative updates of
//   W_t = -d/dx[(p/m) W] - d/dp[(-U' - gamma p) W - m gamma D dW/dp].
// Advection uses limited second-order upwind reconstruction, diffusion a
// central difference. Mass lost through the right wall is accumulated in
// grid.absorbed, so interior + absorbed stays equal to the initial mass.
inline void evolve(PhaseSpaceGrid& g, const FpProblem& pr, double dt,
                   std::int64_t steps,
                   RightBoundary right = RightBoundary::absorbing) {
  validate(pr.potential);
  validate(pr.bath);
  if (steps < 0) throw invalid_input("evolve: steps must be >= 0");
  double bound = stability_limit(g, pr);
  if (!(dt > 0) || dt > bound * (1.0 + 1e-12)) {
    throw invalid_input("evolve: dt violates the stability bound " +
                        std::to_string(bound));
  }

  const int nx = g.spec.nx, np = g.spec.np;
  const double dx = g.dx(), dp = g.dp();
  const double m = pr.potential.mass;
  const double gamma = pr.bath.gamma_reduced;
  const double nu = m * gamma * reduced_diffusion_energy(pr);

  std::vector<double> uprime(nx), vx(np), pface(np + 1);
  for (int i = 0; i < nx; ++i) {
    uprime[i] = evaluate(pr.potential, g.x_center(i)).u_prime;
  }
  for (int j = 0; j < np; ++j) vx[j] = g.p_center(j) / m;
  for (int j = 0; j <= np; ++j) pface[j] = (j - 0.5 * np) * dp;

  std::vector<double> slope(g.w.size());
  std::vector<double> fx(static_cast<std::size_t>(nx + 1) * np, 0.0);
  std::vector<double> wnew(g.w.size());
  std::vector<double> gp(np + 1, 0.0);

  for (std::int64_t s = 0; s < steps; ++s) {
    const double* w = g.w.data();

    // Slopes along x.
    for (int i = 0; i < nx; ++i) {
      double* sl = slope.data() + static_cast<std::size_t>(i) * np;
      if (i == 0 || i == nx - 1) {
        std::fill(sl, sl + np, 0.0);
        continue;
      }
      const double* wm = w + static_cast<std::size_t>(i - 1) * np;
      const double* wc = w + static_cast<std::size_t>(i) * np;
      const double* wp = w + static_cast<std::size_t>(i + 1) * np;
      for (int j = 0; j < np; ++j) {
        sl[j] = detail::limited_slope(wm[j], wc[j], wp[j]);
      }
    }

    // Fluxes through x faces; face i separates cells i-1 and i. The left
    // wall (face 0) is closed; the right wall passes outflow only when
    // absorbing.
    for (int i = 1; i < nx; ++i) {
      const std::size_t lo = static_cast<std::size_t>(i - 1) * np;
      const std::size_t hi = static_cast<std::size_t>(i) * np;
      double* f = fx.data() + hi;
      for (int j = 0; j < np; ++j) {
        double v = vx[j];
        double q = v > 0 ? w[lo + j] + 0.5 * slope[lo + j]
                         : w[hi + j] - 0.5 * slope[hi + j];
        f[j] = v * q;
      }
    }
    {
      double* f = fx.data() + static_cast<std::size_t>(nx) * np;
      if (right == RightBoundary::absorbing) {
        const std::size_t lo = static_cast<std::size_t>(nx - 1) * np;
        double outflow = 0.0;
        for (int j = 0; j < np; ++j) {
          double v = vx[j];
          f[j] = v > 0 ? v * (w[lo + j] + 0.5 * slope[lo + j]) : 0.0;
          outflow += f[j];
        }
        g.absorbed += outflow * dt * dp;
      } else {
        std::fill(f, f + np, 0.0);
      }
    }

    double cx = dt / dx;
    for (std::size_t k = 0; k < g.w.size(); ++k) {
      wnew[k] = w[k] - cx * (fx[k + np] - fx[k]);
    }

    // Slopes along p (contiguous), then p-face fluxes per row.
    for (int i = 0; i < nx; ++i) {
      const double* wc = w + static_cast<std::size_t>(i) * np;
      double* sl = slope.data() + static_cast<std::size_t>(i) * np;
      sl[0] = 0.0;
      sl[np - 1] = 0.0;
      for (int j = 1; j < np - 1; ++j) {
        sl[j] = detail::limited_slope(wc[j - 1], wc[j], wc[j + 1]);
      }
    }
    double cp = dt / dp;
    for (int i = 0; i < nx; ++i) {
      const double* wc = w + static_cast<std::size_t>(i) * np;
      const double* sl = slope.data() + static_cast<std::size_t>(i) * np;
      double* out = wnew.data() + static_cast<std::size_t>(i) * np;
      gp[0] = 0.0;
      gp[np] = 0.0;
      for (int j = 1; j < np; ++j) {
        double a = -uprime[i] - gamma * pface[j];
        double adv = a > 0 ? a * (wc[j - 1] + 0.5 * sl[j - 1])
                           : a * (wc[j] - 0.5 * sl[j]);
        gp[j] = adv - nu * (wc[j] - wc[j - 1]) / dp;
      }
      for (int j = 0; j < np; ++j) {
        // Exact-arithmetic positivity survives rounding only up to noise of
        // order eps times the steepest upstream neighbor; clamp it away. The
        // mass this creates is ~1e-16 per step, far below the bookkeeping
        // tolerance.
        out[j] = std::max(out[j] - cp * (gp[j + 1] - gp[j]), 0.0);
      }
    }

    g.w.swap(wnew);
    g.time += dt;
  }
}

// Momentum-weighted column sum at the grid column nearest to x: the
// probability flux through that position.
inline double flux_at_barrier(const PhaseSpaceGrid& g, double x, double mass) {
  int i = static_cast<int>(std::lround((x - g.spec.x_min) / g.dx() - 0.5));
  i = std::clamp(i, 0, g.spec.nx - 1);
  double s = 0.0;
  for (int j = 0; j < g.spec.np; ++j) {
    s += g.p_center(j) / mass * g.at(i, j);
  }
  return s * g.dp();
}

struct DecayResult {
  double kappa = 0.0;
  double fit_t_lo = 0.0;
  double fit_t_hi = 0.0;
  double residual = 0.0; // rms deviation of log P from the linear fit
  std::vector<std::pair<double, double>> p_series; // (t, P)
  std::map<std::string, double> diagnostics;
  std::vector<std::string> warnings;
};

// Decay-mode extraction: start from the well Gaussian, evolve with the
// absorbing edge, and fit log P(t) linearly after the initial transient
// (default fit start 5/gamma). dt <= 0 selects suggested_dt(grid).
inline DecayResult decay_rate(const FpProblem& pr, const GridSpec& spec,
                              double dt, double horizon,
                              double fit_start = -1.0) {
  WellFeatures f = analyze(pr.potential);
  double gamma = pr.bath.gamma_reduced;
  if (!(gamma > 0)) {
    throw invalid_input("decay_rate: friction must be > 0 for decay");
  }
  double d = reduced_diffusion_energy(pr);
  if (!(d > 0)) throw invalid_input("decay_rate: D must be > 0");
  double ratio = f.delta_u / d;
  if (ratio < 3.0 || ratio > 12.0) {
    throw invalid_input(
        "decay_rate: barrier ratio dU/D = " + std::to_string(ratio) +
        " outside the grid-resolvable window [3, 12]");
  }
  if (!(horizon > 0)) throw invalid_input("decay_rate: horizon must be > 0");
  if (fit_start < 0) fit_start = 5.0 / gamma;
  if (!(fit_start < horizon)) {
    throw invalid_input("decay_rate: fit window is empty");
  }

  PhaseSpaceGrid g = make_grid(spec);
  init_well_gaussian(g, pr);
  if (dt <= 0) dt = suggested_dt(g, pr);

  auto steps = static_cast<std::int64_t>(std::ceil(horizon / dt));
  std::int64_t stride = std::max<std::int64_t>(1, steps / 1024);

  DecayResult res;
  res.p_series.emplace_back(0.0, g.mass_up_to(f.x_b));
  for (std::int64_t done = 0; done < steps;) {
    std::int64_t chunk = std::min(stride, steps - done);
    evolve(g, pr, dt, chunk, RightBoundary::absorbing);
    done += chunk;
    res.p_series.emplace_back(g.time, g.mass_up_to(f.x_b));
  }

  // Linear least squares of log P over the post-transient window.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (const auto& [t, p] : res.p_series) {
    if (t < fit_start || p <= 0) continue;
    double y = std::log(p);
    sx += t;
    sy += y;
    sxx += t * t;
    sxy += t * y;
    ++n;
  }
  if (n < 3) throw error("decay fit window has too few usable samples");
  double nd = static_cast<double>(n);
  double denom = nd * sxx - sx * sx;
  double slope = (nd * sxy - sx * sy) / denom;
  double intercept = (sy - slope * sx) / nd;
  res.kappa = -slope;
  res.fit_t_lo = fit_start;
  res.fit_t_hi = g.time;

  double ss = 0.0;
  double p_first = 0.0, p_last = 0.0;
  for (const auto& [t, p] : res.p_series) {
    if (t < fit_start || p <= 0) continue;
    if (p_first == 0.0) p_first = p;
    p_last = p;
    double r = std::log(p) - (intercept + slope * t);
    ss += r * r;
  }
  res.residual = std::sqrt(ss / nd);

  if (p_first > 0 && (p_first - p_last) / p_first < 1e-10) {
    res.warnings.push_back(
        "decay over the fit window is below the numerical floor; kappa is "
        "unreliable");
  }
  if (res.residual > 1e-2) {
    res.warnings.push_back("probability decay is not exponential within "
                           "tolerance (rms log residual " +
                           std::to_string(res.residual) + ")");
  }
  if (!(res.kappa > 0)) {
    res.warnings.push_back("fitted decay rate is not positive");
  }

  res.diagnostics["barrier_ratio"] = ratio;
  res.diagnostics["D"] = d;
  res.diagnostics["dt"] = dt;
  res.diagnostics["nx"] = spec.nx;
  res.diagnostics["np"] = spec.np;
  res.diagnostics["absorbed"] = g.absorbed;
  res.diagnostics["final_interior_mass"] = g.interior_mass();
  return res;
}

} // namespace kramers
