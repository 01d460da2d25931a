#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "kramers/error.hpp"

namespace kramers {

// One-dimensional polynomial potential in reduced units.
// coefficients[k] multiplies x^k.
struct Potential {
  std::vector<double> coefficients;
  double mass = 1.0;

  int degree() const { return static_cast<int>(coefficients.size()) - 1; }
};

inline void validate(const Potential& p) {
  if (p.coefficients.size() < 3) {
    throw invalid_input("Potential: polynomial degree must be at least 2");
  }
  if (p.coefficients.back() == 0.0) {
    throw invalid_input("Potential: leading coefficient must be nonzero");
  }
  if (!(p.mass > 0)) {
    throw invalid_input("Potential: mass must be positive");
  }
  for (double c : p.coefficients) {
    if (!std::isfinite(c)) throw invalid_input("Potential: non-finite coefficient");
  }
}

struct PotentialValue {
  double u;
  double u_prime;
};

// Horner evaluation of U and U' in one pass.
inline PotentialValue evaluate(const Potential& p, double x) {
  double u = 0.0;
  double du = 0.0;
  for (std::size_t k = p.coefficients.size(); k-- > 0;) {
    du = du * x + u;
    u = u * x + p.coefficients[k];
  }
  return {u, du};
}

inline double second_derivative(const Potential& p, double x) {
  double d2 = 0.0;
  const auto& c = p.coefficients;
  for (std::size_t k = c.size(); k-- > 2;) {
    d2 = d2 * x + static_cast<double>(k) * static_cast<double>(k - 1) * c[k];
  }
  return d2;
}

// Well minimum x_a, barrier top x_b, and the harmonic features used by the
// rate formulas. delta_u is U(x_b) - U(x_a); U(x_a) is treated as the zero
// of energy everywhere downstream.
struct WellFeatures {
  double x_a = 0;
  double x_b = 0;
  double omega_a = 0;
  double omega_b = 0;
  double delta_u = 0;
};

namespace detail {

inline double bisect_uprime(const Potential& p, double lo, double hi) {
  double flo = evaluate(p, lo).u_prime;
  double tol = 1e-15 * std::max({1.0, std::abs(lo), std::abs(hi)});
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    double fmid = evaluate(p, mid).u_prime;
    if (fmid == 0.0) return mid;
    if ((flo < 0) == (fmid < 0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Sign-scan of U' followed by bisection on each bracketed root.
inline std::vector<double> critical_points(const Potential& p, double lo,
                                           double hi, int samples = 10000) {
  std::vector<double> roots;
  double prev_x = lo;
  double prev_f = evaluate(p, lo).u_prime;
  for (int i = 1; i <= samples; ++i) {
    double x = lo + (hi - lo) * static_cast<double>(i) / samples;
    double f = evaluate(p, x).u_prime;
    if (prev_f == 0.0) {
      if (roots.empty() || std::abs(roots.back() - prev_x) > 1e-9) {
        roots.push_back(prev_x);
      }
    } else if (f != 0.0 && (prev_f < 0) != (f < 0)) {
      double r = bisect_uprime(p, prev_x, x);
      if (roots.empty() || std::abs(roots.back() - r) > 1e-9) {
        roots.push_back(r);
      }
    }
    prev_x = x;
    prev_f = f;
  }
  if (prev_f == 0.0 &&
      (roots.empty() || std::abs(roots.back() - prev_x) > 1e-9)) {
    roots.push_back(prev_x);
  }
  return roots;
}

// Cauchy root bound for U' = sum (k+1) c_{k+1} x^k; every critical point of
// the polynomial lies inside [-b, b].
inline double uprime_root_bound(const Potential& p) {
  const auto& c = p.coefficients;
  std::size_t n = c.size();
  double lead = static_cast<double>(n - 1) * c[n - 1];
  double max_ratio = 0.0;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    max_ratio = std::max(max_ratio, std::abs(static_cast<double>(k) * c[k] / lead));
  }
  return 1.0 + max_ratio;
}

} // namespace detail

namespace detail {

inline WellFeatures features_at(const Potential& p, double x_a, double x_b) {
  auto at_a = evaluate(p, x_a);
  auto at_b = evaluate(p, x_b);
  if (std::abs(at_a.u_prime) > 1e-10 || std::abs(at_b.u_prime) > 1e-10) {
    throw error("critical point location did not converge");
  }
  WellFeatures f;
  f.x_a = x_a;
  f.x_b = x_b;
  f.omega_a = std::sqrt(second_derivative(p, x_a) / p.mass);
  f.omega_b = std::sqrt(-second_derivative(p, x_b) / p.mass);
  f.delta_u = at_b.u - at_a.u;
  if (!(f.delta_u > 0)) {
    throw error("no metastable structure: barrier height is not positive");
  }
  return f;
}

} // namespace detail

// Locates the metastable structure inside [lo, hi]: exactly one local
// minimum followed by one local maximum of U.
inline WellFeatures analyze(const Potential& p, double lo, double hi) {
  validate(p);
  if (!(lo < hi)) throw invalid_input("analyze: empty search interval");

  auto roots = detail::critical_points(p, lo, hi);

  // Classify by curvature; degenerate (inflection) points are dropped.
  std::vector<double> minima, maxima;
  for (double r : roots) {
    double d2 = second_derivative(p, r);
    if (d2 > 0) {
      minima.push_back(r);
    } else if (d2 < 0) {
      maxima.push_back(r);
    }
  }
  if (minima.empty() || maxima.empty()) {
    throw error("no metastable structure in search interval");
  }
  if (minima.size() > 1 || maxima.size() > 1) {
    throw error("ambiguous interval: more than one minimum/maximum pair");
  }
  double x_a = minima.front();
  double x_b = maxima.front();
  if (!(x_a < x_b)) {
    throw error("no metastable structure: barrier precedes the well");
  }
  return detail::features_at(p, x_a, x_b);
}

// Interval-free variant: scans the whole Cauchy root bound of U' and picks
// the unique adjacent minimum -> maximum pair. A quartic barrier potential
// has a third critical point beyond the pair; that is fine as long as only
// one well/barrier pair exists.
inline WellFeatures analyze(const Potential& p) {
  validate(p);
  double bound = detail::uprime_root_bound(p);
  auto roots = detail::critical_points(p, -bound, bound);

  std::vector<std::pair<double, int>> classified; // (x, +1 min / -1 max)
  for (double r : roots) {
    double d2 = second_derivative(p, r);
    if (d2 > 0) classified.emplace_back(r, +1);
    if (d2 < 0) classified.emplace_back(r, -1);
  }
  std::vector<std::pair<double, double>> pairs;
  for (std::size_t i = 0; i + 1 < classified.size(); ++i) {
    if (classified[i].second == +1 && classified[i + 1].second == -1) {
      pairs.emplace_back(classified[i].first, classified[i + 1].first);
    }
  }
  if (pairs.empty()) throw error("no metastable structure");
  if (pairs.size() > 1) {
    throw error("ambiguous interval: more than one minimum/maximum pair");
  }
  return detail::features_at(p, pairs.front().first, pairs.front().second);
}

// U(x) = (1/2) m w^2 x^2 - (m w^2 / 3 x_s) x^3 with x_s fixed by the barrier
// height: delta_u = m w^2 x_s^2 / 6. Well at 0, barrier at x_s, omega_b = w.
inline Potential make_cubic(double omega_a, double delta_u, double mass) {
  if (!(omega_a > 0) || !(delta_u > 0) || !(mass > 0)) {
    throw invalid_input("make_cubic: all arguments must be positive");
  }
  double x_s = std::sqrt(6.0 * delta_u / (mass * omega_a * omega_a));
  Potential p;
  p.mass = mass;
  p.coefficients = {0.0, 0.0, 0.5 * mass * omega_a * omega_a,
                    -mass * omega_a * omega_a / (3.0 * x_s)};
  return p;
}

// Quartic with a minimum at 0 (curvature m omega_a^2), a maximum at
// x_b = sqrt(12 delta_u / (m omega_a^2 + m omega_b^2)) with curvature
// -m omega_b^2, and U(x_b) = delta_u. With the well pinned at the origin and
// x_b free, these constraints are solvable for every positive input, so the
// construction has no infeasible region.
inline Potential make_quartic(double omega_a, double omega_b, double delta_u,
                              double mass) {
  if (!(omega_a > 0) || !(omega_b > 0) || !(delta_u > 0) || !(mass > 0)) {
    throw invalid_input("make_quartic: all arguments must be positive");
  }
  double a2 = mass * omega_a * omega_a; // U''(0)
  double b2 = mass * omega_b * omega_b; // -U''(x_b)
  double x_b = std::sqrt(12.0 * delta_u / (a2 + b2));
  double c3 = (b2 - 2.0 * a2) / (3.0 * x_b);
  double c4 = (a2 - b2) / (4.0 * x_b * x_b);
  Potential p;
  p.mass = mass;
  if (c4 == 0.0) {
    // omega_a == omega_b degenerates to the cubic.
    p.coefficients = {0.0, 0.0, 0.5 * a2, c3};
  } else {
    p.coefficients = {0.0, 0.0, 0.5 * a2, c3, c4};
  }
  return p;
}

} // namespace kramers
