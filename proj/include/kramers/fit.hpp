#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kramers/constants.hpp"
#include "kramers/error.hpp"
#include "kramers/rate.hpp"

namespace kramers {

struct RatePoint {
  double temperature_k = 0.0;
  double kappa_per_s = 0.0;
  double weight = 1.0;
};

struct RateDataset {
  std::vector<RatePoint> points;
  std::string label;
};

inline void validate(const RateDataset& data) {
  if (data.points.size() < 3) {
    throw invalid_input("dataset: need at least 3 points to fit 2 parameters");
  }
  for (const auto& p : data.points) {
    if (!(p.temperature_k > 0) || !std::isfinite(p.temperature_k)) {
      throw invalid_input("dataset: temperatures must be finite and > 0");
    }
    if (!(p.kappa_per_s > 0) || !std::isfinite(p.kappa_per_s)) {
      throw invalid_input("dataset: rates must be finite and > 0");
    }
    if (!(p.weight > 0) || !std::isfinite(p.weight)) {
      throw invalid_input("dataset: weights must be finite and > 0");
    }
  }
}

struct FitResult {
  double hbar_omega_a_ev = 0.0;
  double delta_u_ev = 0.0;
  // Covariance of (log hbar_omega_a, log delta_u) at the optimum.
  std::array<std::array<double, 2>, 2> covariance{};
  double rms_log_residual = 0.0;
  std::vector<double> per_point_residuals; // log model - log data
  bool converged = false;
  int iterations = 0;
  std::vector<double> cost_history; // accepted objective values
  std::vector<std::string> warnings;
};

namespace detail {

inline double csch_squared(double a) {
  if (a > 20.0) {
    double e = std::exp(-a);
    return 4.0 * e * e;
  }
  double s = std::sinh(a);
  return 1.0 / (s * s);
}

// log kappa(T) and its gradient w.r.t. (log E, log dU), E = hbar omega_a.
struct LogRateModel {
  double value;
  double d_log_e;
  double d_log_du;
};

inline LogRateModel log_rate_model(double temperature_k, double e_ev,
                                   double du_ev, bool zero_point) {
  namespace c = constants;
  double log_prefactor = std::log(e_ev / (2.0 * M_PI * c::hbar_ev_s));
  LogRateModel out{};
  if (!zero_point) {
    double kt = c::k_boltzmann_ev_per_k * temperature_k;
    out.value = log_prefactor - du_ev / kt;
    out.d_log_e = 1.0;
    out.d_log_du = -du_ev / kt;
    return out;
  }
  double d;
  double e_dd_de; // E * dD/dE
  if (temperature_k == 0) {
    d = 0.5 * e_ev;
    e_dd_de = d;
  } else {
    double a = 0.5 * e_ev / (c::k_boltzmann_ev_per_k * temperature_k);
    d = 0.5 * e_ev * stable_coth(a);
    e_dd_de = d - 0.5 * e_ev * a * csch_squared(a);
  }
  out.value = log_prefactor - du_ev / d;
  out.d_log_e = 1.0 + du_ev / (d * d) * e_dd_de;
  out.d_log_du = -du_ev / d;
  return out;
}

struct Objective {
  double cost;
  std::array<double, 2> grad;    // J^T W r
  std::array<double, 3> normal;  // J^T W J packed as (a00, a01, a11)
};

inline Objective evaluate_objective(const RateDataset& data, double e_ev,
                                    double du_ev, bool zero_point) {
  Objective o{0.0, {0.0, 0.0}, {0.0, 0.0, 0.0}};
  for (const auto& p : data.points) {
    auto m = log_rate_model(p.temperature_k, e_ev, du_ev, zero_point);
    double r = m.value - std::log(p.kappa_per_s);
    double w = p.weight;
    o.cost += w * r * r;
    o.grad[0] += w * m.d_log_e * r;
    o.grad[1] += w * m.d_log_du * r;
    o.normal[0] += w * m.d_log_e * m.d_log_e;
    o.normal[1] += w * m.d_log_e * m.d_log_du;
    o.normal[2] += w * m.d_log_du * m.d_log_du;
  }
  return o;
}

} // namespace detail

// Data-driven starting point: dU from the Arrhenius slope through the two
// hottest points; hbar omega_a from the low-T plateau when the data has
// one, else from the Arrhenius intercept.
inline std::pair<double, double> default_initial_guess(const RateDataset& data,
                                                       bool zero_point) {
  validate(data);
  namespace c = constants;
  auto pts = data.points;
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a.temperature_k < b.temperature_k;
  });
  const auto& hot1 = pts[pts.size() - 2];
  const auto& hot2 = pts[pts.size() - 1];
  double du = c::k_boltzmann_ev_per_k *
              (std::log(hot2.kappa_per_s) - std::log(hot1.kappa_per_s)) /
              (1.0 / hot1.temperature_k - 1.0 / hot2.temperature_k);
  if (!(du > 0) || !std::isfinite(du)) {
    du = c::k_boltzmann_ev_per_k * hot2.temperature_k;
  }

  // Arrhenius intercept through the hottest point.
  double log_prefactor = std::log(hot2.kappa_per_s) +
                         du / (c::k_boltzmann_ev_per_k * hot2.temperature_k);
  double e_guess = 2.0 * M_PI * c::hbar_ev_s * std::exp(log_prefactor);

  bool plateau =
      zero_point &&
      std::abs(std::log(pts[1].kappa_per_s / pts[0].kappa_per_s)) < 0.2 &&
      pts[1].temperature_k > 1.2 * pts[0].temperature_k;
  if (plateau) {
    // Solve log(E/2pi hbar) - 2 dU/E = log kappa_plateau; the left side is
    // increasing in E, so bisect.
    double target = std::log(pts[0].kappa_per_s);
    auto fn = [&](double e) {
      return std::log(e / (2.0 * M_PI * c::hbar_ev_s)) - 2.0 * du / e - target;
    };
    double lo = 1e-8, hi = 1e2;
    if (fn(lo) < 0 && fn(hi) > 0) {
      for (int it = 0; it < 200; ++it) {
        double mid = std::sqrt(lo * hi);
        (fn(mid) < 0 ? lo : hi) = mid;
      }
      e_guess = std::sqrt(lo * hi);
    }
  }
  if (!(e_guess > 0) || !std::isfinite(e_guess)) e_guess = 1e-3;
  return {e_guess, du};
}

// Weighted least squares of log kappa over (log hbar omega_a, log dU) via
// Gauss-Newton steps with Levenberg damping; converged when the gradient
// infinity-norm drops below 1e-10 (at most 500 iterations).
inline FitResult fit_rate_curve(
    const RateDataset& data, bool zero_point,
    std::optional<std::pair<double, double>> initial_guess = std::nullopt) {
  validate(data);
  double t_lo = data.points.front().temperature_k;
  double t_hi = t_lo;
  for (const auto& p : data.points) {
    t_lo = std::min(t_lo, p.temperature_k);
    t_hi = std::max(t_hi, p.temperature_k);
  }
  if (t_hi - t_lo <= 1e-12 * t_hi) {
    throw error("unidentifiable: all data points share one temperature");
  }

  auto [e_ev, du_ev] = initial_guess ? *initial_guess
                                     : default_initial_guess(data, zero_point);
  if (!(e_ev > 0) || !(du_ev > 0)) {
    throw invalid_input("fit: initial guess must be positive");
  }

  FitResult res;
  auto obj = detail::evaluate_objective(data, e_ev, du_ev, zero_point);
  res.cost_history.push_back(obj.cost);
  double lambda = 1e-3;
  const int max_iterations = 500;
  for (res.iterations = 0; res.iterations < max_iterations; ++res.iterations) {
    double gnorm = std::max(std::abs(obj.grad[0]), std::abs(obj.grad[1]));
    if (gnorm < 1e-10) {
      res.converged = true;
      break;
    }
    bool accepted = false;
    for (int attempt = 0; attempt < 60; ++attempt) {
      double a00 = obj.normal[0] * (1.0 + lambda);
      double a01 = obj.normal[1];
      double a11 = obj.normal[2] * (1.0 + lambda);
      double det = a00 * a11 - a01 * a01;
      if (std::abs(det) > 1e-300) {
        double du0 = (-obj.grad[0] * a11 + obj.grad[1] * a01) / det;
        double du1 = (-obj.grad[1] * a00 + obj.grad[0] * a01) / det;
        double e_try = e_ev * std::exp(du0);
        double du_try = du_ev * std::exp(du1);
        auto trial =
            detail::evaluate_objective(data, e_try, du_try, zero_point);
        if (std::isfinite(trial.cost) && trial.cost <= obj.cost) {
          e_ev = e_try;
          du_ev = du_try;
          obj = trial;
          res.cost_history.push_back(obj.cost);
          lambda = std::max(lambda / 3.0, 1e-12);
          accepted = true;
          break;
        }
      }
      lambda *= 10.0;
    }
    if (!accepted) break; // stalled; report the best point found
  }
  if (!res.converged) {
    res.warnings.push_back(
        "optimizer did not reach the gradient tolerance; returning the best "
        "point found");
  }

  res.hbar_omega_a_ev = e_ev;
  res.delta_u_ev = du_ev;

  double sw = 0.0, ssr = 0.0;
  for (const auto& p : data.points) {
    auto m = detail::log_rate_model(p.temperature_k, e_ev, du_ev, zero_point);
    double r = m.value - std::log(p.kappa_per_s);
    res.per_point_residuals.push_back(r);
    sw += p.weight;
    ssr += p.weight * r * r;
  }
  res.rms_log_residual = std::sqrt(ssr / sw);

  // Gauss-Newton covariance: sigma^2 (J^T W J)^-1 with sigma^2 from the
  // weighted residual sum over n - 2 degrees of freedom.
  double dof = static_cast<double>(data.points.size()) - 2.0;
  double sigma2 = dof > 0 ? ssr / dof : 0.0;
  double det =
      obj.normal[0] * obj.normal[2] - obj.normal[1] * obj.normal[1];
  if (std::abs(det) > 1e-300) {
    res.covariance[0][0] = sigma2 * obj.normal[2] / det;
    res.covariance[0][1] = -sigma2 * obj.normal[1] / det;
    res.covariance[1][0] = res.covariance[0][1];
    res.covariance[1][1] = sigma2 * obj.normal[0] / det;
  } else {
    res.warnings.push_back("normal matrix is singular; covariance unset");
  }
  return res;
}

// Pointwise model curve at the given temperatures, in s^-1.
inline std::vector<std::pair<double, double>> predict_curve(
    double hbar_omega_a_ev, double delta_u_ev,
    const std::vector<double>& temperatures_k, bool zero_point) {
  if (!(hbar_omega_a_ev > 0) || !(delta_u_ev > 0)) {
    throw invalid_input("predict_curve: parameters must be positive");
  }
  std::vector<std::pair<double, double>> out;
  out.reserve(temperatures_k.size());
  for (double t : temperatures_k) {
    out.emplace_back(
        t, rate_paper_fit(t, hbar_omega_a_ev, delta_u_ev, zero_point).kappa);
  }
  return out;
}

} // namespace kramers
