#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include "kramers/fit.hpp"

using namespace kramers;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double ref_e = 5.06e-3;  // eV
constexpr double ref_du = 6.68e-2; // eV

RateDataset synthesize(double e_ev, double du_ev,
                       const std::vector<double>& temps, bool zero_point) {
  RateDataset data;
  for (auto [t, k] : predict_curve(e_ev, du_ev, temps, zero_point)) {
    data.points.push_back({t, k, 1.0});
  }
  return data;
}

const std::vector<double> ref_temps = {20.0,  40.0,  60.0,  80.0,
                                       120.0, 160.0, 240.0, 320.0};

} // namespace

TEST_CASE("log-rate model gradient matches finite differences") {
  for (bool zp : {true, false}) {
    for (double t : {15.0, 80.0, 500.0}) {
      double e = 4e-3, du = 0.05, h = 1e-6;
      auto m = detail::log_rate_model(t, e, du, zp);
      double de = (detail::log_rate_model(t, e * std::exp(h), du, zp).value -
                   detail::log_rate_model(t, e * std::exp(-h), du, zp).value) /
                  (2.0 * h);
      double ddu = (detail::log_rate_model(t, e, du * std::exp(h), zp).value -
                    detail::log_rate_model(t, e, du * std::exp(-h), zp).value) /
                   (2.0 * h);
      CAPTURE(zp, t);
      CHECK_THAT(m.d_log_e, WithinRel(de, 1e-6));
      CHECK_THAT(m.d_log_du, WithinRel(ddu, 1e-6));
    }
  }
}

TEST_CASE("noiseless data round-trips to the generating parameters") {
  auto data = synthesize(ref_e, ref_du, ref_temps, true);
  auto fit = fit_rate_curve(data, true);
  CHECK(fit.converged);
  CHECK_THAT(fit.hbar_omega_a_ev, WithinRel(ref_e, 1e-6));
  CHECK_THAT(fit.delta_u_ev, WithinRel(ref_du, 1e-6));
  CHECK(fit.rms_log_residual < 1e-8);
  CHECK(fit.warnings.empty());
  REQUIRE(fit.per_point_residuals.size() == ref_temps.size());

  SECTION("accepted cost history never increases") {
    for (std::size_t i = 1; i < fit.cost_history.size(); ++i) {
      CHECK(fit.cost_history[i] <= fit.cost_history[i - 1]);
    }
  }

  SECTION("classical synthesis round-trips with the classical model") {
    auto cl = synthesize(ref_e, ref_du, ref_temps, false);
    auto cfit = fit_rate_curve(cl, false);
    CHECK(cfit.converged);
    CHECK_THAT(cfit.hbar_omega_a_ev, WithinRel(ref_e, 1e-6));
    CHECK_THAT(cfit.delta_u_ev, WithinRel(ref_du, 1e-6));
  }
}

TEST_CASE("round-trip holds across the parameter space") {
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> log_e(std::log(1e-4), std::log(1e-1));
  std::uniform_real_distribution<double> ratio(3.0, 12.0);
  for (int rep = 0; rep < 30; ++rep) {
    double e = std::exp(log_e(gen));
    double du = 0.5 * e * ratio(gen);
    // Ladder spanning the quantum-to-classical crossover temperature.
    double t_cross = e / (2.0 * constants::k_boltzmann_ev_per_k);
    std::vector<double> temps;
    for (int i = 0; i < 8; ++i) {
      temps.push_back(0.1 * t_cross * std::pow(100.0, i / 7.0));
    }
    auto fit = fit_rate_curve(synthesize(e, du, temps, true), true);
    CAPTURE(e, du);
    CHECK(fit.converged);
    CHECK_THAT(fit.hbar_omega_a_ev, WithinRel(e, 1e-3));
    CHECK_THAT(fit.delta_u_ev, WithinRel(du, 1e-3));
  }
}

TEST_CASE("noisy fits are unbiased with honest covariance") {
  // 10% multiplicative lognormal noise, 100 replicates. A replicate may
  // stall just above the gradient tolerance once cost improvements fall
  // below double rounding; the returned point is still the optimum, so
  // convergence is not required here, parameter quality is.
  std::mt19937 gen(1234);
  std::normal_distribution<double> noise(0.0, 0.10);
  const int reps = 100;
  int covered = 0;
  double sum_log_e = 0.0, sum_log_du = 0.0, sum_rms = 0.0;
  for (int rep = 0; rep < reps; ++rep) {
    auto data = synthesize(ref_e, ref_du, ref_temps, true);
    for (auto& p : data.points) p.kappa_per_s *= std::exp(noise(gen));
    auto fit = fit_rate_curve(data, true);
    sum_log_e += std::log(fit.hbar_omega_a_ev);
    sum_log_du += std::log(fit.delta_u_ev);
    sum_rms += fit.rms_log_residual;
    CHECK(fit.covariance[0][0] > 0);
    CHECK(fit.covariance[1][1] > 0);
    CHECK(fit.covariance[0][1] == fit.covariance[1][0]);
    double z = std::abs(std::log(fit.hbar_omega_a_ev) - std::log(ref_e)) /
               std::sqrt(fit.covariance[0][0]);
    if (z <= 1.0) ++covered;
  }
  // Bias below 3% on both parameters.
  CHECK_THAT(sum_log_e / reps, WithinAbs(std::log(ref_e), 0.03));
  CHECK_THAT(sum_log_du / reps, WithinAbs(std::log(ref_du), 0.03));
  // 1 sigma coverage 68% +/- 10%.
  CHECK(covered >= 58);
  CHECK(covered <= 78);
  CHECK_THAT(sum_rms / reps, WithinRel(0.10, 0.35));
}

TEST_CASE("rescaling the rates moves only the prefactor of the classical fit") {
  auto data = synthesize(ref_e, ref_du, ref_temps, false);
  auto base = fit_rate_curve(data, false);
  auto scaled = data;
  for (auto& p : scaled.points) p.kappa_per_s *= 10.0;
  auto shifted = fit_rate_curve(scaled, false);
  CHECK_THAT(shifted.hbar_omega_a_ev,
             WithinRel(10.0 * base.hbar_omega_a_ev, 1e-6));
  CHECK_THAT(shifted.delta_u_ev, WithinRel(base.delta_u_ev, 1e-6));
}

TEST_CASE("the classical model cannot explain a low-temperature plateau") {
  std::vector<double> temps = {5.0, 10.0, 20.0, 40.0, 80.0, 160.0, 320.0};
  auto data = synthesize(ref_e, ref_du, temps, true);
  auto zp_fit = fit_rate_curve(data, true);
  auto cl_fit = fit_rate_curve(data, false);
  CHECK(zp_fit.rms_log_residual < 1e-8);
  CHECK(cl_fit.rms_log_residual > 10.0 * std::max(zp_fit.rms_log_residual, 1.0e-3));
}

TEST_CASE("degenerate datasets are rejected") {
  SECTION("single shared temperature") {
    RateDataset data;
    for (int i = 0; i < 5; ++i) data.points.push_back({50.0, 1e3 + i, 1.0});
    CHECK_THROWS_WITH(fit_rate_curve(data, true),
                      ContainsSubstring("unidentifiable"));
  }
  SECTION("too few points") {
    RateDataset data;
    data.points = {{10.0, 1.0, 1.0}, {20.0, 2.0, 1.0}};
    CHECK_THROWS_AS(fit_rate_curve(data, true), invalid_input);
  }
  SECTION("nonpositive entries") {
    RateDataset data;
    data.points = {{10.0, 1.0, 1.0}, {20.0, 2.0, 1.0}, {-5.0, 3.0, 1.0}};
    CHECK_THROWS_AS(fit_rate_curve(data, true), invalid_input);
    data.points[2] = {30.0, 0.0, 1.0};
    CHECK_THROWS_AS(fit_rate_curve(data, true), invalid_input);
    data.points[2] = {30.0, 3.0, -1.0};
    CHECK_THROWS_AS(fit_rate_curve(data, true), invalid_input);
  }
  SECTION("nonpositive explicit initial guess") {
    auto data = synthesize(ref_e, ref_du, ref_temps, true);
    CHECK_THROWS_AS(fit_rate_curve(data, true, {{0.0, 0.1}}), invalid_input);
  }
}

TEST_CASE("point order does not change the fit") {
  auto data = synthesize(ref_e, ref_du, ref_temps, true);
  auto shuffled = data;
  std::mt19937 gen(3);
  std::shuffle(shuffled.points.begin(), shuffled.points.end(), gen);
  auto a = fit_rate_curve(data, true);
  auto b = fit_rate_curve(shuffled, true);
  CHECK_THAT(a.hbar_omega_a_ev, WithinRel(b.hbar_omega_a_ev, 1e-9));
  CHECK_THAT(a.delta_u_ev, WithinRel(b.delta_u_ev, 1e-9));
}

TEST_CASE("weights pull the fit toward the emphasized point") {
  auto data = synthesize(ref_e, ref_du, ref_temps, true);
  data.points[0].kappa_per_s *= 1.5; // distorted cold point
  auto balanced = fit_rate_curve(data, true);
  auto skewed = data;
  skewed.points[0].weight = 100.0;
  auto heavy = fit_rate_curve(skewed, true);
  double r_balanced = std::abs(balanced.per_point_residuals[0]);
  double r_heavy = std::abs(heavy.per_point_residuals[0]);
  CHECK(r_heavy < r_balanced);
}

TEST_CASE("initial guess lands near the truth on plateau data") {
  auto data = synthesize(ref_e, ref_du, ref_temps, true);
  auto [e_guess, du_guess] = default_initial_guess(data, true);
  CHECK(e_guess > 0.5 * ref_e);
  CHECK(e_guess < 2.0 * ref_e);
  CHECK(du_guess > 0.3 * ref_du);
  CHECK(du_guess < 3.0 * ref_du);
}

TEST_CASE("predicted curves expose the two temperature regimes") {
  double e = 5.06e-3, du = 6.68e-2;
  SECTION("cold plateau at the zero-point value") {
    auto curve = predict_curve(e, du, {1e-3}, true);
    namespace c = constants;
    double plateau =
        e / (2.0 * M_PI * c::hbar_ev_s) * std::exp(-2.0 * du / e);
    CHECK_THAT(curve[0].second, WithinRel(plateau, 1e-9));
    auto classical = predict_curve(e, du, {1e-3}, false);
    CHECK(classical[0].second < 1e-280); // essentially frozen out
  }
  SECTION("both variants merge at high temperature") {
    double t_hot = 100.0 * e / constants::k_boltzmann_ev_per_k;
    auto zp = predict_curve(e, du, {t_hot}, true);
    auto cl = predict_curve(e, du, {t_hot}, false);
    CHECK_THAT(zp[0].second / cl[0].second, WithinAbs(1.0, 1e-3));
  }
  SECTION("parameter validation") {
    CHECK_THROWS_AS(predict_curve(0.0, du, {10.0}, true), invalid_input);
    CHECK_THROWS_AS(predict_curve(e, -1.0, {10.0}, true), invalid_input);
  }
}
