// Escape-rate toolbox: analytic Kramers rates with zero-point diffusion,
// Langevin first-passage Monte Carlo, a phase-space Fokker-Planck solver,
// and curve fitting for measured rate tables.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kramers/kramers.hpp"

namespace {

using kramers::json;

void emit(const std::string& text, const std::string& output_path) {
  if (output_path.empty() || output_path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(output_path, std::ios::binary);
  if (!f) throw kramers::error("cannot open output file: " + output_path);
  f << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw kramers::invalid_input("cannot open config file: " + path);
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw kramers::invalid_input("config is not valid JSON: " +
                                 std::string(e.what()));
  }
}

struct RateArgs {
  std::string config_path, output_path, format = "json";
  double hbar_omega_a_ev = 0, delta_u_ev = 0, temperature_k = 0;
  bool zero_point = true;
};

void run_rate(const RateArgs& a) {
  kramers::EscapeRateEstimate est;
  if (!a.config_path.empty()) {
    json cfg = load_config(a.config_path);
    kramers::RateInputs in;
    in.bath = cfg.at("bath").get<kramers::Bath>();
    auto pot = cfg.at("potential").get<kramers::Potential>();
    in.features = kramers::analyze(pot);
    in.mass = pot.mass;
    est = kramers::rate_full(in);
  } else {
    if (!(a.hbar_omega_a_ev > 0) || !(a.delta_u_ev > 0)) {
      throw kramers::invalid_input(
          "rate: pass --config, or --hbar-omega-a-eV and --delta-u-eV");
    }
    est = kramers::rate_paper_fit(a.temperature_k, a.hbar_omega_a_ev,
                                  a.delta_u_ev, a.zero_point);
  }
  if (a.format == "csv") {
    std::ostringstream out;
    out << "kappa,method,uncertainty\n"
        << kramers::format_double(est.kappa) << ','
        << kramers::to_string(est.method) << ','
        << kramers::format_double(est.uncertainty) << "\n";
    emit(out.str(), a.output_path);
  } else {
    emit(dump(json(est)), a.output_path);
  }
}

struct DcoeffArgs {
  std::string output_path, format = "json";
  double hbar_omega_a_ev = 0, temperature_k = 0;
  bool zero_point = true;
};

void run_dcoeff(const DcoeffArgs& a) {
  kramers::Bath bath;
  bath.hbar_omega_a_ev = a.hbar_omega_a_ev;
  bath.temperature_k = a.temperature_k;
  bath.zero_point = a.zero_point;
  double d = kramers::diffusion_energy(bath);
  if (a.format == "csv") {
    std::ostringstream out;
    out << "temperature_K,D_eV\n"
        << kramers::format_double(a.temperature_k) << ','
        << kramers::format_double(d) << "\n";
    emit(out.str(), a.output_path);
  } else {
    emit(dump(json{{"temperature_K", a.temperature_k},
                   {"hbar_omega_a_eV", a.hbar_omega_a_ev},
                   {"zero_point", a.zero_point},
                   {"D_eV", d}}),
         a.output_path);
  }
}

struct SimulateArgs {
  std::string config_path, output_path, histogram_path;
  double dt = 0, absorb_at = 0, max_time = 0;
  std::int64_t n_trajectories = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string initial_condition;
};

void run_simulate(const SimulateArgs& a) {
  if (a.config_path.empty()) {
    throw kramers::invalid_input("simulate: --config is required");
  }
  auto cfg = load_config(a.config_path).get<kramers::SimulationConfig>();
  if (a.dt > 0) cfg.dt = a.dt;
  if (a.absorb_at != 0) cfg.absorb_at = a.absorb_at;
  if (a.max_time > 0) cfg.max_time = a.max_time;
  if (a.n_trajectories > 0) {
    cfg.n_trajectories = static_cast<std::uint64_t>(a.n_trajectories);
  }
  if (a.seed_set) cfg.seed = a.seed;
  if (!a.initial_condition.empty()) {
    cfg.initial_condition =
        kramers::initial_condition_from_string(a.initial_condition);
  }

  auto features = kramers::analyze(cfg.potential);
  if (cfg.dt <= 0) {
    cfg.dt = 0.04 / std::max({features.omega_a, features.omega_b,
                              cfg.bath.gamma_reduced});
  }
  if (cfg.absorb_at == 0) {
    cfg.absorb_at = features.x_b + 2.0 * (features.x_b - features.x_a);
  }

  auto stats = kramers::estimate_rate(cfg);
  if (!a.histogram_path.empty()) {
    std::ostringstream out;
    kramers::write_histogram_csv(out, stats.histogram);
    emit(out.str(), a.histogram_path);
  }
  emit(dump(json(stats)), a.output_path);
}

struct FpeArgs {
  std::string config_path, output_path, pseries_path;
  double dt = 0, horizon = 0, fit_start = -1;
  int nx = 256, np = 256;
};

void run_fpe(const FpeArgs& a) {
  if (a.config_path.empty()) {
    throw kramers::invalid_input("fpe: --config is required");
  }
  json cfg = load_config(a.config_path);
  kramers::FpProblem problem;
  problem.potential = cfg.at("potential").get<kramers::Potential>();
  problem.bath = cfg.at("bath").get<kramers::Bath>();

  double horizon = a.horizon;
  if (horizon <= 0) horizon = cfg.value("horizon", 0.0);
  double fit_start = a.fit_start;
  if (fit_start < 0) fit_start = cfg.value("fit_start", -1.0);
  double dt = a.dt > 0 ? a.dt : cfg.value("dt", 0.0);
  int nx = cfg.value("nx", a.nx);
  int np = cfg.value("np", a.np);
  if (a.nx != 256) nx = a.nx;
  if (a.np != 256) np = a.np;
  if (horizon <= 0) {
    if (!(problem.bath.gamma_reduced > 0)) {
      throw kramers::invalid_input("fpe: friction must be > 0");
    }
    horizon = 15.0 / problem.bath.gamma_reduced;
  }

  auto spec = kramers::default_grid_spec(problem, nx, np);
  auto result = kramers::decay_rate(problem, spec, dt, horizon, fit_start);
  if (!a.pseries_path.empty()) {
    std::ostringstream out;
    kramers::write_pseries_csv(out, result.p_series);
    emit(out.str(), a.pseries_path);
  }
  emit(dump(json(result)), a.output_path);
}

struct FitArgs {
  std::string data_path, output_path, label;
  bool zero_point = true;
  double initial_hbar_omega_a_ev = 0, initial_delta_u_ev = 0;
};

void run_fit(const FitArgs& a) {
  kramers::RateDataset data;
  if (a.data_path.empty() || a.data_path == "-") {
    data = kramers::read_rate_csv(std::cin, a.label);
  } else {
    std::ifstream f(a.data_path);
    if (!f) throw kramers::invalid_input("cannot open data file: " + a.data_path);
    data = kramers::read_rate_csv(f, a.label);
  }
  std::optional<std::pair<double, double>> guess;
  if (a.initial_hbar_omega_a_ev > 0 && a.initial_delta_u_ev > 0) {
    guess = {a.initial_hbar_omega_a_ev, a.initial_delta_u_ev};
  }
  auto result = kramers::fit_rate_curve(data, a.zero_point, guess);
  emit(dump(json(result)), a.output_path);
}

struct CurveArgs {
  std::string output_path;
  double hbar_omega_a_ev = 0, delta_u_ev = 0;
  double t_min = 0, t_max = 0;
  int points = 0;
  bool compare_arrhenius = false;
  bool zero_point = true;
};

void run_curve(const CurveArgs& a) {
  if (!(a.points >= 1)) {
    throw kramers::invalid_input("curve: --points must be >= 1");
  }
  if (!(a.t_min >= 0) || !(a.t_max >= a.t_min)) {
    throw kramers::invalid_input("curve: need 0 <= --t-min <= --t-max");
  }
  std::vector<double> temps(a.points);
  for (int i = 0; i < a.points; ++i) {
    temps[i] = a.points == 1 ? a.t_min
                             : a.t_min + (a.t_max - a.t_min) * i /
                                             (a.points - 1);
  }
  std::ostringstream out;
  if (a.compare_arrhenius) {
    std::vector<double> zp(temps.size()), cl(temps.size());
    for (std::size_t i = 0; i < temps.size(); ++i) {
      zp[i] = kramers::rate_paper_fit(temps[i], a.hbar_omega_a_ev,
                                      a.delta_u_ev, true)
                  .kappa;
      cl[i] = kramers::rate_paper_fit(temps[i], a.hbar_omega_a_ev,
                                      a.delta_u_ev, false)
                  .kappa;
    }
    kramers::write_comparison_csv(out, temps, zp, cl);
  } else {
    auto curve = kramers::predict_curve(a.hbar_omega_a_ev, a.delta_u_ev, temps,
                                        a.zero_point);
    kramers::write_curve_csv(out, curve);
  }
  emit(out.str(), a.output_path);
}

struct PotentialInfoArgs {
  std::string config_path, output_path;
  std::vector<double> coefficients;
  double mass = 1.0;
};

void run_potential_info(const PotentialInfoArgs& a) {
  kramers::Potential pot;
  if (!a.config_path.empty()) {
    json cfg = load_config(a.config_path);
    pot = (cfg.contains("potential") ? cfg.at("potential") : cfg)
              .get<kramers::Potential>();
  } else if (!a.coefficients.empty()) {
    pot.coefficients = a.coefficients;
    pot.mass = a.mass;
  } else {
    throw kramers::invalid_input(
        "potential-info: pass --config or --coefficients");
  }
  auto f = kramers::analyze(pot);
  emit(dump(json{{"degree", pot.degree()},
                 {"mass", pot.mass},
                 {"x_a", f.x_a},
                 {"x_b", f.x_b},
                 {"omega_a", f.omega_a},
                 {"omega_b", f.omega_b},
                 {"delta_u", f.delta_u}}),
       a.output_path);
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kramers escape rates with zero-point diffusion"};
  app.require_subcommand(1);

  RateArgs rate_args;
  auto* rate = app.add_subcommand("rate", "Analytic escape rate");
  rate->add_option("--config", rate_args.config_path,
                   "JSON with potential and bath (reduced units)");
  rate->add_option("--hbar-omega-a-eV", rate_args.hbar_omega_a_ev,
                   "well mode quantum in eV");
  rate->add_option("--delta-u-eV", rate_args.delta_u_ev, "barrier height eV");
  rate->add_option("--temperature-K", rate_args.temperature_k, "temperature");
  rate->add_flag("--zero-point,!--no-zero-point", rate_args.zero_point,
                 "include zero-point fluctuations in D(T)");
  rate->add_option("--format", rate_args.format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
  rate->add_option("-o,--output", rate_args.output_path, "output path");

  DcoeffArgs dcoeff_args;
  auto* dcoeff = app.add_subcommand("dcoeff", "Diffusion energy D(T)");
  dcoeff->add_option("--hbar-omega-a-eV", dcoeff_args.hbar_omega_a_ev)
      ->required();
  dcoeff->add_option("--temperature-K", dcoeff_args.temperature_k);
  dcoeff->add_flag("--zero-point,!--no-zero-point", dcoeff_args.zero_point);
  dcoeff->add_option("--format", dcoeff_args.format)
      ->check(CLI::IsMember({"json", "csv"}));
  dcoeff->add_option("-o,--output", dcoeff_args.output_path);

  SimulateArgs sim_args;
  auto* sim = app.add_subcommand("simulate",
                                 "Langevin first-passage Monte Carlo");
  sim->add_option("--config", sim_args.config_path)->required();
  sim->add_option("--dt", sim_args.dt);
  sim->add_option("--absorb-at", sim_args.absorb_at);
  sim->add_option("--max-time", sim_args.max_time);
  sim->add_option("-n,--n-trajectories", sim_args.n_trajectories);
  sim->add_option("--seed", sim_args.seed)
      ->each([&](const std::string&) { sim_args.seed_set = true; });
  sim->add_option("--initial-condition", sim_args.initial_condition)
      ->check(CLI::IsMember({"well-bottom-rest", "well-thermal"}));
  sim->add_option("--histogram-csv", sim_args.histogram_path,
                  "write the first-passage histogram here");
  sim->add_option("-o,--output", sim_args.output_path);

  FpeArgs fpe_args;
  auto* fpe = app.add_subcommand("fpe", "Phase-space Fokker-Planck decay");
  fpe->add_option("--config", fpe_args.config_path)->required();
  fpe->add_option("--dt", fpe_args.dt, "0 = auto");
  fpe->add_option("--horizon", fpe_args.horizon);
  fpe->add_option("--fit-start", fpe_args.fit_start);
  fpe->add_option("--nx", fpe_args.nx);
  fpe->add_option("--np", fpe_args.np);
  fpe->add_option("--pseries-csv", fpe_args.pseries_path,
                  "write the P(t) series here");
  fpe->add_option("-o,--output", fpe_args.output_path);

  FitArgs fit_args;
  auto* fit = app.add_subcommand("fit", "Fit (hbar omega_a, dU) to a rate table");
  fit->add_option("--data", fit_args.data_path, "CSV path, '-' for stdin");
  fit->add_option("--label", fit_args.label);
  fit->add_flag("--zero-point,!--no-zero-point", fit_args.zero_point);
  fit->add_option("--initial-hbar-omega-a-eV", fit_args.initial_hbar_omega_a_ev);
  fit->add_option("--initial-delta-u-eV", fit_args.initial_delta_u_ev);
  fit->add_option("-o,--output", fit_args.output_path);

  CurveArgs curve_args;
  auto* curve = app.add_subcommand("curve", "Model curve kappa(T)");
  curve->add_option("--hbar-omega-a-eV", curve_args.hbar_omega_a_ev)
      ->required();
  curve->add_option("--delta-u-eV", curve_args.delta_u_ev)->required();
  curve->add_option("--t-min", curve_args.t_min)->required();
  curve->add_option("--t-max", curve_args.t_max)->required();
  curve->add_option("--points", curve_args.points)->required();
  curve->add_flag("--compare-arrhenius", curve_args.compare_arrhenius);
  curve->add_flag("--zero-point,!--no-zero-point", curve_args.zero_point);
  curve->add_option("-o,--output", curve_args.output_path);

  PotentialInfoArgs pot_args;
  auto* pinfo = app.add_subcommand("potential-info",
                                   "Well and barrier features of a potential");
  pinfo->add_option("--config", pot_args.config_path);
  pinfo->add_option("--coefficients", pot_args.coefficients)
      ->delimiter(',');
  pinfo->add_option("--mass", pot_args.mass);
  pinfo->add_option("-o,--output", pot_args.output_path);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (rate->parsed()) run_rate(rate_args);
    if (dcoeff->parsed()) run_dcoeff(dcoeff_args);
    if (sim->parsed()) run_simulate(sim_args);
    if (fpe->parsed()) run_fpe(fpe_args);
    if (fit->parsed()) run_fit(fit_args);
    if (curve->parsed()) run_curve(curve_args);
    if (pinfo->parsed()) run_potential_info(pot_args);
  } catch (const kramers::invalid_input& e) {
    std::cerr << json{{"error", {{"type", "invalid-input"},
                                 {"message", e.what()}}}}
                     .dump()
              << "\n";
    return 1;
  } catch (const kramers::error& e) {
    std::cerr << json{{"error", {{"type", "domain"}, {"message", e.what()}}}}
                     .dump()
              << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", {{"type", "internal"},
                                 {"message", e.what()}}}}
                     .dump()
              << "\n";
    return 1;
  }
  return 0;
}
