#pragma once

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kramers/bath.hpp"
#include "kramers/error.hpp"
#include "kramers/fit.hpp"
#include "kramers/fokker_planck.hpp"
#include "kramers/langevin.hpp"
#include "kramers/potential.hpp"
#include "kramers/rate.hpp"

namespace kramers {

// Fixed %.12g rendering so emitted tables are byte-stable across runs.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

using json = nlohmann::json;

inline void to_json(json& j, const Potential& p) {
  j = json{{"coefficients", p.coefficients}, {"mass", p.mass}};
}

inline void from_json(const json& j, Potential& p) {
  j.at("coefficients").get_to(p.coefficients);
  p.mass = j.value("mass", 1.0);
}

inline void to_json(json& j, const Bath& b) {
  j = json{{"temperature_K", b.temperature_k},
           {"hbar_omega_a_eV", b.hbar_omega_a_ev},
           {"gamma_reduced", b.gamma_reduced},
           {"zero_point", b.zero_point}};
}

inline void from_json(const json& j, Bath& b) {
  j.at("temperature_K").get_to(b.temperature_k);
  j.at("hbar_omega_a_eV").get_to(b.hbar_omega_a_ev);
  b.gamma_reduced = j.value("gamma_reduced", 0.0);
  b.zero_point = j.value("zero_point", true);
}

inline void to_json(json& j, const SimulationConfig& c) {
  j = json{{"potential", c.potential},
           {"bath", c.bath},
           {"dt", c.dt},
           {"absorb_at", c.absorb_at},
           {"max_time", c.max_time},
           {"n_trajectories", c.n_trajectories},
           {"seed", c.seed},
           {"initial_condition", to_string(c.initial_condition)}};
  if (c.reflect_at) j["reflect_at"] = *c.reflect_at;
}

inline void from_json(const json& j, SimulationConfig& c) {
  j.at("potential").get_to(c.potential);
  j.at("bath").get_to(c.bath);
  c.dt = j.value("dt", 0.0);
  c.absorb_at = j.value("absorb_at", 0.0);
  c.max_time = j.value("max_time", 0.0);
  c.n_trajectories = j.value("n_trajectories", std::uint64_t{1000});
  c.seed = j.value("seed", std::uint64_t{12345});
  c.initial_condition = initial_condition_from_string(
      j.value("initial_condition", std::string("well-thermal")));
  if (j.contains("reflect_at")) c.reflect_at = j.at("reflect_at").get<double>();
}

inline void to_json(json& j, const EscapeRateEstimate& e) {
  j = json{{"kappa", e.kappa},
           {"method", to_string(e.method)},
           {"uncertainty", e.uncertainty},
           {"diagnostics", e.diagnostics},
           {"warnings", e.warnings}};
}

inline void to_json(json& j, const FptStatistics& s) {
  j = json{{"n_escaped", s.n_escaped},
           {"n_censored", s.n_censored},
           {"n_diverged", s.n_diverged},
           {"mean_fpt", s.mean_fpt},
           {"kappa", s.kappa},
           {"kappa_stderr", s.kappa_stderr},
           {"biased", s.biased},
           {"diagnostics", s.diagnostics},
           {"warnings", s.warnings}};
}

inline void to_json(json& j, const DecayResult& r) {
  j = json{{"kappa", r.kappa},
           {"fit_window", {r.fit_t_lo, r.fit_t_hi}},
           {"residual", r.residual},
           {"diagnostics", r.diagnostics},
           {"warnings", r.warnings}};
}

inline void to_json(json& j, const FitResult& r) {
  j = json{{"hbar_omega_a_eV", r.hbar_omega_a_ev},
           {"delta_u_eV", r.delta_u_ev},
           {"covariance",
            {{r.covariance[0][0], r.covariance[0][1]},
             {r.covariance[1][0], r.covariance[1][1]}}},
           {"rms_log_residual", r.rms_log_residual},
           {"per_point_residuals", r.per_point_residuals},
           {"converged", r.converged},
           {"iterations", r.iterations},
           {"warnings", r.warnings}};
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

inline double parse_double(const std::string& s, int line_no) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') {
    throw invalid_input("csv line " + std::to_string(line_no) +
                        ": not a number: '" + s + "'");
  }
  return v;
}

} // namespace detail

// Reads `temperature_K,kappa_per_s[,weight]` tables.
inline RateDataset read_rate_csv(std::istream& in, const std::string& label) {
  std::string line;
  if (!std::getline(in, line)) throw invalid_input("csv: empty input");
  auto header = detail::split_csv_line(line);
  bool has_weight;
  if (header == std::vector<std::string>{"temperature_K", "kappa_per_s"}) {
    has_weight = false;
  } else if (header == std::vector<std::string>{"temperature_K",
                                                "kappa_per_s", "weight"}) {
    has_weight = true;
  } else {
    throw invalid_input(
        "csv: expected header 'temperature_K,kappa_per_s[,weight]'");
  }
  RateDataset data;
  data.label = label;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto fields = detail::split_csv_line(line);
    if (fields.size() != (has_weight ? 3u : 2u)) {
      throw invalid_input("csv line " + std::to_string(line_no) +
                          ": wrong field count");
    }
    RatePoint p;
    p.temperature_k = detail::parse_double(fields[0], line_no);
    p.kappa_per_s = detail::parse_double(fields[1], line_no);
    if (has_weight) p.weight = detail::parse_double(fields[2], line_no);
    data.points.push_back(p);
  }
  validate(data);
  return data;
}

inline void write_rate_csv(std::ostream& out, const RateDataset& data) {
  bool has_weight = false;
  for (const auto& p : data.points) has_weight |= p.weight != 1.0;
  out << "temperature_K,kappa_per_s" << (has_weight ? ",weight" : "") << "\n";
  for (const auto& p : data.points) {
    out << format_double(p.temperature_k) << ','
        << format_double(p.kappa_per_s);
    if (has_weight) out << ',' << format_double(p.weight);
    out << "\n";
  }
}

inline void write_curve_csv(
    std::ostream& out, const std::vector<std::pair<double, double>>& curve) {
  out << "temperature_K,kappa_per_s\n";
  for (const auto& [t, k] : curve) {
    out << format_double(t) << ',' << format_double(k) << "\n";
  }
}

// Zero-point and classical curves side by side.
inline void write_comparison_csv(std::ostream& out,
                                 const std::vector<double>& temperatures,
                                 const std::vector<double>& kappa_zp,
                                 const std::vector<double>& kappa_arrhenius) {
  out << "temperature_K,kappa_zp,kappa_arrhenius\n";
  for (std::size_t i = 0; i < temperatures.size(); ++i) {
    out << format_double(temperatures[i]) << ',' << format_double(kappa_zp[i])
        << ',' << format_double(kappa_arrhenius[i]) << "\n";
  }
}

inline void write_histogram_csv(std::ostream& out,
                                const std::vector<FptHistogramBin>& bins) {
  out << "bin_left,bin_right,count\n";
  for (const auto& b : bins) {
    out << format_double(b.t_lo) << ',' << format_double(b.t_hi) << ','
        << b.count << "\n";
  }
}

inline void write_pseries_csv(
    std::ostream& out, const std::vector<std::pair<double, double>>& series) {
  out << "t,P\n";
  for (const auto& [t, p] : series) {
    out << format_double(t) << ',' << format_double(p) << "\n";
  }
}

inline void write_grid_csv(std::ostream& out, const PhaseSpaceGrid& g) {
  out << "x,p,W\n";
  for (int i = 0; i < g.spec.nx; ++i) {
    for (int j = 0; j < g.spec.np; ++j) {
      out << format_double(g.x_center(i)) << ',' << format_double(g.p_center(j))
          << ',' << format_double(g.at(i, j)) << "\n";
    }
  }
}

} // namespace kramers
