#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kramers/fit.hpp"
#include "kramers/io.hpp"
#include "kramers/potential.hpp"
#include "kramers/rate.hpp"

using namespace kramers;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using nlohmann::json;

namespace {

struct cli_result {
  int status = -1;
  std::string out;
};

// Runs the installed binary through the shell and captures stdout.
// Append "2>&1" to the args to capture stderr as well.
cli_result run_cli(const std::string& args) {
  std::string cmd = std::string(KRAMERS_CLI_BIN) + " " + args;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  cli_result r;
  char buf[4096];
  std::size_t got = 0;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string temp_path(const char* name) {
  return std::string("/tmp/kramers_cli_") + name;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  REQUIRE(f.good());
  f << text;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  REQUIRE(f.good());
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

// Reference cubic problem shared by the simulate and fpe runs.
json cubic_config(double delta_u, double hbar_omega_a_ev, double gamma) {
  Potential pot = make_cubic(1.0, delta_u, 1.0);
  Bath bath;
  bath.temperature_k = 0.0;
  bath.hbar_omega_a_ev = hbar_omega_a_ev;
  bath.gamma_reduced = gamma;
  bath.zero_point = true;
  json cfg;
  cfg["potential"] = pot;
  cfg["bath"] = bath;
  return cfg;
}

} // namespace

TEST_CASE("rate emits the reference escape rates as json") {
  auto r = run_cli(
      "rate --hbar-omega-a-eV 5.06e-3 --delta-u-eV 6.68e-2 --temperature-K 0");
  REQUIRE(r.status == 0);
  json j = json::parse(r.out);
  CHECK_THAT(j.at("kappa").get<double>(),
             WithinRel(4.176930948689589, 1e-12));
  CHECK(j.at("method").get<std::string>() == "analytic-low-friction");
  CHECK(j.contains("diagnostics"));
  CHECK(j.contains("warnings"));

  auto warm = run_cli(
      "rate --hbar-omega-a-eV 5.06e-3 --delta-u-eV 6.68e-2 "
      "--temperature-K 300");
  REQUIRE(warm.status == 0);
  json jw = json::parse(warm.out);
  CHECK_THAT(jw.at("kappa").get<double>(),
             WithinRel(93107185420.16278, 1e-12));

  auto classical = run_cli(
      "rate --hbar-omega-a-eV 5.06e-3 --delta-u-eV 6.68e-2 "
      "--temperature-K 0 --no-zero-point");
  REQUIRE(classical.status == 0);
  json jc = json::parse(classical.out);
  CHECK(jc.at("kappa").get<double>() == 0.0);
  CHECK(jc.at("method").get<std::string>() == "arrhenius");
}

TEST_CASE("rate csv format carries the same number") {
  auto r = run_cli(
      "rate --hbar-omega-a-eV 5.06e-3 --delta-u-eV 6.68e-2 "
      "--temperature-K 0 --format csv");
  REQUIRE(r.status == 0);
  auto lines = lines_of(r.out);
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] == "kappa,method,uncertainty");
  CHECK_THAT(lines[1], ContainsSubstring("4.17693094869"));
  CHECK_THAT(lines[1], ContainsSubstring("analytic-low-friction"));
}

TEST_CASE("rate accepts a reduced-unit config file") {
  json cfg = cubic_config(1.0, 0.4, 0.5);
  std::string path = temp_path("rate_cfg.json");
  write_file(path, cfg.dump());

  auto r = run_cli("rate --config " + path);
  REQUIRE(r.status == 0);
  json j = json::parse(r.out);

  RateInputs in;
  in.features = analyze(make_cubic(1.0, 1.0, 1.0));
  in.bath = cfg.at("bath").get<Bath>();
  in.mass = 1.0;
  double expected = rate_full(in).kappa;
  CHECK_THAT(j.at("kappa").get<double>(), WithinRel(expected, 1e-12));
  std::remove(path.c_str());
}

TEST_CASE("dcoeff reports the diffusion energy") {
  auto r = run_cli("dcoeff --hbar-omega-a-eV 5.06e-3 --temperature-K 0");
  REQUIRE(r.status == 0);
  json j = json::parse(r.out);
  CHECK(j.at("D_eV").get<double>() == 2.53e-3);
  CHECK(j.at("temperature_K").get<double>() == 0.0);
  CHECK(j.at("zero_point").get<bool>() == true);

  auto classical = run_cli(
      "dcoeff --hbar-omega-a-eV 5.06e-3 --temperature-K 300 --no-zero-point");
  REQUIRE(classical.status == 0);
  json jc = json::parse(classical.out);
  CHECK_THAT(jc.at("D_eV").get<double>(),
             WithinRel(constants::k_boltzmann_ev_per_k * 300.0, 1e-12));

  auto csv = run_cli(
      "dcoeff --hbar-omega-a-eV 5.06e-3 --temperature-K 0 --format csv");
  REQUIRE(csv.status == 0);
  auto lines = lines_of(csv.out);
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] == "temperature_K,D_eV");
  CHECK_THAT(lines[1], ContainsSubstring("0.00253"));
}

TEST_CASE("curve comparison table is byte stable and ordered") {
  std::string cmd =
      "curve --hbar-omega-a-eV 5.06e-3 --delta-u-eV 6.68e-2 "
      "--t-min 20 --t-max 320 --points 7 --compare-arrhenius";
  auto first = run_cli(cmd);
  auto second = run_cli(cmd);
  REQUIRE(first.status == 0);
  REQUIRE(second.status == 0);
  CHECK(first.out == second.out);

  auto lines = lines_of(first.out);
  REQUIRE(lines.size() == 8);
  CHECK(lines[0] == "temperature_K,kappa_zp,kappa_arrhenius");
  double prev_zp = 0.0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::istringstream row(lines[i]);
    std::string t_s, zp_s, cl_s;
    REQUIRE(std::getline(row, t_s, ','));
    REQUIRE(std::getline(row, zp_s, ','));
    REQUIRE(std::getline(row, cl_s, ','));
    double zp = std::stod(zp_s);
    double cl = std::stod(cl_s);
    CHECK(zp > prev_zp);
    CHECK(zp >= cl);
    prev_zp = zp;
  }
}

TEST_CASE("output flag writes the artifact to a file instead of stdout") {
  std::string path = temp_path("dcoeff_out.json");
  auto r = run_cli("dcoeff --hbar-omega-a-eV 5.06e-3 -o " + path);
  REQUIRE(r.status == 0);
  CHECK(r.out.empty());
  json j = json::parse(read_file(path));
  CHECK(j.at("D_eV").get<double>() == 2.53e-3);
  std::remove(path.c_str());
}

TEST_CASE("usage errors exit with status 2") {
  CHECK(run_cli("frobnicate 2>/dev/null").status == 2);
  CHECK(run_cli("2>/dev/null").status == 2);
  CHECK(run_cli("rate --no-such-flag 1 2>/dev/null").status == 2);
  CHECK(run_cli("curve --t-min 10 2>/dev/null").status == 2);
  CHECK(run_cli("simulate 2>/dev/null").status == 2);
  CHECK(run_cli("rate --format yaml 2>/dev/null").status == 2);

  auto help = run_cli("--help");
  CHECK(help.status == 0);
  CHECK_THAT(help.out, ContainsSubstring("rate"));
  CHECK_THAT(help.out, ContainsSubstring("fpe"));
}

TEST_CASE("module errors exit 1 with a machine parseable object") {
  SECTION("missing parameters") {
    auto r = run_cli("rate 2>&1");
    REQUIRE(r.status == 1);
    json j = json::parse(r.out);
    CHECK(j.at("error").at("type").get<std::string>() == "invalid-input");
    CHECK_THAT(j.at("error").at("message").get<std::string>(),
               ContainsSubstring("--config"));
  }

  SECTION("config file that is not json") {
    std::string path = temp_path("broken.json");
    write_file(path, "{this is not json");
    auto r = run_cli("rate --config " + path + " 2>&1");
    REQUIRE(r.status == 1);
    json j = json::parse(r.out);
    CHECK(j.at("error").at("type").get<std::string>() == "invalid-input");
    CHECK_THAT(j.at("error").at("message").get<std::string>(),
               ContainsSubstring("not valid JSON"));
    std::remove(path.c_str());
  }

  SECTION("degenerate fit data") {
    std::string path = temp_path("flat.csv");
    write_file(path,
               "temperature_K,kappa_per_s\n10,1.0\n10,2.0\n10,3.0\n");
    auto r = run_cli("fit --data " + path + " 2>&1");
    REQUIRE(r.status == 1);
    json j = json::parse(r.out);
    CHECK(j.at("error").at("type").get<std::string>() == "domain");
    CHECK_THAT(j.at("error").at("message").get<std::string>(),
               ContainsSubstring("unidentifiable"));
    std::remove(path.c_str());
  }
}

TEST_CASE("simulate runs an escape ensemble from a config file") {
  json cfg = cubic_config(1.0, 0.5, 0.5);
  WellFeatures f = analyze(make_cubic(1.0, 1.0, 1.0));
  cfg["dt"] = 0.01;
  cfg["absorb_at"] = f.x_b + 2.0 * (f.x_b - f.x_a);
  cfg["max_time"] = 1.0e4;
  cfg["n_trajectories"] = 300;
  cfg["seed"] = 7;
  std::string path = temp_path("sim_cfg.json");
  write_file(path, cfg.dump());
  std::string hist = temp_path("sim_hist.csv");

  auto r = run_cli("simulate --config " + path + " --histogram-csv " + hist);
  REQUIRE(r.status == 0);
  json j = json::parse(r.out);
  CHECK(j.at("n_escaped").get<int>() == 300);
  CHECK(j.at("kappa").get<double>() > 0.0);
  CHECK(j.at("diagnostics").at("censored_fraction").get<double>() == 0.0);

  auto hist_lines = lines_of(read_file(hist));
  REQUIRE(hist_lines.size() > 1);
  CHECK(hist_lines[0] == "bin_left,bin_right,count");

  SECTION("flags override config fields") {
    auto small = run_cli("simulate --config " + path + " -n 40");
    REQUIRE(small.status == 0);
    json js = json::parse(small.out);
    CHECK(js.at("n_escaped").get<int>() == 40);
  }

  SECTION("same config and seed give identical bytes") {
    auto again = run_cli("simulate --config " + path + " --histogram-csv " +
                         hist);
    REQUIRE(again.status == 0);
    CHECK(again.out == r.out);
  }

  std::remove(path.c_str());
  std::remove(hist.c_str());
}

TEST_CASE("fpe decay from a config file tracks the analytic rate") {
  json cfg = cubic_config(1.0, 0.4, 0.5);
  cfg["nx"] = 96;
  cfg["np"] = 96;
  cfg["horizon"] = 30.0;
  std::string path = temp_path("fpe_cfg.json");
  write_file(path, cfg.dump());
  std::string pseries = temp_path("fpe_pseries.csv");

  auto r = run_cli("fpe --config " + path + " --pseries-csv " + pseries);
  REQUIRE(r.status == 0);
  json j = json::parse(r.out);

  RateInputs in;
  in.features = analyze(make_cubic(1.0, 1.0, 1.0));
  in.bath = cfg.at("bath").get<Bath>();
  double expected = rate_full(in).kappa;
  CHECK_THAT(j.at("kappa").get<double>(), WithinRel(expected, 0.05));
  CHECK(j.at("diagnostics").at("nx").get<double>() == 96.0);
  REQUIRE(j.at("fit_window").is_array());
  CHECK(j.at("fit_window")[0].get<double>() == 10.0);

  auto ps_lines = lines_of(read_file(pseries));
  REQUIRE(ps_lines.size() > 2);
  CHECK(ps_lines[0] == "t,P");
  CHECK_THAT(ps_lines[1], ContainsSubstring(",1"));

  std::remove(path.c_str());
  std::remove(pseries.c_str());
}

TEST_CASE("fit recovers parameters from a synthesized table") {
  const double ref_e = 5.06e-3;
  const double ref_du = 6.68e-2;
  std::vector<double> temps = {20, 40, 60, 80, 120, 160, 240, 320};
  RateDataset data;
  for (auto [t, k] : predict_curve(ref_e, ref_du, temps, true)) {
    data.points.push_back({t, k, 1.0});
  }
  std::string path = temp_path("fit_data.csv");
  {
    std::ofstream f(path);
    write_rate_csv(f, data);
  }

  auto r = run_cli("fit --data " + path);
  REQUIRE(r.status == 0);
  json j = json::parse(r.out);
  CHECK(j.at("converged").get<bool>());
  CHECK_THAT(j.at("hbar_omega_a_eV").get<double>(), WithinRel(ref_e, 1e-4));
  CHECK_THAT(j.at("delta_u_eV").get<double>(), WithinRel(ref_du, 1e-4));

  SECTION("dash reads the table from stdin") {
    auto piped = run_cli("fit --data - < " + path);
    REQUIRE(piped.status == 0);
    json jp = json::parse(piped.out);
    CHECK_THAT(jp.at("hbar_omega_a_eV").get<double>(), WithinRel(ref_e, 1e-4));
  }

  std::remove(path.c_str());
}

TEST_CASE("potential-info reports well geometry") {
  Potential pot = make_cubic(1.0, 1.0, 1.0);
  WellFeatures f = analyze(pot);

  SECTION("from a config file") {
    json cfg;
    cfg["potential"] = pot;
    std::string path = temp_path("pot_cfg.json");
    write_file(path, cfg.dump());
    auto r = run_cli("potential-info --config " + path);
    REQUIRE(r.status == 0);
    json j = json::parse(r.out);
    CHECK(j.at("degree").get<int>() == 3);
    CHECK_THAT(j.at("delta_u").get<double>(), WithinRel(f.delta_u, 1e-12));
    CHECK_THAT(j.at("omega_a").get<double>(), WithinRel(f.omega_a, 1e-12));
    CHECK_THAT(j.at("omega_b").get<double>(), WithinRel(f.omega_b, 1e-12));
    CHECK_THAT(j.at("x_b").get<double>(), WithinRel(f.x_b, 1e-12));
    std::remove(path.c_str());
  }

  SECTION("from a coefficient list") {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "potential-info --coefficients %.17g,%.17g,%.17g,%.17g "
                  "--mass 1",
                  pot.coefficients[0], pot.coefficients[1],
                  pot.coefficients[2], pot.coefficients[3]);
    auto r = run_cli(buf);
    REQUIRE(r.status == 0);
    json j = json::parse(r.out);
    CHECK_THAT(j.at("delta_u").get<double>(), WithinAbs(1.0, 1e-9));
    CHECK_THAT(j.at("omega_a").get<double>(), WithinAbs(1.0, 1e-9));
  }
}
