#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "bsnake/experiment.hpp"
#include "bsnake/rng.hpp"
#include "bsnake/stats.hpp"
#include "approx.hpp"
#include "suites.hpp"

using namespace bsnake;
using nlohmann::json;

TEST_CASE("parameter sets reject undeclared keys by name") {
  const std::map<std::string, std::string> defaults{{"dt", "0.001"}, {"n", "100"}, {"grid", "0.1,0.2"}};
  try {
    ParamSet p("exit_laplace", defaults, {{"dtt", "0.01"}});
    FAIL("undeclared key accepted");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("dtt") != std::string::npos);
  }
  const ParamSet p("s", defaults, {{"dt", "0.01"}});
  CHECK(p.real("dt") == 0.01);
  CHECK(p.count("n") == 100);
  CHECK(p.reals("grid") == std::vector<double>{0.1, 0.2});
  CHECK_THROWS_AS(p.real("missing"), ConfigError);
  CHECK_THROWS_AS(ParamSet("s", defaults, {{"n", "1.5"}}).integer("n"), ConfigError);
  CHECK_THROWS_AS(ParamSet("s", defaults, {{"n", "0"}}).count("n"), ConfigError);
  CHECK_THROWS_AS(ParamSet("s", defaults, {{"dt", "abc"}}).real("dt"), ConfigError);
}

TEST_CASE("settings and config files") {
  ExperimentConfig cfg;
  apply_setting(cfg, " dt = 0.5 ");
  CHECK(cfg.params.at("dt") == "0.5");
  CHECK_THROWS_AS(apply_setting(cfg, "novalue"), ConfigError);
  CHECK_THROWS_AS(apply_setting(cfg, "=3"), ConfigError);

  const auto path = std::filesystem::temp_directory_path() / "bsnake_test_config.txt";
  {
    std::ofstream out(path);
    out << "# comment\nn = 42\n\nseed = 7  # trailing\nthreads=2\n";
  }
  ExperimentConfig file;
  load_config_file(file, path.string());
  CHECK(file.params.at("n") == "42");
  CHECK(file.seed == 7);
  CHECK(file.threads == 2);
  CHECK(file.params.count("seed") == 0);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_config_file(file, "/nonexistent/bsnake.cfg"), ConfigError);
}

TEST_CASE("checks") {
  CHECK(check_close("a", 1.0, 1.05, 0.1, "").pass);
  CHECK_FALSE(check_close("a", 1.0, 1.2, 0.1, "").pass);
  CHECK(check_at_most("b", 0.0, 0.0, "").pass);
  CHECK_FALSE(check_at_most("b", 0.0, 0.0, "", true).pass);
  CHECK(check_at_least("c", 0.95, 0.9, "").pass);
  SuiteReport r;
  r.checks.push_back(report_only(check_close("x", 5.0, 0.0, 1.0, "")));
  CHECK(r.passed());
  r.checks.push_back(check_close("y", 5.0, 0.0, 1.0, ""));
  CHECK_FALSE(r.passed());
}

TEST_CASE("summaries and Kolmogorov-Smirnov") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const Summary s = summarize(v);
  CHECK(s.mean == 2.5);
  CHECK(s.sd == rel(std::sqrt(5.0 / 3.0)));
  CHECK(s.se == rel(std::sqrt(5.0 / 3.0) / 2.0));

  CHECK(ks_statistic(v, v).distance == 0.0);
  CHECK(ks_statistic(std::vector<double>{0.5}, [](double x) { return x; }).distance == 0.5);
  CHECK(ks_statistic(v, std::vector<double>{10.0, 11.0}).distance == 1.0);

  // Under the null the 5% critical value is exceeded about 5% of the time.
  Rng rng(3);
  int below = 0;
  const int trials = 600;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> u(400);
    for (auto& x : u) x = rng.uniform();
    below += ks_statistic(u, [](double x) { return std::clamp(x, 0.0, 1.0); }).below() ? 1 : 0;
  }
  const double frac = static_cast<double>(below) / trials;
  CHECK(frac >= 0.92);
  CHECK(frac <= 0.98);
}

TEST_CASE("report serialization") {
  SuiteReport r;
  r.suite = "demo";
  r.seed = 9;
  r.runtime_s = 1.25;
  r.checks.push_back(check_close("m\"q", 0.1, 0.1, 1e-3, "ref"));
  r.checks.push_back(report_only(check_at_most("inf", std::numeric_limits<double>::infinity(), 1.0, "")));
  const json j = json::parse(report_json(r));
  CHECK(j["suite"] == "demo");
  CHECK(j["seed"] == 9);
  CHECK(j["checks"][0]["name"] == "m\"q");
  CHECK(j["checks"][0]["value"].get<double>() == 0.1);
  CHECK(j["checks"][1]["value"].is_null());
  CHECK(j["checks"][1]["gated"] == false);
  CHECK(j["passed"] == true);
  CHECK_FALSE(j.contains("runtime_s"));
  CHECK(report_csv(r).rfind("suite,name,value,target,tol,gated,pass\n", 0) == 0);

  const auto dir = std::filesystem::temp_directory_path() / "bsnake_test_reports";
  write_report_files(r, dir.string());
  for (const char* name : {"demo.json", "demo.csv", "demo.runtime.json"}) CHECK(std::filesystem::exists(dir / name));
  std::ifstream rt(dir / "demo.runtime.json");
  CHECK(json::parse(rt)["runtime_s"].get<double>() == 1.25);
  std::filesystem::remove_all(dir);
}

TEST_CASE("suites: registry, validation, determinism") {
  CHECK(suites::registry().size() == 18);
  CHECK_THROWS_AS(suites::find_suite("nope"), ConfigError);

  ExperimentConfig bad;
  bad.suite = "exit_laplace";
  bad.params["dtt"] = "0.01";
  try {
    (void)suites::run_suite(bad);
    FAIL("unknown key accepted");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("dtt") != std::string::npos);
  }
  ExperimentConfig neg;
  neg.suite = "exit_laplace";
  neg.params["r"] = "-1";
  CHECK_THROWS_AS(suites::run_suite(neg), ConfigError);

  for (const char* name : {"exit_laplace", "palm", "dyadic"}) {
    ExperimentConfig c;
    c.suite = name;
    c.seed = 5;
    c.params["scale"] = "0.02";
    if (std::string(name) == "dyadic") c.params["samples"] = "300";
    const std::string a = report_json(suites::run_suite(c));
    const std::string b = report_json(suites::run_suite(c));
    c.threads = 2;
    const std::string t = report_json(suites::run_suite(c));
    CHECK(a == b);
    CHECK(a == t);
    c.seed = 6;
    if (std::string(name) != "dyadic") CHECK(report_json(suites::run_suite(c)) != a);
    CHECK(json::parse(a)["suite"] == name);
  }
}
