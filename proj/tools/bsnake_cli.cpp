#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "bsnake/experiment.hpp"
#include "bsnake/kernel.hpp"
#include "bsnake/occupation.hpp"
#include "bsnake/packing.hpp"
#include "bsnake/palm.hpp"
#include "bsnake/rng.hpp"
#include "bsnake/snake.hpp"
#include "suites.hpp"

using namespace bsnake;

namespace {

struct VerifyArgs {
  std::string suite;
  std::uint64_t seed = 1;
  bool seed_given = false;
  std::string out;
  std::vector<std::string> settings;
  std::string config;
  unsigned threads = 1;
};

int run_verify(const VerifyArgs& args) {
  std::vector<std::string> names;
  if (args.suite == "all") {
    for (const auto& s : suites::registry()) names.push_back(s.name);
  } else {
    names.push_back(suites::find_suite(args.suite).name);
  }
  bool ok = true;
  for (const auto& name : names) {
    ExperimentConfig config;
    config.suite = name;
    config.threads = args.threads;
    if (!args.config.empty()) load_config_file(config, args.config);
    for (const auto& s : args.settings) apply_setting(config, s);
    if (args.seed_given) config.seed = args.seed;
    const SuiteReport report = suites::run_suite(config);
    if (!args.out.empty()) write_report_files(report, args.out);
    for (const auto& c : report.checks) {
      std::cout << name << ' ' << c.name << " value=" << format_double(c.value) << " target=" << format_double(c.target)
                << " tol=" << format_double(c.tol) << (c.gated ? (c.pass ? " PASS" : " FAIL") : " REPORT") << '\n';
    }
    std::cout << name << (report.passed() ? " passed" : " FAILED") << " in " << report.runtime_s << " s\n";
    ok = ok && report.passed();
  }
  return ok ? 0 : 1;
}

struct SimulateArgs {
  std::string kind;
  int dim = 5;
  double s_min = 0.01;
  double dt = 0.0;
  double a = 1.0;
  double mass = 1.0;
  std::size_t steps = 10000;
  std::size_t max_steps = std::size_t{1} << 14;
  std::uint64_t seed = 1;
  std::string out;
};

int run_simulate(const SimulateArgs& args) {
  Rng rng(args.seed);
  const double dt = args.dt > 0.0 ? args.dt : args.s_min / 100.0;
  const std::vector<double> origin(static_cast<std::size_t>(args.dim), 0.0);
  OccupationMeasure cloud;
  if (args.kind == "snake") {
    ItoWindow window;
    window.s_min = args.s_min;
    window.max_steps = args.max_steps;
    cloud = occupation_cloud(sample_snake_head(sample_ito_excursion(args.s_min, dt, rng, window).excursion, origin, rng));
  } else if (args.kind == "ise") {
    cloud = occupation_cloud(sample_ise(args.steps, args.dim, rng));
  } else if (args.kind == "palm") {
    PalmOptions opts;
    opts.max_steps = args.max_steps;
    cloud = sample_palm_cloud(args.a, args.s_min, dt, args.dim, rng, opts).cloud;
  } else {
    SbmOptions opts;
    opts.max_steps = args.max_steps;
    opts.keep_excursions = false;
    const InitialAtom atom{origin, args.mass};
    cloud = sample_sbm_occupation(std::span(&atom, 1), args.s_min, dt, rng, opts).cloud;
  }
  write_cloud_csv_file(args.out, cloud);
  std::cout << "wrote " << cloud.size() << " atoms, total mass " << format_double(cloud.total_mass) << " to " << args.out
            << '\n';
  return 0;
}

int run_packing(const std::string& cloud_path, const std::string& gauge_spec, double eps, int levels) {
  const Gauge gauge = Gauge::parse(gauge_spec);
  OccupationMeasure cloud = read_cloud_csv_file(cloud_path);
  const SpatialIndex index = build_spatial_index(std::move(cloud), eps);
  PackingOptions opts;
  opts.levels = levels;
  const double value = epsilon_packing(index, [](std::span<const double>) { return true; }, eps, gauge, opts);
  std::cout << format_double(value) << '\n';
  return 0;
}

int run_kappa(KappaConfig config, const std::string& out) {
  const KappaReport report = kappa_experiment(config);
  if (!out.empty()) {
    std::filesystem::create_directories(out);
    std::ofstream csv(std::filesystem::path(out) / "kappa.csv");
    write_kappa_csv(csv, report);
    std::ofstream json(std::filesystem::path(out) / "kappa.json");
    write_kappa_json(json, report);
    if (!csv || !json) throw ConfigError("cannot write to " + out);
  }
  write_kappa_json(std::cout, report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Brownian snake simulation and verification"};
  app.require_subcommand(1);

  auto* list = app.add_subcommand("list", "list verification suites and their keys");

  VerifyArgs verify;
  auto* verify_cmd = app.add_subcommand("verify", "run a verification suite (or all)");
  verify_cmd->add_option("suite", verify.suite, "suite name or 'all'")->required();
  verify_cmd->add_option("--seed", verify.seed, "master seed");
  verify_cmd->add_option("--out", verify.out, "directory for JSON and CSV reports");
  verify_cmd->add_option("--set", verify.settings, "key=value override")->take_all();
  verify_cmd->add_option("--config", verify.config, "file of key=value lines");
  verify_cmd->add_option("--threads", verify.threads, "worker threads (0 = hardware)");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "write an occupation cloud CSV");
  sim_cmd->add_option("kind", sim.kind, "snake | palm | sbm | ise")
      ->required()
      ->check(CLI::IsMember({"snake", "palm", "sbm", "ise"}));
  sim_cmd->add_option("--dim", sim.dim)->check(CLI::Range(1, 64));
  sim_cmd->add_option("--s-min", sim.s_min, "excursion duration cutoff")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--dt", sim.dt, "lifetime step (default s_min/100)");
  sim_cmd->add_option("--a", sim.a, "Palm backbone length")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--mass", sim.mass, "SBM initial mass at the origin")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--steps", sim.steps, "ISE grid steps");
  sim_cmd->add_option("--max-steps", sim.max_steps, "step cap per excursion");
  sim_cmd->add_option("--seed", sim.seed);
  sim_cmd->add_option("--out", sim.out, "output CSV")->required();

  auto* packing_cmd = app.add_subcommand("packing", "packing pre-measure estimates");
  packing_cmd->require_subcommand(1);
  auto* estimate_cmd = packing_cmd->add_subcommand("estimate", "greedy eps-packing of a cloud");
  std::string cloud_path, gauge_spec = "g";
  double eps = 0.1;
  int levels = 3;
  estimate_cmd->add_option("--cloud", cloud_path)->required();
  estimate_cmd->add_option("--gauge", gauge_spec, "g | k | power:<alpha>");
  estimate_cmd->add_option("--eps", eps)->required();
  estimate_cmd->add_option("--levels", levels, "radii eps 2^-j, j < levels")->check(CLI::PositiveNumber);

  KappaConfig kappa;
  std::string kappa_out;
  std::string kappa_grid;
  auto* kappa_cmd = app.add_subcommand("kappa", "density ratios at Palm origins");
  kappa_cmd->add_option("--d", kappa.dim, "dimension")->check(CLI::Range(1, 64));
  kappa_cmd->add_option("--a", kappa.a);
  kappa_cmd->add_option("--s-min", kappa.s_min);
  kappa_cmd->add_option("--max-steps", kappa.max_steps);
  kappa_cmd->add_option("--replicas", kappa.replicas);
  kappa_cmd->add_option("--r-grid", kappa_grid, "comma separated, decreasing");
  kappa_cmd->add_option("--seed", kappa.seed);
  kappa_cmd->add_option("--threads", kappa.threads);
  kappa_cmd->add_option("--out", kappa_out, "directory for kappa.csv and kappa.json");

  CLI11_PARSE(app, argc, argv);
  verify.seed_given = verify_cmd->count("--seed") > 0;

  try {
    if (*list) {
      for (const auto& s : suites::registry()) {
        std::cout << s.name << ": " << s.summary << "\n ";
        for (const auto& [k, v] : s.defaults) std::cout << ' ' << k << '=' << v;
        std::cout << '\n';
      }
      return 0;
    }
    if (*verify_cmd) return run_verify(verify);
    if (*sim_cmd) return run_simulate(sim);
    if (*estimate_cmd) return run_packing(cloud_path, gauge_spec, eps, levels);
    if (*kappa_cmd) {
      if (!kappa_grid.empty()) {
        ExperimentConfig tmp;
        apply_setting(tmp, "r_grid=" + kappa_grid);
        kappa.r_grid = ParamSet("kappa", {{"r_grid", ""}}, tmp.params).reals("r_grid");
      }
      return run_kappa(kappa, kappa_out);
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
