#include "bsnake/experiment.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bsnake/occupation.hpp"

namespace bsnake {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_real(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (text.empty() || used != text.size()) throw ConfigError("parameter '" + key + "': not a number: '" + text + "'");
  return v;
}

std::string json_string(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      default: out += c;
    }
  }
  return out + "\"";
}

std::string json_number(double v) { return std::isfinite(v) ? format_double(v) : "null"; }

}  // namespace

void apply_setting(ExperimentConfig& config, std::string_view setting) {
  const auto eq = setting.find('=');
  if (eq == std::string_view::npos) throw ConfigError("expected key=value, got '" + std::string(setting) + "'");
  const std::string key = trim(setting.substr(0, eq));
  const std::string value = trim(setting.substr(eq + 1));
  if (key.empty()) throw ConfigError("empty key in '" + std::string(setting) + "'");
  config.params[key] = value;
}

void load_config_file(ExperimentConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    apply_setting(config, line);
  }
  if (auto it = config.params.find("seed"); it != config.params.end()) {
    config.seed = static_cast<std::uint64_t>(parse_real("seed", it->second));
    config.params.erase(it);
  }
  if (auto it = config.params.find("threads"); it != config.params.end()) {
    config.threads = static_cast<unsigned>(parse_real("threads", it->second));
    config.params.erase(it);
  }
}

ParamSet::ParamSet(std::string suite, std::map<std::string, std::string> defaults,
                   const std::map<std::string, std::string>& given)
    : suite_(std::move(suite)), values_(std::move(defaults)) {
  for (const auto& [key, value] : given) {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown key '" + key + "' for suite " + suite_);
    it->second = value;
  }
}

const std::string& ParamSet::raw(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("suite " + suite_ + " does not declare key '" + key + "'");
  return it->second;
}

double ParamSet::real(const std::string& key) const { return parse_real(key, raw(key)); }

std::int64_t ParamSet::integer(const std::string& key) const {
  const double v = real(key);
  if (v != std::floor(v)) throw ConfigError("parameter '" + key + "' must be an integer");
  return static_cast<std::int64_t>(v);
}

std::size_t ParamSet::count(const std::string& key) const {
  const std::int64_t v = integer(key);
  if (v < 1) throw ConfigError("parameter '" + key + "' must be >= 1");
  return static_cast<std::size_t>(v);
}

std::string ParamSet::text(const std::string& key) const { return raw(key); }

std::vector<double> ParamSet::reals(const std::string& key) const {
  std::vector<double> out;
  std::stringstream ss(raw(key));
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_real(key, trim(item)));
  if (out.empty()) throw ConfigError("parameter '" + key + "' must be a nonempty list");
  return out;
}

Check check_close(std::string name, double value, double target, double tol, std::string reference) {
  Check c{std::move(name), value, target, tol, true, false, std::move(reference)};
  c.pass = std::abs(value - target) <= tol;
  return c;
}

Check check_at_most(std::string name, double value, double bound, std::string reference, bool strict) {
  Check c{std::move(name), value, bound, 0.0, true, false, std::move(reference)};
  c.pass = strict ? value < bound : value <= bound;
  return c;
}

Check check_at_least(std::string name, double value, double bound, std::string reference) {
  Check c{std::move(name), value, bound, 0.0, true, false, std::move(reference)};
  c.pass = value >= bound;
  return c;
}

Check report_only(Check check) {
  check.gated = false;
  return check;
}

bool SuiteReport::passed() const {
  for (const auto& c : checks) {
    if (c.gated && !c.pass) return false;
  }
  return true;
}

std::string report_json(const SuiteReport& report) {
  std::ostringstream out;
  out << "{\n  \"suite\": " << json_string(report.suite) << ",\n  \"seed\": " << report.seed
      << ",\n  \"checks\": [";
  for (std::size_t i = 0; i < report.checks.size(); ++i) {
    const auto& c = report.checks[i];
    out << (i ? "," : "") << "\n    {\"name\": " << json_string(c.name) << ", \"value\": " << json_number(c.value)
        << ", \"target\": " << json_number(c.target) << ", \"tol\": " << json_number(c.tol)
        << ", \"gated\": " << (c.gated ? "true" : "false") << ", \"pass\": " << (c.pass ? "true" : "false")
        << ", \"reference\": " << json_string(c.reference) << "}";
  }
  out << "\n  ],\n  \"passed\": " << (report.passed() ? "true" : "false") << "\n}\n";
  return out.str();
}

std::string report_csv(const SuiteReport& report) {
  std::ostringstream out;
  out << "suite,name,value,target,tol,gated,pass\n";
  for (const auto& c : report.checks) {
    out << report.suite << ',' << c.name << ',' << format_double(c.value) << ',' << format_double(c.target) << ','
        << format_double(c.tol) << ',' << (c.gated ? 1 : 0) << ',' << (c.pass ? 1 : 0) << '\n';
  }
  return out.str();
}

void write_report_files(const SuiteReport& report, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  auto write = [&](const std::string& name, const std::string& text) {
    const std::string path = (std::filesystem::path(dir) / name).string();
    std::ofstream out(path);
    if (!out || !(out << text)) throw ConfigError("cannot write " + path);
  };
  write(report.suite + ".json", report_json(report));
  write(report.suite + ".csv", report_csv(report));
  write(report.suite + ".runtime.json", "{\"suite\": " + json_string(report.suite) +
                                            ", \"runtime_s\": " + json_number(report.runtime_s) + "}\n");
}

}  // namespace bsnake
