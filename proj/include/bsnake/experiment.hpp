#pragma once

// Experiment configuration (flat key=value with declared keys), suite reports
// and their CSV / JSON serialization.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bsnake {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string suite;
  std::map<std::string, std::string> params;
  std::uint64_t seed = 1;
  std::string out_dir;
  unsigned threads = 1;
};

/// Parse "key=value" into config.params (ConfigError if malformed).
void apply_setting(ExperimentConfig& config, std::string_view setting);

/// Config file: one key=value per line; '#' starts a comment. The keys
/// "seed" and "threads" set the corresponding config fields.
void load_config_file(ExperimentConfig& config, const std::string& path);

/// Declared parameters of a suite with their defaults. Construction rejects
/// any given key that is not declared, naming it.
class ParamSet {
 public:
  ParamSet(std::string suite, std::map<std::string, std::string> defaults,
           const std::map<std::string, std::string>& given);

  double real(const std::string& key) const;
  std::int64_t integer(const std::string& key) const;
  std::size_t count(const std::string& key) const;  // integer >= 1
  std::string text(const std::string& key) const;
  std::vector<double> reals(const std::string& key) const;  // comma separated

 private:
  const std::string& raw(const std::string& key) const;
  std::string suite_;
  std::map<std::string, std::string> values_;
};

struct Check {
  std::string name;
  double value = 0.0;
  double target = 0.0;
  double tol = 0.0;
  bool gated = true;
  bool pass = false;
  std::string reference;  // formula the target comes from
};

/// pass iff |value - target| <= tol.
Check check_close(std::string name, double value, double target, double tol, std::string reference);
/// pass iff value <= bound (value < bound when strict).
Check check_at_most(std::string name, double value, double bound, std::string reference, bool strict = false);
/// pass iff value >= bound.
Check check_at_least(std::string name, double value, double bound, std::string reference);
/// A check recorded but never gating.
Check report_only(Check check);

struct SuiteReport {
  std::string suite;
  std::uint64_t seed = 0;
  std::vector<Check> checks;
  double runtime_s = 0.0;

  bool passed() const;  // all gated checks pass
};

/// JSON without the runtime, so reruns are byte-identical.
std::string report_json(const SuiteReport& report);
std::string report_csv(const SuiteReport& report);
/// Writes <suite>.json, <suite>.csv and <suite>.runtime.json into dir.
void write_report_files(const SuiteReport& report, const std::string& dir);

}  // namespace bsnake
