#pragma once

// Named verification suites. Each declares its keys (with defaults) and
// returns a SuiteReport; every replica draws from a stream keyed by the suite
// seed and a purpose label, so results do not depend on the thread count.

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "bsnake/experiment.hpp"

namespace bsnake::suites {

struct SuiteInfo {
  std::string name;
  std::string summary;
  std::map<std::string, std::string> defaults;
  std::function<void(const ParamSet&, const ExperimentConfig&, SuiteReport&)> run;
};

const std::vector<SuiteInfo>& registry();
const SuiteInfo& find_suite(const std::string& name);  // ConfigError if unknown

/// Validates keys, runs the suite, fills runtime_s.
SuiteReport run_suite(const ExperimentConfig& config);

}  // namespace bsnake::suites
