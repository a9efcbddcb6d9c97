// Declarative JSON configuration: schema validation that reports every
// problem with a path to the offending field, and construction of the
// domain objects the engine consumes.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "betatrial/calibration.hpp"
#include "betatrial/dose.hpp"
#include "betatrial/engine.hpp"

namespace betatrial {

struct ConfigError {
  std::string path;
  std::string message;
};

struct AssuranceSection {
  double target = 0.8;
  AssuranceParam param = AssuranceParam::FinalN;
  int n_lo = 10, n_hi = 400;
  double cutoff_lo = 0.5, cutoff_hi = 0.9999;
};

struct CalibrationSection {
  std::optional<double> alpha;
  std::string null_scenario;       // label reference into scenarios
  double cutoff_grid_step = 1e-4;
  std::optional<AssuranceSection> assurance;
  std::optional<std::vector<double>> gs_spending_fractions;
};

struct DoseScenario {
  std::vector<double> truth;
  std::string label;
};

struct DoseSection {
  dose::EscalationDesign design;
  std::vector<DoseScenario> scenarios;
  long long replicates = 1000;
  int decision_table_max_n = 12;
};

enum class RunMode { Auto, Exact, MonteCarlo };

struct ExecutionSection {
  long long replicates = 10000;
  std::uint64_t master_seed = 0;
  int workers = 1;
  RunMode mode = RunMode::Auto;
};

struct ArmPriors {
  Dist treatment = BetaParams(1.0, 1.0);
  std::optional<Dist> control;
  nlohmann::json spec;  // original JSON, echoed in reports
};

struct DesignConfig {
  int schema_version = 1;
  std::optional<TrialDesign> design;
  std::vector<Scenario> scenarios;
  std::optional<DesignPrior> design_prior;
  std::optional<CalibrationSection> calibration;
  std::optional<DoseSection> dose;
  std::vector<ArmPriors> alternative_priors;
  ExecutionSection execution;
  nlohmann::json raw;  // parsed config as given, echoed in reports
};

struct ParseResult {
  std::optional<DesignConfig> config;
  std::vector<ConfigError> errors;

  bool ok() const { return errors.empty() && config.has_value(); }
};

// Validate and build. Collects every validation error (schema violations,
// unknown keys, unresolved references) rather than stopping at the first.
ParseResult parse_config(const std::string& text);
ParseResult parse_config(const nlohmann::json& j);

// Build one prior spec (the "type": ... object). Throws std::invalid_argument
// with a descriptive message on bad input.
Dist build_prior(const nlohmann::json& spec);

}  // namespace betatrial
