// Run orchestration and regulatory-style reporting: subcommand pipelines,
// the reproducibility manifest, canonical JSON emission and CSV bundles.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "betatrial/config.hpp"

namespace betatrial {

inline constexpr const char* kToolName = "betatrial";
inline constexpr const char* kToolVersion = "0.1.0";

enum class Subcommand { Simulate, Oc, Calibrate, DoseFind, Report };

Subcommand subcommand_from_string(const std::string& name);

struct RunOverrides {
  std::optional<std::uint64_t> master_seed;
  std::optional<int> workers;
  std::optional<std::string> timestamp;  // stamped only on request, to keep
                                         // reports byte-deterministic
};

struct RunReport {
  nlohmann::json body;  // full report, manifest embedded

  std::string to_json() const;  // canonical text
};

// SHA-256 hex digest of the canonical rendering of a JSON document.
std::string config_digest(const nlohmann::json& config);

// Canonical serialization: sorted keys, 12-significant-digit floats,
// minimal separators. Emitting the same document twice is byte-identical.
std::string canonical_json(const nlohmann::json& j, int indent = 2);

// Execute a subcommand. Throws std::invalid_argument for configs that do
// not support the subcommand and std::runtime_error for computation
// failures (budgets, unattainable calibrations).
RunReport run(const DesignConfig& config, Subcommand subcommand,
              const RunOverrides& overrides = {},
              const EngineSettings& settings = EngineSettings::defaults());

enum class EmitFormat { Json, CsvBundle };

// Write the report under out_dir; returns the files written. JSON format
// writes report.json; the CSV bundle writes one table per section plus
// manifest.json.
std::vector<std::filesystem::path> emit(const RunReport& report, EmitFormat format,
                                        const std::filesystem::path& out_dir);

}  // namespace betatrial
