// Sequential trial simulation and operating characteristics: Monte Carlo
// with replicate-keyed streams, exact dynamic-programming enumeration over
// sufficient-statistic lattices, and Bayesian OCs under a design prior.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "betatrial/rng.hpp"
#include "betatrial/rules.hpp"

namespace betatrial {

struct TrialDesign {
  int arms = 1;                        // 1 or 2
  std::vector<LookSizes> allocation;   // cumulative, strictly increasing
  Dist analysis_prior_t = BetaParams(1.0, 1.0);
  std::optional<Dist> analysis_prior_c;
  SuccessRule success{0.5, 0.95};
  std::optional<FutilityRule> futility;
  MonitoringSpec monitoring;

  int looks() const { return static_cast<int>(allocation.size()); }
  void validate() const;
};

struct Scenario {
  double treatment_rate = 0.5;
  double control_rate = 0.0;           // ignored for one-arm designs
  std::vector<double> drift;           // per-look additive offset to the control rate
  std::string label;

  // Effective control rate at a look, clamped to [0,1].
  double control_rate_at(int look) const;
};

struct DesignPrior {
  struct Atom {
    double weight;
    Scenario scenario;
  };
  std::vector<Atom> atoms;  // explicit scenario atoms, or generated from a Beta spec

  // Discretize Beta(alpha, beta) over the treatment rate (control fixed)
  // into `points` weighted atoms.
  static DesignPrior from_beta(const BetaParams& treatment_prior, double control_rate,
                               int points = 201);
  void validate() const;
};

enum class OcMode { Exact, MonteCarlo };

struct OCReport {
  OcMode mode = OcMode::Exact;
  std::string scenario_label;
  double reject_prob = 0.0;
  std::vector<double> stop_efficacy;   // per look; final-look success included
  std::vector<double> stop_futility;   // per look; final-look failure included
  double expected_n_treatment = 0.0;
  double expected_n_control = 0.0;
  std::optional<double> assurance;
  std::optional<double> pcd;
  std::optional<long long> mc_replicates;
  std::optional<double> mc_se_reject;
  std::vector<double> mc_se_stop_efficacy;  // empty in exact mode
  std::vector<double> mc_se_stop_futility;
};

struct TrialResult {
  Decision decision;
  int stop_look = 0;       // 0-based look index at which the trial ended
  int enrolled_treatment = 0;
  int enrolled_control = 0;
};

// Simulate one replicate. Fully determined by (design, scenario, stream).
TrialResult simulate_trial(const TrialDesign& design, const Scenario& scenario,
                           const ReplicateStream& stream,
                           const EngineSettings& s = EngineSettings::defaults());

// True if the design fits the exact-DP budgets.
bool exact_feasible(const TrialDesign& design, const EngineSettings& s = EngineSettings::defaults());

// Exact operating characteristics by forward DP over success-count states.
OCReport exact_oc(const TrialDesign& design, const Scenario& scenario,
                  const EngineSettings& s = EngineSettings::defaults());

// Monte Carlo operating characteristics; integer tallies merged
// associatively, so the report is identical for any worker count.
OCReport monte_carlo_oc(const TrialDesign& design, const Scenario& scenario,
                        long long replicates, std::uint64_t master_seed,
                        int workers = 1, std::uint64_t scenario_index = 0,
                        const EngineSettings& s = EngineSettings::defaults());

// Assurance and probability of a correct decision under a design prior.
OCReport bayesian_oc(const TrialDesign& design, const DesignPrior& dprior, OcMode mode,
                     long long mc_replicates = 0, std::uint64_t master_seed = 0,
                     int workers = 1, const EngineSettings& s = EngineSettings::defaults());

}  // namespace betatrial
