// Design calibration: posterior-cutoff search against a frequentist Type I
// error target, sample-size/cutoff search against a Bayesian assurance
// target, and exact group-sequential comparator boundaries.

#pragma once

#include <optional>
#include <vector>

#include "betatrial/engine.hpp"

namespace betatrial {

struct CalibrationProblem {
  TrialDesign design;       // posterior_cutoff treated as free
  Scenario null_scenario;
  double alpha;
  double cutoff_grid_step = 1e-4;

  void validate() const;
};

struct CalibrationResult {
  double cutoff;               // c*: smallest grid cutoff with TypeI <= alpha
  double type_i_error;         // achieved, exact
  double type_i_below_cutoff;  // TypeI(c* - step) > alpha, the certificate
  TrialDesign calibrated;      // design with the cutoff applied
};

// Smallest grid cutoff controlling the exact Type I error rate at alpha;
// bisection over the grid exploiting monotonicity, with an on-grid
// certificate. Throws "alpha unattainable" when discreteness defeats the
// target.
CalibrationResult calibrate_cutoff(const CalibrationProblem& problem,
                                   const EngineSettings& s = EngineSettings::defaults());

enum class AssuranceParam { FinalN, Cutoff };

struct AssuranceProblem {
  TrialDesign design;   // template; the searched parameter is overwritten
  DesignPrior dprior;
  double target;        // in (0,1)
  AssuranceParam param = AssuranceParam::FinalN;
  int n_lo = 10, n_hi = 400;             // FinalN search range (single look)
  double cutoff_lo = 0.5, cutoff_hi = 0.9999;
  double cutoff_step = 1e-4;

  void validate() const;
};

struct AssuranceResult {
  double parameter;    // smallest n (or largest cutoff) meeting the target
  double assurance;    // achieved
  TrialDesign calibrated;
};

AssuranceResult calibrate_assurance(const AssuranceProblem& problem,
                                    const EngineSettings& s = EngineSettings::defaults());

// Exact one-arm group-sequential efficacy boundaries under cumulative
// alpha spending. A returned count of n_k + 1 means "no stopping possible
// at look k" (empty rejection region, e.g. zero spending).
std::vector<int> exact_gs_boundaries(const std::vector<int>& schedule, double alpha,
                                     const std::vector<double>& spending_fractions,
                                     double null_rate);

}  // namespace betatrial
