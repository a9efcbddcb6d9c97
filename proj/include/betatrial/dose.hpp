// Phase-I dose-finding suite: rule-based 3+3 and i3+3, model-assisted BOIN
// and mTPI/mTPI-2, model-based CRM, an overdose-elimination safety rule,
// and an escalation simulator with isotonic MTD selection.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "betatrial/prob.hpp"
#include "betatrial/rng.hpp"

namespace betatrial::dose {

struct DoseToxState {
  std::vector<int> treated;     // per dose
  std::vector<int> dlts;        // per dose
  std::vector<bool> eliminated; // per dose, absorbing
  int current_dose = 0;

  explicit DoseToxState(int n_doses);
  int n_doses() const { return static_cast<int>(treated.size()); }
  void validate() const;
};

enum class EscalationKind { Escalate, Stay, DeEscalate, Eliminate, StopTrial };

struct EscalationDecision {
  EscalationKind kind;
};

const char* to_string(EscalationKind k);

// Likelihood-ratio interval boundaries for a target DLT rate.
struct BoinBoundaries {
  double target;
  double phi1;
  double phi2;
  double lambda_e;
  double lambda_d;
};

enum class MtpiVariant { Mtpi, Mtpi2 };

struct MtpiSpec {
  double target;
  double eps1 = 0.05;
  double eps2 = 0.05;
  BetaParams prior{1.0, 1.0};
  MtpiVariant variant = MtpiVariant::Mtpi;

  MtpiSpec(double target_, double eps1_, double eps2_, BetaParams prior_,
           MtpiVariant variant_);
};

struct CrmSpec {
  std::vector<double> skeleton;  // strictly increasing prior toxicity guesses
  double target;
  double prior_sd = 1.34;        // sd of the N(0, sd^2) parameter prior
  double grid_lo = -4.0;
  double grid_hi = 4.0;
  int grid_points = 801;
  bool no_skip = true;

  CrmSpec(std::vector<double> skeleton_, double target_);
  void validate() const;
};

// Classic 3+3 cohort rule; defined for 3 or 6 treated at the current dose.
EscalationDecision rule_3p3(const DoseToxState& state);

// i3+3 equivalence-interval rule.
EscalationDecision rule_i3p3(const DoseToxState& state, double target, double ei_low,
                             double ei_high);

// Optimal-interval boundaries from the likelihood-ratio derivation;
// defaults phi1 = 0.6 * target, phi2 = 1.4 * target.
BoinBoundaries boin_boundaries(double target, double phi1 = -1.0, double phi2 = -1.0);

EscalationDecision boin_decide(const DoseToxState& state, const BoinBoundaries& b);

struct MtpiDecision {
  EscalationKind kind;
  double upm_under;
  double upm_target;
  double upm_over;
};

MtpiDecision mtpi_decide(const DoseToxState& state, const MtpiSpec& spec);

struct CrmRecommendation {
  int dose;                        // next recommended dose index
  std::vector<double> post_means;  // posterior mean toxicity per dose
};

CrmRecommendation crm_recommend(const DoseToxState& state, const CrmSpec& spec);

// Eliminate dose j (and all above) when, with >= 3 treated,
// Pr(theta_j > target | Beta(1,1) + data) > prob_cutoff. Returns the
// updated flags; existing flags are never cleared.
std::vector<bool> overdose_eliminate(const DoseToxState& state, double target,
                                     double prob_cutoff);

// Weighted pooled-adjacent-violators isotonic regression.
std::vector<double> isotonic_fit(const std::vector<double>& values,
                                 const std::vector<double>& weights);

enum class DesignKind { ThreePlusThree, I3p3, Boin, Mtpi, Mtpi2, Crm };

struct EscalationDesign {
  DesignKind kind = DesignKind::Boin;
  double target = 0.3;
  int cohort_size = 3;
  int max_n = 30;
  int start_dose = 0;
  int n_doses = 4;
  // Interval-design parameters.
  double ei_low = -1.0, ei_high = -1.0;  // i3+3 / mTPI epsilons; defaults target +/- 0.05
  std::optional<CrmSpec> crm;
  bool eliminate_overdose = true;
  double elimination_cutoff = 0.95;

  void validate() const;
};

struct EscalationResult {
  int mtd = -1;  // -1: no dose selected
  std::vector<int> treated;
  std::vector<int> dlts;
  bool stopped_for_safety = false;
};

// Simulate one escalation trial; deterministic given the stream.
EscalationResult simulate_escalation(const EscalationDesign& design,
                                     const std::vector<double>& truth,
                                     const ReplicateStream& stream);

struct DecisionTableRow {
  int n;
  int y;
  EscalationKind decision;
  bool eliminate;  // overdose rule would also remove the dose
};

// All (n, y) decision cells up to max_n for protocol appendices.
std::vector<DecisionTableRow> decision_table(const EscalationDesign& design, int max_n);

}  // namespace betatrial::dose
