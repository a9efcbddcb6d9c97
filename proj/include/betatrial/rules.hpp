// Decision vocabulary for sequential monitoring: posterior-probability
// success rules, predictive probability of success, conditional power,
// loss-based thresholds and interim decision evaluation.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "betatrial/prob.hpp"
#include "betatrial/settings.hpp"

namespace betatrial {

enum class Comparison { OneArmVsConstant, TwoArmDifference };

// Declare success when Pr(effect > effect_threshold) >= posterior_cutoff.
struct SuccessRule {
  double effect_threshold;  // a: rate for one-arm, rate difference for two-arm
  double posterior_cutoff;  // c in (0,1)
  Comparison comparison = Comparison::OneArmVsConstant;

  SuccessRule(double effect_threshold_, double posterior_cutoff_,
              Comparison comparison_ = Comparison::OneArmVsConstant);
};

// Stop for futility when the predictive probability of final success
// drops below the cutoff.
struct FutilityRule {
  double ppos_cutoff;

  explicit FutilityRule(double ppos_cutoff_);
};

enum class MonitoringKind { PosteriorRule, PposRule };

// Interim efficacy monitoring. For PosteriorRule an absent cutoff means
// "share the final success cutoff"; for PposRule an absent cutoff disables
// interim efficacy stopping.
struct MonitoringSpec {
  MonitoringKind kind = MonitoringKind::PosteriorRule;
  std::optional<double> efficacy_cutoff;
};

struct LossSpec {
  double false_positive_loss;
  double false_negative_loss;

  LossSpec(double fp, double fn);
};

// Cumulative per-arm sample sizes for one look. `control` is 0 for
// one-arm designs.
struct LookSizes {
  int treatment = 0;
  int control = 0;
};

// Accumulated data at a look. The sums must match the planned cumulative
// sizes at `look_index`.
struct InterimState {
  BinomialSummary treatment;
  std::optional<BinomialSummary> control;
  int look_index = 0;
  std::vector<LookSizes> planned;

  bool two_arm() const { return control.has_value(); }
  bool final_look() const { return look_index + 1 == static_cast<int>(planned.size()); }
  void validate() const;  // throws on state/schedule mismatch
};

enum class DecisionKind { StopEfficacy, StopFutility, Continue, FinalSuccess, FinalFailure };

struct Decision {
  DecisionKind kind;
  double evidence;  // the probability that triggered the decision

  bool terminal() const { return kind != DecisionKind::Continue; }
  bool success() const {
    return kind == DecisionKind::StopEfficacy || kind == DecisionKind::FinalSuccess;
  }
};

const char* to_string(DecisionKind k);

struct RuleOutcome {
  bool success;
  double evidence;
};

// Pr(p_t - p_c > a) for independent posteriors, by adaptive composite
// Simpson quadrature of the control density against the treatment tail
// (grid-based posteriors reduce to discrete sums).
double effect_prob_two_arm(const Dist& post_t, const Dist& post_c, double a,
                           double abs_tol = 1e-8);

// One-arm and two-arm success evaluation.
RuleOutcome posterior_success(const Dist& posterior, const SuccessRule& rule);
RuleOutcome posterior_success(const Dist& post_t, const Dist& post_c, const SuccessRule& rule);

// Predictive probability that the trial, completed per plan, satisfies the
// final success rule. Exact enumeration over remaining outcomes.
double ppos(const InterimState& state, const Dist& prior_t,
            const std::optional<Dist>& prior_c, const SuccessRule& final_rule,
            const EngineSettings& s = EngineSettings::defaults());

// Exact binomial tail probability of reaching `final_critical_count`
// successes given `remaining` further patients at `assumed_rate`.
double conditional_power(int current_successes, int remaining, double assumed_rate,
                         int final_critical_count);
// One-arm convenience overload using the state's schedule.
double conditional_power(const InterimState& state, double assumed_rate,
                         int final_critical_count);

// Posterior cutoff that minimizes posterior expected loss for the
// two-action success/failure problem: c* = L_fp / (L_fp + L_fn).
double loss_threshold(const LossSpec& spec);

// Full interim evaluation, efficacy before futility; terminal verdicts at
// the final look.
Decision evaluate_interim(const InterimState& state, const Dist& prior_t,
                          const std::optional<Dist>& prior_c, const SuccessRule& success,
                          const std::optional<FutilityRule>& futility,
                          const MonitoringSpec& monitoring,
                          const EngineSettings& s = EngineSettings::defaults());

}  // namespace betatrial
