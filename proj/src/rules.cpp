#include "betatrial/rules.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "betatrial/special.hpp"

namespace betatrial {

SuccessRule::SuccessRule(double effect_threshold_, double posterior_cutoff_,
                         Comparison comparison_)
    : effect_threshold(effect_threshold_),
      posterior_cutoff(posterior_cutoff_),
      comparison(comparison_) {
  if (!(posterior_cutoff > 0.0) || !(posterior_cutoff < 1.0))
    throw std::invalid_argument("SuccessRule: posterior_cutoff must be in (0,1)");
  if (comparison == Comparison::OneArmVsConstant) {
    if (!(effect_threshold >= 0.0) || !(effect_threshold <= 1.0))
      throw std::invalid_argument("SuccessRule: one-arm threshold must be in [0,1]");
  } else {
    if (!(effect_threshold >= -1.0) || !(effect_threshold <= 1.0))
      throw std::invalid_argument("SuccessRule: two-arm threshold must be in [-1,1]");
  }
}

FutilityRule::FutilityRule(double ppos_cutoff_) : ppos_cutoff(ppos_cutoff_) {
  if (!(ppos_cutoff >= 0.0) || !(ppos_cutoff < 1.0))
    throw std::invalid_argument("FutilityRule: ppos_cutoff must be in [0,1)");
}

LossSpec::LossSpec(double fp, double fn) : false_positive_loss(fp), false_negative_loss(fn) {
  if (!(fp > 0.0) || !(fn > 0.0))
    throw std::invalid_argument("LossSpec: losses must be strictly positive");
}

void InterimState::validate() const {
  if (planned.empty()) throw std::invalid_argument("InterimState: empty schedule");
  if (look_index < 0 || look_index >= static_cast<int>(planned.size()))
    throw std::invalid_argument("InterimState: look_index outside schedule");
  const auto& sizes = planned[look_index];
  if (treatment.trials != sizes.treatment)
    throw std::invalid_argument("InterimState: treatment enrollment does not match schedule");
  if (control.has_value()) {
    if (control->trials != sizes.control)
      throw std::invalid_argument("InterimState: control enrollment does not match schedule");
  } else if (sizes.control != 0) {
    throw std::invalid_argument("InterimState: schedule expects a control arm");
  }
  for (std::size_t k = 1; k < planned.size(); ++k) {
    if (planned[k].treatment <= planned[k - 1].treatment)
      throw std::invalid_argument("InterimState: cumulative sizes must be strictly increasing");
    if (control.has_value() && planned[k].control <= planned[k - 1].control)
      throw std::invalid_argument("InterimState: cumulative sizes must be strictly increasing");
  }
}

const char* to_string(DecisionKind k) {
  switch (k) {
    case DecisionKind::StopEfficacy: return "stop_efficacy";
    case DecisionKind::StopFutility: return "stop_futility";
    case DecisionKind::Continue: return "continue";
    case DecisionKind::FinalSuccess: return "final_success";
    case DecisionKind::FinalFailure: return "final_failure";
  }
  return "?";
}

namespace {

double beta_log_pdf(const BetaParams& p, double x) {
  return (p.alpha - 1.0) * std::log(x) + (p.beta - 1.0) * log1m(x) -
         log_beta(p.alpha, p.beta);
}

// Pr(theta_t > u) clamped to the unit interval.
double tail_at(const Dist& post_t, double u) {
  if (u <= 0.0) return 1.0;
  if (u >= 1.0) return 0.0;
  return prob_exceeds(post_t, u);
}

struct SimpsonIntegrand {
  const BetaParams& control;
  const Dist& treatment;
  double offset;  // a

  double operator()(double x) const {
    const double t = tail_at(treatment, x + offset);
    if (t == 0.0) return 0.0;
    return std::exp(beta_log_pdf(control, x)) * t;
  }
};

double adaptive_simpson(const SimpsonIntegrand& f, double lo, double hi, double f_lo,
                        double f_mid, double f_hi, double whole, double tol, int depth) {
  const double mid = 0.5 * (lo + hi);
  const double lmid = 0.5 * (lo + mid);
  const double rmid = 0.5 * (mid + hi);
  const double f_lmid = f(lmid);
  const double f_rmid = f(rmid);
  const double left = (mid - lo) / 6.0 * (f_lo + 4.0 * f_lmid + f_mid);
  const double right = (hi - mid) / 6.0 * (f_mid + 4.0 * f_rmid + f_hi);
  if (depth <= 0 || std::fabs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, lo, mid, f_lo, f_lmid, f_mid, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, mid, hi, f_mid, f_rmid, f_hi, right, 0.5 * tol, depth - 1);
}

double integrate_segment(const SimpsonIntegrand& f, double lo, double hi, double tol) {
  if (!(hi > lo)) return 0.0;
  const double f_lo = f(lo), f_hi = f(hi), f_mid = f(0.5 * (lo + hi));
  const double whole = (hi - lo) / 6.0 * (f_lo + 4.0 * f_mid + f_hi);
  return adaptive_simpson(f, lo, hi, f_lo, f_mid, f_hi, whole, tol, 48);
}

// Pr(p_t - p_c > a) for a single Beta control component against any
// treatment distribution with a continuous tail.
double effect_prob_beta_control(const Dist& post_t, const BetaParams& control, double a,
                                double tol) {
  // The integrand has kinks where the treatment tail saturates; split there.
  const double eps = 1e-12;
  std::vector<double> cuts = {eps, 1.0 - eps};
  for (double kink : {-a, 1.0 - a})
    if (kink > eps && kink < 1.0 - eps) cuts.push_back(kink);
  std::sort(cuts.begin(), cuts.end());

  SimpsonIntegrand f{control, post_t, a};
  // Endpoint slivers (the control density may be unbounded at 0 or 1):
  // bound each by its total mass times a mid-sliver tail value.
  double total = cdf(control, eps) * tail_at(post_t, a + 0.5 * eps) +
                 (1.0 - cdf(control, 1.0 - eps)) * tail_at(post_t, 1.0 - 0.5 * eps + a);
  const double seg_tol = tol / static_cast<double>(cuts.size());
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    total += integrate_segment(f, cuts[i], cuts[i + 1], seg_tol);
  return std::clamp(total, 0.0, 1.0);
}

}  // namespace

double effect_prob_two_arm(const Dist& post_t, const Dist& post_c, double a, double abs_tol) {
  if (!(a >= -1.0) || !(a <= 1.0))
    throw std::invalid_argument("effect_prob_two_arm: a must be in [-1,1]");

  // Grid control: exact discrete sum over control support.
  if (const auto* gc = std::get_if<GridDensity>(&post_c)) {
    double s = 0.0;
    for (std::size_t i = 0; i < gc->grid.size(); ++i)
      s += gc->masses[i] * tail_at(post_t, gc->grid[i] + a);
    return std::clamp(s, 0.0, 1.0);
  }
  // Grid treatment with continuous control: Pr = E_t[ Pr(p_c < g - a) ].
  if (const auto* gt = std::get_if<GridDensity>(&post_t)) {
    double s = 0.0;
    for (std::size_t i = 0; i < gt->grid.size(); ++i) {
      const double u = gt->grid[i] - a;
      const double c = u <= 0.0 ? 0.0 : (u >= 1.0 ? 1.0 : cdf(post_c, u));
      s += gt->masses[i] * c;
    }
    return std::clamp(s, 0.0, 1.0);
  }

  // Beta or mixture control: quadrature per control component.
  if (const auto* bc = std::get_if<BetaParams>(&post_c))
    return effect_prob_beta_control(post_t, *bc, a, abs_tol);
  const auto& mc = std::get<BetaMixture>(post_c);
  double s = 0.0;
  for (const auto& comp : mc.components)
    s += comp.weight * effect_prob_beta_control(post_t, comp.params, a, abs_tol);
  return std::clamp(s, 0.0, 1.0);
}

RuleOutcome posterior_success(const Dist& posterior, const SuccessRule& rule) {
  if (rule.comparison != Comparison::OneArmVsConstant)
    throw std::invalid_argument("posterior_success: two-arm rule needs both posteriors");
  const double evidence = prob_exceeds(posterior, rule.effect_threshold);
  return {evidence >= rule.posterior_cutoff, evidence};
}

RuleOutcome posterior_success(const Dist& post_t, const Dist& post_c,
                              const SuccessRule& rule) {
  if (rule.comparison == Comparison::OneArmVsConstant) return posterior_success(post_t, rule);
  const double evidence = effect_prob_two_arm(post_t, post_c, rule.effect_threshold);
  return {evidence >= rule.posterior_cutoff, evidence};
}

namespace {

RuleOutcome final_outcome(const InterimState& state, const Dist& prior_t,
                          const std::optional<Dist>& prior_c, const SuccessRule& rule,
                          int extra_t, int extra_c) {
  const auto& final_sizes = state.planned.back();
  const Dist post_t = update(
      prior_t, BinomialSummary(state.treatment.successes + extra_t, final_sizes.treatment));
  if (rule.comparison == Comparison::OneArmVsConstant)
    return posterior_success(post_t, rule);
  const Dist post_c = update(
      *prior_c, BinomialSummary(state.control->successes + extra_c, final_sizes.control));
  return posterior_success(post_t, post_c, rule);
}

}  // namespace

double ppos(const InterimState& state, const Dist& prior_t,
            const std::optional<Dist>& prior_c, const SuccessRule& final_rule,
            const EngineSettings& s) {
  state.validate();
  const auto& final_sizes = state.planned.back();
  const int rem_t = final_sizes.treatment - state.treatment.trials;
  const int rem_c = state.two_arm() ? final_sizes.control - state.control->trials : 0;
  if (rem_t < 0 || rem_c < 0) throw std::invalid_argument("ppos: negative remaining size");

  const Dist pred_t = update(prior_t, state.treatment);

  const bool joint = final_rule.comparison == Comparison::TwoArmDifference;
  if (joint && !state.two_arm())
    throw std::invalid_argument("ppos: two-arm rule on a one-arm state");

  if (!joint) {
    // Control outcomes cannot change a one-arm verdict; enumerate one arm.
    double acc = 0.0;
    for (int j = 0; j <= rem_t; ++j) {
      const double w = predictive_pmf(pred_t, rem_t, j);
      if (final_outcome(state, prior_t, prior_c, final_rule, j, 0).success) acc += w;
    }
    return std::clamp(acc, 0.0, 1.0);
  }

  const long long cells = static_cast<long long>(rem_t + 1) * (rem_c + 1);
  if (cells > s.ppos_cell_budget) throw std::runtime_error("enumeration budget exceeded");

  const Dist pred_c = update(*prior_c, *state.control);

  // Treatment-arm predictive tail weights (shared across control outcomes).
  std::vector<double> pmf_t(rem_t + 1), tail_t(rem_t + 2, 0.0);
  for (int j = 0; j <= rem_t; ++j) pmf_t[j] = predictive_pmf(pred_t, rem_t, j);
  for (int j = rem_t; j >= 0; --j) tail_t[j] = tail_t[j + 1] + pmf_t[j];

  double acc = 0.0;
  for (int jc = 0; jc <= rem_c; ++jc) {
    const double wc = predictive_pmf(pred_c, rem_c, jc);
    // Success is monotone non-decreasing in treatment successes; find the
    // smallest winning count by binary search.
    int crit;
    if (!final_outcome(state, prior_t, prior_c, final_rule, rem_t, jc).success) {
      crit = rem_t + 1;
    } else if (final_outcome(state, prior_t, prior_c, final_rule, 0, jc).success) {
      crit = 0;
    } else {
      int a = 0, b = rem_t;  // outcome(a)=false, outcome(b)=true
      while (b - a > 1) {
        const int mid = (a + b) / 2;
        if (final_outcome(state, prior_t, prior_c, final_rule, mid, jc).success) b = mid;
        else a = mid;
      }
      crit = b;
    }
    if (crit <= rem_t) acc += wc * tail_t[crit];
  }
  return std::clamp(acc, 0.0, 1.0);
}

double conditional_power(int current_successes, int remaining, double assumed_rate,
                         int final_critical_count) {
  if (remaining < 0) throw std::invalid_argument("conditional_power: negative remaining");
  if (!(assumed_rate >= 0.0) || !(assumed_rate <= 1.0))
    throw std::invalid_argument("conditional_power: rate must be in [0,1]");
  const int shortfall = final_critical_count - current_successes;
  if (shortfall <= 0) return 1.0;
  if (shortfall > remaining) return 0.0;
  return binomial_tail_geq(remaining, shortfall, assumed_rate);
}

double conditional_power(const InterimState& state, double assumed_rate,
                         int final_critical_count) {
  state.validate();
  if (state.two_arm())
    throw std::invalid_argument("conditional_power: count-based rule is one-arm only");
  const int remaining = state.planned.back().treatment - state.treatment.trials;
  return conditional_power(state.treatment.successes, remaining, assumed_rate,
                           final_critical_count);
}

double loss_threshold(const LossSpec& spec) {
  return spec.false_positive_loss / (spec.false_positive_loss + spec.false_negative_loss);
}

Decision evaluate_interim(const InterimState& state, const Dist& prior_t,
                          const std::optional<Dist>& prior_c, const SuccessRule& success,
                          const std::optional<FutilityRule>& futility,
                          const MonitoringSpec& monitoring, const EngineSettings& s) {
  state.validate();
  const Dist post_t = update(prior_t, state.treatment);
  std::optional<Dist> post_c;
  if (state.two_arm()) {
    if (!prior_c.has_value())
      throw std::invalid_argument("evaluate_interim: two-arm state needs a control prior");
    post_c = update(*prior_c, *state.control);
  }

  const auto outcome = [&] {
    return state.two_arm() ? posterior_success(post_t, *post_c, success)
                           : posterior_success(post_t, success);
  };

  if (state.final_look()) {
    const RuleOutcome fin = outcome();
    return {fin.success ? DecisionKind::FinalSuccess : DecisionKind::FinalFailure,
            fin.evidence};
  }

  // Efficacy before futility, always.
  std::optional<double> pp;
  double watched = 0.0;
  if (monitoring.kind == MonitoringKind::PosteriorRule) {
    const double cutoff = monitoring.efficacy_cutoff.value_or(success.posterior_cutoff);
    const RuleOutcome now = outcome();
    watched = now.evidence;
    if (now.evidence >= cutoff) return {DecisionKind::StopEfficacy, now.evidence};
  } else if (monitoring.efficacy_cutoff.has_value()) {
    pp = ppos(state, prior_t, prior_c, success, s);
    watched = *pp;
    if (*pp >= *monitoring.efficacy_cutoff) return {DecisionKind::StopEfficacy, *pp};
  }

  if (futility.has_value()) {
    if (!pp.has_value()) pp = ppos(state, prior_t, prior_c, success, s);
    if (monitoring.kind != MonitoringKind::PosteriorRule) watched = *pp;
    if (*pp < futility->ppos_cutoff) return {DecisionKind::StopFutility, *pp};
  }

  if (monitoring.kind == MonitoringKind::PposRule && !pp.has_value()) {
    pp = ppos(state, prior_t, prior_c, success, s);
    watched = *pp;
  }
  return {DecisionKind::Continue, watched};
}

}  // namespace betatrial
