#include "betatrial/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "betatrial/special.hpp"

namespace betatrial {

void CalibrationProblem::validate() const {
  design.validate();
  if (!(alpha > 0.0) || !(alpha < 1.0))
    throw std::invalid_argument("CalibrationProblem: alpha must be in (0,1)");
  if (!(cutoff_grid_step > 0.0))
    throw std::invalid_argument("CalibrationProblem: step must be > 0");
}

namespace {

TrialDesign with_cutoff(TrialDesign design, double c) {
  design.success = SuccessRule(design.success.effect_threshold, c,
                               design.success.comparison);
  // A shared posterior-monitoring cutoff follows the calibrated value via
  // the value_or default; an explicit interim cutoff stays fixed.
  return design;
}

double type_i_error(const CalibrationProblem& p, double c, const EngineSettings& s) {
  return exact_oc(with_cutoff(p.design, c), p.null_scenario, s).reject_prob;
}

}  // namespace

CalibrationResult calibrate_cutoff(const CalibrationProblem& problem,
                                   const EngineSettings& s) {
  problem.validate();
  const double step = problem.cutoff_grid_step;
  const long long last = static_cast<long long>(std::floor((1.0 - 1e-12) / step)) - 1;
  if (last < 1) throw std::invalid_argument("calibrate_cutoff: step too coarse");

  // TypeI(c) is non-increasing in c: raising the cutoff shrinks every
  // look's rejection region. Bisect for the smallest grid index meeting
  // alpha.
  const auto type_i_at = [&](long long idx) {
    return type_i_error(problem, static_cast<double>(idx) * step, s);
  };

  if (type_i_at(last) > problem.alpha) throw std::runtime_error("alpha unattainable");

  long long lo_idx = 1, hi_idx = last;  // invariant: TypeI(hi) <= alpha
  if (type_i_at(lo_idx) <= problem.alpha) {
    hi_idx = lo_idx;
  } else {
    while (hi_idx - lo_idx > 1) {
      const long long mid = lo_idx + (hi_idx - lo_idx) / 2;
      if (type_i_at(mid) <= problem.alpha) hi_idx = mid;
      else lo_idx = mid;
    }
  }

  CalibrationResult result;
  result.cutoff = static_cast<double>(hi_idx) * step;
  result.type_i_error = type_i_at(hi_idx);
  result.type_i_below_cutoff =
      hi_idx > 1 ? type_i_at(hi_idx - 1) : 1.0;  // empty cutoff rejects everything
  result.calibrated = with_cutoff(problem.design, result.cutoff);
  return result;
}

void AssuranceProblem::validate() const {
  design.validate();
  dprior.validate();
  if (!(target > 0.0) || !(target < 1.0))
    throw std::invalid_argument("AssuranceProblem: target must be in (0,1)");
  if (param == AssuranceParam::FinalN) {
    if (design.looks() != 1)
      throw std::invalid_argument(
          "AssuranceProblem: sample-size search supports single-look designs");
    if (n_lo < 1 || n_hi < n_lo)
      throw std::invalid_argument("AssuranceProblem: bad n range");
  } else if (!(cutoff_lo > 0.0) || !(cutoff_hi < 1.0) || !(cutoff_hi > cutoff_lo) ||
             !(cutoff_step > 0.0)) {
    throw std::invalid_argument("AssuranceProblem: bad cutoff range");
  }
}

namespace {

TrialDesign with_final_n(TrialDesign design, int n) {
  design.allocation.back().treatment = n;
  if (design.arms == 2) design.allocation.back().control = n;
  return design;
}

double assurance_of(const TrialDesign& d, const DesignPrior& dp, const EngineSettings& s) {
  return *bayesian_oc(d, dp, OcMode::Exact, 0, 0, 1, s).assurance;
}

}  // namespace

AssuranceResult calibrate_assurance(const AssuranceProblem& problem,
                                    const EngineSettings& s) {
  problem.validate();

  if (problem.param == AssuranceParam::FinalN) {
    // Assurance is expected to grow with n, but discreteness makes it
    // locally jagged; an ascending scan returns the true minimum.
    double best = -1.0;
    for (int n = problem.n_lo; n <= problem.n_hi; ++n) {
      const TrialDesign d = with_final_n(problem.design, n);
      const double a = assurance_of(d, problem.dprior, s);
      best = std::max(best, a);
      if (a >= problem.target)
        return {static_cast<double>(n), a, d};
    }
    throw std::runtime_error("calibrate_assurance: target unattainable; best achieved " +
                             std::to_string(best));
  }

  // Cutoff search: assurance is non-increasing in c (nested rejection
  // regions); find the largest grid cutoff still meeting the target.
  const double step = problem.cutoff_step;
  const long long lo_idx = static_cast<long long>(std::ceil(problem.cutoff_lo / step));
  const long long hi_idx = static_cast<long long>(std::floor(problem.cutoff_hi / step));
  const auto assurance_at = [&](long long idx) {
    return assurance_of(with_cutoff(problem.design, static_cast<double>(idx) * step),
                        problem.dprior, s);
  };
  if (assurance_at(lo_idx) < problem.target)
    throw std::runtime_error("calibrate_assurance: target unattainable; best achieved " +
                             std::to_string(assurance_at(lo_idx)));
  long long lo = lo_idx, hi = hi_idx;  // invariant: assurance(lo) >= target
  if (assurance_at(hi) >= problem.target) {
    lo = hi;
  } else {
    while (hi - lo > 1) {
      const long long mid = lo + (hi - lo) / 2;
      if (assurance_at(mid) >= problem.target) lo = mid;
      else hi = mid;
    }
  }
  const double c = static_cast<double>(lo) * step;
  const TrialDesign d = with_cutoff(problem.design, c);
  return {c, assurance_of(d, problem.dprior, s), d};
}

std::vector<int> exact_gs_boundaries(const std::vector<int>& schedule, double alpha,
                                     const std::vector<double>& spending_fractions,
                                     double null_rate) {
  if (schedule.empty()) throw std::invalid_argument("exact_gs_boundaries: empty schedule");
  if (schedule.size() != spending_fractions.size())
    throw std::invalid_argument("exact_gs_boundaries: schedule/spending length mismatch");
  if (!(alpha > 0.0) || !(alpha < 1.0))
    throw std::invalid_argument("exact_gs_boundaries: alpha must be in (0,1)");
  if (!(null_rate >= 0.0) || !(null_rate <= 1.0))
    throw std::invalid_argument("exact_gs_boundaries: null rate must be in [0,1]");
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    if (schedule[k] <= (k ? schedule[k - 1] : 0))
      throw std::invalid_argument("exact_gs_boundaries: schedule must be strictly increasing");
    const double f = spending_fractions[k];
    if (!(f >= 0.0) || !(f <= 1.0) || (k && f < spending_fractions[k - 1]))
      throw std::invalid_argument(
          "exact_gs_boundaries: spending fractions must be non-decreasing in [0,1]");
  }
  if (spending_fractions.back() != 1.0)
    throw std::invalid_argument("exact_gs_boundaries: spending must end at 1");

  const int L = static_cast<int>(schedule.size());
  std::vector<int> bounds(L);
  // State: distribution of the success count among trials still running.
  std::vector<double> cur(schedule[0] + 1);
  for (int y = 0; y <= schedule[0]; ++y) cur[y] = binomial_pmf(schedule[0], y, null_rate);

  double cumulative = 0.0;
  for (int k = 0; k < L; ++k) {
    const int n_k = schedule[k];
    const double budget = alpha * spending_fractions[k];
    // Greedy: smallest critical count whose cumulative spend stays within
    // budget. Suffix sums over the current state give each candidate's
    // incremental rejection probability.
    std::vector<double> suffix(n_k + 2, 0.0);
    for (int y = n_k; y >= 0; --y) suffix[y] = suffix[y + 1] + cur[y];
    int crit = n_k + 1;
    for (int y = 0; y <= n_k + 1; ++y) {
      if (cumulative + suffix[y] <= budget + 1e-15) {
        crit = y;
        break;
      }
    }
    if (cumulative > budget + 1e-15)
      throw std::runtime_error("exact_gs_boundaries: infeasible spending at look " +
                               std::to_string(k));
    bounds[k] = crit;
    cumulative += crit <= n_k ? suffix[crit] : 0.0;

    if (k + 1 < L) {
      const int inc = schedule[k + 1] - schedule[k];
      std::vector<double> next(schedule[k + 1] + 1, 0.0);
      for (int y = 0; y < crit && y <= n_k; ++y) {
        if (cur[y] == 0.0) continue;
        for (int j = 0; j <= inc; ++j)
          next[y + j] += cur[y] * binomial_pmf(inc, j, null_rate);
      }
      cur = std::move(next);
    }
  }
  return bounds;
}

}  // namespace betatrial
