#include "betatrial/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "betatrial/special.hpp"

namespace betatrial {

void TrialDesign::validate() const {
  if (arms != 1 && arms != 2) throw std::invalid_argument("TrialDesign: arms must be 1 or 2");
  if (allocation.empty()) throw std::invalid_argument("TrialDesign: no looks");
  for (std::size_t k = 0; k < allocation.size(); ++k) {
    if (allocation[k].treatment <= (k ? allocation[k - 1].treatment : 0))
      throw std::invalid_argument("TrialDesign: treatment sizes must be strictly increasing");
    if (arms == 2) {
      if (allocation[k].control <= (k ? allocation[k - 1].control : 0))
        throw std::invalid_argument("TrialDesign: control sizes must be strictly increasing");
    } else if (allocation[k].control != 0) {
      throw std::invalid_argument("TrialDesign: one-arm design with control allocation");
    }
  }
  if (arms == 2) {
    if (!analysis_prior_c.has_value())
      throw std::invalid_argument("TrialDesign: two-arm design needs a control prior");
    if (success.comparison != Comparison::TwoArmDifference)
      throw std::invalid_argument("TrialDesign: two-arm design needs a two-arm success rule");
  } else if (success.comparison != Comparison::OneArmVsConstant) {
    throw std::invalid_argument("TrialDesign: one-arm design needs a one-arm success rule");
  }
}

double Scenario::control_rate_at(int look) const {
  double r = control_rate;
  if (look >= 0 && look < static_cast<int>(drift.size())) r += drift[look];
  return std::clamp(r, 0.0, 1.0);
}

DesignPrior DesignPrior::from_beta(const BetaParams& treatment_prior, double control_rate,
                                   int points) {
  if (points < 2) throw std::invalid_argument("DesignPrior: need >= 2 atoms");
  std::vector<Atom> atoms(points);
  double total = 0.0;
  for (int i = 0; i < points; ++i) {
    const double p = (i + 0.5) / points;  // midpoints of equal-width bins
    const double w = std::exp((treatment_prior.alpha - 1.0) * std::log(p) +
                              (treatment_prior.beta - 1.0) * log1m(p) -
                              log_beta(treatment_prior.alpha, treatment_prior.beta));
    atoms[i].weight = w;
    atoms[i].scenario.treatment_rate = p;
    atoms[i].scenario.control_rate = control_rate;
    total += w;
  }
  for (auto& a : atoms) a.weight /= total;
  DesignPrior d{std::move(atoms)};
  return d;
}

void DesignPrior::validate() const {
  if (atoms.empty()) throw std::invalid_argument("DesignPrior: no atoms");
  double total = 0.0;
  for (const auto& a : atoms) {
    if (!(a.weight >= 0.0)) throw std::invalid_argument("DesignPrior: negative weight");
    total += a.weight;
  }
  if (std::fabs(total - 1.0) > 1e-9)
    throw std::invalid_argument("DesignPrior: weights must sum to 1");
}

namespace {

void check_scenario(const TrialDesign& design, const Scenario& scenario) {
  if (!(scenario.treatment_rate >= 0.0) || !(scenario.treatment_rate <= 1.0))
    throw std::invalid_argument("Scenario: treatment rate must be in [0,1]");
  if (design.arms == 2 &&
      (!(scenario.control_rate >= 0.0) || !(scenario.control_rate <= 1.0)))
    throw std::invalid_argument("Scenario: control rate must be in [0,1]");
  if (design.arms == 1 && !scenario.drift.empty())
    throw std::invalid_argument("Scenario: drift applies to the control arm of two-arm designs");
}

InterimState make_state(const TrialDesign& design, int look, int y_t, int y_c) {
  InterimState st{BinomialSummary(y_t, design.allocation[look].treatment),
                  std::nullopt, look, design.allocation};
  if (design.arms == 2)
    st.control = BinomialSummary(y_c, design.allocation[look].control);
  return st;
}

// Interim/final decision kinds for every sufficient-statistic state of one
// look. Decisions do not depend on the scenario, so one table serves every
// scenario and every replicate.
struct DecisionTable {
  // looks[k][y_t * (n_c_k + 1) + y_c]; one-arm tables use n_c_k = 0.
  std::vector<std::vector<DecisionKind>> looks;

  DecisionKind at(const TrialDesign& d, int look, int y_t, int y_c) const {
    const int nc = d.arms == 2 ? d.allocation[look].control : 0;
    return looks[look][static_cast<std::size_t>(y_t) * (nc + 1) + y_c];
  }
};

// Exact PPOS for a tabled state: predictive mass over remaining outcomes
// against the final-look success indicator.
double table_ppos(const TrialDesign& design, int look, int y_t, int y_c,
                  const std::vector<DecisionKind>& final_table) {
  const auto& now = design.allocation[look];
  const auto& fin = design.allocation.back();
  const int rem_t = fin.treatment - now.treatment;
  const Dist pred_t = update(design.analysis_prior_t, BinomialSummary(y_t, now.treatment));

  if (design.arms == 1) {
    double acc = 0.0;
    for (int j = 0; j <= rem_t; ++j)
      if (final_table[y_t + j] == DecisionKind::FinalSuccess)
        acc += predictive_pmf(pred_t, rem_t, j);
    return acc;
  }

  const int rem_c = fin.control - now.control;
  const Dist pred_c = update(*design.analysis_prior_c, BinomialSummary(y_c, now.control));
  std::vector<double> pmf_t(rem_t + 1), pmf_c(rem_c + 1);
  for (int j = 0; j <= rem_t; ++j) pmf_t[j] = predictive_pmf(pred_t, rem_t, j);
  for (int j = 0; j <= rem_c; ++j) pmf_c[j] = predictive_pmf(pred_c, rem_c, j);
  double acc = 0.0;
  for (int jt = 0; jt <= rem_t; ++jt) {
    for (int jc = 0; jc <= rem_c; ++jc) {
      const std::size_t idx =
          static_cast<std::size_t>(y_t + jt) * (fin.control + 1) + (y_c + jc);
      if (final_table[idx] == DecisionKind::FinalSuccess) acc += pmf_t[jt] * pmf_c[jc];
    }
  }
  return acc;
}

DecisionTable build_decision_table(const TrialDesign& design) {
  const int L = design.looks();
  DecisionTable table;
  table.looks.resize(L);

  // Final look first: the PPOS of every earlier state reads it.
  {
    const auto& fin = design.allocation.back();
    const int nc = design.arms == 2 ? fin.control : 0;
    auto& t = table.looks[L - 1];
    t.resize(static_cast<std::size_t>(fin.treatment + 1) * (nc + 1));
    for (int y_t = 0; y_t <= fin.treatment; ++y_t) {
      const Dist post_t =
          update(design.analysis_prior_t, BinomialSummary(y_t, fin.treatment));
      for (int y_c = 0; y_c <= nc; ++y_c) {
        RuleOutcome out{};
        if (design.arms == 1) {
          out = posterior_success(post_t, design.success);
        } else {
          const Dist post_c =
              update(*design.analysis_prior_c, BinomialSummary(y_c, fin.control));
          out = posterior_success(post_t, post_c, design.success);
        }
        t[static_cast<std::size_t>(y_t) * (nc + 1) + y_c] =
            out.success ? DecisionKind::FinalSuccess : DecisionKind::FinalFailure;
      }
    }
  }

  for (int k = 0; k < L - 1; ++k) {
    const auto& now = design.allocation[k];
    const int nc = design.arms == 2 ? now.control : 0;
    auto& t = table.looks[k];
    t.resize(static_cast<std::size_t>(now.treatment + 1) * (nc + 1));

    const bool posterior_mon = design.monitoring.kind == MonitoringKind::PosteriorRule;
    const std::optional<double> eff_cutoff =
        posterior_mon
            ? std::optional<double>(design.monitoring.efficacy_cutoff.value_or(
                  design.success.posterior_cutoff))
            : design.monitoring.efficacy_cutoff;
    const bool needs_ppos =
        design.futility.has_value() || (!posterior_mon && eff_cutoff.has_value());

    for (int y_t = 0; y_t <= now.treatment; ++y_t) {
      const Dist post_t =
          update(design.analysis_prior_t, BinomialSummary(y_t, now.treatment));
      for (int y_c = 0; y_c <= nc; ++y_c) {
        DecisionKind kind = DecisionKind::Continue;
        // Efficacy before futility, matching evaluate_interim.
        if (posterior_mon) {
          RuleOutcome out{};
          if (design.arms == 1) {
            out = posterior_success(post_t, design.success);
          } else {
            const Dist post_c =
                update(*design.analysis_prior_c, BinomialSummary(y_c, now.control));
            out = posterior_success(post_t, post_c, design.success);
          }
          if (out.evidence >= *eff_cutoff) kind = DecisionKind::StopEfficacy;
        }
        if (kind == DecisionKind::Continue && needs_ppos) {
          const double pp = table_ppos(design, k, y_t, y_c, table.looks[L - 1]);
          if (!posterior_mon && eff_cutoff.has_value() && pp >= *eff_cutoff)
            kind = DecisionKind::StopEfficacy;
          else if (design.futility.has_value() && pp < design.futility->ppos_cutoff)
            kind = DecisionKind::StopFutility;
        }
        t[static_cast<std::size_t>(y_t) * (nc + 1) + y_c] = kind;
      }
    }
  }
  return table;
}

struct LookIncrements {
  int treatment;
  int control;
};

LookIncrements increments(const TrialDesign& design, int look) {
  const auto& now = design.allocation[look];
  if (look == 0) return {now.treatment, now.control};
  const auto& prev = design.allocation[look - 1];
  return {now.treatment - prev.treatment, now.control - prev.control};
}

}  // namespace

TrialResult simulate_trial(const TrialDesign& design, const Scenario& scenario,
                           const ReplicateStream& stream, const EngineSettings& s) {
  design.validate();
  check_scenario(design, scenario);
  int y_t = 0, y_c = 0;
  for (int k = 0; k < design.looks(); ++k) {
    const LookIncrements inc = increments(design, k);
    y_t += stream.binomial(k, 0, inc.treatment, scenario.treatment_rate);
    if (design.arms == 2)
      y_c += stream.binomial(k, 1, inc.control, scenario.control_rate_at(k));
    const InterimState state = make_state(design, k, y_t, y_c);
    const Decision d =
        evaluate_interim(state, design.analysis_prior_t, design.analysis_prior_c,
                         design.success, design.futility, design.monitoring, s);
    if (d.terminal())
      return {d, k, design.allocation[k].treatment,
              design.arms == 2 ? design.allocation[k].control : 0};
  }
  throw std::logic_error("simulate_trial: final look did not terminate");
}

bool exact_feasible(const TrialDesign& design, const EngineSettings& s) {
  const auto& fin = design.allocation.back();
  if (design.arms == 1) return fin.treatment <= s.exact_one_arm_max_n;
  if (fin.treatment > s.exact_two_arm_max_n || fin.control > s.exact_two_arm_max_n)
    return false;
  long long cells = 0;
  for (const auto& look : design.allocation)
    cells += static_cast<long long>(look.treatment + 1) * (look.control + 1);
  return cells <= s.dp_cell_budget;
}

OCReport exact_oc(const TrialDesign& design, const Scenario& scenario,
                  const EngineSettings& s) {
  design.validate();
  check_scenario(design, scenario);
  if (!exact_feasible(design, s))
    throw std::runtime_error(
        "exact_oc: design exceeds the exact enumeration budget; use monte_carlo_oc");

  const DecisionTable table = build_decision_table(design);
  const int L = design.looks();

  OCReport report;
  report.mode = OcMode::Exact;
  report.scenario_label = scenario.label;
  report.stop_efficacy.assign(L, 0.0);
  report.stop_futility.assign(L, 0.0);

  // Forward pass over the sufficient-statistic lattice.
  const int nc0 = design.arms == 2 ? design.allocation[0].control : 0;
  std::vector<double> cur(static_cast<std::size_t>(design.allocation[0].treatment + 1) *
                          (nc0 + 1));
  {
    const LookIncrements inc = increments(design, 0);
    for (int y_t = 0; y_t <= inc.treatment; ++y_t) {
      const double pt = binomial_pmf(inc.treatment, y_t, scenario.treatment_rate);
      if (design.arms == 1) {
        cur[y_t] = pt;
      } else {
        const double rc = scenario.control_rate_at(0);
        for (int y_c = 0; y_c <= inc.control; ++y_c)
          cur[static_cast<std::size_t>(y_t) * (nc0 + 1) + y_c] =
              pt * binomial_pmf(inc.control, y_c, rc);
      }
    }
  }

  for (int k = 0; k < L; ++k) {
    const auto& now = design.allocation[k];
    const int nc = design.arms == 2 ? now.control : 0;
    std::vector<double> next;
    int next_nc = 0;
    const LookIncrements inc = k + 1 < L ? increments(design, k + 1) : LookIncrements{0, 0};
    std::vector<double> pmf_t(inc.treatment + 1), pmf_c(inc.control + 1);
    if (k + 1 < L) {
      const auto& nxt = design.allocation[k + 1];
      next_nc = design.arms == 2 ? nxt.control : 0;
      next.assign(static_cast<std::size_t>(nxt.treatment + 1) * (next_nc + 1), 0.0);
      for (int j = 0; j <= inc.treatment; ++j)
        pmf_t[j] = binomial_pmf(inc.treatment, j, scenario.treatment_rate);
      const double rc = scenario.control_rate_at(k + 1);
      for (int j = 0; j <= inc.control; ++j)
        pmf_c[j] = binomial_pmf(inc.control, j, rc);
    }

    for (int y_t = 0; y_t <= now.treatment; ++y_t) {
      for (int y_c = 0; y_c <= nc; ++y_c) {
        const double mass = cur[static_cast<std::size_t>(y_t) * (nc + 1) + y_c];
        if (mass == 0.0) continue;
        const DecisionKind kind = table.at(design, k, y_t, y_c);
        switch (kind) {
          case DecisionKind::StopEfficacy:
          case DecisionKind::FinalSuccess:
            report.stop_efficacy[k] += mass;
            break;
          case DecisionKind::StopFutility:
          case DecisionKind::FinalFailure:
            report.stop_futility[k] += mass;
            break;
          case DecisionKind::Continue:
            for (int jt = 0; jt <= inc.treatment; ++jt) {
              const double mt = mass * pmf_t[jt];
              if (design.arms == 1) {
                next[y_t + jt] += mt;
              } else {
                for (int jc = 0; jc <= inc.control; ++jc)
                  next[static_cast<std::size_t>(y_t + jt) * (next_nc + 1) + (y_c + jc)] +=
                      mt * pmf_c[jc];
              }
            }
            break;
        }
      }
    }
    cur = std::move(next);
  }

  for (int k = 0; k < L; ++k) {
    const double stop = report.stop_efficacy[k] + report.stop_futility[k];
    report.reject_prob += report.stop_efficacy[k];
    report.expected_n_treatment += stop * design.allocation[k].treatment;
    report.expected_n_control += stop * design.allocation[k].control;
  }
  return report;
}

namespace {

struct Tallies {
  std::vector<long long> eff;
  std::vector<long long> fut;

  explicit Tallies(int looks) : eff(looks, 0), fut(looks, 0) {}
  void merge(const Tallies& other) {
    for (std::size_t k = 0; k < eff.size(); ++k) {
      eff[k] += other.eff[k];
      fut[k] += other.fut[k];
    }
  }
};

void run_replicates(const TrialDesign& design, const Scenario& scenario,
                    const DecisionTable& table, std::uint64_t master_seed,
                    std::uint64_t scenario_index, long long first, long long last,
                    Tallies& out) {
  const int L = design.looks();
  for (long long r = first; r < last; ++r) {
    const ReplicateStream stream(master_seed, scenario_index,
                                 static_cast<std::uint64_t>(r));
    int y_t = 0, y_c = 0;
    for (int k = 0; k < L; ++k) {
      const LookIncrements inc = increments(design, k);
      y_t += stream.binomial(k, 0, inc.treatment, scenario.treatment_rate);
      if (design.arms == 2)
        y_c += stream.binomial(k, 1, inc.control, scenario.control_rate_at(k));
      const DecisionKind kind = table.at(design, k, y_t, y_c);
      if (kind == DecisionKind::Continue) continue;
      if (kind == DecisionKind::StopEfficacy || kind == DecisionKind::FinalSuccess)
        ++out.eff[k];
      else
        ++out.fut[k];
      break;
    }
  }
}

}  // namespace

OCReport monte_carlo_oc(const TrialDesign& design, const Scenario& scenario,
                        long long replicates, std::uint64_t master_seed, int workers,
                        std::uint64_t scenario_index,
                        [[maybe_unused]] const EngineSettings& s) {
  design.validate();
  check_scenario(design, scenario);
  if (replicates < 1) throw std::invalid_argument("monte_carlo_oc: replicates must be >= 1");
  if (workers < 1) workers = 1;

  const DecisionTable table = build_decision_table(design);
  const int L = design.looks();

  Tallies total(L);
  if (workers == 1 || replicates < 2 * workers) {
    run_replicates(design, scenario, table, master_seed, scenario_index, 0, replicates,
                   total);
  } else {
    std::vector<Tallies> parts(workers, Tallies(L));
    std::vector<std::thread> threads;
    const long long chunk = (replicates + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const long long first = w * chunk;
      const long long last = std::min(replicates, first + chunk);
      if (first >= last) break;
      threads.emplace_back([&, w, first, last] {
        run_replicates(design, scenario, table, master_seed, scenario_index, first, last,
                       parts[w]);
      });
    }
    for (auto& t : threads) t.join();
    for (const auto& p : parts) total.merge(p);
  }

  OCReport report;
  report.mode = OcMode::MonteCarlo;
  report.scenario_label = scenario.label;
  report.mc_replicates = replicates;
  report.stop_efficacy.resize(L);
  report.stop_futility.resize(L);
  const double R = static_cast<double>(replicates);
  const auto binomial_se = [&](double p) { return std::sqrt(std::max(0.0, p * (1.0 - p) / R)); };
  report.mc_se_stop_efficacy.resize(L);
  report.mc_se_stop_futility.resize(L);
  long long success_count = 0;
  for (int k = 0; k < L; ++k) {
    report.stop_efficacy[k] = total.eff[k] / R;
    report.stop_futility[k] = total.fut[k] / R;
    report.mc_se_stop_efficacy[k] = binomial_se(report.stop_efficacy[k]);
    report.mc_se_stop_futility[k] = binomial_se(report.stop_futility[k]);
    success_count += total.eff[k];
    const double stop = (total.eff[k] + total.fut[k]) / R;
    report.expected_n_treatment += stop * design.allocation[k].treatment;
    report.expected_n_control += stop * design.allocation[k].control;
  }
  report.reject_prob = success_count / R;
  report.mc_se_reject = binomial_se(report.reject_prob);
  return report;
}

OCReport bayesian_oc(const TrialDesign& design, const DesignPrior& dprior, OcMode mode,
                     long long mc_replicates, std::uint64_t master_seed, int workers,
                     const EngineSettings& s) {
  design.validate();
  dprior.validate();

  OCReport agg;
  agg.mode = mode;
  agg.scenario_label = "design-prior";
  agg.stop_efficacy.assign(design.looks(), 0.0);
  agg.stop_futility.assign(design.looks(), 0.0);
  double assurance = 0.0, pcd = 0.0;

  for (std::size_t i = 0; i < dprior.atoms.size(); ++i) {
    const auto& atom = dprior.atoms[i];
    if (atom.weight == 0.0) continue;
    const OCReport oc =
        mode == OcMode::Exact
            ? exact_oc(design, atom.scenario, s)
            : monte_carlo_oc(design, atom.scenario, mc_replicates, master_seed, workers,
                             static_cast<std::uint64_t>(i), s);
    assurance += atom.weight * oc.reject_prob;
    const double effect = design.arms == 1
                              ? atom.scenario.treatment_rate
                              : atom.scenario.treatment_rate - atom.scenario.control_rate;
    const bool effective = effect > design.success.effect_threshold;
    pcd += atom.weight * (effective ? oc.reject_prob : 1.0 - oc.reject_prob);
    for (int k = 0; k < design.looks(); ++k) {
      agg.stop_efficacy[k] += atom.weight * oc.stop_efficacy[k];
      agg.stop_futility[k] += atom.weight * oc.stop_futility[k];
    }
    agg.expected_n_treatment += atom.weight * oc.expected_n_treatment;
    agg.expected_n_control += atom.weight * oc.expected_n_control;
  }
  agg.reject_prob = assurance;
  agg.assurance = assurance;
  agg.pcd = pcd;
  if (mode == OcMode::MonteCarlo) agg.mc_replicates = mc_replicates;
  return agg;
}

}  // namespace betatrial
