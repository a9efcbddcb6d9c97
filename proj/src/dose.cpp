#include "betatrial/dose.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "betatrial/special.hpp"

namespace betatrial::dose {

DoseToxState::DoseToxState(int n_doses)
    : treated(n_doses, 0), dlts(n_doses, 0), eliminated(n_doses, false) {
  if (n_doses < 1) throw std::invalid_argument("DoseToxState: need at least one dose");
}

void DoseToxState::validate() const {
  const int n = n_doses();
  if (static_cast<int>(dlts.size()) != n || static_cast<int>(eliminated.size()) != n)
    throw std::invalid_argument("DoseToxState: ragged per-dose arrays");
  for (int j = 0; j < n; ++j) {
    if (treated[j] < 0 || dlts[j] < 0 || dlts[j] > treated[j])
      throw std::invalid_argument("DoseToxState: DLTs must lie in [0, treated]");
  }
  if (current_dose < 0 || current_dose >= n)
    throw std::invalid_argument("DoseToxState: current dose out of range");
  if (eliminated[current_dose])
    throw std::invalid_argument("DoseToxState: current dose is eliminated");
}

const char* to_string(EscalationKind k) {
  switch (k) {
    case EscalationKind::Escalate: return "escalate";
    case EscalationKind::Stay: return "stay";
    case EscalationKind::DeEscalate: return "de-escalate";
    case EscalationKind::Eliminate: return "eliminate";
    case EscalationKind::StopTrial: return "stop";
  }
  return "?";
}

MtpiSpec::MtpiSpec(double target_, double eps1_, double eps2_, BetaParams prior_,
                   MtpiVariant variant_)
    : target(target_), eps1(eps1_), eps2(eps2_), prior(prior_), variant(variant_) {
  if (!(target - eps1 > 0.0) || !(target + eps2 < 1.0) || !(eps1 > 0.0) || !(eps2 > 0.0))
    throw std::invalid_argument("MtpiSpec: need 0 < target-eps1 < target+eps2 < 1");
}

CrmSpec::CrmSpec(std::vector<double> skeleton_, double target_)
    : skeleton(std::move(skeleton_)), target(target_) {
  validate();
}

void CrmSpec::validate() const {
  if (skeleton.empty()) throw std::invalid_argument("CrmSpec: empty skeleton");
  for (std::size_t j = 0; j < skeleton.size(); ++j) {
    if (!(skeleton[j] > 0.0) || !(skeleton[j] < 1.0))
      throw std::invalid_argument("CrmSpec: skeleton values must lie in (0,1)");
    if (j > 0 && !(skeleton[j] > skeleton[j - 1]))
      throw std::invalid_argument("CrmSpec: skeleton must be strictly increasing");
  }
  if (!(target > 0.0) || !(target < 1.0))
    throw std::invalid_argument("CrmSpec: target must lie in (0,1)");
  if (!(prior_sd > 0.0)) throw std::invalid_argument("CrmSpec: prior sd must be > 0");
  if (grid_points < 3 || !(grid_hi > grid_lo))
    throw std::invalid_argument("CrmSpec: bad parameter grid");
}

EscalationDecision rule_3p3(const DoseToxState& state) {
  state.validate();
  const int n = state.treated[state.current_dose];
  const int y = state.dlts[state.current_dose];
  if (n == 3) {
    if (y == 0) return {EscalationKind::Escalate};
    if (y == 1) return {EscalationKind::Stay};
    return {EscalationKind::DeEscalate};
  }
  if (n == 6) {
    if (y <= 1) return {EscalationKind::Escalate};
    return {EscalationKind::DeEscalate};
  }
  throw std::invalid_argument("3+3 undefined for " + std::to_string(n) + " treated");
}

EscalationDecision rule_i3p3(const DoseToxState& state, double target, double ei_low,
                             double ei_high) {
  state.validate();
  if (!(ei_low > 0.0) || !(ei_low < ei_high) || !(ei_high < 1.0))
    throw std::invalid_argument("i3+3: need 0 < ei_low < ei_high < 1");
  if (target < ei_low || target > ei_high)
    throw std::invalid_argument("i3+3: target must lie inside the interval");
  const int n = state.treated[state.current_dose];
  const int y = state.dlts[state.current_dose];
  if (n == 0) throw std::invalid_argument("i3+3: no patients at the current dose");
  const double r = static_cast<double>(y) / n;
  if (r < ei_low) return {EscalationKind::Escalate};
  if (r <= ei_high) return {EscalationKind::Stay};
  // Above the interval: de-escalating overshoots when removing one DLT
  // would land below the interval.
  if (static_cast<double>(y - 1) / n < ei_low) return {EscalationKind::Stay};
  return {EscalationKind::DeEscalate};
}

BoinBoundaries boin_boundaries(double target, double phi1, double phi2) {
  if (!(target > 0.0) || !(target < 1.0))
    throw std::invalid_argument("boin_boundaries: target must lie in (0,1)");
  if (phi1 < 0.0) phi1 = 0.6 * target;
  if (phi2 < 0.0) phi2 = 1.4 * target;
  if (!(phi1 < target) || !(target < phi2) || !(phi2 < 1.0))
    throw std::invalid_argument("boin_boundaries: need 0 < phi1 < target < phi2 < 1");
  const double lambda_e = std::log((1.0 - phi1) / (1.0 - target)) /
                          std::log(target * (1.0 - phi1) / (phi1 * (1.0 - target)));
  const double lambda_d = std::log((1.0 - target) / (1.0 - phi2)) /
                          std::log(phi2 * (1.0 - target) / (target * (1.0 - phi2)));
  return {target, phi1, phi2, lambda_e, lambda_d};
}

EscalationDecision boin_decide(const DoseToxState& state, const BoinBoundaries& b) {
  state.validate();
  const int n = state.treated[state.current_dose];
  if (n == 0) throw std::invalid_argument("boin_decide: no patients at the current dose");
  const double r = static_cast<double>(state.dlts[state.current_dose]) / n;
  if (r <= b.lambda_e) {
    // Escalation to a missing or eliminated dose becomes Stay, which also
    // limits oscillation at the top of the dose range.
    const int next = state.current_dose + 1;
    if (next >= state.n_doses() || state.eliminated[next]) return {EscalationKind::Stay};
    return {EscalationKind::Escalate};
  }
  if (r >= b.lambda_d) return {EscalationKind::DeEscalate};
  return {EscalationKind::Stay};
}

namespace {

struct Upm {
  double value;
  int region;  // 0 under, 1 target, 2 over
};

}  // namespace

MtpiDecision mtpi_decide(const DoseToxState& state, const MtpiSpec& spec) {
  state.validate();
  const int n = state.treated[state.current_dose];
  const int y = state.dlts[state.current_dose];
  if (n == 0) throw std::invalid_argument("mtpi_decide: no patients at the current dose");

  const BetaParams post = update_beta(spec.prior, BinomialSummary(y, n));
  const double lo = spec.target - spec.eps1;
  const double hi = spec.target + spec.eps2;
  const auto mass = [&](double a, double b) { return cdf(post, b) - cdf(post, a); };

  double upm_under, upm_target, upm_over;
  int best_region;
  upm_target = mass(lo, hi) / (hi - lo);
  if (spec.variant == MtpiVariant::Mtpi) {
    upm_under = cdf(post, lo) / lo;
    upm_over = (1.0 - cdf(post, hi)) / (1.0 - hi);
    const Upm all[3] = {{upm_under, 0}, {upm_target, 1}, {upm_over, 2}};
    best_region = std::max_element(std::begin(all), std::end(all), [](auto& a, auto& b) {
                    return a.value < b.value;
                  })->region;
  } else {
    // mTPI-2: subdivide the under/over regions into intervals the width of
    // the equivalence interval (boundary pieces may be narrower) and take
    // the argmax over all sub-intervals.
    const double w = spec.eps1 + spec.eps2;
    upm_under = 0.0;
    for (double b = lo; b > 0.0; b -= w) {
      const double a = std::max(0.0, b - w);
      upm_under = std::max(upm_under, mass(a, b) / (b - a));
    }
    upm_over = 0.0;
    for (double a = hi; a < 1.0; a += w) {
      const double b = std::min(1.0, a + w);
      upm_over = std::max(upm_over, mass(a, b) / (b - a));
    }
    const Upm all[3] = {{upm_under, 0}, {upm_target, 1}, {upm_over, 2}};
    best_region = std::max_element(std::begin(all), std::end(all), [](auto& a, auto& b) {
                    return a.value < b.value;
                  })->region;
  }

  EscalationKind kind = best_region == 0   ? EscalationKind::Escalate
                        : best_region == 1 ? EscalationKind::Stay
                                           : EscalationKind::DeEscalate;
  if (kind == EscalationKind::Escalate) {
    const int next = state.current_dose + 1;
    if (next >= state.n_doses() || state.eliminated[next]) kind = EscalationKind::Stay;
  }
  return {kind, upm_under, upm_target, upm_over};
}

CrmRecommendation crm_recommend(const DoseToxState& state, const CrmSpec& spec) {
  state.validate();
  spec.validate();
  if (static_cast<int>(spec.skeleton.size()) != state.n_doses())
    throw std::invalid_argument("crm_recommend: skeleton must match the dose count");

  // Normal prior discretized on the parameter grid.
  std::vector<double> grid(spec.grid_points), prior_mass(spec.grid_points);
  for (int i = 0; i < spec.grid_points; ++i) {
    grid[i] = spec.grid_lo + (spec.grid_hi - spec.grid_lo) * i / (spec.grid_points - 1);
    const double z = grid[i] / spec.prior_sd;
    prior_mass[i] = std::exp(-0.5 * z * z);
  }
  GridDensity prior(std::move(grid), std::move(prior_mass));

  const GridDensity posterior = update_grid(prior, [&](double a) {
    const double e = std::exp(a);
    double ll = 0.0;
    for (int j = 0; j < state.n_doses(); ++j) {
      if (state.treated[j] == 0) continue;
      const double p = std::pow(spec.skeleton[j], e);
      ll += state.dlts[j] * std::log(p) +
            (state.treated[j] - state.dlts[j]) * log1m(p);
    }
    return ll;
  });

  std::vector<double> means(state.n_doses(), 0.0);
  for (int j = 0; j < state.n_doses(); ++j) {
    for (std::size_t i = 0; i < posterior.grid.size(); ++i)
      means[j] += posterior.masses[i] * std::pow(spec.skeleton[j], std::exp(posterior.grid[i]));
  }

  const int highest_allowed =
      spec.no_skip ? std::min(state.n_doses() - 1, state.current_dose + 1)
                   : state.n_doses() - 1;
  int best = -1;
  for (int j = 0; j <= highest_allowed; ++j) {
    if (state.eliminated[j]) continue;
    if (best < 0 ||
        std::fabs(means[j] - spec.target) < std::fabs(means[best] - spec.target))
      best = j;
  }
  if (best < 0) throw std::runtime_error("crm_recommend: every candidate dose is eliminated");
  return {best, std::move(means)};
}

std::vector<bool> overdose_eliminate(const DoseToxState& state, double target,
                                     double prob_cutoff) {
  if (!(prob_cutoff > 0.0) || !(prob_cutoff < 1.0))
    throw std::invalid_argument("overdose_eliminate: cutoff must lie in (0,1)");
  std::vector<bool> flags = state.eliminated;
  for (int j = 0; j < state.n_doses(); ++j) {
    if (state.treated[j] < 3) continue;
    const BetaParams post =
        update_beta(BetaParams(1.0, 1.0), BinomialSummary(state.dlts[j], state.treated[j]));
    if (prob_exceeds(post, target) > prob_cutoff) {
      for (int k = j; k < state.n_doses(); ++k) flags[k] = true;
      break;
    }
  }
  return flags;
}

std::vector<double> isotonic_fit(const std::vector<double>& values,
                                 const std::vector<double>& weights) {
  if (values.size() != weights.size())
    throw std::invalid_argument("isotonic_fit: length mismatch");
  const std::size_t n = values.size();
  std::vector<double> level_sum, level_weight;
  std::vector<std::size_t> level_count;
  for (std::size_t i = 0; i < n; ++i) {
    level_sum.push_back(values[i] * weights[i]);
    level_weight.push_back(weights[i]);
    level_count.push_back(1);
    // Pool adjacent violators.
    while (level_sum.size() > 1) {
      const std::size_t m = level_sum.size();
      if (level_sum[m - 2] / level_weight[m - 2] <= level_sum[m - 1] / level_weight[m - 1])
        break;
      level_sum[m - 2] += level_sum[m - 1];
      level_weight[m - 2] += level_weight[m - 1];
      level_count[m - 2] += level_count[m - 1];
      level_sum.pop_back();
      level_weight.pop_back();
      level_count.pop_back();
    }
  }
  std::vector<double> fitted;
  fitted.reserve(n);
  for (std::size_t k = 0; k < level_sum.size(); ++k)
    fitted.insert(fitted.end(), level_count[k], level_sum[k] / level_weight[k]);
  return fitted;
}

void EscalationDesign::validate() const {
  if (!(target > 0.0) || !(target < 1.0))
    throw std::invalid_argument("EscalationDesign: target must lie in (0,1)");
  if (cohort_size < 1) throw std::invalid_argument("EscalationDesign: cohort size must be >= 1");
  if (max_n < 1) throw std::invalid_argument("EscalationDesign: max n must be >= 1");
  if (n_doses < 1) throw std::invalid_argument("EscalationDesign: need at least one dose");
  if (start_dose < 0 || start_dose >= n_doses)
    throw std::invalid_argument("EscalationDesign: start dose out of range");
  if (kind == DesignKind::ThreePlusThree && cohort_size != 3)
    throw std::invalid_argument("EscalationDesign: 3+3 uses cohorts of 3");
  if (kind == DesignKind::Crm) {
    if (!crm.has_value()) throw std::invalid_argument("EscalationDesign: CRM needs a spec");
    if (static_cast<int>(crm->skeleton.size()) != n_doses)
      throw std::invalid_argument("EscalationDesign: CRM skeleton must match dose count");
  }
  if (!(elimination_cutoff > 0.0) || !(elimination_cutoff < 1.0))
    throw std::invalid_argument("EscalationDesign: elimination cutoff must lie in (0,1)");
}

namespace {

double resolved_ei_low(const EscalationDesign& d) {
  return d.ei_low >= 0.0 ? d.ei_low : d.target - 0.05;
}
double resolved_ei_high(const EscalationDesign& d) {
  return d.ei_high >= 0.0 ? d.ei_high : d.target + 0.05;
}

// Isotonic-adjusted MTD: Beta(0.05 + y, 0.05 + n - y) posterior means over
// tried, non-eliminated doses, inverse-variance PAVA weights, closest fit
// to the target; ties resolve to the lower dose.
int select_mtd_isotonic(const DoseToxState& state, double target) {
  std::vector<int> tried;
  std::vector<double> means, weights;
  for (int j = 0; j < state.n_doses(); ++j) {
    if (state.treated[j] == 0 || state.eliminated[j]) continue;
    const double a = 0.05 + state.dlts[j];
    const double b = 0.05 + state.treated[j] - state.dlts[j];
    means.push_back(a / (a + b));
    weights.push_back((a + b) * (a + b) * (a + b + 1.0) / (a * b));
    tried.push_back(j);
  }
  if (tried.empty()) return -1;
  const std::vector<double> fitted = isotonic_fit(means, weights);
  // Ties (exactly equal pooled estimates) resolve upward while still at or
  // below the target, downward above it.
  int best = 0;
  for (std::size_t i = 1; i < fitted.size(); ++i) {
    const double d = std::fabs(fitted[i] - target);
    const double d_best = std::fabs(fitted[best] - target);
    if (d < d_best || (d == d_best && fitted[i] <= target)) best = static_cast<int>(i);
  }
  return tried[best];
}

int select_mtd_3p3(const DoseToxState& state) {
  int mtd = -1;
  for (int j = 0; j < state.n_doses(); ++j)
    if (state.treated[j] >= 6 && state.dlts[j] <= 1) mtd = j;
  return mtd;
}

// Apply E/S/D movement with elimination-aware clamping.
void move(DoseToxState& state, EscalationKind kind) {
  if (kind == EscalationKind::Escalate) {
    const int next = state.current_dose + 1;
    if (next < state.n_doses() && !state.eliminated[next]) state.current_dose = next;
  } else if (kind == EscalationKind::DeEscalate) {
    if (state.current_dose > 0) --state.current_dose;
  }
}

}  // namespace

EscalationResult simulate_escalation(const EscalationDesign& design,
                                     const std::vector<double>& truth,
                                     const ReplicateStream& stream) {
  design.validate();
  if (static_cast<int>(truth.size()) != design.n_doses)
    throw std::invalid_argument("simulate_escalation: truth must match the dose count");
  for (double p : truth)
    if (!(p >= 0.0) || !(p <= 1.0))
      throw std::invalid_argument("simulate_escalation: truth rates must lie in [0,1]");

  const std::optional<BoinBoundaries> boin =
      design.kind == DesignKind::Boin
          ? std::optional<BoinBoundaries>(boin_boundaries(design.target))
          : std::nullopt;
  const std::optional<MtpiSpec> mtpi =
      (design.kind == DesignKind::Mtpi || design.kind == DesignKind::Mtpi2)
          ? std::optional<MtpiSpec>(MtpiSpec(
                design.target, design.target - resolved_ei_low(design),
                resolved_ei_high(design) - design.target, BetaParams(1.0, 1.0),
                design.kind == DesignKind::Mtpi ? MtpiVariant::Mtpi : MtpiVariant::Mtpi2))
          : std::nullopt;

  DoseToxState state(design.n_doses);
  state.current_dose = design.start_dose;
  EscalationResult result;
  int enrolled = 0;
  std::uint64_t cohort_index = 0;
  bool declared = false;
  int declared_mtd = -1;

  while (enrolled + design.cohort_size <= design.max_n) {
    const int dose = state.current_dose;
    const int new_dlts =
        stream.binomial(cohort_index, static_cast<std::uint64_t>(dose), design.cohort_size,
                        truth[dose]);
    ++cohort_index;
    state.treated[dose] += design.cohort_size;
    state.dlts[dose] += new_dlts;
    enrolled += design.cohort_size;

    if (design.eliminate_overdose) {
      state.eliminated = overdose_eliminate(state, design.target, design.elimination_cutoff);
      if (state.eliminated[0]) {  // elimination is upward-monotone
        result.stopped_for_safety = true;
        break;
      }
      if (state.eliminated[dose]) {
        int down = dose;
        while (down > 0 && state.eliminated[down]) --down;
        state.current_dose = down;
        if (design.kind == DesignKind::ThreePlusThree && state.treated[down] >= 6) {
          declared = true;
          declared_mtd = state.dlts[down] <= 1 ? down : -1;
          break;
        }
        continue;
      }
    }

    switch (design.kind) {
      case DesignKind::ThreePlusThree: {
        const EscalationDecision d = rule_3p3(state);
        if (d.kind == EscalationKind::Escalate) {
          const int next = dose + 1;
          const bool can_escalate = next < design.n_doses && !state.eliminated[next] &&
                                    state.treated[next] < 6;
          if (can_escalate) {
            state.current_dose = next;
          } else if (state.treated[dose] >= 6) {
            declared = true;  // highest acceptable dose fully explored
            declared_mtd = dose;
          }
          // 3 treated with nowhere to go: expand the current dose to 6.
        } else if (d.kind == EscalationKind::DeEscalate) {
          // A dose with >= 2 DLTs is never revisited.
          for (int k = dose; k < design.n_doses; ++k) state.eliminated[k] = true;
          if (dose == 0) {
            declared = true;
            declared_mtd = -1;
            result.stopped_for_safety = true;
          } else {
            state.current_dose = dose - 1;
            if (state.treated[dose - 1] >= 6) {
              declared = true;
              declared_mtd = state.dlts[dose - 1] <= 1 ? dose - 1 : -1;
            }
          }
        }
        break;
      }
      case DesignKind::I3p3:
        move(state, rule_i3p3(state, design.target, resolved_ei_low(design),
                              resolved_ei_high(design))
                        .kind);
        break;
      case DesignKind::Boin:
        move(state, boin_decide(state, *boin).kind);
        break;
      case DesignKind::Mtpi:
      case DesignKind::Mtpi2:
        move(state, mtpi_decide(state, *mtpi).kind);
        break;
      case DesignKind::Crm:
        state.current_dose = crm_recommend(state, *design.crm).dose;
        break;
    }
    if (declared) break;
  }

  result.treated = state.treated;
  result.dlts = state.dlts;
  if (result.stopped_for_safety) {
    result.mtd = -1;
  } else if (design.kind == DesignKind::ThreePlusThree) {
    result.mtd = declared ? declared_mtd : select_mtd_3p3(state);
  } else {
    result.mtd = select_mtd_isotonic(state, design.target);
  }
  return result;
}

std::vector<DecisionTableRow> decision_table(const EscalationDesign& design, int max_n) {
  design.validate();
  if (design.kind == DesignKind::Crm)
    throw std::invalid_argument("decision_table: CRM decisions depend on all doses");
  if (max_n < 1) throw std::invalid_argument("decision_table: max_n must be >= 1");

  const std::optional<BoinBoundaries> boin =
      design.kind == DesignKind::Boin
          ? std::optional<BoinBoundaries>(boin_boundaries(design.target))
          : std::nullopt;
  const std::optional<MtpiSpec> mtpi =
      (design.kind == DesignKind::Mtpi || design.kind == DesignKind::Mtpi2)
          ? std::optional<MtpiSpec>(MtpiSpec(
                design.target, design.target - resolved_ei_low(design),
                resolved_ei_high(design) - design.target, BetaParams(1.0, 1.0),
                design.kind == DesignKind::Mtpi ? MtpiVariant::Mtpi : MtpiVariant::Mtpi2))
          : std::nullopt;

  std::vector<DecisionTableRow> rows;
  for (int n = 1; n <= max_n; ++n) {
    if (design.kind == DesignKind::ThreePlusThree && n != 3 && n != 6) continue;
    for (int y = 0; y <= n; ++y) {
      // A middle dose keeps the raw rule visible (no boundary clamping).
      DoseToxState state(3);
      state.current_dose = 1;
      state.treated[1] = n;
      state.dlts[1] = y;

      EscalationKind kind;
      switch (design.kind) {
        case DesignKind::ThreePlusThree: kind = rule_3p3(state).kind; break;
        case DesignKind::I3p3:
          kind = rule_i3p3(state, design.target, resolved_ei_low(design),
                           resolved_ei_high(design))
                     .kind;
          break;
        case DesignKind::Boin: kind = boin_decide(state, *boin).kind; break;
        default: kind = mtpi_decide(state, *mtpi).kind; break;
      }
      const bool elim =
          design.eliminate_overdose && n >= 3 &&
          prob_exceeds(update_beta(BetaParams(1.0, 1.0), BinomialSummary(y, n)),
                       design.target) > design.elimination_cutoff;
      rows.push_back({n, y, kind, elim});
    }
  }
  return rows;
}

}  // namespace betatrial::dose
