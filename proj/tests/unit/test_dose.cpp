#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "betatrial/dose.hpp"
#include "oracles.hpp"

using namespace betatrial;
using namespace betatrial::dose;

namespace {

DoseToxState state_at(int n_doses, int dose, int treated, int dlts) {
  DoseToxState st(n_doses);
  st.current_dose = dose;
  st.treated[dose] = treated;
  st.dlts[dose] = dlts;
  return st;
}

}  // namespace

TEST_CASE("3+3 rule table") {
  CHECK(rule_3p3(state_at(3, 1, 3, 0)).kind == EscalationKind::Escalate);
  CHECK(rule_3p3(state_at(3, 1, 3, 1)).kind == EscalationKind::Stay);
  CHECK(rule_3p3(state_at(3, 1, 3, 2)).kind == EscalationKind::DeEscalate);
  CHECK(rule_3p3(state_at(3, 1, 3, 3)).kind == EscalationKind::DeEscalate);
  CHECK(rule_3p3(state_at(3, 1, 6, 0)).kind == EscalationKind::Escalate);
  CHECK(rule_3p3(state_at(3, 1, 6, 1)).kind == EscalationKind::Escalate);
  CHECK(rule_3p3(state_at(3, 1, 6, 2)).kind == EscalationKind::DeEscalate);
  CHECK_THROWS_AS(rule_3p3(state_at(3, 1, 4, 0)), std::invalid_argument);
}

TEST_CASE("i3+3 rule table with equivalence interval [0.2, 0.3]") {
  const double lo = 0.2, hi = 0.3, target = 0.25;
  // n = 3 column of the published design.
  CHECK(rule_i3p3(state_at(3, 1, 3, 0), target, lo, hi).kind == EscalationKind::Escalate);
  CHECK(rule_i3p3(state_at(3, 1, 3, 1), target, lo, hi).kind == EscalationKind::Stay);
  CHECK(rule_i3p3(state_at(3, 1, 3, 2), target, lo, hi).kind == EscalationKind::DeEscalate);
  CHECK(rule_i3p3(state_at(3, 1, 3, 3), target, lo, hi).kind == EscalationKind::DeEscalate);
  // n = 6 column.
  CHECK(rule_i3p3(state_at(3, 1, 6, 0), target, lo, hi).kind == EscalationKind::Escalate);
  CHECK(rule_i3p3(state_at(3, 1, 6, 1), target, lo, hi).kind == EscalationKind::Escalate);
  CHECK(rule_i3p3(state_at(3, 1, 6, 2), target, lo, hi).kind == EscalationKind::Stay);
  CHECK(rule_i3p3(state_at(3, 1, 6, 3), target, lo, hi).kind == EscalationKind::DeEscalate);
  CHECK(rule_i3p3(state_at(3, 1, 6, 6), target, lo, hi).kind == EscalationKind::DeEscalate);
  // 1/6 sits below the interval, 2/6 lands in the "stay" pocket because
  // de-escalating after removing one DLT would overshoot.
  CHECK_THROWS_AS(rule_i3p3(state_at(3, 1, 0, 0), target, lo, hi), std::invalid_argument);
}

TEST_CASE("BOIN boundaries: published values and limits") {
  const BoinBoundaries b = boin_boundaries(0.30);
  CHECK(b.phi1 == doctest::Approx(0.18).epsilon(1e-12));
  CHECK(b.phi2 == doctest::Approx(0.42).epsilon(1e-12));
  CHECK(std::fabs(b.lambda_e - 0.236) < 1e-3);
  CHECK(std::fabs(b.lambda_d - 0.358) < 1e-3);

  const BoinBoundaries tight = boin_boundaries(0.30, 0.2999, 0.3001);
  CHECK(tight.lambda_e == doctest::Approx(0.3).epsilon(1e-3));
  CHECK(tight.lambda_d == doctest::Approx(0.3).epsilon(1e-3));

  for (double target : {0.1, 0.2, 0.3, 0.4, 0.5}) {
    const BoinBoundaries bb = boin_boundaries(target);
    CHECK(bb.lambda_e < target);
    CHECK(bb.lambda_d > target);
  }
}

TEST_CASE("BOIN decisions and escalation guard") {
  const BoinBoundaries b = boin_boundaries(0.30);
  CHECK(boin_decide(state_at(3, 1, 3, 0), b).kind == EscalationKind::Escalate);
  CHECK(boin_decide(state_at(3, 1, 3, 1), b).kind == EscalationKind::Stay);
  CHECK(boin_decide(state_at(3, 1, 3, 2), b).kind == EscalationKind::DeEscalate);

  // Top dose or eliminated next dose: escalation becomes Stay.
  CHECK(boin_decide(state_at(3, 2, 3, 0), b).kind == EscalationKind::Stay);
  DoseToxState blocked = state_at(3, 1, 3, 0);
  blocked.eliminated[2] = true;
  CHECK(boin_decide(blocked, b).kind == EscalationKind::Stay);

  CHECK_THROWS_AS(boin_decide(state_at(3, 1, 0, 0), b), std::invalid_argument);
}

TEST_CASE("BOIN decisions form contiguous blocks in y") {
  const BoinBoundaries b = boin_boundaries(0.30);
  for (int n = 1; n <= 12; ++n) {
    int phase = 0;  // 0 escalate, 1 stay, 2 de-escalate
    for (int y = 0; y <= n; ++y) {
      const EscalationKind k = boin_decide(state_at(3, 1, n, y), b).kind;
      const int now = k == EscalationKind::Escalate ? 0
                      : k == EscalationKind::Stay   ? 1
                                                    : 2;
      CHECK(now >= phase);
      phase = now;
    }
  }
}

TEST_CASE("mTPI decisions match the closed-form UPM derivations") {
  const MtpiSpec spec(0.3, 0.05, 0.05, BetaParams(1, 1), MtpiVariant::Mtpi);

  // Posterior cdfs in closed form: Beta(1,4), Beta(2,3), Beta(3,2).
  const auto cdf14 = [](double x) { return 1.0 - std::pow(1.0 - x, 4); };
  const auto cdf23 = [](double x) {
    return 1.0 - std::pow(1.0 - x, 4) - 4.0 * x * std::pow(1.0 - x, 3);
  };
  const auto cdf32 = [](double x) { return 4.0 * std::pow(x, 3) * (1.0 - x) + std::pow(x, 4); };

  {
    const MtpiDecision d = mtpi_decide(state_at(3, 1, 3, 0), spec);
    CHECK(d.kind == EscalationKind::Escalate);
    CHECK(d.upm_under == doctest::Approx(cdf14(0.25) / 0.25).epsilon(1e-6));
    CHECK(d.upm_target == doctest::Approx((cdf14(0.35) - cdf14(0.25)) / 0.1).epsilon(1e-6));
    CHECK(d.upm_over == doctest::Approx((1.0 - cdf14(0.35)) / 0.65).epsilon(1e-6));
    CHECK(d.upm_under == doctest::Approx(2.734375).epsilon(1e-6));
    CHECK(d.upm_target == doctest::Approx(1.3790).epsilon(1e-3));
    CHECK(d.upm_over == doctest::Approx(0.274625).epsilon(1e-5));
  }
  {
    const MtpiDecision d = mtpi_decide(state_at(3, 1, 3, 1), spec);
    CHECK(d.kind == EscalationKind::Stay);
    CHECK(d.upm_under == doctest::Approx(cdf23(0.25) / 0.25).epsilon(1e-6));
    CHECK(d.upm_under == doctest::Approx(1.046875).epsilon(1e-6));
    CHECK(d.upm_target == doctest::Approx(1.7530).epsilon(1e-3));
    CHECK(d.upm_over == doctest::Approx(0.866125).epsilon(1e-5));
  }
  {
    const MtpiDecision d = mtpi_decide(state_at(3, 1, 3, 2), spec);
    CHECK(d.kind == EscalationKind::DeEscalate);
    CHECK(d.upm_under == doctest::Approx(cdf32(0.25) / 0.25).epsilon(1e-4));
    CHECK(d.upm_under == doctest::Approx(0.203125).epsilon(1e-6));
    CHECK(d.upm_target == doctest::Approx(0.7570).epsilon(1e-3));
    CHECK(d.upm_over == doctest::Approx(1.343875).epsilon(1e-5));
  }
}

TEST_CASE("mTPI decisions are contiguous for n <= 12 with a flat prior") {
  const MtpiSpec spec(0.3, 0.05, 0.05, BetaParams(1, 1), MtpiVariant::Mtpi);
  for (int n = 1; n <= 12; ++n) {
    int phase = 0;
    for (int y = 0; y <= n; ++y) {
      const EscalationKind k = mtpi_decide(state_at(3, 1, n, y), spec).kind;
      const int now = k == EscalationKind::Escalate ? 0
                      : k == EscalationKind::Stay   ? 1
                                                    : 2;
      CHECK(now >= phase);
      phase = now;
    }
  }
}

TEST_CASE("mTPI-2 subdivides the outer intervals") {
  const MtpiSpec spec(0.3, 0.05, 0.05, BetaParams(1, 1), MtpiVariant::Mtpi2);
  CHECK(mtpi_decide(state_at(3, 1, 3, 0), spec).kind == EscalationKind::Escalate);
  CHECK(mtpi_decide(state_at(3, 1, 3, 3), spec).kind == EscalationKind::DeEscalate);
  // Sub-interval UPMs dominate the aggregate-region UPMs of plain mTPI.
  const MtpiSpec plain(0.3, 0.05, 0.05, BetaParams(1, 1), MtpiVariant::Mtpi);
  const MtpiDecision d2 = mtpi_decide(state_at(3, 1, 6, 1), spec);
  const MtpiDecision d1 = mtpi_decide(state_at(3, 1, 6, 1), plain);
  CHECK(d2.upm_under >= d1.upm_under - 1e-12);
  CHECK(d2.upm_over >= d1.upm_over - 1e-12);
  CHECK(d2.upm_target == doctest::Approx(d1.upm_target).epsilon(1e-12));
}

TEST_CASE("CRM recommendation from prior means matches a fine-grid oracle") {
  CrmSpec spec({0.05, 0.12, 0.25, 0.40}, 0.25);
  DoseToxState empty(4);
  const CrmRecommendation rec = crm_recommend(empty, spec);

  // Independent 10x-resolution grid integration of E[q^exp(a)] under the
  // truncated normal prior.
  const int points = 8001;
  std::vector<double> oracle_means(4, 0.0);
  double total = 0.0;
  for (int i = 0; i < points; ++i) {
    const double a = -4.0 + 8.0 * i / (points - 1);
    const double w = std::exp(-0.5 * (a / 1.34) * (a / 1.34));
    total += w;
    for (int j = 0; j < 4; ++j)
      oracle_means[j] += w * std::pow(spec.skeleton[j], std::exp(a));
  }
  int oracle_best = 0;
  for (int j = 0; j < 4; ++j) {
    oracle_means[j] /= total;
    if (std::fabs(oracle_means[j] - 0.25) < std::fabs(oracle_means[oracle_best] - 0.25))
      oracle_best = j;
  }
  // no_skip caps the move at one level above the current dose.
  CHECK(rec.dose == std::min(oracle_best, empty.current_dose + 1));
  for (int j = 0; j < 4; ++j)
    CHECK(rec.post_means[j] == doctest::Approx(oracle_means[j]).epsilon(1e-4));

  CrmSpec free = spec;
  free.no_skip = false;
  CHECK(crm_recommend(empty, free).dose == oracle_best);
}

TEST_CASE("CRM posterior means rise with an extra DLT") {
  CrmSpec spec({0.05, 0.12, 0.25, 0.40}, 0.25);
  DoseToxState st(4);
  st.current_dose = 2;
  st.treated = {3, 3, 6, 0};
  st.dlts = {0, 1, 1, 0};
  const CrmRecommendation before = crm_recommend(st, spec);
  DoseToxState worse = st;
  worse.dlts[2] += 1;
  const CrmRecommendation after = crm_recommend(worse, spec);
  for (int j = 0; j < 4; ++j) CHECK(after.post_means[j] >= before.post_means[j] - 1e-10);
}

TEST_CASE("CRM ties resolve to the lower dose") {
  CrmSpec spec({0.05, 0.12, 0.25, 0.40}, 0.25);
  spec.no_skip = false;
  DoseToxState st(4);
  const CrmRecommendation base = crm_recommend(st, spec);
  // Search near the midpoint of two adjacent posterior means for a target
  // whose distances tie exactly in double precision.
  const double m1 = base.post_means[1], m2 = base.post_means[2];
  double tie_target = 0.5 * (m1 + m2);
  bool found = false;
  for (int k = -4; k <= 4 && !found; ++k) {
    double t = tie_target;
    for (int s = 0; s < std::abs(k); ++s)
      t = std::nextafter(t, k > 0 ? 1.0 : 0.0);
    if (t - m1 == m2 - t) {
      tie_target = t;
      found = true;
    }
  }
  if (found) {
    CrmSpec tied = spec;
    tied.target = tie_target;
    CHECK(crm_recommend(st, tied).dose == 1);
  }
}

TEST_CASE("CRM respects elimination") {
  CrmSpec spec({0.05, 0.12, 0.25, 0.40}, 0.25);
  spec.no_skip = false;
  DoseToxState st(4);
  st.eliminated[2] = true;
  st.eliminated[3] = true;
  const CrmRecommendation rec = crm_recommend(st, spec);
  CHECK(rec.dose <= 1);
}

TEST_CASE("overdose elimination rule") {
  // 3/3 DLTs: Pr(Beta(4,1) > 0.3) = 1 - 0.3^4 = 0.9919 > 0.95.
  DoseToxState hot = state_at(4, 1, 3, 3);
  const auto flags = overdose_eliminate(hot, 0.3, 0.95);
  CHECK_FALSE(flags[0]);
  CHECK(flags[1]);
  CHECK(flags[2]);  // everything above goes too
  CHECK(flags[3]);

  // 0/3: Pr(Beta(1,4) > 0.3) = 0.7^4 = 0.2401, no elimination.
  CHECK_FALSE(overdose_eliminate(state_at(4, 1, 3, 0), 0.3, 0.95)[1]);

  // Fewer than 3 treated: never, regardless of DLTs.
  CHECK_FALSE(overdose_eliminate(state_at(4, 1, 2, 2), 0.3, 0.95)[1]);

  // Absorbing: existing flags persist.
  DoseToxState calm = state_at(4, 1, 3, 0);
  calm.eliminated[3] = true;
  CHECK(overdose_eliminate(calm, 0.3, 0.95)[3]);
}

TEST_CASE("isotonic_fit pools adjacent violators") {
  CHECK(isotonic_fit({1, 2, 3}, {1, 1, 1}) == std::vector<double>{1, 2, 3});
  const auto pooled = isotonic_fit({1, 3, 2}, {1, 1, 1});
  CHECK(pooled[0] == doctest::Approx(1.0));
  CHECK(pooled[1] == doctest::Approx(2.5));
  CHECK(pooled[2] == doctest::Approx(2.5));
  const auto weighted = isotonic_fit({3, 1}, {1, 3});
  CHECK(weighted[0] == doctest::Approx(1.5));
  CHECK(weighted[1] == doctest::Approx(1.5));
  // Output is always non-decreasing.
  const auto jagged = isotonic_fit({0.5, 0.1, 0.4, 0.2, 0.9}, {2, 1, 3, 1, 1});
  for (std::size_t i = 1; i < jagged.size(); ++i) CHECK(jagged[i] >= jagged[i - 1] - 1e-15);
}

TEST_CASE("simulate_escalation: no toxicity climbs to the top dose") {
  for (DesignKind kind : {DesignKind::ThreePlusThree, DesignKind::I3p3, DesignKind::Boin,
                          DesignKind::Mtpi, DesignKind::Mtpi2}) {
    EscalationDesign d;
    d.kind = kind;
    d.target = 0.3;
    d.cohort_size = 3;
    d.max_n = 30;
    d.n_doses = 4;
    const EscalationResult res =
        simulate_escalation(d, {0.0, 0.0, 0.0, 0.0}, ReplicateStream(1, 0, 0));
    CHECK(res.mtd == 3);
    for (int j = 0; j < 4; ++j) CHECK(res.dlts[j] == 0);
    int total = 0;
    for (int j = 0; j < 4; ++j) total += res.treated[j];
    CHECK(total <= 30);
  }
}

TEST_CASE("simulate_escalation: fully toxic truth stops the trial without an MTD") {
  EscalationDesign d;
  d.kind = DesignKind::Boin;
  d.max_n = 30;
  d.n_doses = 4;
  const EscalationResult res =
      simulate_escalation(d, {1.0, 1.0, 1.0, 1.0}, ReplicateStream(2, 0, 0));
  CHECK(res.stopped_for_safety);
  CHECK(res.mtd == -1);
  CHECK(res.treated[0] == 3);  // one cohort, then full stop
  CHECK(res.treated[1] == 0);
}

TEST_CASE("simulate_escalation: BOIN concentrates selection at the target dose") {
  EscalationDesign d;
  d.kind = DesignKind::Boin;
  d.target = 0.3;
  d.max_n = 30;
  d.n_doses = 4;
  const std::vector<double> truth{0.05, 0.15, 0.30, 0.50};
  std::vector<int> selections(5, 0);
  const int R = 2000;
  for (int r = 0; r < R; ++r) {
    const EscalationResult res = simulate_escalation(d, truth, ReplicateStream(11, 0, r));
    ++selections[res.mtd >= 0 ? res.mtd : 4];
    int total = 0;
    for (int j = 0; j < 4; ++j) total += res.treated[j];
    CHECK(total <= d.max_n);
  }
  CHECK(selections[2] > selections[0]);
  CHECK(selections[2] > selections[1]);
  CHECK(selections[2] > selections[3]);
  CHECK(selections[2] > selections[4]);
}

TEST_CASE("simulate_escalation: CRM runs and respects max n") {
  EscalationDesign d;
  d.kind = DesignKind::Crm;
  d.target = 0.25;
  d.max_n = 24;
  d.n_doses = 4;
  d.crm = CrmSpec({0.05, 0.12, 0.25, 0.40}, 0.25);
  const EscalationResult res =
      simulate_escalation(d, {0.05, 0.12, 0.25, 0.40}, ReplicateStream(3, 0, 0));
  int total = 0;
  for (int j = 0; j < 4; ++j) total += res.treated[j];
  CHECK(total <= 24);
  CHECK(res.mtd >= 0);
}

TEST_CASE("simulate_escalation validates inputs") {
  EscalationDesign d;
  d.max_n = 0;
  CHECK_THROWS_AS(simulate_escalation(d, {0.1, 0.2, 0.3, 0.4}, ReplicateStream(1, 0, 0)),
                  std::invalid_argument);
  EscalationDesign bad_cohort;
  bad_cohort.kind = DesignKind::ThreePlusThree;
  bad_cohort.cohort_size = 2;
  CHECK_THROWS_AS(simulate_escalation(bad_cohort, {0.1, 0.2, 0.3, 0.4}, ReplicateStream(1, 0, 0)),
                  std::invalid_argument);
}

TEST_CASE("decision_table enumerates all cells") {
  EscalationDesign d;
  d.kind = DesignKind::Boin;
  d.target = 0.3;
  const auto rows = decision_table(d, 12);
  std::size_t expected = 0;
  for (int n = 1; n <= 12; ++n) expected += n + 1;
  CHECK(rows.size() == expected);
  const BoinBoundaries b = boin_boundaries(0.3);
  for (const auto& row : rows) {
    const EscalationKind direct = boin_decide(state_at(3, 1, row.n, row.y), b).kind;
    CHECK(row.decision == direct);
  }

  EscalationDesign three;
  three.kind = DesignKind::ThreePlusThree;
  const auto rows3 = decision_table(three, 6);
  CHECK(rows3.size() == 4 + 7);  // n = 3 and n = 6 only

  EscalationDesign crm;
  crm.kind = DesignKind::Crm;
  crm.crm = CrmSpec({0.05, 0.12, 0.25, 0.40}, 0.3);
  crm.n_doses = 4;
  CHECK_THROWS_AS(decision_table(crm, 6), std::invalid_argument);
}
