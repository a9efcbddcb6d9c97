#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "betatrial/rules.hpp"
#include "oracles.hpp"

using namespace betatrial;

namespace {

InterimState one_arm_state(int y, int n, std::vector<LookSizes> planned, int look) {
  InterimState st{BinomialSummary(y, n), std::nullopt, look, std::move(planned)};
  return st;
}

// Independent PPOS oracle: closed-form Beta-Binomial weights (lgamma only)
// and the integer-parameter binomial identity for the final tail.
double ppos_oracle_flat_prior(int y, int n, int n_final, double a, double c) {
  const int rem = n_final - n;
  double acc = 0.0;
  for (int j = 0; j <= rem; ++j) {
    const double lw = std::lgamma(rem + 1.0) - std::lgamma(j + 1.0) -
                      std::lgamma(rem - j + 1.0) +
                      oracle::log_beta_fn(1.0 + y + j, 1.0 + n - y + rem - j) -
                      oracle::log_beta_fn(1.0 + y, 1.0 + n - y);
    const int a_post = 1 + y + j;
    const int b_post = 1 + n_final - y - j;
    // Pr(Beta(a,b) > x) = Pr(Bin(a+b-1, x) <= a-1).
    const double evidence = oracle::binom_cdf(a_post + b_post - 2, a_post - 1, a);
    if (evidence >= c) acc += std::exp(lw);
  }
  return acc;
}

}  // namespace

TEST_CASE("effect_prob_two_arm: symmetry, separation, complement") {
  const Dist same = BetaParams(6, 6);
  CHECK(effect_prob_two_arm(same, same, 0.0) == doctest::Approx(0.5).epsilon(1e-6));

  CHECK(effect_prob_two_arm(Dist(BetaParams(1000, 1)), Dist(BetaParams(1, 1000)), 0.5) >
        0.99);

  // Pr(d > a) + Pr(d < a) = 1 for continuous posteriors.
  const Dist t = BetaParams(9, 3), c = BetaParams(4, 8);
  for (double a : {-0.3, 0.0, 0.2, 0.45}) {
    const double above = effect_prob_two_arm(t, c, a);
    const double below = effect_prob_two_arm(c, t, -a);
    CHECK(above + below == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("effect_prob_two_arm against a Monte Carlo oracle") {
  const double mc = oracle::mc_effect_prob(9, 3, 4, 8, 0.2, 1'000'000, 20240817);
  const double se = std::sqrt(mc * (1.0 - mc) / 1e6);
  const double quad = effect_prob_two_arm(Dist(BetaParams(9, 3)), Dist(BetaParams(4, 8)), 0.2);
  CHECK(std::fabs(quad - mc) < 3.0 * se);
}

TEST_CASE("effect_prob_two_arm handles mixtures and grids") {
  const Dist mix_t = BetaMixture({{0.5, BetaParams(9, 3)}, {0.5, BetaParams(2, 2)}});
  const Dist beta_c = BetaParams(4, 8);
  // Mixture linearity: component-wise combination.
  const double direct = effect_prob_two_arm(mix_t, beta_c, 0.1);
  const double by_parts =
      0.5 * effect_prob_two_arm(Dist(BetaParams(9, 3)), beta_c, 0.1) +
      0.5 * effect_prob_two_arm(Dist(BetaParams(2, 2)), beta_c, 0.1);
  CHECK(direct == doctest::Approx(by_parts).epsilon(1e-9));

  // Grid control and grid treatment reduce to discrete sums.
  const Dist grid = GridDensity::uniform(0.0, 1.0, 501);
  CHECK(effect_prob_two_arm(mix_t, grid, -1.0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(effect_prob_two_arm(mix_t, grid, 1.0) == doctest::Approx(0.0).epsilon(1e-12));
  double prev = 1.0;
  for (double a = -1.0; a <= 1.0; a += 0.125) {
    const double p = effect_prob_two_arm(grid, beta_c, a);
    CHECK(p <= prev + 1e-12);
    prev = p;
  }
}

TEST_CASE("posterior_success applies the threshold rule") {
  const RuleOutcome uniform = posterior_success(Dist(BetaParams(1, 1)), SuccessRule(0.5, 0.6));
  CHECK_FALSE(uniform.success);
  CHECK(uniform.evidence == doctest::Approx(0.5).epsilon(1e-12));

  const RuleOutcome strong =
      posterior_success(Dist(BetaParams(50, 5)), SuccessRule(0.5, 0.95));
  CHECK(strong.success);
  CHECK(strong.evidence > 0.97);

  const RuleOutcome weak = posterior_success(Dist(BetaParams(4, 8)), SuccessRule(0.5, 0.1));
  CHECK(weak.success);
  CHECK(weak.evidence == doctest::Approx(0.11328125).epsilon(1e-10));
}

TEST_CASE("ppos degenerate cases") {
  // Remaining zero: the verdict is already decided.
  const SuccessRule rule(0.3, 0.9);
  const auto met = one_arm_state(15, 20, {{20, 0}}, 0);
  CHECK(ppos(met, Dist(BetaParams(1, 1)), std::nullopt, rule) == 1.0);
  const auto unmet = one_arm_state(2, 20, {{20, 0}}, 0);
  CHECK(ppos(unmet, Dist(BetaParams(1, 1)), std::nullopt, rule) == 0.0);
}

TEST_CASE("ppos matches independent enumeration with flat prior") {
  const double expected = ppos_oracle_flat_prior(5, 10, 20, 0.3, 0.9);
  const auto state = one_arm_state(5, 10, {{10, 0}, {20, 0}}, 0);
  const double pp = ppos(state, Dist(BetaParams(1, 1)), std::nullopt, SuccessRule(0.3, 0.9));
  CHECK(pp == doctest::Approx(expected).epsilon(1e-12));
  CHECK(pp > 0.0);
  CHECK(pp < 1.0);
}

TEST_CASE("ppos is monotone in current successes") {
  const SuccessRule rule(0.4, 0.9);
  double prev = -1.0;
  for (int y = 0; y <= 10; ++y) {
    const auto st = one_arm_state(y, 10, {{10, 0}, {24, 0}}, 0);
    const double pp = ppos(st, Dist(BetaParams(1, 1)), std::nullopt, rule);
    CHECK(pp >= prev - 1e-14);
    prev = pp;
  }
}

TEST_CASE("ppos tower property over the next cohort") {
  const SuccessRule rule(0.35, 0.85);
  const Dist prior = BetaParams(2, 3);
  const std::vector<LookSizes> planned{{6, 0}, {14, 0}, {22, 0}};
  for (int y = 0; y <= 6; ++y) {
    const auto now = one_arm_state(y, 6, planned, 0);
    const double pp_now = ppos(now, prior, std::nullopt, rule);
    const Dist posterior = update(prior, BinomialSummary(y, 6));
    double expectation = 0.0;
    for (int j = 0; j <= 8; ++j) {
      const auto next = one_arm_state(y + j, 14, planned, 1);
      expectation += predictive_pmf(posterior, 8, j) * ppos(next, prior, std::nullopt, rule);
    }
    CHECK(pp_now == doctest::Approx(expectation).epsilon(1e-10));
  }
}

TEST_CASE("two-arm ppos enumerates the joint remaining lattice") {
  const SuccessRule rule(0.0, 0.8, Comparison::TwoArmDifference);
  InterimState st{BinomialSummary(7, 10), BinomialSummary(3, 10), 0, {{10, 10}, {16, 16}}};
  const Dist prior = BetaParams(1, 1);
  const double pp = ppos(st, prior, std::optional<Dist>(prior), rule);
  CHECK(pp > 0.0);
  CHECK(pp < 1.0);

  // Direct double-sum oracle over the joint remaining outcomes.
  const Dist post_t = update(prior, BinomialSummary(7, 10));
  const Dist post_c = update(prior, BinomialSummary(3, 10));
  double expected = 0.0;
  for (int jt = 0; jt <= 6; ++jt) {
    for (int jc = 0; jc <= 6; ++jc) {
      const Dist ft = update(prior, BinomialSummary(7 + jt, 16));
      const Dist fc = update(prior, BinomialSummary(3 + jc, 16));
      if (posterior_success(ft, fc, rule).success)
        expected += predictive_pmf(post_t, 6, jt) * predictive_pmf(post_c, 6, jc);
    }
  }
  CHECK(pp == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("two-arm ppos respects the enumeration budget") {
  const SuccessRule rule(0.0, 0.9, Comparison::TwoArmDifference);
  InterimState st{BinomialSummary(0, 0), BinomialSummary(0, 0), 0, {{0, 0}, {}}};
  st.planned = {{10, 10}, {5000, 5000}};
  st.treatment = BinomialSummary(3, 10);
  st.control = BinomialSummary(2, 10);
  CHECK_THROWS_WITH_AS(ppos(st, Dist(BetaParams(1, 1)), std::optional<Dist>(BetaParams(1, 1)), rule),
                       "enumeration budget exceeded", std::runtime_error);
}

TEST_CASE("conditional power") {
  CHECK(conditional_power(12, 10, 0.4, 10) == 1.0);  // already met
  CHECK(conditional_power(0, 10, 0.5, 7) == doctest::Approx(176.0 / 1024.0).epsilon(1e-13));
  CHECK(conditional_power(3, 10, 0.0, 7) == 0.0);
  CHECK(conditional_power(3, 4, 1.0, 7) == 1.0);
  CHECK(conditional_power(3, 3, 0.5, 7) == 0.0);  // shortfall exceeds remaining

  const auto st = one_arm_state(4, 10, {{10, 0}, {20, 0}}, 0);
  CHECK(conditional_power(st, 0.5, 11) ==
        doctest::Approx(oracle::binom_tail_geq(10, 7, 0.5)).epsilon(1e-12));
}

TEST_CASE("loss_threshold minimizes posterior expected loss") {
  CHECK(loss_threshold(LossSpec(1, 1)) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(loss_threshold(LossSpec(19, 1)) == doctest::Approx(0.95).epsilon(1e-14));
  const double c_star = loss_threshold(LossSpec(9, 1));
  CHECK(c_star == doctest::Approx(0.9).epsilon(1e-14));

  // Direct expected-loss comparison at evidence 0.91.
  CHECK(0.09 * 9.0 < 0.91 * 1.0);

  // Sweep: the rule's action never has higher expected loss.
  for (const LossSpec spec : {LossSpec(9, 1), LossSpec(1, 4), LossSpec(2.5, 2.5)}) {
    const double c = loss_threshold(spec);
    for (double e = 0.0; e <= 1.0; e += 0.001) {
      const double loss_success = (1.0 - e) * spec.false_positive_loss;
      const double loss_failure = e * spec.false_negative_loss;
      if (e >= c) CHECK(loss_success <= loss_failure + 1e-12);
      else CHECK(loss_failure <= loss_success + 1e-12);
    }
  }
}

TEST_CASE("evaluate_interim decision flow") {
  const Dist prior = BetaParams(1, 1);
  const SuccessRule rule(0.3, 0.95);
  const MonitoringSpec posterior_mon{};  // shares the success cutoff

  // Strong interim evidence stops for efficacy.
  const auto hot = one_arm_state(9, 10, {{10, 0}, {20, 0}}, 0);
  const Decision d1 = evaluate_interim(hot, prior, std::nullopt, rule, std::nullopt,
                                       posterior_mon);
  CHECK(d1.kind == DecisionKind::StopEfficacy);
  CHECK(d1.evidence >= 0.95);

  // PPOS below the futility cutoff stops for futility.
  const SuccessRule hard(0.5, 0.95);
  const auto cold = one_arm_state(0, 10, {{10, 0}, {20, 0}}, 0);
  const double pp = ppos(cold, prior, std::nullopt, hard);
  REQUIRE(pp < 0.10);
  const Decision d2 = evaluate_interim(cold, prior, std::nullopt, hard,
                                       FutilityRule(0.10), posterior_mon);
  CHECK(d2.kind == DecisionKind::StopFutility);
  CHECK(d2.evidence == doctest::Approx(pp).epsilon(1e-12));

  // Final look applies the success rule terminally.
  const auto final_low = one_arm_state(7, 20, {{10, 0}, {20, 0}}, 1);
  const Decision d3 = evaluate_interim(final_low, prior, std::nullopt, rule, std::nullopt,
                                       posterior_mon);
  CHECK(d3.kind == DecisionKind::FinalFailure);
  const auto final_high = one_arm_state(14, 20, {{10, 0}, {20, 0}}, 1);
  const Decision d4 = evaluate_interim(final_high, prior, std::nullopt, rule, std::nullopt,
                                       posterior_mon);
  CHECK(d4.kind == DecisionKind::FinalSuccess);

  // Continue when nothing fires.
  const auto mid = one_arm_state(5, 10, {{10, 0}, {20, 0}}, 0);
  const Decision d5 = evaluate_interim(mid, prior, std::nullopt, rule, std::nullopt,
                                       posterior_mon);
  CHECK(d5.kind == DecisionKind::Continue);
}

TEST_CASE("efficacy is evaluated before futility") {
  // Choose cutoffs so both rules fire at once; efficacy must win.
  const Dist prior = BetaParams(1, 1);
  const SuccessRule rule(0.3, 0.9);
  const auto st = one_arm_state(6, 10, {{10, 0}, {20, 0}}, 0);
  const double pp = ppos(st, prior, std::nullopt, rule);
  REQUIRE(pp > 0.05);
  REQUIRE(pp < 0.999);
  MonitoringSpec mon{MonitoringKind::PposRule, pp - 0.01};
  const Decision d = evaluate_interim(st, prior, std::nullopt, rule,
                                      FutilityRule(std::min(0.99, pp + 0.01)), mon);
  CHECK(d.kind == DecisionKind::StopEfficacy);
}

TEST_CASE("evaluate_interim rejects inconsistent states") {
  const auto bad = one_arm_state(3, 9, {{10, 0}, {20, 0}}, 0);
  CHECK_THROWS_AS(evaluate_interim(bad, Dist(BetaParams(1, 1)), std::nullopt,
                                   SuccessRule(0.3, 0.9), std::nullopt, MonitoringSpec{}),
                  std::invalid_argument);
}
