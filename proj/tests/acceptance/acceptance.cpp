// Acceptance suite: every release criterion evaluated at its stated
// tolerance, one PASS/FAIL line each. Exits non-zero if any criterion
// fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "betatrial/borrowing.hpp"
#include "betatrial/calibration.hpp"
#include "betatrial/dose.hpp"
#include "betatrial/engine.hpp"
#include "betatrial/report.hpp"
#include "oracles.hpp"

using namespace betatrial;

namespace {

int failures = 0;

void criterion(const std::string& name, bool pass, const std::string& detail = "") {
  std::printf("%s — %s%s%s\n", pass ? "PASS" : "FAIL", name.c_str(),
              detail.empty() ? "" : ": ", detail.c_str());
  if (!pass) ++failures;
}

template <typename F>
void guarded(const std::string& name, F&& body) {
  try {
    body();
  } catch (const std::exception& e) {
    criterion(name, false, std::string("exception: ") + e.what());
  }
}

// --- 1. conjugate suite --------------------------------------------------

void conjugate_suite() {
  const auto start = std::chrono::steady_clock::now();
  bool ok = true;

  const BetaParams post = update_beta(BetaParams(1, 1), BinomialSummary(3, 10));
  ok &= post.alpha == 4.0 && post.beta == 8.0;

  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> par(0.1, 25.0);
  for (int rep = 0; rep < 500 && ok; ++rep) {
    const BetaParams prior(par(rng), par(rng));
    const int n1 = std::uniform_int_distribution<int>(0, 30)(rng);
    const int n2 = std::uniform_int_distribution<int>(0, 30)(rng);
    const int y1 = std::uniform_int_distribution<int>(0, n1)(rng);
    const int y2 = std::uniform_int_distribution<int>(0, n2)(rng);
    const BetaParams seq =
        update_beta(update_beta(prior, BinomialSummary(y1, n1)), BinomialSummary(y2, n2));
    const BetaParams batch = update_beta(prior, BinomialSummary(y1 + y2, n1 + n2));
    ok &= std::fabs(seq.alpha - batch.alpha) <= 1e-12 * batch.alpha;
    ok &= std::fabs(seq.beta - batch.beta) <= 1e-12 * batch.beta;
    ok &= std::fabs(prior_ess(seq) - (prior_ess(prior) + n1 + n2)) <= 1e-9;
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  criterion("conjugate suite: composition, ESS additivity, Beta(1,1)+(3,10) -> Beta(4,8)",
            ok && secs < 1.0, "ran in " + std::to_string(secs) + " s");
}

// --- 2. tail oracle ------------------------------------------------------

void tail_oracle() {
  const double via_identity = oracle::binom_cdf(11, 3, 0.5);  // 232/2048
  const double impl = prob_exceeds(BetaParams(4, 8), 0.5);
  const double via_quadrature = oracle::beta_tail_quadrature(4, 8, 0.5);
  const bool ok = std::fabs(via_identity - 0.11328125) < 1e-15 &&
                  std::fabs(impl - 0.11328125) < 1e-10 &&
                  std::fabs(via_quadrature - 0.11328125) < 1e-8;
  criterion("tail oracle: Pr(Beta(4,8) > 0.5) = 0.11328125 (identity 1e-10, quadrature 1e-8)",
            ok);
}

// --- 3. optional-stopping coherence --------------------------------------

void optional_stopping() {
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> par(0.3, 12.0);
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  bool ok = true;

  for (int rep = 0; rep < 200 && ok; ++rep) {
    // Random prior (Beta or two-component mixture), schedule and rule.
    Dist prior = BetaParams(par(rng), par(rng));
    if (rep % 2 == 1) {
      const double w = std::uniform_real_distribution<double>(0.1, 0.9)(rng);
      prior = BetaMixture(
          {{w, BetaParams(par(rng), par(rng))}, {1.0 - w, BetaParams(par(rng), par(rng))}});
    }
    const int looks = std::uniform_int_distribution<int>(2, 4)(rng);
    std::vector<int> schedule;
    int n = 0;
    for (int k = 0; k < looks; ++k) {
      n += std::uniform_int_distribution<int>(3, 12)(rng);
      schedule.push_back(n);
    }
    const SuccessRule rule(unit(rng), unit(rng));

    // Random full-path data, then replay interim by interim.
    const double p_true = unit(rng);
    std::vector<int> y_at(looks);
    int y = 0, prev_n = 0;
    for (int k = 0; k < looks; ++k) {
      std::binomial_distribution<int> draw(schedule[k] - prev_n, p_true);
      y += draw(rng);
      prev_n = schedule[k];
      y_at[k] = y;
    }

    Dist sequential = prior;
    prev_n = 0;
    int prev_y = 0;
    for (int k = 0; k < looks; ++k) {
      sequential =
          update(sequential, BinomialSummary(y_at[k] - prev_y, schedule[k] - prev_n));
      prev_y = y_at[k];
      prev_n = schedule[k];
    }
    const Dist batch = update(prior, BinomialSummary(y_at.back(), schedule.back()));

    const RuleOutcome a = posterior_success(sequential, rule);
    const RuleOutcome b = posterior_success(batch, rule);
    ok &= a.success == b.success;
    ok &= std::fabs(a.evidence - b.evidence) <= 1e-12;
    for (double t : {0.2, 0.5, 0.8})
      ok &= std::fabs(prob_exceeds(sequential, t) - prob_exceeds(batch, t)) <= 1e-12;
  }
  criterion("optional-stopping coherence: 200 random designs, path vs batch within 1e-12",
            ok);
}

// --- 4. PPOS tower property ----------------------------------------------

void ppos_tower() {
  bool ok = true;
  const std::vector<std::vector<int>> schedules = {{10, 20, 30}, {6, 18, 30}, {8, 16, 24, 30}};
  const Dist prior = BetaParams(1, 1);
  const SuccessRule rule(0.3, 0.9);

  for (const auto& schedule : schedules) {
    std::vector<LookSizes> planned;
    for (int n : schedule) planned.push_back({n, 0});
    const int looks = static_cast<int>(schedule.size());
    for (int k = 0; k + 1 < looks && ok; ++k) {
      const int inc = schedule[k + 1] - schedule[k];
      for (int y = 0; y <= schedule[k] && ok; ++y) {
        const InterimState now{BinomialSummary(y, schedule[k]), std::nullopt, k, planned};
        const double pp_now = ppos(now, prior, std::nullopt, rule);
        const Dist posterior = update(prior, BinomialSummary(y, schedule[k]));
        double expectation = 0.0;
        for (int j = 0; j <= inc; ++j) {
          const InterimState next{BinomialSummary(y + j, schedule[k + 1]), std::nullopt,
                                  k + 1, planned};
          expectation += predictive_pmf(posterior, inc, j) *
                         ppos(next, prior, std::nullopt, rule);
        }
        ok &= std::fabs(pp_now - expectation) <= 1e-10;
      }
    }
  }
  criterion("PPOS tower property: exhaustive states on n <= 30 schedules within 1e-10", ok);
}

// --- 5. exact vs Monte Carlo ----------------------------------------------

void exact_vs_mc() {
  const auto start = std::chrono::steady_clock::now();
  TrialDesign d;
  d.arms = 1;
  d.allocation = {{15, 0}, {30, 0}};
  d.success = SuccessRule(0.3, 0.9);
  d.futility = FutilityRule(0.1);

  bool ok = true;
  const long long R = 100000;
  for (int i = 0; i < 6; ++i) {
    const double p = 0.1 + 0.1 * i;
    const Scenario sc{p, 0.0, {}, "p" + std::to_string(p)};
    const OCReport exact = exact_oc(d, sc);
    const OCReport mc = monte_carlo_oc(d, sc, R, 31 + i, 4, static_cast<std::uint64_t>(i));

    const auto within = [&](double estimate, double truth) {
      const double se = std::sqrt(truth * (1.0 - truth) / R);
      return std::fabs(estimate - truth) <= 3.5 * std::max(se, 1e-12);
    };
    ok &= within(mc.reject_prob, exact.reject_prob);
    for (int k = 0; k < 2; ++k) {
      ok &= within(mc.stop_efficacy[k], exact.stop_efficacy[k]);
      ok &= within(mc.stop_futility[k], exact.stop_futility[k]);
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  criterion("exact vs Monte Carlo: 6 scenarios x 1e5 replicates within 3.5 SE",
            ok && secs < 120.0, "ran in " + std::to_string(secs) + " s");
}

// --- 6. calibration certificate -------------------------------------------

void calibration_certificate() {
  TrialDesign d;
  d.arms = 1;
  d.allocation = {{20, 0}};
  d.success = SuccessRule(0.3, 0.5);
  CalibrationProblem problem{d, Scenario{0.3, 0.0, {}, "null"}, 0.025, 1e-4};
  const CalibrationResult res = calibrate_cutoff(problem);

  int critical = -1;
  for (int y = 0; y <= 20; ++y) {
    if (oracle::binom_tail_geq(20, y, 0.3) <= 0.025) {
      critical = y;
      break;
    }
  }
  bool region_ok = true;
  for (int y = 0; y <= 20; ++y) {
    const double evidence = oracle::binom_cdf(21, y, 0.3);  // Pr(Beta(1+y,21-y) > 0.3)
    region_ok &= (evidence >= res.cutoff) == (y >= critical);
  }
  const bool ok = res.type_i_error <= 0.025 && res.type_i_below_cutoff > 0.025 &&
                  region_ok &&
                  std::fabs(res.type_i_error - oracle::binom_tail_geq(20, critical, 0.3)) <
                      1e-12;
  criterion("calibration certificate: TypeI(c*) <= 0.025 < TypeI(c* - 1e-4), region matches",
            ok);
}

// --- 7. assurance identities ----------------------------------------------

void assurance_identities() {
  TrialDesign d;
  d.arms = 1;
  d.allocation = {{15, 0}, {30, 0}};
  d.success = SuccessRule(0.3, 0.9);
  d.futility = FutilityRule(0.1);

  const Scenario alt{0.5, 0.0, {}, "alt"};
  const double power = exact_oc(d, alt).reject_prob;
  DesignPrior point;
  point.atoms = {{1.0, alt}};
  const bool point_ok = *bayesian_oc(d, point, OcMode::Exact).assurance == power;

  const DesignPrior coarse = DesignPrior::from_beta(BetaParams(8, 12), 0.3, 201);
  const DesignPrior fine = DesignPrior::from_beta(BetaParams(8, 12), 0.3, 2010);
  const double a_coarse = *bayesian_oc(d, coarse, OcMode::Exact).assurance;
  const double a_fine = *bayesian_oc(d, fine, OcMode::Exact).assurance;
  const bool grid_ok = std::fabs(a_coarse - a_fine) < 1e-3;

  criterion("assurance identities: point mass reproduces power; fine-grid agreement 1e-3",
            point_ok && grid_ok,
            "201-atom " + std::to_string(a_coarse) + " vs 2010-atom " + std::to_string(a_fine));
}

// --- 8. BOIN boundaries ----------------------------------------------------

void boin_boundaries_criterion() {
  const dose::BoinBoundaries b = dose::boin_boundaries(0.30);
  bool ok = std::fabs(b.lambda_e - 0.236) <= 1e-3 && std::fabs(b.lambda_d - 0.358) <= 1e-3;
  for (double target : {0.1, 0.2, 0.3, 0.4, 0.5}) {
    const dose::BoinBoundaries bb = dose::boin_boundaries(target);
    ok &= bb.lambda_e < target && target < bb.lambda_d;
  }
  criterion("BOIN boundaries: (0.236, 0.358) within 1e-3 at phi=0.30; lambda_e < phi < lambda_d",
            ok,
            "got (" + std::to_string(b.lambda_e) + ", " + std::to_string(b.lambda_d) + ")");
}

// --- 9. mTPI trio -----------------------------------------------------------

void mtpi_trio() {
  const dose::MtpiSpec spec(0.3, 0.05, 0.05, BetaParams(1, 1), dose::MtpiVariant::Mtpi);
  const auto cdf14 = [](double x) { return 1.0 - std::pow(1.0 - x, 4); };
  const auto cdf23 = [](double x) {
    return 1.0 - std::pow(1.0 - x, 4) - 4.0 * x * std::pow(1.0 - x, 3);
  };
  const auto cdf32 = [](double x) {
    return 4.0 * std::pow(x, 3) * (1.0 - x) + std::pow(x, 4);
  };

  bool ok = true;
  const auto check = [&](int dlts, dose::EscalationKind expected, double u, double t,
                         double o) {
    dose::DoseToxState st(3);
    st.current_dose = 1;
    st.treated[1] = 3;
    st.dlts[1] = dlts;
    const dose::MtpiDecision d = dose::mtpi_decide(st, spec);
    ok &= d.kind == expected;
    ok &= std::fabs(d.upm_under - u) <= 1e-6;
    ok &= std::fabs(d.upm_target - t) <= 1e-6;
    ok &= std::fabs(d.upm_over - o) <= 1e-6;
  };
  check(0, dose::EscalationKind::Escalate, cdf14(0.25) / 0.25,
        (cdf14(0.35) - cdf14(0.25)) / 0.1, (1.0 - cdf14(0.35)) / 0.65);
  check(1, dose::EscalationKind::Stay, cdf23(0.25) / 0.25, (cdf23(0.35) - cdf23(0.25)) / 0.1,
        (1.0 - cdf23(0.35)) / 0.65);
  check(2, dose::EscalationKind::DeEscalate, cdf32(0.25) / 0.25,
        (cdf32(0.35) - cdf32(0.25)) / 0.1, (1.0 - cdf32(0.35)) / 0.65);
  criterion("mTPI trio: 0/3 escalate, 1/3 stay, 2/3 de-escalate with UPMs within 1e-6", ok);
}

// --- 10. CRM monotonicity ----------------------------------------------------

void crm_monotonicity() {
  const dose::CrmSpec spec({0.05, 0.12, 0.25, 0.40}, 0.25);
  std::mt19937_64 rng(303);
  bool ok = true;
  for (int rep = 0; rep < 500 && ok; ++rep) {
    dose::DoseToxState st(4);
    for (int j = 0; j < 4; ++j) {
      st.treated[j] = std::uniform_int_distribution<int>(0, 6)(rng);
      st.dlts[j] = st.treated[j] == 0
                       ? 0
                       : std::uniform_int_distribution<int>(0, st.treated[j])(rng);
    }
    st.current_dose = std::uniform_int_distribution<int>(0, 3)(rng);
    const auto before = dose::crm_recommend(st, spec).post_means;

    dose::DoseToxState worse = st;
    const int hit = std::uniform_int_distribution<int>(0, 3)(rng);
    worse.treated[hit] += 1;
    worse.dlts[hit] += 1;
    const auto after = dose::crm_recommend(worse, spec).post_means;
    for (int j = 0; j < 4; ++j) ok &= after[j] >= before[j] - 1e-10;
  }
  criterion("CRM monotonicity: 500 random states, appending a DLT never lowers any mean",
            ok);
}

// --- 11. robust-MAP conflict --------------------------------------------------

void robust_map_conflict() {
  const BetaMixture map = map_prior(
      HistoricalData({BinomialSummary(4, 20), BinomialSummary(4, 20)}),
      MapHyperGrid::standard());
  const BetaMixture robust = robustify(map, RobustMixSpec(0.8, BetaParams(1, 1)));
  const BetaMixture post = update_beta_mixture(robust, BinomialSummary(18, 20));
  double vague_weight = 0.0;
  for (const auto& c : post.components)
    if (c.params.alpha == 19.0 && c.params.beta == 3.0) vague_weight += c.weight;
  criterion("robust-MAP conflict: vague posterior weight strictly exceeds its 0.2 prior",
            vague_weight > 0.2, "weight " + std::to_string(vague_weight));
}

// --- 12. credible-interval coverage -------------------------------------------

void interval_coverage() {
  const BetaParams prior(2, 3);
  const int n = 30;
  const int replicates = 10000;
  oracle::BetaSampler sampler(404);
  int covered = 0;
  for (int r = 0; r < replicates; ++r) {
    const double theta = sampler.draw(prior.alpha, prior.beta);
    const int y = sampler.binomial(n, theta);
    const Interval ci =
        credible_interval(Dist(update_beta(prior, BinomialSummary(y, n))), 0.95);
    if (ci.low <= theta && theta <= ci.high) ++covered;
  }
  const double coverage = covered / static_cast<double>(replicates);
  criterion("credible-interval coverage: prior-predictive 95% CrI in [0.9436, 0.9564]",
            coverage >= 0.9436 && coverage <= 0.9564, "coverage " + std::to_string(coverage));
}

// --- 13. reproducibility --------------------------------------------------------

const char* kIspyStyleConfig = R"({
  "schema_version": 1,
  "design": {
    "arms": 1,
    "looks": [12, 24, 36],
    "analysis_prior": {"treatment": {"type": "beta", "alpha": 1, "beta": 1}},
    "success": {"effect_threshold": 0.3, "posterior_cutoff": 0.9},
    "monitoring": {"kind": "ppos", "efficacy_cutoff": 0.85},
    "futility": {"ppos_cutoff": 0.1}
  },
  "scenarios": [
    {"label": "null", "treatment_rate": 0.3},
    {"label": "graduating", "treatment_rate": 0.55}
  ],
  "execution": {"replicates": 20000, "master_seed": 7, "workers": 1}
})";

void reproducibility() {
  const ParseResult parsed = parse_config(std::string(kIspyStyleConfig));
  if (!parsed.ok()) {
    criterion("reproducibility: byte-identical reports across 1/2/8 workers", false,
              "config failed to parse");
    return;
  }

  std::vector<std::string> outputs;
  for (int workers : {1, 2, 8}) {
    RunOverrides overrides;
    overrides.workers = workers;
    const RunReport report = run(*parsed.config, Subcommand::Simulate, overrides);
    outputs.push_back(report.to_json());
  }
  // Worker count is echoed in the manifest; results must match with those
  // lines masked out.
  const auto strip_workers = [](std::string text) {
    const std::string key = "\"workers\":";
    for (auto pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos)) {
      const auto end = text.find('\n', pos);
      text.erase(pos, end - pos);
    }
    return text;
  };
  const bool bytes_ok = strip_workers(outputs[0]) == strip_workers(outputs[1]) &&
                        strip_workers(outputs[0]) == strip_workers(outputs[2]);

  // Thresholds echo verbatim through parse -> run -> emit.
  const auto dir = std::filesystem::temp_directory_path() / "betatrial_acceptance";
  std::filesystem::remove_all(dir);
  const RunReport report = run(*parsed.config, Subcommand::Simulate);
  const auto files = emit(report, EmitFormat::Json, dir);
  std::ifstream in(files.front(), std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  const bool echo_ok = text.find("\"efficacy_cutoff\": 0.85") != std::string::npos &&
                       text.find("\"ppos_cutoff\": 0.1") != std::string::npos;
  std::filesystem::remove_all(dir);

  criterion(
      "reproducibility: byte-identical reports across 1/2/8 workers; 0.85/0.10 echoed",
      bytes_ok && echo_ok);
}

}  // namespace

int main() {
  guarded("conjugate suite", conjugate_suite);
  guarded("tail oracle", tail_oracle);
  guarded("optional-stopping coherence", optional_stopping);
  guarded("PPOS tower property", ppos_tower);
  guarded("exact vs Monte Carlo", exact_vs_mc);
  guarded("calibration certificate", calibration_certificate);
  guarded("assurance identities", assurance_identities);
  guarded("BOIN boundaries", boin_boundaries_criterion);
  guarded("mTPI trio", mtpi_trio);
  guarded("CRM monotonicity", crm_monotonicity);
  guarded("robust-MAP conflict", robust_map_conflict);
  guarded("credible-interval coverage", interval_coverage);
  guarded("reproducibility", reproducibility);

  if (failures) std::printf("%d criterion(s) failed\n", failures);
  else std::printf("all criteria passed\n");
  return failures == 0 ? 0 : 1;
}
