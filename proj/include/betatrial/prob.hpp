// Probability kernel for binary-endpoint inference: Beta and mixture
// conjugate updating, generic grid updating, tail probabilities, quantiles,
// credible intervals and prior effective sample size.
//
// All types are immutable value types; all operations are pure functions.

#pragma once

#include <functional>
#include <string>
#include <variant>
#include <vector>

namespace betatrial {

// Pseudo-counts of responders / non-responders; both must be positive and
// finite. Defaults to the uniform Beta(1, 1).
struct BetaParams {
  double alpha = 1.0;
  double beta = 1.0;

  BetaParams() = default;
  BetaParams(double alpha_, double beta_);

  double mean() const { return alpha / (alpha + beta); }
};

// y successes out of n trials, 0 <= y <= n.
struct BinomialSummary {
  int successes;
  int trials;

  BinomialSummary(int successes_, int trials_);
};

// Weighted mixture of Beta components. Weights are normalized to sum to
// exactly one at construction; every weight must be strictly positive.
struct BetaMixture {
  struct Component {
    double weight;
    BetaParams params;
  };

  std::vector<Component> components;

  explicit BetaMixture(std::vector<Component> components_);
  static BetaMixture single(const BetaParams& p) { return BetaMixture({{1.0, p}}); }

  double mean() const;
};

// Discrete density on a strictly increasing point grid. Masses are
// normalized at construction; the grid domain is arbitrary (response rates
// on (0,1), model parameters on the real line, ...).
struct GridDensity {
  std::vector<double> grid;
  std::vector<double> masses;

  GridDensity(std::vector<double> grid_, std::vector<double> masses_);

  static GridDensity uniform(double lo, double hi, int points);

  double mean() const;
};

struct Interval {
  double low;
  double high;
  double level;
};

// The three posterior/prior representations accepted by the decision and
// engine layers.
using Dist = std::variant<BetaParams, BetaMixture, GridDensity>;

// --- conjugate / mixture / grid updating -------------------------------

// Beta(a, b) + (y, n)  ->  Beta(a + y, b + n - y).
BetaParams update_beta(const BetaParams& prior, const BinomialSummary& data);

// Component-wise conjugate update; weights are re-weighted by each
// component's Beta-Binomial marginal likelihood and renormalized.
// Components whose posterior weight falls below `prune_weight` are dropped.
BetaMixture update_beta_mixture(const BetaMixture& prior, const BinomialSummary& data,
                                double prune_weight = 1e-8);

// Pointwise Bayes update: masses_i ∝ prior_i * exp(log_lik_i - max log_lik).
GridDensity update_grid(const GridDensity& prior,
                        const std::function<double(double)>& log_likelihood);
GridDensity update_grid(const GridDensity& prior, const std::vector<double>& log_lik);

// Binomial-likelihood grid update (grid points are response rates).
GridDensity update_grid_binomial(const GridDensity& prior, const BinomialSummary& data);

// Update any distribution representation with binomial data.
Dist update(const Dist& prior, const BinomialSummary& data);

// --- summaries ----------------------------------------------------------

// Pr(theta > threshold). Monotone non-increasing in the threshold.
double prob_exceeds(const BetaParams& d, double threshold);
double prob_exceeds(const BetaMixture& d, double threshold);
double prob_exceeds(const GridDensity& d, double threshold);
double prob_exceeds(const Dist& d, double threshold);

// Pr(theta <= x).
double cdf(const BetaParams& d, double x);
double cdf(const BetaMixture& d, double x);
double cdf(const GridDensity& d, double x);
double cdf(const Dist& d, double x);

// Inverse cdf by bracketing bisection (absolute tolerance ~1e-10 on the
// parameter axis). Grid densities return the smallest grid point whose
// cumulative mass reaches q.
double quantile(const Dist& d, double q);

// Equal-tailed credible interval at the given level.
Interval credible_interval(const Dist& d, double level);

// Prior effective sample size alpha + beta.
double prior_ess(const BetaParams& prior);

double mean(const Dist& d);

// --- predictive ---------------------------------------------------------

// Pr(Y = y | n) with Y ~ BetaBinomial(n, alpha, beta); computed in log
// space. Sums to one over y = 0..n.
double beta_binomial_marginal(const BetaParams& prior, int n, int y);

// Prior/posterior predictive pmf of y successes in n future trials for any
// distribution representation.
double predictive_pmf(const Dist& d, int n, int y);

}  // namespace betatrial
