#include "betatrial/prob.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "betatrial/special.hpp"

namespace betatrial {

BetaParams::BetaParams(double alpha_, double beta_) : alpha(alpha_), beta(beta_) {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw std::invalid_argument("BetaParams: alpha must be positive and finite");
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw std::invalid_argument("BetaParams: beta must be positive and finite");
}

BinomialSummary::BinomialSummary(int successes_, int trials_)
    : successes(successes_), trials(trials_) {
  if (trials < 0) throw std::invalid_argument("BinomialSummary: trials must be >= 0");
  if (successes < 0 || successes > trials)
    throw std::invalid_argument("BinomialSummary: successes must be in [0, trials]");
}

BetaMixture::BetaMixture(std::vector<Component> components_)
    : components(std::move(components_)) {
  if (components.empty()) throw std::invalid_argument("BetaMixture: no components");
  double total = 0.0;
  for (const auto& c : components) {
    if (!(c.weight > 0.0)) throw std::invalid_argument("BetaMixture: weights must be > 0");
    total += c.weight;
  }
  if (std::fabs(total - 1.0) > 1e-6)
    throw std::invalid_argument("BetaMixture: weights must sum to 1");
  for (auto& c : components) c.weight /= total;
}

double BetaMixture::mean() const {
  double m = 0.0;
  for (const auto& c : components) m += c.weight * c.params.mean();
  return m;
}

GridDensity::GridDensity(std::vector<double> grid_, std::vector<double> masses_)
    : grid(std::move(grid_)), masses(std::move(masses_)) {
  if (grid.empty()) throw std::invalid_argument("GridDensity: empty grid");
  if (grid.size() != masses.size())
    throw std::invalid_argument("GridDensity: grid and masses differ in length");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw std::invalid_argument("GridDensity: grid must be strictly increasing");
  double total = 0.0;
  for (double m : masses) {
    if (!(m >= 0.0) || !std::isfinite(m))
      throw std::invalid_argument("GridDensity: masses must be non-negative and finite");
    total += m;
  }
  if (!(total > 0.0)) throw std::invalid_argument("GridDensity: total mass is zero");
  for (auto& m : masses) m /= total;
}

GridDensity GridDensity::uniform(double lo, double hi, int points) {
  if (points < 2) throw std::invalid_argument("GridDensity::uniform: need >= 2 points");
  if (!(hi > lo)) throw std::invalid_argument("GridDensity::uniform: hi must exceed lo");
  std::vector<double> g(points), m(points, 1.0);
  // Ratio first so symmetric midpoints (e.g. 0.5) land exactly.
  for (int i = 0; i < points; ++i)
    g[i] = lo + (hi - lo) * ((i + 1) / static_cast<double>(points + 1));
  return GridDensity(std::move(g), std::move(m));
}

double GridDensity::mean() const {
  double s = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) s += masses[i] * grid[i];
  return s;
}

// --- updating -----------------------------------------------------------

BetaParams update_beta(const BetaParams& prior, const BinomialSummary& data) {
  return BetaParams(prior.alpha + data.successes,
                    prior.beta + (data.trials - data.successes));
}

BetaMixture update_beta_mixture(const BetaMixture& prior, const BinomialSummary& data,
                                double prune_weight) {
  // Log-space weight update: w_k' ∝ w_k * m_k(y | n).
  std::vector<double> log_w(prior.components.size());
  double max_lw = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < prior.components.size(); ++k) {
    const auto& c = prior.components[k];
    const double lm = log_choose(data.trials, data.successes) +
                      log_beta(c.params.alpha + data.successes,
                               c.params.beta + data.trials - data.successes) -
                      log_beta(c.params.alpha, c.params.beta);
    log_w[k] = std::log(c.weight) + lm;
    max_lw = std::max(max_lw, log_w[k]);
  }
  if (!std::isfinite(max_lw)) throw std::runtime_error("degenerate mixture update");

  std::vector<BetaMixture::Component> out;
  double total = 0.0;
  for (std::size_t k = 0; k < prior.components.size(); ++k) {
    const double w = std::exp(log_w[k] - max_lw);
    total += w;
    out.push_back({w, update_beta(prior.components[k].params, data)});
  }
  for (auto& c : out) c.weight /= total;
  // Prune negligible components, then renormalize.
  std::erase_if(out, [&](const auto& c) { return c.weight < prune_weight; });
  if (out.empty()) throw std::runtime_error("degenerate mixture update");
  double kept = 0.0;
  for (const auto& c : out) kept += c.weight;
  for (auto& c : out) c.weight /= kept;
  return BetaMixture(std::move(out));
}

GridDensity update_grid(const GridDensity& prior, const std::vector<double>& log_lik) {
  if (log_lik.size() != prior.grid.size())
    throw std::invalid_argument("update_grid: log-likelihood length mismatch");
  double max_ll = -std::numeric_limits<double>::infinity();
  for (double ll : log_lik) {
    if (std::isnan(ll)) throw std::invalid_argument("update_grid: NaN log-likelihood");
    max_ll = std::max(max_ll, ll);
  }
  if (!std::isfinite(max_ll)) throw std::runtime_error("likelihood annihilates prior");
  std::vector<double> m(prior.masses.size());
  double total = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    m[i] = prior.masses[i] * std::exp(log_lik[i] - max_ll);
    total += m[i];
  }
  if (!(total > 0.0)) throw std::runtime_error("likelihood annihilates prior");
  return GridDensity(prior.grid, std::move(m));
}

GridDensity update_grid(const GridDensity& prior,
                        const std::function<double(double)>& log_likelihood) {
  std::vector<double> ll(prior.grid.size());
  for (std::size_t i = 0; i < prior.grid.size(); ++i) ll[i] = log_likelihood(prior.grid[i]);
  return update_grid(prior, ll);
}

GridDensity update_grid_binomial(const GridDensity& prior, const BinomialSummary& data) {
  const int y = data.successes, n = data.trials;
  return update_grid(prior, [&](double theta) {
    if (theta <= 0.0) return y == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    if (theta >= 1.0) return y == n ? 0.0 : -std::numeric_limits<double>::infinity();
    return y * std::log(theta) + (n - y) * log1m(theta);
  });
}

Dist update(const Dist& prior, const BinomialSummary& data) {
  return std::visit(
      [&](const auto& p) -> Dist {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, BetaParams>) return update_beta(p, data);
        else if constexpr (std::is_same_v<T, BetaMixture>) return update_beta_mixture(p, data);
        else return update_grid_binomial(p, data);
      },
      prior);
}

// --- summaries ----------------------------------------------------------

double cdf(const BetaParams& d, double x) { return inc_beta(d.alpha, d.beta, x); }

double cdf(const BetaMixture& d, double x) {
  double s = 0.0;
  for (const auto& c : d.components) s += c.weight * cdf(c.params, x);
  return s;
}

double cdf(const GridDensity& d, double x) {
  // Point masses stand for cells of a discretized continuous density, so a
  // boundary that hits a grid point exactly splits that cell.
  double s = 0.0;
  for (std::size_t i = 0; i < d.grid.size() && d.grid[i] <= x; ++i)
    s += d.grid[i] == x ? 0.5 * d.masses[i] : d.masses[i];
  return std::min(s, 1.0);
}

double cdf(const Dist& d, double x) {
  return std::visit([&](const auto& v) { return cdf(v, x); }, d);
}

double prob_exceeds(const BetaParams& d, double threshold) {
  if (threshold <= 0.0) return 1.0;
  if (threshold >= 1.0) return 0.0;
  return 1.0 - cdf(d, threshold);
}

double prob_exceeds(const BetaMixture& d, double threshold) {
  double s = 0.0;
  for (const auto& c : d.components) s += c.weight * prob_exceeds(c.params, threshold);
  return s;
}

double prob_exceeds(const GridDensity& d, double threshold) {
  double s = 0.0;
  for (std::size_t i = d.grid.size(); i-- > 0 && d.grid[i] >= threshold;)
    s += d.grid[i] == threshold ? 0.5 * d.masses[i] : d.masses[i];
  return std::min(s, 1.0);
}

double prob_exceeds(const Dist& d, double threshold) {
  return std::visit([&](const auto& v) { return prob_exceeds(v, threshold); }, d);
}

namespace {

constexpr double kQuantileTol = 1e-10;

double continuous_quantile(const Dist& d, double q, double lo, double hi) {
  // Bracketing bisection on the cdf; robust for extreme shapes.
  while (hi - lo > kQuantileTol) {
    const double mid = 0.5 * (lo + hi);
    if (cdf(d, mid) < q) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double quantile(const Dist& d, double q) {
  if (!(q > 0.0) || !(q < 1.0)) throw std::invalid_argument("quantile: q must be in (0,1)");
  if (const auto* g = std::get_if<GridDensity>(&d)) {
    double cum = 0.0;
    for (std::size_t i = 0; i < g->grid.size(); ++i) {
      cum += g->masses[i];
      if (cum >= q - 1e-15) return g->grid[i];
    }
    return g->grid.back();
  }
  return continuous_quantile(d, q, 0.0, 1.0);
}

Interval credible_interval(const Dist& d, double level) {
  if (!(level > 0.0) || !(level < 1.0))
    throw std::invalid_argument("credible_interval: level must be in (0,1)");
  const double tail = 0.5 * (1.0 - level);
  return Interval{quantile(d, tail), quantile(d, 1.0 - tail), level};
}

double prior_ess(const BetaParams& prior) { return prior.alpha + prior.beta; }

double mean(const Dist& d) {
  return std::visit([](const auto& v) { return v.mean(); }, d);
}

// --- predictive ---------------------------------------------------------

double beta_binomial_marginal(const BetaParams& prior, int n, int y) {
  if (y < 0 || y > n) throw std::invalid_argument("beta_binomial_marginal: y outside [0, n]");
  return std::exp(log_choose(n, y) +
                  log_beta(prior.alpha + y, prior.beta + n - y) -
                  log_beta(prior.alpha, prior.beta));
}

double predictive_pmf(const Dist& d, int n, int y) {
  if (y < 0 || y > n) throw std::invalid_argument("predictive_pmf: y outside [0, n]");
  return std::visit(
      [&](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, BetaParams>) {
          return beta_binomial_marginal(v, n, y);
        } else if constexpr (std::is_same_v<T, BetaMixture>) {
          double s = 0.0;
          for (const auto& c : v.components)
            s += c.weight * beta_binomial_marginal(c.params, n, y);
          return s;
        } else {
          double s = 0.0;
          for (std::size_t i = 0; i < v.grid.size(); ++i) {
            const double theta = v.grid[i];
            if (theta <= 0.0 || theta >= 1.0)
              throw std::invalid_argument("predictive_pmf: grid points must lie in (0,1)");
            s += v.masses[i] * binomial_pmf(n, y, theta);
          }
          return s;
        }
      },
      d);
}

}  // namespace betatrial
