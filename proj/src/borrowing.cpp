#include "betatrial/borrowing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "betatrial/special.hpp"

namespace betatrial {

HistoricalData::HistoricalData(std::vector<BinomialSummary> studies_,
                               std::vector<std::string> labels_)
    : studies(std::move(studies_)), labels(std::move(labels_)) {
  if (studies.empty()) throw std::invalid_argument("HistoricalData: need at least one study");
  if (!labels.empty() && labels.size() != studies.size())
    throw std::invalid_argument("HistoricalData: labels must match studies");
}

PowerPriorSpec::PowerPriorSpec(double discount_, BetaParams baseline_)
    : discount(discount_), baseline(baseline_) {
  if (!(discount >= 0.0) || !(discount <= 1.0))
    throw std::invalid_argument("PowerPriorSpec: discount must be in [0,1]");
}

MapHyperGrid::MapHyperGrid(std::vector<double> mean_grid_,
                           std::vector<double> concentration_grid_,
                           std::vector<double> hyper_weights_)
    : mean_grid(std::move(mean_grid_)),
      concentration_grid(std::move(concentration_grid_)),
      hyper_weights(std::move(hyper_weights_)) {
  if (mean_grid.empty() || concentration_grid.empty())
    throw std::invalid_argument("MapHyperGrid: grids must be non-empty");
  for (double mu : mean_grid)
    if (!(mu > 0.0) || !(mu < 1.0))
      throw std::invalid_argument("MapHyperGrid: means must lie in (0,1)");
  for (double nu : concentration_grid)
    if (!(nu > 0.0)) throw std::invalid_argument("MapHyperGrid: concentrations must be > 0");
  if (hyper_weights.size() != mean_grid.size() * concentration_grid.size())
    throw std::invalid_argument("MapHyperGrid: weight count must equal grid size");
  double total = 0.0;
  for (double w : hyper_weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("MapHyperGrid: weights must be >= 0");
    total += w;
  }
  if (!(total > 0.0)) throw std::invalid_argument("MapHyperGrid: zero total weight");
  for (auto& w : hyper_weights) w /= total;
}

MapHyperGrid MapHyperGrid::standard(const EngineSettings& s) {
  std::vector<double> mu(s.map_mu_points);
  for (int i = 0; i < s.map_mu_points; ++i)
    mu[i] = s.map_mu_lo + (s.map_mu_hi - s.map_mu_lo) * i / (s.map_mu_points - 1);
  std::vector<double> nu(s.map_nu_points);
  const double log_lo = std::log(s.map_nu_lo), log_hi = std::log(s.map_nu_hi);
  for (int i = 0; i < s.map_nu_points; ++i)
    nu[i] = std::exp(log_lo + (log_hi - log_lo) * i / (s.map_nu_points - 1));
  std::vector<double> w(mu.size() * nu.size(), 1.0);
  return MapHyperGrid(std::move(mu), std::move(nu), std::move(w));
}

RobustMixSpec::RobustMixSpec(double map_weight_, BetaParams vague_)
    : map_weight(map_weight_), vague(vague_) {
  if (!(map_weight >= 0.0) || !(map_weight <= 1.0))
    throw std::invalid_argument("RobustMixSpec: map_weight must be in [0,1]");
}

CommensurateSpec::CommensurateSpec(std::vector<double> tau_grid_,
                                   std::vector<double> tau_weights_, int theta_grid_size_)
    : tau_grid(std::move(tau_grid_)),
      tau_weights(std::move(tau_weights_)),
      theta_grid_size(theta_grid_size_) {
  if (tau_grid.empty()) throw std::invalid_argument("CommensurateSpec: empty tau grid");
  if (tau_grid.size() != tau_weights.size())
    throw std::invalid_argument("CommensurateSpec: tau grid / weight length mismatch");
  for (std::size_t i = 0; i < tau_grid.size(); ++i) {
    if (!(tau_grid[i] > 0.0))
      throw std::invalid_argument("CommensurateSpec: taus must be > 0");
    if (i > 0 && !(tau_grid[i] > tau_grid[i - 1]))
      throw std::invalid_argument("CommensurateSpec: tau grid must be strictly increasing");
  }
  double total = 0.0;
  for (double w : tau_weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("CommensurateSpec: weights must be >= 0");
    total += w;
  }
  if (!(total > 0.0)) throw std::invalid_argument("CommensurateSpec: zero total weight");
  for (auto& w : tau_weights) w /= total;
  if (theta_grid_size < 3)
    throw std::invalid_argument("CommensurateSpec: theta grid too small");
}

BetaParams power_prior(const PowerPriorSpec& spec, const BinomialSummary& hist) {
  return BetaParams(spec.baseline.alpha + spec.discount * hist.successes,
                    spec.baseline.beta + spec.discount * (hist.trials - hist.successes));
}

BetaMixture map_prior(const HistoricalData& hist, const MapHyperGrid& hyper,
                      double prune_weight) {
  const std::size_t n_mu = hyper.mean_grid.size();
  const std::size_t n_nu = hyper.concentration_grid.size();

  std::vector<double> log_w(n_mu * n_nu, -std::numeric_limits<double>::infinity());
  double max_lw = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n_mu; ++i) {
    for (std::size_t j = 0; j < n_nu; ++j) {
      const std::size_t idx = i * n_nu + j;
      const double hw = hyper.hyper_weights[idx];
      if (hw <= 0.0) continue;
      const double a = hyper.mean_grid[i] * hyper.concentration_grid[j];
      const double b = (1.0 - hyper.mean_grid[i]) * hyper.concentration_grid[j];
      double lw = std::log(hw);
      for (const auto& study : hist.studies) {
        lw += log_choose(study.trials, study.successes) +
              log_beta(a + study.successes, b + study.trials - study.successes) -
              log_beta(a, b);
      }
      log_w[idx] = lw;
      max_lw = std::max(max_lw, lw);
    }
  }
  if (!std::isfinite(max_lw)) throw std::runtime_error("map_prior: degenerate hyper-grid");

  std::vector<BetaMixture::Component> comps;
  double total = 0.0;
  for (std::size_t i = 0; i < n_mu; ++i) {
    for (std::size_t j = 0; j < n_nu; ++j) {
      const double lw = log_w[i * n_nu + j];
      if (!std::isfinite(lw)) continue;
      const double w = std::exp(lw - max_lw);
      total += w;
      const double a = hyper.mean_grid[i] * hyper.concentration_grid[j];
      const double b = (1.0 - hyper.mean_grid[i]) * hyper.concentration_grid[j];
      comps.push_back({w, BetaParams(a, b)});
    }
  }
  for (auto& c : comps) c.weight /= total;
  std::erase_if(comps, [&](const auto& c) { return c.weight < prune_weight; });
  if (comps.empty()) throw std::runtime_error("map_prior: all components pruned");
  double kept = 0.0;
  for (const auto& c : comps) kept += c.weight;
  for (auto& c : comps) c.weight /= kept;
  return BetaMixture(std::move(comps));
}

BetaMixture robustify(const BetaMixture& map, const RobustMixSpec& spec) {
  std::vector<BetaMixture::Component> comps;
  if (spec.map_weight > 0.0) {
    for (const auto& c : map.components)
      comps.push_back({spec.map_weight * c.weight, c.params});
  }
  if (spec.map_weight < 1.0) comps.push_back({1.0 - spec.map_weight, spec.vague});
  return BetaMixture(std::move(comps));
}

CommensuratePrior commensurate_prior(const BetaParams& hist_posterior,
                                     const CommensurateSpec& spec,
                                     const EngineSettings& s) {
  const bool warn = hist_posterior.alpha <= 1.0 || hist_posterior.beta <= 1.0;

  // Exact logit-scale moments of a Beta distribution.
  const double logit_mean = digamma(hist_posterior.alpha) - digamma(hist_posterior.beta);
  const double logit_var = trigamma(hist_posterior.alpha) + trigamma(hist_posterior.beta);

  const int n = spec.theta_grid_size;
  std::vector<double> grid(n), masses(n);
  const double lo = logit_mean - s.commensurate_logit_span;
  const double hi = logit_mean + s.commensurate_logit_span;
  for (int i = 0; i < n; ++i) {
    const double l = lo + (hi - lo) * i / (n - 1);
    grid[i] = 1.0 / (1.0 + std::exp(-l));
    double dens = 0.0;
    for (std::size_t t = 0; t < spec.tau_grid.size(); ++t) {
      const double var = 1.0 / spec.tau_grid[t] + logit_var;
      const double z = l - logit_mean;
      dens += spec.tau_weights[t] *
              std::exp(-0.5 * z * z / var) / std::sqrt(2.0 * M_PI * var);
    }
    masses[i] = dens;
  }
  return CommensuratePrior{GridDensity(std::move(grid), std::move(masses)), warn};
}

}  // namespace betatrial
