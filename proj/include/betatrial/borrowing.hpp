// Informative priors built from historical data: fixed-discount power
// priors, meta-analytic-predictive (MAP) priors via hierarchical grid
// integration, robust MAP mixtures, and commensurate priors on a logit
// grid.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "betatrial/prob.hpp"
#include "betatrial/settings.hpp"

namespace betatrial {

struct HistoricalData {
  std::vector<BinomialSummary> studies;
  std::vector<std::string> labels;  // optional; empty or one per study

  explicit HistoricalData(std::vector<BinomialSummary> studies_,
                          std::vector<std::string> labels_ = {});
};

// Fixed discount in [0, 1] applied to the historical likelihood.
struct PowerPriorSpec {
  double discount;
  BetaParams baseline;

  PowerPriorSpec(double discount_, BetaParams baseline_);
};

// Hyper-grid over the population mean mu and concentration nu of the
// study-level Beta(mu*nu, (1-mu)*nu) distribution.
struct MapHyperGrid {
  std::vector<double> mean_grid;           // mu in (0,1)
  std::vector<double> concentration_grid;  // nu > 0
  std::vector<double> hyper_weights;       // one per (mu, nu) pair, mu-major

  MapHyperGrid(std::vector<double> mean_grid_, std::vector<double> concentration_grid_,
               std::vector<double> hyper_weights_);

  // 99 equally spaced means in (0.005, 0.995) x 21 log-spaced
  // concentrations in [1, 1000], flat hyperprior.
  static MapHyperGrid standard(const EngineSettings& s = EngineSettings::defaults());
};

struct RobustMixSpec {
  double map_weight;  // w in [0, 1]
  BetaParams vague;

  RobustMixSpec(double map_weight_, BetaParams vague_);
};

struct CommensurateSpec {
  std::vector<double> tau_grid;     // commensurability precisions, increasing
  std::vector<double> tau_weights;  // prior mass per tau
  int theta_grid_size;

  CommensurateSpec(std::vector<double> tau_grid_, std::vector<double> tau_weights_,
                   int theta_grid_size_ = 2001);
};

// Beta(base_a + a0*y_h, base_b + a0*(n_h - y_h)).
BetaParams power_prior(const PowerPriorSpec& spec, const BinomialSummary& hist);

// Predictive distribution of a new study's response rate from the
// hierarchical model, as a mixture over hyper-grid nodes re-weighted by
// the historical marginal likelihood.
BetaMixture map_prior(const HistoricalData& hist, const MapHyperGrid& hyper,
                      double prune_weight = 1e-8);

// Mix the MAP prior with a vague component: {(w*w_k, params_k)} + (1-w, vague).
BetaMixture robustify(const BetaMixture& map, const RobustMixSpec& spec);

struct CommensuratePrior {
  GridDensity density;
  bool moment_match_warning;  // set when hist alpha <= 1 or beta <= 1
};

// Plug-in commensurate prior: the historical posterior is moment-matched
// by a normal on the logit scale and convolved with the commensurability
// kernel; the result is discretized on a probability-scale grid.
CommensuratePrior commensurate_prior(const BetaParams& hist_posterior,
                                     const CommensurateSpec& spec,
                                     const EngineSettings& s = EngineSettings::defaults());

}  // namespace betatrial
