// Single registry for every algorithm setting that can affect reported
// numbers. The run manifest serializes this struct verbatim, so adding a
// knob here is what makes it auditable.

#pragma once

namespace betatrial {

struct EngineSettings {
  // Numerics.
  double inc_beta_abs_tol = 1e-13;
  double quantile_tol = 1e-10;
  double two_arm_quadrature_tol = 1e-8;

  // Mixtures and grids.
  double mixture_prune_weight = 1e-8;
  int default_grid_points = 2001;

  // MAP hyper-grid defaults.
  int map_mu_points = 99;
  double map_mu_lo = 0.005;
  double map_mu_hi = 0.995;
  int map_nu_points = 21;
  double map_nu_lo = 1.0;
  double map_nu_hi = 1000.0;

  // Commensurate construction.
  double commensurate_logit_span = 6.0;
  int commensurate_grid_points = 2001;

  // Enumeration / DP budgets.
  long long ppos_cell_budget = 4'000'000;
  int exact_one_arm_max_n = 400;
  int exact_two_arm_max_n = 60;
  long long dp_cell_budget = 64'000'000;

  // Design-prior integration.
  int design_prior_atoms = 201;

  // Calibration.
  double cutoff_grid_step = 1e-4;

  static const EngineSettings& defaults() {
    static const EngineSettings s{};
    return s;
  }
};

}  // namespace betatrial
