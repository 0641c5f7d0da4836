#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "snls/field.hpp"
#include "snls/integrator.hpp"
#include "snls/noise.hpp"
#include "snls/stats.hpp"

namespace snls {

/// Campaign layout: M trajectories per horizon cell over a strictly
/// decreasing horizon ladder. With `nested` (default) one trajectory run at
/// the largest horizon classifies every smaller cell through its crossing
/// time; otherwise each cell runs its own independent trajectories.
struct EnsembleSetup {
  GridSpec grid;
  NoiseSpec noise;
  SolverConfig solver;
  CutoffSpec cutoff;
  int trajectories = 100;
  std::uint64_t root_seed = 1;
  std::vector<double> horizons;
  bool nested = true;
  int workers = 1;

  void validate() const;
};

struct TrajectoryRecord {
  int cell = 0;  // 0 for nested campaigns (one family serves every cell)
  int index = 0;
  std::uint64_t stream_key = 0;
  bool hit = false;
  double tau_R = std::numeric_limits<double>::infinity();
  double final_sup_h1 = 0.0;
  double final_int_w8 = 0.0;
  bool resolution_breach = false;
  std::uint64_t steps = 0;
  bool incomplete = false;  // step budget ran out
};

/// Binomial estimate of P(tau_R <= T) for one ladder cell with its exact
/// 95% Clopper-Pearson interval.
struct ProbabilityEstimate {
  double horizon = 0.0;
  int successes = 0;
  int trials = 0;
  double p_hat = 0.0;
  double lo = 0.0;
  double hi = 1.0;
  bool complete = true;          // no trajectory ran out of budget
  int resolution_breaches = 0;   // breached before the cell could classify
};

struct EnsembleResult {
  std::vector<ProbabilityEstimate> cells;
  std::vector<TrajectoryRecord> trajectories;
  bool all_complete = true;
};

EnsembleResult run_ensemble(const EnsembleSetup& setup, const Field& u0);

/// One fit datum: either a two-sided cell (ln p with a weight) or a censored
/// zero-success cell contributing only the one-sided constraint
/// ln p <= ln_hi.
struct FitCell {
  double horizon = 0.0;
  double ln_p = 0.0;
  double weight = 1.0;
  bool censored = false;
  double ln_hi = 0.0;
};

struct FitOptions {
  int bootstrap = 200;
  std::uint64_t seed = 0;
  bool use_censored = true;  // false drops zero-success cells instead
  double beta_min = 0.02;
  double beta_max = 3.0;
};

/// Least-squares fit of ln p(T) = a - c T^{-beta} with c >= 0 enforced.
struct ScalingFit {
  double a = 0.0;
  double c = 0.0;
  double beta = 0.0;
  bool beta_fixed = false;
  bool c_constraint_active = false;
  double objective = 0.0;
  std::vector<double> residuals;         // per used cell, censored clipped
  std::vector<std::size_t> cells_used;   // indices into the input list
  // Parametric-bootstrap 95% percentile intervals; NaN when unavailable.
  double a_lo = 0.0, a_hi = 0.0;
  double c_lo = 0.0, c_hi = 0.0;
  double beta_lo = 0.0, beta_hi = 0.0;
  int bootstrap_rounds = 0;
};

ScalingFit fit_scaling_cells(const std::vector<FitCell>& cells,
                             std::optional<double> fixed_beta,
                             const FitOptions& options = {});

std::vector<FitCell> cells_from_estimates(
    const std::vector<ProbabilityEstimate>& estimates, bool use_censored);

/// Full pipeline: weights from the interval widths, censoring for
/// zero-success cells, bootstrap over binomial resamples.
ScalingFit fit_scaling(const std::vector<ProbabilityEstimate>& estimates,
                       std::optional<double> fixed_beta,
                       const FitOptions& options = {});

}  // namespace snls
