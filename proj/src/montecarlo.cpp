#include "snls/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace snls {

void EnsembleSetup::validate() const {
  grid.validate();
  noise.validate();
  solver.validate();
  cutoff.validate();
  if (trajectories < 1)
    throw DomainError("ensemble: need at least one trajectory per cell");
  if (horizons.empty()) throw DomainError("ensemble: horizon ladder is empty");
  for (std::size_t i = 0; i + 1 < horizons.size(); ++i)
    if (!(horizons[i] > horizons[i + 1]))
      throw DomainError("ensemble: horizon ladder must be strictly decreasing");
  if (!(horizons.back() > 0.0))
    throw DomainError("ensemble: horizons must be positive");
  if (workers < 1) throw DomainError("ensemble: worker count must be >= 1");
}

namespace {

TrajectoryRecord run_trajectory(const EnsembleSetup& setup, const Field& u0,
                                int cell_key, int index, double horizon) {
  TrajectoryRecord rec;
  rec.cell = cell_key;
  rec.index = index;
  RngStream rng(setup.root_seed, static_cast<std::uint64_t>(cell_key),
                static_cast<std::uint64_t>(index));
  rec.stream_key = rng.key();
  TrajectoryState state = make_state(u0);
  try {
    const TrajectoryOutcome out = evolve(state, setup.solver, setup.noise,
                                         setup.cutoff, rng, horizon);
    rec.hit = out.hit;
    rec.tau_R = out.tau_R;
    rec.final_sup_h1 = out.final_sup_h1;
    rec.final_int_w8 = out.final_int_w8;
    rec.resolution_breach = out.resolution_breach;
    rec.steps = out.steps;
  } catch (const BudgetError&) {
    rec.incomplete = true;
    rec.final_sup_h1 = state.sup_h1;
    rec.final_int_w8 = state.int_w8;
    rec.steps = state.steps;
  }
  return rec;
}

ProbabilityEstimate summarize_cell(double horizon,
                                   const std::vector<TrajectoryRecord>& recs) {
  ProbabilityEstimate est;
  est.horizon = horizon;
  for (const auto& rec : recs) {
    if (rec.incomplete) {
      est.complete = false;
      continue;
    }
    est.trials += 1;
    // Crossing times accumulate dt with rounding; a hit on the final step can
    // land a few ulps past the horizon.
    if (rec.hit && rec.tau_R <= horizon * (1.0 + 1e-12)) {
      est.successes += 1;
    } else if (rec.resolution_breach && !rec.hit) {
      // The run died before it could classify this horizon.
      est.resolution_breaches += 1;
    }
  }
  if (est.trials > 0) {
    est.p_hat = static_cast<double>(est.successes) / est.trials;
    const Interval iv = clopper_pearson(est.successes, est.trials);
    est.lo = iv.lo;
    est.hi = iv.hi;
  }
  return est;
}

}  // namespace

EnsembleResult run_ensemble(const EnsembleSetup& setup, const Field& u0) {
  setup.validate();
  if (u0.grid() != setup.grid)
    throw ContractError("ensemble: initial data grid does not match the setup");

  EnsembleResult result;
  const int m = setup.trajectories;
  const std::size_t cells = setup.horizons.size();

  if (setup.nested) {
    const double top = setup.horizons.front();
    std::vector<TrajectoryRecord> recs(static_cast<std::size_t>(m));
    parallel_for(static_cast<std::size_t>(m), setup.workers, [&](std::size_t i) {
      recs[i] = run_trajectory(setup, u0, /*cell_key=*/0, static_cast<int>(i), top);
    });
    for (double horizon : setup.horizons)
      result.cells.push_back(summarize_cell(horizon, recs));
    result.trajectories = std::move(recs);
  } else {
    std::vector<TrajectoryRecord> recs(cells * static_cast<std::size_t>(m));
    parallel_for(recs.size(), setup.workers, [&](std::size_t w) {
      const std::size_t cell = w / static_cast<std::size_t>(m);
      const int index = static_cast<int>(w % static_cast<std::size_t>(m));
      recs[w] = run_trajectory(setup, u0, static_cast<int>(cell) + 1, index,
                               setup.horizons[cell]);
    });
    for (std::size_t cell = 0; cell < cells; ++cell) {
      std::vector<TrajectoryRecord> cell_recs(
          recs.begin() + static_cast<std::ptrdiff_t>(cell * m),
          recs.begin() + static_cast<std::ptrdiff_t>((cell + 1) * m));
      result.cells.push_back(summarize_cell(setup.horizons[cell], cell_recs));
    }
    result.trajectories = std::move(recs);
  }

  for (const auto& cell : result.cells)
    result.all_complete = result.all_complete && cell.complete;
  return result;
}

namespace {

struct LinearSolution {
  double a = 0.0;
  double c = 0.0;
  bool constrained = false;
};

// Weighted least squares of ln p ~ a - c x over the two-sided cells plus the
// currently active censored constraints, with c >= 0. Active-set iteration:
// a censored cell only contributes while the model sits above its bound.
LinearSolution solve_given_beta(const std::vector<FitCell>& cells, double beta,
                                double* objective_out,
                                std::vector<double>* residuals_out) {
  struct Datum {
    double x, y, w;
    bool censored;
  };
  std::vector<Datum> data;
  data.reserve(cells.size());
  for (const auto& cell : cells) {
    const double x = std::pow(cell.horizon, -beta);
    data.push_back({x, cell.censored ? cell.ln_hi : cell.ln_p, cell.weight,
                    cell.censored});
  }

  std::vector<char> active(data.size(), 0);
  LinearSolution sol;
  for (int pass = 0; pass < 64; ++pass) {
    double sw = 0, swx = 0, swxx = 0, swy = 0, swxy = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (data[i].censored && !active[i]) continue;
      const auto& d = data[i];
      sw += d.w;
      swx += d.w * d.x;
      swxx += d.w * d.x * d.x;
      swy += d.w * d.y;
      swxy += d.w * d.x * d.y;
    }
    // Model y = a - c x.
    const double det = sw * swxx - swx * swx;
    double a, c;
    if (std::abs(det) > 1e-30) {
      c = -(sw * swxy - swx * swy) / det;
      a = (swy + c * swx) / sw;
    } else {
      c = 0.0;
      a = sw > 0.0 ? swy / sw : 0.0;
    }
    bool constrained = false;
    if (c < 0.0) {
      c = 0.0;
      a = sw > 0.0 ? swy / sw : 0.0;
      constrained = true;
    }
    // Refresh the censored active set; stop when it is stable.
    bool changed = false;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (!data[i].censored) continue;
      const char should = (a - c * data[i].x > data[i].y) ? 1 : 0;
      if (should != active[i]) {
        active[i] = should;
        changed = true;
      }
    }
    sol = {a, c, constrained};
    if (!changed) break;
  }

  double obj = 0.0;
  if (residuals_out) residuals_out->clear();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& d = data[i];
    const double model = sol.a - sol.c * d.x;
    double r = d.censored ? std::max(0.0, model - d.y) : (d.y - model);
    obj += d.w * r * r;
    if (residuals_out) residuals_out->push_back(r);
  }
  if (objective_out) *objective_out = obj;
  return sol;
}

double profile_objective(const std::vector<FitCell>& cells, double beta) {
  double obj = 0.0;
  solve_given_beta(cells, beta, &obj, nullptr);
  return obj;
}

}  // namespace

std::vector<FitCell> cells_from_estimates(
    const std::vector<ProbabilityEstimate>& estimates, bool use_censored) {
  std::vector<FitCell> cells;
  for (const auto& est : estimates) {
    if (est.trials <= 0) continue;
    FitCell cell;
    cell.horizon = est.horizon;
    if (est.successes >= 1) {
      cell.ln_p = std::log(est.p_hat);
      if (est.lo > 0.0 && est.hi > est.lo) {
        const double sigma = (std::log(est.hi) - std::log(est.lo)) / (2.0 * 1.96);
        cell.weight = sigma > 0.0 ? 1.0 / (sigma * sigma) : 1.0;
      }
      cells.push_back(cell);
    } else if (use_censored) {
      cell.censored = true;
      cell.ln_hi = std::log(est.hi);
      cells.push_back(cell);
    }
  }
  return cells;
}

ScalingFit fit_scaling_cells(const std::vector<FitCell>& cells,
                             std::optional<double> fixed_beta,
                             const FitOptions& options) {
  int two_sided = 0;
  for (const auto& cell : cells)
    if (!cell.censored) ++two_sided;
  const int needed = fixed_beta.has_value() ? 2 : 3;
  if (two_sided < needed)
    throw FitError("fit_scaling: need at least " + std::to_string(needed) +
                   " cells with successes, have " + std::to_string(two_sided));

  ScalingFit fit;
  fit.beta_fixed = fixed_beta.has_value();

  double beta;
  if (fixed_beta.has_value()) {
    beta = *fixed_beta;
  } else {
    // Coarse scan, then golden-section polish of the profiled objective.
    constexpr int kScan = 96;
    double best_beta = options.beta_min;
    double best_obj = std::numeric_limits<double>::infinity();
    for (int i = 0; i < kScan; ++i) {
      const double b = options.beta_min +
                       (options.beta_max - options.beta_min) * i / (kScan - 1.0);
      const double obj = profile_objective(cells, b);
      if (obj < best_obj) {
        best_obj = obj;
        best_beta = b;
      }
    }
    const double span = (options.beta_max - options.beta_min) / (kScan - 1.0);
    double lo = std::max(options.beta_min, best_beta - span);
    double hi = std::min(options.beta_max, best_beta + span);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = profile_objective(cells, x1), f2 = profile_objective(cells, x2);
    for (int it = 0; it < 160; ++it) {
      if (f1 < f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - gr * (hi - lo);
        f1 = profile_objective(cells, x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + gr * (hi - lo);
        f2 = profile_objective(cells, x2);
      }
    }
    beta = 0.5 * (lo + hi);
  }

  const LinearSolution sol =
      solve_given_beta(cells, beta, &fit.objective, &fit.residuals);
  fit.a = sol.a;
  fit.c = sol.c;
  fit.beta = beta;
  fit.c_constraint_active = sol.constrained;
  for (std::size_t i = 0; i < cells.size(); ++i) fit.cells_used.push_back(i);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  fit.a_lo = fit.a_hi = fit.c_lo = fit.c_hi = fit.beta_lo = fit.beta_hi = nan;
  return fit;
}

ScalingFit fit_scaling(const std::vector<ProbabilityEstimate>& estimates,
                       std::optional<double> fixed_beta,
                       const FitOptions& options) {
  ScalingFit fit = fit_scaling_cells(
      cells_from_estimates(estimates, options.use_censored), fixed_beta, options);

  if (options.bootstrap > 0) {
    RngStream rng(options.seed, /*cell=*/3, /*index=*/0);
    std::vector<double> as, cs, betas;
    for (int b = 0; b < options.bootstrap; ++b) {
      std::vector<ProbabilityEstimate> resampled = estimates;
      for (auto& est : resampled) {
        if (est.trials <= 0) continue;
        int s = 0;
        for (int t = 0; t < est.trials; ++t)
          if (rng.uniform() < est.p_hat) ++s;
        est.successes = s;
        est.p_hat = static_cast<double>(s) / est.trials;
        const Interval iv = clopper_pearson(s, est.trials);
        est.lo = iv.lo;
        est.hi = iv.hi;
      }
      try {
        const ScalingFit refit = fit_scaling_cells(
            cells_from_estimates(resampled, options.use_censored), fixed_beta,
            options);
        as.push_back(refit.a);
        cs.push_back(refit.c);
        betas.push_back(refit.beta);
      } catch (const FitError&) {
        // Resample degenerated (all-zero cells); skip it.
      }
    }
    const auto pct = [](std::vector<double>& v, double q) {
      if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
      std::sort(v.begin(), v.end());
      const double pos = q * (static_cast<double>(v.size()) - 1.0);
      const std::size_t i = static_cast<std::size_t>(pos);
      const double frac = pos - static_cast<double>(i);
      return i + 1 < v.size() ? v[i] * (1.0 - frac) + v[i + 1] * frac : v[i];
    };
    fit.bootstrap_rounds = static_cast<int>(as.size());
    fit.a_lo = pct(as, 0.025);
    fit.a_hi = pct(as, 0.975);
    fit.c_lo = pct(cs, 0.025);
    fit.c_hi = pct(cs, 0.975);
    fit.beta_lo = pct(betas, 0.025);
    fit.beta_hi = pct(betas, 0.975);
  }
  return fit;
}

}  // namespace snls
