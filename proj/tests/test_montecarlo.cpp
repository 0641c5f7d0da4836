#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "snls/montecarlo.hpp"
#include "snls/rng.hpp"
#include "snls/stats.hpp"

using namespace snls;
using namespace snls::testing;

TEST_CASE("clopper-pearson closed forms") {
  SUBCASE("zero successes") {
    const Interval iv = clopper_pearson(0, 100);
    CHECK(iv.lo == 0.0);
    CHECK(iv.hi == doctest::Approx(1.0 - std::pow(0.025, 0.01)).epsilon(1e-12));
    // agreement with the generic Beta-quantile route
    CHECK(iv.hi == doctest::Approx(beta_quantile(1.0, 100.0, 0.975)).epsilon(1e-8));
  }
  SUBCASE("all successes mirror") {
    const Interval iv = clopper_pearson(100, 100);
    CHECK(iv.hi == 1.0);
    CHECK(iv.lo == doctest::Approx(std::pow(0.025, 0.01)).epsilon(1e-12));
  }
  SUBCASE("half successes") {
    const Interval iv = clopper_pearson(50, 100);
    CHECK(iv.lo < 0.5);
    CHECK(iv.hi > 0.5);
    CHECK(std::abs(iv.lo + iv.hi - 1.0) < 1e-9);
  }
  SUBCASE("domain checks") {
    CHECK_THROWS_AS(clopper_pearson(-1, 10), DomainError);
    CHECK_THROWS_AS(clopper_pearson(11, 10), DomainError);
  }
}

TEST_CASE("incomplete beta sanity") {
  // Beta(2,2) CDF is 3x^2 - 2x^3.
  for (double x : {0.1, 0.25, 0.5, 0.9}) {
    const double expected = 3.0 * x * x - 2.0 * x * x * x;
    CHECK(regularized_incomplete_beta(2.0, 2.0, x) ==
          doctest::Approx(expected).epsilon(1e-12));
  }
  // Beta(1,M) CDF is 1 - (1-x)^M.
  CHECK(regularized_incomplete_beta(1.0, 40.0, 0.05) ==
        doctest::Approx(1.0 - std::pow(0.95, 40)).epsilon(1e-12));
}

TEST_CASE("exact interval is conservative on a Bernoulli stub") {
  const double q = 0.3;
  const int trials = 60;
  const int meta = 1000;
  RngStream rng(1234);
  int covered = 0;
  for (int t = 0; t < meta; ++t) {
    int s = 0;
    for (int i = 0; i < trials; ++i)
      if (rng.uniform() < q) ++s;
    const Interval iv = clopper_pearson(s, trials);
    if (iv.lo <= q && q <= iv.hi) ++covered;
  }
  CHECK(covered >= 930);
}

namespace {

std::vector<ProbabilityEstimate> synthetic_estimates(double a, double c, double beta,
                                                     int trials) {
  std::vector<ProbabilityEstimate> cells;
  for (double t : {0.64, 0.4, 0.25, 0.16, 0.1, 0.064}) {
    ProbabilityEstimate est;
    est.horizon = t;
    est.trials = trials;
    est.p_hat = std::exp(a - c * std::pow(t, -beta));
    est.successes = std::max(1, static_cast<int>(std::lround(est.p_hat * trials)));
    const Interval iv = clopper_pearson(est.successes, trials);
    est.lo = iv.lo;
    est.hi = iv.hi;
    cells.push_back(est);
  }
  return cells;
}

std::vector<FitCell> exact_cells(double a, double c, double beta) {
  std::vector<FitCell> cells;
  for (double t : {0.64, 0.4, 0.25, 0.16, 0.1, 0.064}) {
    FitCell cell;
    cell.horizon = t;
    cell.ln_p = a - c * std::pow(t, -beta);
    cells.push_back(cell);
  }
  return cells;
}

}  // namespace

TEST_CASE("noiseless scaling fit recovers the exact model") {
  const auto cells = exact_cells(2.0, 3.0, 0.25);

  SUBCASE("free beta") {
    const ScalingFit fit = fit_scaling_cells(cells, std::nullopt);
    CHECK(std::abs(fit.beta - 0.25) < 1e-8);
    CHECK(std::abs(fit.a - 2.0) < 1e-8);
    CHECK(std::abs(fit.c - 3.0) < 1e-8);
    CHECK_FALSE(fit.c_constraint_active);
  }
  SUBCASE("beta fixed at 1/4") {
    const ScalingFit fit = fit_scaling_cells(cells, 0.25);
    CHECK(std::abs(fit.a - 2.0) < 1e-10);
    CHECK(std::abs(fit.c - 3.0) < 1e-10);
    CHECK(fit.beta == 0.25);
  }
}

TEST_CASE("generate-and-fit round trip at beta = 0.5") {
  const auto estimates = synthetic_estimates(1.0, 2.0, 0.5, 1000000);
  FitOptions options;
  options.bootstrap = 100;
  options.seed = 9;
  const ScalingFit fit = fit_scaling(estimates, std::nullopt, options);
  CHECK(std::abs(fit.beta - 0.5) < 0.05);
  CHECK(fit.beta_lo <= 0.5);
  CHECK(fit.beta_hi >= 0.5);
  CHECK(fit.bootstrap_rounds > 0);
}

TEST_CASE("degenerate fits are rejected") {
  SUBCASE("all-zero-success input") {
    std::vector<ProbabilityEstimate> cells;
    for (double t : {0.4, 0.2, 0.1}) {
      ProbabilityEstimate est;
      est.horizon = t;
      est.trials = 50;
      est.successes = 0;
      est.p_hat = 0.0;
      const Interval iv = clopper_pearson(0, 50);
      est.lo = iv.lo;
      est.hi = iv.hi;
      cells.push_back(est);
    }
    CHECK_THROWS_AS(fit_scaling(cells, 0.25, FitOptions{.bootstrap = 0}), FitError);
  }
  SUBCASE("too few cells for a free-beta fit") {
    std::vector<FitCell> cells = exact_cells(1.0, 1.0, 0.25);
    cells.resize(2);
    CHECK_THROWS_AS(fit_scaling_cells(cells, std::nullopt), FitError);
    CHECK_NOTHROW(fit_scaling_cells(cells, 0.25));
  }
}

TEST_CASE("c stays nonnegative with the constraint flagged") {
  // Data with ln p increasing in T^{-beta}: the unconstrained c would be < 0.
  std::vector<FitCell> cells;
  for (double t : {0.64, 0.32, 0.16, 0.08}) {
    FitCell cell;
    cell.horizon = t;
    cell.ln_p = -2.0 + 0.5 * std::pow(t, -0.25);
    cells.push_back(cell);
  }
  const ScalingFit fit = fit_scaling_cells(cells, 0.25);
  CHECK(fit.c == 0.0);
  CHECK(fit.c_constraint_active);
}

TEST_CASE("censored cells only push the model down") {
  auto cells = exact_cells(2.0, 3.0, 0.25);
  FitCell censored;
  censored.horizon = 0.04;
  censored.censored = true;
  censored.ln_hi = 2.0 - 3.0 * std::pow(0.04, -0.25) + 5.0;  // loose bound
  cells.push_back(censored);
  const ScalingFit fit = fit_scaling_cells(cells, 0.25);
  // A loose censor bound is inactive: the exact model comes back.
  CHECK(std::abs(fit.a - 2.0) < 1e-9);
  CHECK(std::abs(fit.c - 3.0) < 1e-9);
}

namespace {

EnsembleSetup small_setup(double radius_factor, int mu, double eps) {
  EnsembleSetup setup;
  setup.grid = GridSpec(1, 32, 8.0);
  setup.noise.epsilon = eps;
  setup.noise.k_max = 4;
  setup.solver.dt = 0.01;
  setup.solver.p = 3.0;
  setup.solver.mu = mu;
  setup.solver.truncation = true;
  setup.trajectories = 8;
  setup.root_seed = 99;
  setup.horizons = {0.4, 0.2, 0.1};
  setup.workers = 1;
  setup.solver.radius = radius_factor;  // caller rescales
  return setup;
}

}  // namespace

TEST_CASE("ensemble immediate crossing gives p_hat = 1 in every cell") {
  EnsembleSetup setup = small_setup(1.0, +1, 0.2);
  const Field u0 = gaussian_field(setup.grid, 1.0, 1.0);
  setup.solver.radius = 0.5 * h1_norm(u0);
  const EnsembleResult result = run_ensemble(setup, u0);
  for (const auto& cell : result.cells) {
    CHECK(cell.p_hat == 1.0);
    CHECK(cell.successes == setup.trajectories);
  }
}

TEST_CASE("deterministic defocusing ensemble never crosses") {
  EnsembleSetup setup = small_setup(1.0, -1, 0.0);
  const Field u0 = gaussian_field(setup.grid, 0.3, 1.0);
  setup.solver.radius = 100.0 * h1_norm(u0);
  const EnsembleResult result = run_ensemble(setup, u0);
  for (const auto& cell : result.cells) {
    CHECK(cell.p_hat == 0.0);
    CHECK(cell.hi ==
          doctest::Approx(1.0 - std::pow(0.025, 1.0 / setup.trajectories)).epsilon(1e-12));
  }
}

TEST_CASE("nested ladders reuse monotone crossing information") {
  EnsembleSetup setup = small_setup(1.0, +1, 0.8);
  const Field u0 = gaussian_field(setup.grid, 1.1, 0.9);
  setup.solver.radius = 1.2 * h1_norm(u0);
  setup.trajectories = 24;
  const EnsembleResult result = run_ensemble(setup, u0);
  for (std::size_t i = 0; i + 1 < result.cells.size(); ++i)
    CHECK(result.cells[i].successes >= result.cells[i + 1].successes);
}

TEST_CASE("ensembles are deterministic across worker counts") {
  EnsembleSetup setup = small_setup(1.0, +1, 0.6);
  const Field u0 = gaussian_field(setup.grid, 1.0, 0.9);
  setup.solver.radius = 1.3 * h1_norm(u0);
  setup.trajectories = 12;

  EnsembleSetup setup4 = setup;
  setup4.workers = 4;
  const EnsembleResult serial = run_ensemble(setup, u0);
  const EnsembleResult threaded = run_ensemble(setup4, u0);
  REQUIRE(serial.trajectories.size() == threaded.trajectories.size());
  for (std::size_t i = 0; i < serial.trajectories.size(); ++i) {
    CHECK(serial.trajectories[i].tau_R == threaded.trajectories[i].tau_R);
    CHECK(serial.trajectories[i].hit == threaded.trajectories[i].hit);
    CHECK(serial.trajectories[i].final_sup_h1 == threaded.trajectories[i].final_sup_h1);
  }
  for (std::size_t i = 0; i < serial.cells.size(); ++i)
    CHECK(serial.cells[i].successes == threaded.cells[i].successes);
}

TEST_CASE("non-nested ensembles classify each cell independently") {
  EnsembleSetup setup = small_setup(1.0, +1, 0.6);
  const Field u0 = gaussian_field(setup.grid, 1.0, 0.9);
  setup.solver.radius = 1.3 * h1_norm(u0);
  setup.nested = false;
  setup.trajectories = 6;
  const EnsembleResult result = run_ensemble(setup, u0);
  CHECK(result.cells.size() == 3);
  CHECK(result.trajectories.size() == 18);
  for (const auto& cell : result.cells) CHECK(cell.trials == 6);
}
