#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "snls/probes.hpp"

using namespace snls;
using namespace snls::testing;

TEST_CASE("khintchine constant closed forms") {
  CHECK(std::abs(khintchine_constant(2.0) - 1.0) < 1e-12);
  // Gaussian fourth moment E|g|^4 = 3 forces K_{2,4} = 3^{1/4}.
  CHECK(std::abs(khintchine_constant(4.0) - std::pow(3.0, 0.25)) < 1e-10);
  CHECK_THROWS_AS(khintchine_constant(1.9), DomainError);

  SUBCASE("monotone nondecreasing in rho") {
    double prev = 0.0;
    for (double rho = 2.0; rho <= 64.0; rho += 0.125) {
      const double k = khintchine_constant(rho);
      CHECK(k >= prev - 1e-14);
      prev = k;
    }
  }
  SUBCASE("grows no faster than sqrt(rho)") {
    for (double rho = 2.0; rho <= 256.0; rho *= 1.1)
      CHECK(khintchine_constant(rho) / std::sqrt(rho) <= 1.0);
  }
}

TEST_CASE("khintchine empirical bound holds") {
  std::vector<std::vector<double>> coeffs = {
      {1.0},
      {1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)},
  };
  std::vector<double> random_vec;
  RngStream rng(55);
  for (int i = 0; i < 32; ++i) random_vec.push_back(rng.normal());
  coeffs.push_back(random_vec);

  const ProbeReport report =
      khintchine_empirical_check({2.0, 4.0, 8.0}, coeffs, 20000, 7);
  CHECK(report.pass);

  // a = (1): the sum is +-1 and every rho-moment is exactly 1.
  const double m = report.measured[0]["moment"].get<double>();
  CHECK(m == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("decay exponent table and duality symmetry") {
  CHECK(decay_reference_exponent(3, 12.0 / 5.0) == doctest::Approx(-0.25).epsilon(1e-15));
  CHECK(decay_reference_exponent(3, 2.0) == 0.0);
  for (double p : {2.5, 3.0, 4.0, 6.0, 12.0}) {
    const double conj = p / (p - 1.0);
    CHECK(decay_reference_exponent(3, p) ==
          doctest::Approx(-decay_reference_exponent(3, conj)).epsilon(1e-13));
  }
}

TEST_CASE("dispersive decay probe in one dimension") {
  const GridSpec g(1, 256, 32.0);
  const Field f = gaussian_field(g, 1.0, 1.0);

  SUBCASE("L2 norm does not decay") {
    const ProbeReport r = dispersive_decay_probe(f, 2.0, 0.5, 2.5, 10, 0.01);
    CHECK(std::abs(r.measured["exponent"].get<double>()) < 1e-10);
    CHECK(r.pass);
  }
  SUBCASE("L6 norm decays at the free rate") {
    const ProbeReport r = dispersive_decay_probe(f, 6.0, 1.0, 2.5, 12, 0.05);
    CHECK(r.pass);
    CHECK(r.measured["exponent"].get<double>() ==
          doctest::Approx(-1.0 / 3.0).epsilon(0.15));
  }
  SUBCASE("window beyond the wrap-around estimate is rejected") {
    CHECK_THROWS_AS(dispersive_decay_probe(f, 6.0, 1.0, 500.0, 10), DomainError);
  }
}

TEST_CASE("stochastic convolution moments") {
  const GridSpec g(1, 32, 8.0);
  Field profile(g, Rep::physical);
  for (auto& v : profile.values()) v = Complex{1.0, 0.0};

  SUBCASE("zero amplitude gives zero moments") {
    NoiseSpec off;
    off.epsilon = 0.0;
    off.k_max = 0;
    ConvolutionProbeParams params;
    params.samples = 20;
    params.steps = 4;
    const ProbeReport r = stochastic_convolution_moment_probe(profile, off, params, 1);
    for (const auto& row : r.measured)
      if (row.contains("moment_sup_w"))
        CHECK(row["moment_sup_w"].get<double>() == 0.0);
  }

  SUBCASE("single-mode Ito isometry at the final time") {
    NoiseSpec spec;
    spec.epsilon = 0.7;
    spec.k_max = 0;
    spec.sigma = 2.0;
    ConvolutionProbeParams params;
    params.horizon = 0.5;
    params.steps = 16;
    params.samples = 4000;
    params.rhos = {2.0, 4.0};
    const ProbeReport r = stochastic_convolution_moment_probe(profile, spec, params, 17);
    const double closed = r.reference["ito_isometry_final_l2_m2"].get<double>();
    const double measured = r.measured[0]["moment_final_l2"].get<double>();
    // var of the m(2) estimate for a Gaussian: relative SE ~ sqrt(1/(2n)).
    const double rel_se = std::sqrt(0.5 / params.samples);
    CHECK(std::abs(measured - closed) / closed < 3.0 * rel_se);
    CHECK(r.pass);
  }

  SUBCASE("moments are nondecreasing in rho and ratios bounded") {
    NoiseSpec spec;
    spec.epsilon = 0.5;
    spec.k_max = 4;
    ConvolutionProbeParams params;
    params.samples = 400;
    params.steps = 16;
    const ProbeReport r = stochastic_convolution_moment_probe(profile, spec, params, 23);
    CHECK(r.pass);
    double prev = 0.0;
    for (const auto& row : r.measured) {
      if (!row.contains("moment_sup_w")) continue;
      const double m = row["moment_sup_w"].get<double>();
      CHECK(m >= prev);
      prev = m;
    }
  }

  SUBCASE("reports are deterministic across worker counts") {
    NoiseSpec spec;
    spec.epsilon = 0.4;
    spec.k_max = 2;
    ConvolutionProbeParams params;
    params.samples = 120;
    params.steps = 8;
    ConvolutionProbeParams params2 = params;
    params2.workers = 2;
    const ProbeReport a = stochastic_convolution_moment_probe(profile, spec, params, 5);
    const ProbeReport b = stochastic_convolution_moment_probe(profile, spec, params2, 5);
    CHECK(a.to_json().dump() == b.to_json().dump());
  }

  SUBCASE("sample budget is enforced") {
    NoiseSpec spec;
    spec.epsilon = 0.5;
    spec.k_max = 0;
    ConvolutionProbeParams params;
    params.samples = 3'000'000;
    CHECK_THROWS_AS(stochastic_convolution_moment_probe(profile, spec, params, 1),
                    BudgetError);
  }
}

TEST_CASE("oracle step") {
  const GridSpec g(1, 32, 16.0);
  const Field u0 = gaussian_field(g, 0.4, 1.5);
  SolverConfig cfg;
  cfg.dt = 0.01;
  cfg.p = 3.0;
  cfg.mu = +1;
  cfg.truncation = false;
  cfg.radius = 0.0;

  SUBCASE("linear-only matches the free flow") {
    const Field out = oracle_step(u0, 0.01, nullptr, cfg, /*theta=*/0.0);
    CHECK(rel_l2_diff(out, free_propagate(u0, 0.01)) < 1e-10);
  }
  SUBCASE("large grids are rejected") {
    const GridSpec big(1, 64, 16.0);
    CHECK_THROWS_AS(oracle_step(Field(big, Rep::physical), 0.01, nullptr, cfg),
                    BudgetError);
    const GridSpec deep(3, 16, 16.0);
    CHECK_THROWS_AS(oracle_step(Field(deep, Rep::physical), 0.01, nullptr, cfg),
                    BudgetError);
  }
}

TEST_CASE("strong convergence on a frozen path") {
  const GridSpec g(1, 64, 16.0);
  const Field u0 = gaussian_field(g, 0.8, 1.0);
  SolverConfig cfg;
  cfg.dt = 1e-2;
  cfg.p = 3.0;
  cfg.mu = +1;
  cfg.truncation = false;
  cfg.radius = 0.0;
  NoiseSpec spec;
  spec.epsilon = 0.3;
  spec.k_max = 1;
  const CutoffSpec cutoff;

  ConvergenceProbeParams params;
  params.horizon = 0.2;
  params.coarse_dt = 1e-2;
  params.levels = 3;
  const ProbeReport r = convergence_probe(u0, cfg, spec, cutoff, params, 31);
  CHECK(r.pass);

  // Determinism: the same seed reproduces the report bit for bit.
  const ProbeReport r2 = convergence_probe(u0, cfg, spec, cutoff, params, 31);
  CHECK(r.to_json().dump() == r2.to_json().dump());
}
