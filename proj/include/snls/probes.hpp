#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "snls/field.hpp"
#include "snls/integrator.hpp"
#include "snls/noise.hpp"
#include "snls/rng.hpp"

namespace snls {

/// Structured probe outcome. Reference entries carry a "source" tag saying
/// how the value was obtained (closed form, mode counting, ...).
struct ProbeReport {
  std::string name;
  nlohmann::json inputs;
  nlohmann::json measured;
  nlohmann::json reference;
  bool pass = true;
  std::vector<std::array<double, 2>> plot;  // two-column plot data

  nlohmann::json to_json() const;
  std::string plot_text() const;
};

/// Best real Khintchine constant K_{2,rho} = 2^{1/2} pi^{-1/(2 rho)}
/// Gamma((rho+1)/2)^{1/rho}, evaluated through lgamma. Requires rho >= 2.
double khintchine_constant(double rho);

/// Monte Carlo check of the Khintchine bound for Rademacher sums with the
/// given coefficient vectors.
ProbeReport khintchine_empirical_check(const std::vector<double>& rhos,
                                       const std::vector<std::vector<double>>& coeffs,
                                       int samples, std::uint64_t seed);

/// -d (1/2 - 1/p), the free-flow decay exponent of ||S(t) f||_p.
double decay_reference_exponent(int dim, double p);

/// Least-squares decay exponent of log ||S(t) f||_p over a log-spaced window,
/// compared against the reference exponent. Throws if the window extends past
/// the wrap-around estimate L^2 / (4 pi bandwidth).
ProbeReport dispersive_decay_probe(const Field& f, double p, double t0, double t1,
                                   int num_samples, double tolerance = 0.05);

struct ConvolutionProbeParams {
  double horizon = 0.5;
  int steps = 64;
  std::vector<double> rhos = {2.0, 4.0, 8.0};
  int samples = 1000;
  int workers = 1;
  double ratio_bound = 10.0;  // max/min of m(rho)/(rho^{3/2} T^{3/8})
};

/// Moments of the discretized stochastic convolution
/// Ju(t_j) = sum_{n<j} S(t_j - t_n)(u(t_n) dW_n) for a constant-in-time
/// profile. Reports m(rho) for both sup_{t<=T} ||Ju||_{W^{1,12/5}} and the
/// fixed-time L2 norm at T (the latter has an Ito-isometry closed form for
/// constant-mode noise).
ProbeReport stochastic_convolution_moment_probe(const Field& profile,
                                                const NoiseSpec& noise,
                                                const ConvolutionProbeParams& params,
                                                std::uint64_t seed);

/// Reference integrator: classical RK4 at dt/100 substeps on
/// u_t = -i (Lap u + theta mu |u|^{p-1} u + (dW/dt) u),
/// the noise held as a frozen potential over the step. Small grids only.
Field oracle_step(const Field& u, double dt, const Field* dw,
                  const SolverConfig& cfg, double theta = 1.0);

struct ConvergenceProbeParams {
  double horizon = 0.25;
  double coarse_dt = 1e-2;
  int levels = 4;       // coarse_dt, coarse_dt/2, ..., coarse_dt/2^{levels-1}
  int ref_refinement = 1;  // reference runs at coarse_dt/2^{levels-1+this}
  double min_slope = 0.5;
};

/// Strong-convergence experiment on one frozen Brownian path: the same fine
/// increments are pairwise-summed into each coarser step sequence and the
/// final-time L2 errors against the finest run are slope-fitted in dt.
ProbeReport convergence_probe(const Field& u0, const SolverConfig& cfg,
                              const NoiseSpec& noise, const CutoffSpec& cutoff,
                              const ConvergenceProbeParams& params,
                              std::uint64_t seed);

}  // namespace snls
