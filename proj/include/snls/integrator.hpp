#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>

#include "snls/cutoff.hpp"
#include "snls/field.hpp"
#include "snls/noise.hpp"

namespace snls {

enum class Splitting { lie, strang };

struct SolverConfig {
  double dt = 1e-3;
  Splitting splitting = Splitting::strang;
  double p = 3.0;   // nonlinearity |u|^{p-1} u
  int mu = +1;      // +1 focusing, -1 defocusing
  bool truncation = true;
  double radius = 1.0;  // truncation radius R; crossings are detected iff > 0
  bool dealias = false; // 2/3-rule projection of the post-phase field
  std::uint64_t step_budget = 50'000'000;

  void validate() const {
    if (!(dt > 0.0)) throw DomainError("solver: dt must be positive");
    if (!(p >= 3.0)) throw DomainError("solver: nonlinearity exponent must be >= 3");
    if (mu != 1 && mu != -1) throw DomainError("solver: mu must be +1 or -1");
    if (truncation && !(radius > 0.0))
      throw DomainError("solver: truncation radius must be positive");
  }
};

/// Running state of one trajectory. sup_h1 and int_w8 accumulate the running
/// space-time norm: x1(t) = sup_{s<=t} ||u||_{H1} + (int_0^t ||u||^8_{W^{1,12/5}})^{1/8}.
struct TrajectoryState {
  double t = 0.0;
  Field u;
  double sup_h1 = 0.0;
  double int_w8 = 0.0;
  double last_w1p8 = 0.0;  // ||u(t)||^8_{W^{1,12/5}}, trapezoid memory
  std::uint64_t steps = 0;

  double x1() const { return sup_h1 + std::pow(int_w8, 0.125); }
};

/// Initializes the accumulators from the field at t = 0.
TrajectoryState make_state(Field u0);

struct StepDiag {
  double theta = 1.0;         // cutoff factor used for this step
  double tail_fraction = 0.0; // spectral mass above |m|_inf = N/3
  double h1 = 0.0;            // ||u||_{H1} at the new time
  double w1p = 0.0;           // ||u||_{W^{1,12/5}} at the new time
};

/// Pointwise exact solution of i u_t = theta * mu |u|^{p-1} u over dt.
/// Preserves |u(x)| at every grid point.
Field nonlinear_phase_step(const Field& u, double dt, double theta_value,
                           const SolverConfig& cfg);

/// Pointwise exact Stratonovich phase u <- u * exp(-i dW). Mass-preserving;
/// the increment must be real-valued.
Field noise_phase_step(const Field& u, const NoiseIncrement& inc);

/// One splitting step with theta frozen at the step start; samples a fresh
/// increment from rng (skipped when epsilon == 0). Updates the running
/// accumulators and advances t by cfg.dt.
StepDiag advance_step(TrajectoryState& state, const SolverConfig& cfg,
                      const NoiseSpec& noise, const CutoffSpec& cutoff,
                      RngStream& rng);

/// Same but with a caller-supplied increment (frozen-path experiments).
StepDiag advance_step_with_increment(TrajectoryState& state,
                                     const SolverConfig& cfg,
                                     const CutoffSpec& cutoff,
                                     const NoiseIncrement* inc);

/// Recomputes the norms of state.u and folds them into the accumulators,
/// advancing the trapezoid by dt. Exposed for offline recomputation checks.
void update_running_x1(TrajectoryState& state, double dt);

struct TrajectoryOutcome {
  bool hit = false;               // x1 reached R
  double tau_R = std::numeric_limits<double>::infinity();
  double final_time = 0.0;
  double final_sup_h1 = 0.0;
  double final_int_w8 = 0.0;
  bool resolution_breach = false; // spectral tail crossed 1%
  std::uint64_t steps = 0;
};

struct EvolveCallbacks {
  /// Called after every step (and once for the initial state with a
  /// synthetic diag). Null is fine.
  std::function<void(const TrajectoryState&, const StepDiag&)> on_step;
  /// Keep integrating past the first x1 >= R crossing.
  bool continue_past_crossing = false;
};

/// Integrates until t >= horizon, the first crossing x1 >= R (recorded at the
/// first grid time, left-endpoint convention), or a resolution breach.
/// Throws BudgetError up front if the horizon needs more than the step budget.
TrajectoryOutcome evolve(TrajectoryState& state, const SolverConfig& cfg,
                         const NoiseSpec& noise, const CutoffSpec& cutoff,
                         RngStream& rng, double horizon,
                         const EvolveCallbacks& callbacks = {});

}  // namespace snls
