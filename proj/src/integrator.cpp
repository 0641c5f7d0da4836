#include "snls/integrator.hpp"

#include <algorithm>
#include <cmath>

#include "snls/fft.hpp"

namespace snls {
namespace {

// Pointwise |u|^{p-1}; integer half-exponents (odd p) avoid pow.
struct PowerLaw {
  double half_exp;
  int int_half_exp;
  bool integral;

  explicit PowerLaw(double p) {
    half_exp = 0.5 * (p - 1.0);
    int_half_exp = static_cast<int>(std::lround(half_exp));
    integral = std::abs(half_exp - int_half_exp) < 1e-12 && int_half_exp >= 0 &&
               int_half_exp <= 32;
  }

  double operator()(double abs2) const {
    return integral ? ipow(abs2, int_half_exp) : std::pow(abs2, half_exp);
  }
};

double w1p8_of(double w1p) { return ipow(w1p, 8); }

constexpr double kLpExponent = 12.0 / 5.0;

// Precomputed spectral tables plus scratch for one trajectory's stepping.
class Stepper {
 public:
  Stepper(const GridSpec& g, const SolverConfig& cfg)
      : grid_(g), cfg_(cfg), power_(cfg.p), scratch_(g, Rep::spectral) {
    const std::size_t npts = g.size();
    k2_.resize(npts);
    grad_k2_.resize(npts);
    tail_mask_.resize(npts);
    axis_k_.assign(static_cast<std::size_t>(g.dim), std::vector<double>(npts));
    const int nyquist = -g.n / 2;
    const int tail_bound = g.n / 3;
    int idx[3];
    for (std::size_t flat = 0; flat < npts; ++flat) {
      unflatten(g, flat, idx);
      double k2 = 0.0, gk2 = 0.0;
      int m_inf = 0;
      for (int a = 0; a < g.dim; ++a) {
        const int m = g.mode_of(idx[a]);
        const double k = g.wavenumber(m);
        k2 += k * k;
        if (m != nyquist) {
          gk2 += k * k;
          axis_k_[static_cast<std::size_t>(a)][flat] = k;
        }
        m_inf = std::max(m_inf, std::abs(m));
      }
      k2_[flat] = k2;
      grad_k2_[flat] = gk2;
      tail_mask_[flat] = m_inf > tail_bound ? 1 : 0;
    }
    half_phase_.resize(npts);
    full_phase_.resize(npts);
    for (std::size_t i = 0; i < npts; ++i) {
      half_phase_[i] = std::polar(1.0, k2_[i] * cfg.dt * 0.5);
      full_phase_[i] = std::polar(1.0, k2_[i] * cfg.dt);
    }
  }

  StepDiag step(TrajectoryState& state, const CutoffSpec& cutoff,
                const NoiseIncrement* inc) {
    StepDiag diag;
    diag.theta = cfg_.truncation
                     ? theta_eval(cutoff, state.x1() / cfg_.radius)
                     : 1.0;
    Field& u = state.u;
    if (u.rep() != Rep::physical)
      throw ContractError("advance_step: state field must be physical");

    const bool strang = cfg_.splitting == Splitting::strang;

    // Leading linear flow (half step for Strang, full step for Lie).
    to_spectral_inplace(u);
    apply_phase(u, strang ? half_phase_ : full_phase_);
    to_physical_inplace(u);

    apply_nonlinear_phase(u, diag.theta, cfg_.dt);
    if (inc != nullptr) apply_noise_phase(u, *inc);

    // Trailing transform doubles as the norm/diagnostic pass.
    to_spectral_inplace(u);
    diag.tail_fraction = tail_fraction(u);
    if (cfg_.dealias) project_dealias(u);
    if (strang) apply_phase(u, half_phase_);
    diag.h1 = h1_from_spectral(u);
    double w1p = 0.0;
    for (int a = 0; a < grid_.dim; ++a) {
      scratch_.values() = u.values();
      scratch_.set_rep(Rep::spectral);
      const auto& ks = axis_k_[static_cast<std::size_t>(a)];
      for (std::size_t i = 0; i < scratch_.size(); ++i)
        scratch_[i] *= Complex{0.0, ks[i]};
      to_physical_inplace(scratch_);
      w1p += lp_norm_physical(scratch_);
    }
    to_physical_inplace(u);
    w1p += lp_norm_physical(u);
    diag.w1p = w1p;

    state.t += cfg_.dt;
    state.steps += 1;
    state.sup_h1 = std::max(state.sup_h1, diag.h1);
    const double w8 = w1p8_of(w1p);
    state.int_w8 += cfg_.dt * 0.5 * (state.last_w1p8 + w8);
    state.last_w1p8 = w8;
    return diag;
  }

 private:
  static void apply_phase(Field& f, const std::vector<Complex>& phase) {
    for (std::size_t i = 0; i < f.size(); ++i) f[i] *= phase[i];
  }

  void apply_nonlinear_phase(Field& u, double theta, double dt) const {
    if (theta == 0.0) return;
    const double factor = -static_cast<double>(cfg_.mu) * theta * dt;
    for (auto& v : u.values()) {
      const double amp = power_(std::norm(v));
      v *= std::polar(1.0, factor * amp);
    }
  }

  static void apply_noise_phase(Field& u, const NoiseIncrement& inc) {
    for (std::size_t i = 0; i < u.size(); ++i)
      u[i] *= std::polar(1.0, -inc.dw[i].real());
  }

  double tail_fraction(const Field& spec) const {
    double total = 0.0, tail = 0.0;
    for (std::size_t i = 0; i < spec.size(); ++i) {
      const double m = std::norm(spec[i]);
      total += m;
      if (tail_mask_[i]) tail += m;
    }
    return total > 0.0 ? tail / total : 0.0;
  }

  void project_dealias(Field& spec) const {
    for (std::size_t i = 0; i < spec.size(); ++i)
      if (tail_mask_[i]) spec[i] = Complex{0.0, 0.0};
  }

  double h1_from_spectral(const Field& spec) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < spec.size(); ++i)
      acc += (1.0 + grad_k2_[i]) * std::norm(spec[i]);
    return std::sqrt(acc * grid_.cell_volume());
  }

  double lp_norm_physical(const Field& f) const {
    double acc = 0.0;
    for (const auto& v : f.values())
      acc += std::pow(std::abs(v), kLpExponent);
    return std::pow(acc * grid_.cell_volume(), 1.0 / kLpExponent);
  }

  GridSpec grid_;
  SolverConfig cfg_;
  PowerLaw power_;
  std::vector<double> k2_, grad_k2_;
  std::vector<std::uint8_t> tail_mask_;
  std::vector<std::vector<double>> axis_k_;
  std::vector<Complex> half_phase_, full_phase_;
  Field scratch_;
};

}  // namespace

TrajectoryState make_state(Field u0) {
  TrajectoryState state;
  state.u = u0.rep() == Rep::physical ? std::move(u0) : to_physical(u0);
  state.sup_h1 = h1_norm(state.u);
  state.last_w1p8 = w1p8_of(sobolev_w1p_norm(state.u, kLpExponent));
  return state;
}

Field nonlinear_phase_step(const Field& u, double dt, double theta_value,
                           const SolverConfig& cfg) {
  if (u.rep() != Rep::physical)
    throw ContractError("nonlinear_phase_step: field must be physical");
  Field out = u;
  if (theta_value == 0.0) return out;
  const PowerLaw power(cfg.p);
  const double factor = -static_cast<double>(cfg.mu) * theta_value * dt;
  for (auto& v : out.values())
    v *= std::polar(1.0, factor * power(std::norm(v)));
  return out;
}

Field noise_phase_step(const Field& u, const NoiseIncrement& inc) {
  if (u.rep() != Rep::physical)
    throw ContractError("noise_phase_step: field must be physical");
  if (inc.dw.grid() != u.grid())
    throw ContractError("noise_phase_step: increment grid mismatch");
  double max_re = 0.0, max_im = 0.0;
  for (const auto& v : inc.dw.values()) {
    max_re = std::max(max_re, std::abs(v.real()));
    max_im = std::max(max_im, std::abs(v.imag()));
  }
  if (max_im > 1e-13 * std::max(1.0, max_re))
    throw ContractError("noise_phase_step: increment is not real-valued");
  Field out = u;
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] *= std::polar(1.0, -inc.dw[i].real());
  return out;
}

StepDiag advance_step(TrajectoryState& state, const SolverConfig& cfg,
                      const NoiseSpec& noise, const CutoffSpec& cutoff,
                      RngStream& rng) {
  cfg.validate();
  Stepper stepper(state.u.grid(), cfg);
  if (noise.epsilon > 0.0) {
    const NoiseIncrement inc =
        sample_increment(noise, state.u.grid(), cfg.dt, rng);
    return stepper.step(state, cutoff, &inc);
  }
  return stepper.step(state, cutoff, nullptr);
}

StepDiag advance_step_with_increment(TrajectoryState& state,
                                     const SolverConfig& cfg,
                                     const CutoffSpec& cutoff,
                                     const NoiseIncrement* inc) {
  cfg.validate();
  Stepper stepper(state.u.grid(), cfg);
  return stepper.step(state, cutoff, inc);
}

void update_running_x1(TrajectoryState& state, double dt) {
  const double h1 = h1_norm(state.u);
  const double w8 = w1p8_of(sobolev_w1p_norm(state.u, kLpExponent));
  state.sup_h1 = std::max(state.sup_h1, h1);
  state.int_w8 += dt * 0.5 * (state.last_w1p8 + w8);
  state.last_w1p8 = w8;
}

TrajectoryOutcome evolve(TrajectoryState& state, const SolverConfig& cfg,
                         const NoiseSpec& noise, const CutoffSpec& cutoff,
                         RngStream& rng, double horizon,
                         const EvolveCallbacks& callbacks) {
  cfg.validate();
  noise.validate();
  if (!(horizon > 0.0)) throw DomainError("evolve: horizon must be positive");

  const double remaining = horizon - state.t;
  const auto steps_needed = remaining <= 0.0
                                ? std::uint64_t{0}
                                : static_cast<std::uint64_t>(
                                      std::ceil(remaining / cfg.dt - 1e-9));
  if (state.steps + steps_needed > cfg.step_budget)
    throw BudgetError("evolve: horizon exceeds the step budget");

  TrajectoryOutcome out;
  const bool detect = cfg.radius > 0.0;

  if (callbacks.on_step) {
    StepDiag init;
    init.theta = cfg.truncation ? theta_eval(cutoff, state.x1() / cfg.radius) : 1.0;
    init.h1 = state.sup_h1;
    init.w1p = std::pow(state.last_w1p8, 0.125);
    init.tail_fraction = 0.0;
    callbacks.on_step(state, init);
  }

  if (detect && state.x1() >= cfg.radius) {
    out.hit = true;
    out.tau_R = state.t;
    if (!callbacks.continue_past_crossing) {
      out.final_time = state.t;
      out.final_sup_h1 = state.sup_h1;
      out.final_int_w8 = state.int_w8;
      out.steps = state.steps;
      return out;
    }
  }

  Stepper stepper(state.u.grid(), cfg);
  const bool noisy = noise.epsilon > 0.0;
  for (std::uint64_t j = 0; j < steps_needed; ++j) {
    StepDiag diag;
    if (noisy) {
      const NoiseIncrement inc =
          sample_increment(noise, state.u.grid(), cfg.dt, rng);
      diag = stepper.step(state, cutoff, &inc);
    } else {
      diag = stepper.step(state, cutoff, nullptr);
    }
    if (callbacks.on_step) callbacks.on_step(state, diag);
    if (detect && !out.hit && state.x1() >= cfg.radius) {
      out.hit = true;
      out.tau_R = state.t;
      if (!callbacks.continue_past_crossing) break;
    }
    if (diag.tail_fraction > 0.01) {
      out.resolution_breach = true;
      break;
    }
  }

  out.final_time = state.t;
  out.final_sup_h1 = state.sup_h1;
  out.final_int_w8 = state.int_w8;
  out.steps = state.steps;
  return out;
}

}  // namespace snls
