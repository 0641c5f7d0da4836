#include "snls/diagnostics.hpp"

#include <cmath>
#include <cstdio>

namespace snls {

double mass(const Field& u) {
  double acc = 0.0;
  for (const auto& v : u.values()) acc += std::norm(v);
  return acc * u.grid().cell_volume();
}

double energy(const Field& u, const SolverConfig& cfg) {
  double grad2 = 0.0;
  for (const Field& d : gradient(u)) {
    const double g = lebesgue_norm(d, 2.0);
    grad2 += g * g;
  }
  const double lp = lebesgue_norm(u, cfg.p + 1.0);
  return 0.5 * grad2 -
         cfg.mu / (cfg.p + 1.0) * std::pow(lp, cfg.p + 1.0);
}

double variance(const Field& u) {
  const Field phys = u.rep() == Rep::physical ? u : to_physical(u);
  const GridSpec& g = phys.grid();
  const double center = 0.5 * g.length;
  double acc = 0.0;
  int idx[3];
  for (std::size_t i = 0; i < phys.size(); ++i) {
    unflatten(g, i, idx);
    double r2 = 0.0;
    for (int a = 0; a < g.dim; ++a) {
      const double dx = g.coord(idx[a]) - center;
      r2 += dx * dx;
    }
    acc += r2 * std::norm(phys[i]);
  }
  return acc * g.cell_volume();
}

double spectral_tail_fraction(const Field& u) {
  const Field spec = u.rep() == Rep::spectral ? u : to_spectral(u);
  const GridSpec& g = spec.grid();
  const int bound = g.n / 3;
  double total = 0.0, tail = 0.0;
  int idx[3];
  for (std::size_t i = 0; i < spec.size(); ++i) {
    unflatten(g, i, idx);
    int m_inf = 0;
    for (int a = 0; a < g.dim; ++a)
      m_inf = std::max(m_inf, std::abs(g.mode_of(idx[a])));
    const double m2 = std::norm(spec[i]);
    total += m2;
    if (m_inf > bound) tail += m2;
  }
  return total > 0.0 ? tail / total : 0.0;
}

DiagnosticsRow measure_row(const TrajectoryState& state, const SolverConfig& cfg,
                           double theta_value, double tail_fraction) {
  DiagnosticsRow row;
  row.t = state.t;
  row.mass = mass(state.u);
  row.energy = energy(state.u, cfg);
  row.variance = variance(state.u);
  row.h1 = h1_norm(state.u);
  row.w1_12_5 = sobolev_w1p_norm(state.u, 12.0 / 5.0);
  row.x1 = state.x1();
  row.tail_fraction = tail_fraction;
  row.theta_value = theta_value;
  return row;
}

std::string diagnostics_header() {
  return "t,mass,energy,variance,h1,w1_12_5,x1,tail_fraction,theta";
}

std::string format_row(const DiagnosticsRow& r) {
  char buf[320];
  std::snprintf(buf, sizeof(buf),
                "%.12g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.6g,%.12g",
                r.t, r.mass, r.energy, r.variance, r.h1, r.w1_12_5, r.x1,
                r.tail_fraction, r.theta_value);
  return buf;
}

}  // namespace snls
