#pragma once

#include <string>

#include "snls/field.hpp"
#include "snls/integrator.hpp"

namespace snls {

/// M(u) = ||u||_2^2 by grid quadrature (Parseval makes the representation
/// irrelevant).
double mass(const Field& u);

/// Deterministic Hamiltonian E(u) = 1/2 ||grad u||_2^2 - mu/(p+1) ||u||_{p+1}^{p+1}.
double energy(const Field& u, const SolverConfig& cfg);

/// Box-centered second moment: integral of |x - x_c|^2 |u(x)|^2. Meaningful
/// while the bump stays away from the boundary.
double variance(const Field& u);

/// Fraction of spectral mass at |m|_inf > N/3. Values above 0.01 mean the
/// field is no longer trustworthy on this grid.
double spectral_tail_fraction(const Field& u);

struct DiagnosticsRow {
  double t = 0.0;
  double mass = 0.0;
  double energy = 0.0;
  double variance = 0.0;
  double h1 = 0.0;
  double w1_12_5 = 0.0;
  double x1 = 0.0;
  double tail_fraction = 0.0;
  double theta_value = 0.0;
};

DiagnosticsRow measure_row(const TrajectoryState& state, const SolverConfig& cfg,
                           double theta_value, double tail_fraction);

std::string diagnostics_header();
std::string format_row(const DiagnosticsRow& row);

}  // namespace snls
