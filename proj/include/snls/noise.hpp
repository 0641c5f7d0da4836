#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "snls/field.hpp"
#include "snls/rng.hpp"

namespace snls {

enum class SymbolFamily { gaussian, sobolev };

/// Spatially colored, time-white real noise built on the orthonormal real
/// trigonometric basis of the box: W = eps * sum_k beta_k(t) phihat(k) ehat_k.
/// Modes run over the lattice |m|_inf <= k_max; the smoothing symbol phihat
/// is a diagonal Fourier multiplier.
struct NoiseSpec {
  SymbolFamily family = SymbolFamily::gaussian;
  double sigma = 2.0;    // gaussian symbol width
  double s = 2.0;        // sobolev symbol decay exponent
  double epsilon = 0.0;  // noise amplitude; 0 recovers the deterministic flow
  int k_max = -1;        // lattice cutoff; -1 means N/4 for the grid in use

  /// phihat as a function of |k|^2. Strictly positive and finite.
  double symbol(double k2) const {
    return family == SymbolFamily::gaussian
               ? std::exp(-k2 / (2.0 * sigma * sigma))
               : std::pow(1.0 + k2, -0.5 * s);
  }

  int resolved_k_max(const GridSpec& g) const {
    const int k = k_max >= 0 ? k_max : g.n / 4;
    if (k > g.n / 2 - 1)
      throw DomainError("noise: k_max exceeds the resolvable mode range");
    return k;
  }

  void validate() const {
    if (epsilon < 0.0) throw DomainError("noise: epsilon must be >= 0");
    if (family == SymbolFamily::gaussian && !(sigma > 0.0))
      throw DomainError("noise: sigma must be positive");
    if (family == SymbolFamily::sobolev && !(s >= 0.0))
      throw DomainError("noise: s must be >= 0");
  }
};

/// One Stratonovich noise increment over a step: a real-valued physical field
/// (imaginary parts are identically zero).
struct NoiseIncrement {
  Field dw;
  double dt = 0.0;
};

/// Number of independent Brownian coordinates for this spec on this grid
/// (one for the constant mode, two per cosine/sine pair).
std::size_t brownian_dim(const NoiseSpec& spec, const GridSpec& grid);

/// Draws the raw Brownian increments dB ~ N(0, dt) for every basis function,
/// in a fixed mode order. Increments over adjacent steps may be summed
/// coordinate-wise to obtain the increment over the union interval.
std::vector<double> draw_brownian(const NoiseSpec& spec, const GridSpec& grid,
                                  double dt, RngStream& rng);

/// Deterministic synthesis dW(x) = eps * sum_k dB_k phihat(k) ehat_k(x) via
/// one inverse transform of Hermitian-symmetric spectral coefficients.
NoiseIncrement synthesize_increment(const NoiseSpec& spec, const GridSpec& grid,
                                    const std::vector<double>& brownian,
                                    double dt);

/// draw + synthesize in one call.
NoiseIncrement sample_increment(const NoiseSpec& spec, const GridSpec& grid,
                                double dt, RngStream& rng);

/// Ito-Stratonovich correction F_phi(x) = eps^2 sum_k (phihat(k) ehat_k(x))^2,
/// by direct summation over the mode set.
Field correction_field(const NoiseSpec& spec, const GridSpec& grid);

/// sum over the mode set of phihat(k)^2 and phihat(k)^2 (1 + |k|^2); raw
/// symbol sums reported by the probe tooling.
struct SymbolSums {
  double plain = 0.0;
  double weighted_h1 = 0.0;
};
SymbolSums symbol_sums(const NoiseSpec& spec, const GridSpec& grid);

}  // namespace snls
