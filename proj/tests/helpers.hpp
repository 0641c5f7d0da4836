#pragma once

#include <cmath>
#include <complex>
#include <random>

#include "snls/field.hpp"

namespace snls::testing {

/// A e^{-|x-c|^2 / (2 w^2)} centered at the box center unless given.
inline Field gaussian_field(const GridSpec& g, double amplitude, double width,
                            const double* center = nullptr) {
  Field u(g, Rep::physical);
  int idx[3];
  for (std::size_t i = 0; i < u.size(); ++i) {
    unflatten(g, i, idx);
    double r2 = 0.0;
    for (int a = 0; a < g.dim; ++a) {
      const double c = center ? center[a] : 0.5 * g.length;
      const double dx = g.coord(idx[a]) - c;
      r2 += dx * dx;
    }
    u[i] = Complex{amplitude * std::exp(-r2 / (2.0 * width * width)), 0.0};
  }
  return u;
}

inline Field plane_wave(const GridSpec& g, const int mode[3], double amplitude = 1.0) {
  Field u(g, Rep::physical);
  int idx[3];
  for (std::size_t i = 0; i < u.size(); ++i) {
    unflatten(g, i, idx);
    double kx = 0.0;
    for (int a = 0; a < g.dim; ++a)
      kx += g.wavenumber(mode[a]) * g.coord(idx[a]);
    u[i] = amplitude * std::polar(1.0, kx);
  }
  return u;
}

/// iid complex-normal point values; band_limit >= 0 keeps only |m|_inf <= band.
inline Field random_field(const GridSpec& g, unsigned seed, int band_limit = -1) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> normal;
  Field u(g, Rep::physical);
  for (auto& v : u.values()) v = Complex{normal(eng), normal(eng)};
  if (band_limit >= 0) {
    to_spectral_inplace(u);
    int idx[3];
    for (std::size_t i = 0; i < u.size(); ++i) {
      unflatten(g, i, idx);
      for (int a = 0; a < g.dim; ++a)
        if (std::abs(g.mode_of(idx[a])) > band_limit) {
          u[i] = Complex{0.0, 0.0};
          break;
        }
    }
    to_physical_inplace(u);
  }
  return u;
}

inline double rel_l2_diff(const Field& a, const Field& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a[i] - b[i]);
    den += std::norm(a[i]);
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

inline double sup_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace snls::testing
