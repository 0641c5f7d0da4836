#include "snls/noise.hpp"

#include <algorithm>
#include <cmath>

namespace snls {
namespace {

struct ModeVisitor {
  // mode[] is the lattice point; kind: 0 = constant, 1 = canonical pair rep.
  // Canonical representative: first nonzero component positive. Visiting
  // order is row-major over the cube, which fixes the Brownian coordinate
  // layout once and for all.
  template <typename Fn>
  static void visit(const GridSpec& g, int k_max, Fn&& fn) {
    int m[3] = {0, 0, 0};
    const int lo = -k_max, hi = k_max;
    auto dispatch = [&](const int mm[3]) {
      int first_nonzero = 0;
      for (int a = 0; a < g.dim; ++a) {
        if (mm[a] != 0) {
          first_nonzero = mm[a];
          break;
        }
      }
      if (first_nonzero == 0)
        fn(mm, /*kind=*/0);
      else if (first_nonzero > 0)
        fn(mm, /*kind=*/1);
    };
    if (g.dim == 1) {
      for (m[0] = lo; m[0] <= hi; ++m[0]) dispatch(m);
    } else if (g.dim == 2) {
      for (m[0] = lo; m[0] <= hi; ++m[0])
        for (m[1] = lo; m[1] <= hi; ++m[1]) dispatch(m);
    } else {
      for (m[0] = lo; m[0] <= hi; ++m[0])
        for (m[1] = lo; m[1] <= hi; ++m[1])
          for (m[2] = lo; m[2] <= hi; ++m[2]) dispatch(m);
    }
  }
};

double mode_k2(const GridSpec& g, const int m[3]) {
  double k2 = 0.0;
  for (int a = 0; a < g.dim; ++a) {
    const double k = g.wavenumber(m[a]);
    k2 += k * k;
  }
  return k2;
}

std::size_t spectral_index(const GridSpec& g, const int m[3], int sign) {
  int idx[3] = {0, 0, 0};
  for (int a = 0; a < g.dim; ++a) {
    const int mm = sign * m[a];
    idx[a] = mm >= 0 ? mm : mm + g.n;
  }
  return flatten(g, idx);
}

}  // namespace

std::size_t brownian_dim(const NoiseSpec& spec, const GridSpec& grid) {
  const int k = spec.resolved_k_max(grid);
  std::size_t count = 0;
  ModeVisitor::visit(grid, k, [&](const int*, int kind) {
    count += (kind == 0) ? 1 : 2;
  });
  return count;
}

std::vector<double> draw_brownian(const NoiseSpec& spec, const GridSpec& grid,
                                  double dt, RngStream& rng) {
  if (!(dt > 0.0)) throw DomainError("noise: dt must be positive");
  const double root_dt = std::sqrt(dt);
  std::vector<double> db(brownian_dim(spec, grid));
  for (auto& x : db) x = root_dt * rng.normal();
  return db;
}

NoiseIncrement synthesize_increment(const NoiseSpec& spec, const GridSpec& grid,
                                    const std::vector<double>& brownian,
                                    double dt) {
  if (!(dt > 0.0)) throw DomainError("noise: dt must be positive");
  if (brownian.size() != brownian_dim(spec, grid))
    throw ContractError("noise: Brownian coordinate count mismatch");

  Field spec_field(grid, Rep::spectral);
  const int k_max = spec.resolved_k_max(grid);
  const double box_vol = ipow(grid.length, grid.dim);
  const double nu = std::sqrt(2.0 / box_vol);
  const double n_half = std::sqrt(static_cast<double>(grid.size()));
  const double eps = spec.epsilon;

  std::size_t slot = 0;
  ModeVisitor::visit(grid, k_max, [&](const int m[3], int kind) {
    const double phi = spec.symbol(mode_k2(grid, m));
    if (kind == 0) {
      const double db = brownian[slot++];
      spec_field[0] = Complex{eps * db * phi * n_half / std::sqrt(box_vol), 0.0};
    } else {
      const double a = brownian[slot++];  // cosine coordinate
      const double b = brownian[slot++];  // sine coordinate
      const double c = eps * phi * nu * n_half * 0.5;
      spec_field[spectral_index(grid, m, +1)] = Complex{c * a, -c * b};
      spec_field[spectral_index(grid, m, -1)] = Complex{c * a, +c * b};
    }
  });

  to_physical_inplace(spec_field);

  // Hermitian symmetry makes the result real up to rounding; enforce that
  // exactly so the phase substep is an exact isometry.
  double max_re = 0.0, max_im = 0.0;
  for (const auto& v : spec_field.values()) {
    max_re = std::max(max_re, std::abs(v.real()));
    max_im = std::max(max_im, std::abs(v.imag()));
  }
  if (max_im > 1e-13 * std::max(1.0, max_re))
    throw ContractError("noise: synthesized increment is not real");
  for (auto& v : spec_field.values()) v = Complex{v.real(), 0.0};

  return NoiseIncrement{std::move(spec_field), dt};
}

NoiseIncrement sample_increment(const NoiseSpec& spec, const GridSpec& grid,
                                double dt, RngStream& rng) {
  return synthesize_increment(spec, grid, draw_brownian(spec, grid, dt, rng), dt);
}

Field correction_field(const NoiseSpec& spec, const GridSpec& grid) {
  Field out(grid, Rep::physical);
  const int k_max = spec.resolved_k_max(grid);
  const double box_vol = ipow(grid.length, grid.dim);
  const double nu2 = 2.0 / box_vol;
  const double eps2 = spec.epsilon * spec.epsilon;
  const std::size_t npts = grid.size();

  // O(|K| N^d) direct summation; fine off the hot path.
  ModeVisitor::visit(grid, k_max, [&](const int m[3], int kind) {
    const double phi2 = eps2 * ipow(spec.symbol(mode_k2(grid, m)), 2);
    if (kind == 0) {
      const double add = phi2 / box_vol;
      for (std::size_t i = 0; i < npts; ++i) out[i] += add;
    } else {
      double kvec[3] = {0, 0, 0};
      for (int a = 0; a < grid.dim; ++a) kvec[a] = grid.wavenumber(m[a]);
      int idx[3];
      for (std::size_t i = 0; i < npts; ++i) {
        unflatten(grid, i, idx);
        double kx = 0.0;
        for (int a = 0; a < grid.dim; ++a) kx += kvec[a] * grid.coord(idx[a]);
        const double c = std::cos(kx), s = std::sin(kx);
        out[i] += phi2 * nu2 * (c * c + s * s);
      }
    }
  });
  return out;
}

SymbolSums symbol_sums(const NoiseSpec& spec, const GridSpec& grid) {
  SymbolSums sums;
  const int k_max = spec.resolved_k_max(grid);
  ModeVisitor::visit(grid, k_max, [&](const int m[3], int kind) {
    const double k2 = mode_k2(grid, m);
    const double phi2 = ipow(spec.symbol(k2), 2);
    const int mult = (kind == 0) ? 1 : 2;  // count both pair members
    sums.plain += mult * phi2;
    sums.weighted_h1 += mult * phi2 * (1.0 + k2);
  });
  return sums;
}

}  // namespace snls
