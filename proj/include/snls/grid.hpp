#pragma once

#include <cmath>
#include <cstddef>

#include "snls/errors.hpp"
#include "snls/util.hpp"

namespace snls {

inline constexpr double kPi = 3.14159265358979323846;

/// Uniform periodic grid on the box [0, L)^d. Spectral modes are the integers
/// m in [-N/2, N/2) per axis with wavenumber 2*pi*m/L.
struct GridSpec {
  int dim = 1;
  int n = 64;          // points per side, power of two
  double length = 2.0 * kPi;

  GridSpec() = default;
  GridSpec(int d, int points, double box_length)
      : dim(d), n(points), length(box_length) {
    validate();
  }

  void validate() const {
    if (dim < 1 || dim > 3) throw DomainError("grid: dimension must be 1, 2 or 3");
    if (n < 8 || (n & (n - 1)) != 0)
      throw DomainError("grid: points per side must be a power of two >= 8");
    if (!(length > 0.0)) throw DomainError("grid: box length must be positive");
  }

  std::size_t size() const {
    std::size_t s = 1;
    for (int a = 0; a < dim; ++a) s *= static_cast<std::size_t>(n);
    return s;
  }

  double spacing() const { return length / n; }
  double cell_volume() const { return ipow(spacing(), dim); }

  /// Centered mode number for flat per-axis index i in [0, N).
  int mode_of(int i) const { return i < n / 2 ? i : i - n; }

  double wavenumber(int mode) const { return 2.0 * kPi * mode / length; }

  /// Physical coordinate of per-axis index i.
  double coord(int i) const { return i * spacing(); }

  bool operator==(const GridSpec&) const = default;
};

/// Decodes a flat row-major index into per-axis indices (axis 0 slowest).
inline void unflatten(const GridSpec& g, std::size_t flat, int idx[3]) {
  idx[1] = idx[2] = 0;
  for (int a = g.dim - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % static_cast<std::size_t>(g.n));
    flat /= static_cast<std::size_t>(g.n);
  }
}

inline std::size_t flatten(const GridSpec& g, const int idx[3]) {
  std::size_t flat = 0;
  for (int a = 0; a < g.dim; ++a)
    flat = flat * static_cast<std::size_t>(g.n) + static_cast<std::size_t>(idx[a]);
  return flat;
}

}  // namespace snls
