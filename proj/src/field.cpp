#include "snls/field.hpp"

#include <cmath>
#include <limits>

#include "snls/fft.hpp"

namespace snls {
namespace {

double unitary_scale(const GridSpec& g) {
  return 1.0 / std::sqrt(static_cast<double>(g.size()));
}

void scale_values(Field& f, double s) {
  for (auto& v : f.values()) v *= s;
}

template <typename Fn>
void for_each_mode(const GridSpec& g, Fn&& fn) {
  const int n = g.n;
  int idx[3] = {0, 0, 0};
  std::size_t flat = 0;
  switch (g.dim) {
    case 1:
      for (idx[0] = 0; idx[0] < n; ++idx[0]) fn(flat++, idx);
      break;
    case 2:
      for (idx[0] = 0; idx[0] < n; ++idx[0])
        for (idx[1] = 0; idx[1] < n; ++idx[1]) fn(flat++, idx);
      break;
    default:
      for (idx[0] = 0; idx[0] < n; ++idx[0])
        for (idx[1] = 0; idx[1] < n; ++idx[1])
          for (idx[2] = 0; idx[2] < n; ++idx[2]) fn(flat++, idx);
  }
}

Field spectral_copy(const Field& f) {
  return f.rep() == Rep::spectral ? f : to_spectral(f);
}

Field physical_copy(const Field& f) {
  return f.rep() == Rep::physical ? f : to_physical(f);
}

}  // namespace

Field to_spectral(const Field& f) {
  Field out = f;
  to_spectral_inplace(out);
  return out;
}

Field to_physical(const Field& f) {
  Field out = f;
  to_physical_inplace(out);
  return out;
}

void to_spectral_inplace(Field& f) {
  if (f.rep() != Rep::physical)
    throw ContractError("to_spectral: field is not in physical representation");
  detail::dft(f.grid(), f.values().data(), -1);
  scale_values(f, unitary_scale(f.grid()));
  f.set_rep(Rep::spectral);
}

void to_physical_inplace(Field& f) {
  if (f.rep() != Rep::spectral)
    throw ContractError("to_physical: field is not in spectral representation");
  detail::dft(f.grid(), f.values().data(), +1);
  scale_values(f, unitary_scale(f.grid()));
  f.set_rep(Rep::physical);
}

std::vector<Field> gradient(const Field& f) {
  const GridSpec& g = f.grid();
  const Field spec = spectral_copy(f);
  const int nyquist = -g.n / 2;

  std::vector<Field> out;
  out.reserve(static_cast<std::size_t>(g.dim));
  for (int axis = 0; axis < g.dim; ++axis) {
    Field d(g, Rep::spectral);
    for_each_mode(g, [&](std::size_t flat, const int idx[3]) {
      const int m = g.mode_of(idx[axis]);
      if (m == nyquist) return;  // keep the derivative real-symmetric
      const double k = g.wavenumber(m);
      d[flat] = Complex{0.0, k} * spec[flat];
    });
    to_physical_inplace(d);
    out.push_back(std::move(d));
  }
  return out;
}

double lebesgue_norm(const Field& f, double p) {
  if (!(p >= 1.0)) throw DomainError("lebesgue_norm: p must be >= 1");
  const Field phys = physical_copy(f);
  if (std::isinf(p)) {
    double m = 0.0;
    for (const auto& v : phys.values()) m = std::max(m, std::abs(v));
    return m;
  }
  double acc = 0.0;
  if (p == 2.0) {
    for (const auto& v : phys.values()) acc += std::norm(v);
  } else {
    for (const auto& v : phys.values()) acc += std::pow(std::abs(v), p);
  }
  acc *= f.grid().cell_volume();
  return std::pow(acc, 1.0 / p);
}

double sobolev_w1p_norm(const Field& f, double p) {
  if (!(p >= 1.0)) throw DomainError("sobolev_w1p_norm: p must be >= 1");
  double total = lebesgue_norm(f, p);
  for (const Field& d : gradient(f)) total += lebesgue_norm(d, p);
  return total;
}

double gradient_symbol_sq(const GridSpec& g, std::size_t flat) {
  int idx[3];
  unflatten(g, flat, idx);
  const int nyquist = -g.n / 2;
  double k2 = 0.0;
  for (int axis = 0; axis < g.dim; ++axis) {
    const int m = g.mode_of(idx[axis]);
    if (m == nyquist) continue;
    const double k = g.wavenumber(m);
    k2 += k * k;
  }
  return k2;
}

double h1_norm(const Field& f) {
  const Field spec = spectral_copy(f);
  const GridSpec& g = f.grid();
  const int nyquist = -g.n / 2;
  double acc = 0.0;
  for_each_mode(g, [&](std::size_t flat, const int idx[3]) {
    double k2 = 0.0;
    for (int axis = 0; axis < g.dim; ++axis) {
      const int m = g.mode_of(idx[axis]);
      if (m == nyquist) continue;
      const double k = g.wavenumber(m);
      k2 += k * k;
    }
    acc += (1.0 + k2) * std::norm(spec[flat]);
  });
  return std::sqrt(acc * g.cell_volume());
}

void free_propagate_spectral_inplace(Field& f, double t) {
  if (f.rep() != Rep::spectral)
    throw ContractError("free_propagate_spectral_inplace: field is not spectral");
  const GridSpec& g = f.grid();
  for_each_mode(g, [&](std::size_t flat, const int idx[3]) {
    double k2 = 0.0;
    for (int axis = 0; axis < g.dim; ++axis) {
      const double k = g.wavenumber(g.mode_of(idx[axis]));
      k2 += k * k;
    }
    f[flat] *= std::polar(1.0, k2 * t);
  });
}

Field free_propagate(const Field& f, double t) {
  Field out = spectral_copy(f);
  free_propagate_spectral_inplace(out, t);
  if (f.rep() == Rep::physical) to_physical_inplace(out);
  return out;
}

}  // namespace snls
