#pragma once

#include <complex>
#include <vector>

#include "snls/grid.hpp"

namespace snls {

enum class Rep { physical, spectral };

using Complex = std::complex<double>;

/// Complex-valued function on a periodic grid, stored either as point values
/// or as unitary-DFT coefficients. The transform pair preserves the discrete
/// L2 norm (normalization 1/N^{d/2} both ways).
class Field {
 public:
  Field() = default;
  Field(GridSpec grid, Rep rep)
      : grid_(grid), rep_(rep), values_(grid.size(), Complex{0.0, 0.0}) {}
  Field(GridSpec grid, Rep rep, std::vector<Complex> values)
      : grid_(grid), rep_(rep), values_(std::move(values)) {
    if (values_.size() != grid_.size())
      throw ContractError("field: value count does not match grid");
  }

  const GridSpec& grid() const { return grid_; }
  Rep rep() const { return rep_; }
  void set_rep(Rep r) { rep_ = r; }

  std::vector<Complex>& values() { return values_; }
  const std::vector<Complex>& values() const { return values_; }
  Complex& operator[](std::size_t i) { return values_[i]; }
  const Complex& operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

 private:
  GridSpec grid_;
  Rep rep_ = Rep::physical;
  std::vector<Complex> values_;
};

/// Unitary transforms. The representation tag must match; use the _inplace
/// variants in hot loops.
Field to_spectral(const Field& f);
Field to_physical(const Field& f);
void to_spectral_inplace(Field& f);
void to_physical_inplace(Field& f);

/// Spectral-multiplier partial derivatives, returned in physical
/// representation. The Nyquist mode's derivative coefficient is zeroed.
std::vector<Field> gradient(const Field& f);

/// (h^d sum |f|^p)^{1/p}; p = inf gives the grid max. Requires p >= 1.
double lebesgue_norm(const Field& f, double p);

/// ||f||_p + sum_j ||d_j f||_p  (sum-of-norms convention).
double sobolev_w1p_norm(const Field& f, double p);

/// (||f||_2^2 + ||grad f||_2^2)^{1/2}, evaluated spectrally.
double h1_norm(const Field& f);

/// Free Schroedinger flow: spectral multiplication by exp(i |k|^2 t).
/// Returns a field in the same representation as the input; L2-isometric.
Field free_propagate(const Field& f, double t);

/// Applies the free flow to a field already in spectral representation.
void free_propagate_spectral_inplace(Field& f, double t);

/// |k|^2 for the flat spectral index, with the per-axis Nyquist handling of
/// `gradient` applied (used to evaluate H1 norms consistently).
double gradient_symbol_sq(const GridSpec& g, std::size_t flat);

}  // namespace snls
