#pragma once

#include <complex>

#include "snls/grid.hpp"

namespace snls::detail {

/// Unnormalized in-place DFT over the full grid; sign -1 is the forward
/// transform (e^{-ikx}), +1 the backward one. Thread-safe: plans are cached
/// per (dim, n, sign) under a lock, execution is lock-free.
void dft(const GridSpec& grid, std::complex<double>* data, int sign);

}  // namespace snls::detail
