#include <doctest.h>

#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "snls/diagnostics.hpp"
#include "snls/noise.hpp"
#include "snls/util.hpp"

using namespace snls;
using namespace snls::testing;

namespace {

NoiseSpec gaussian_noise(double eps, int k_max, double sigma = 3.0) {
  NoiseSpec spec;
  spec.family = SymbolFamily::gaussian;
  spec.sigma = sigma;
  spec.epsilon = eps;
  spec.k_max = k_max;
  return spec;
}

// Independent oracle: per-point increment variance summed over the real trig
// basis, dt eps^2 [phihat(0)^2/L^d + sum_pairs phihat^2 (2/L^d)(cos^2+sin^2)].
double variance_oracle_1d(const NoiseSpec& spec, const GridSpec& g, double dt,
                          double x) {
  const double box = g.length;
  double acc = ipow(spec.symbol(0.0), 2) / box;
  for (int m = 1; m <= spec.resolved_k_max(g); ++m) {
    const double k = g.wavenumber(m);
    const double c = std::cos(k * x), s = std::sin(k * x);
    acc += ipow(spec.symbol(k * k), 2) * (2.0 / box) * (c * c + s * s);
  }
  return dt * spec.epsilon * spec.epsilon * acc;
}

}  // namespace

TEST_CASE("zero amplitude gives the zero increment") {
  const GridSpec g(1, 64, 16.0);
  RngStream rng(1);
  const NoiseIncrement inc = sample_increment(gaussian_noise(0.0, 8), g, 0.01, rng);
  for (const auto& v : inc.dw.values()) CHECK(v == Complex{0.0, 0.0});
}

TEST_CASE("nonpositive dt is rejected") {
  const GridSpec g(1, 64, 16.0);
  RngStream rng(1);
  CHECK_THROWS_AS(sample_increment(gaussian_noise(1.0, 4), g, 0.0, rng), DomainError);
  CHECK_THROWS_AS(sample_increment(gaussian_noise(1.0, 4), g, -1.0, rng), DomainError);
}

TEST_CASE("increments are real and band-limited") {
  const GridSpec g(2, 32, 8.0);
  RngStream rng(7);
  const NoiseSpec spec = gaussian_noise(0.8, 6);
  const NoiseIncrement inc = sample_increment(spec, g, 0.05, rng);
  for (const auto& v : inc.dw.values()) CHECK(v.imag() == 0.0);

  Field spect = to_spectral(inc.dw);
  int idx[3];
  for (std::size_t i = 0; i < spect.size(); ++i) {
    unflatten(g, i, idx);
    int m_inf = 0;
    for (int a = 0; a < g.dim; ++a)
      m_inf = std::max(m_inf, std::abs(g.mode_of(idx[a])));
    if (m_inf > 6) CHECK(std::abs(spect[i]) < 1e-12);
  }
}

TEST_CASE("constant-mode increment variance matches the single-mode identity") {
  const GridSpec g(1, 32, 8.0);
  const NoiseSpec spec = gaussian_noise(0.6, /*k_max=*/0);
  const double dt = 0.02;
  const int samples = 100000;
  RngStream rng(123);

  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < samples; ++i) {
    const NoiseIncrement inc = sample_increment(spec, g, dt, rng);
    // spatially constant by construction
    CHECK(std::abs(inc.dw[5].real() - inc.dw[20].real()) < 1e-14);
    const double w = inc.dw[0].real();
    sum += w;
    sum_sq += w * w;
  }
  const double mean = sum / samples;
  const double var = sum_sq / samples - mean * mean;
  const double expected =
      dt * spec.epsilon * spec.epsilon * ipow(spec.symbol(0.0), 2) / g.length;
  const double se = expected * std::sqrt(2.0 / (samples - 1.0));
  CHECK(std::abs(mean) < 4.0 * std::sqrt(expected / samples));
  CHECK(std::abs(var - expected) < 3.0 * se);
}

TEST_CASE("pointwise variance matches direct summation over the basis") {
  const GridSpec g(1, 32, 8.0);
  const NoiseSpec spec = gaussian_noise(0.7, 8, /*sigma=*/3.0);
  const double dt = 0.04;
  const int samples = 10000;
  RngStream rng(99);

  std::vector<double> sum(g.size(), 0.0), sum_sq(g.size(), 0.0);
  for (int i = 0; i < samples; ++i) {
    const NoiseIncrement inc = sample_increment(spec, g, dt, rng);
    for (std::size_t x = 0; x < g.size(); ++x) {
      const double w = inc.dw[x].real();
      sum[x] += w;
      sum_sq[x] += w * w;
    }
  }
  const double rel_se = std::sqrt(2.0 / (samples - 1.0));
  for (std::size_t x = 0; x < g.size(); ++x) {
    const double mean = sum[x] / samples;
    const double var = sum_sq[x] / samples - mean * mean;
    const double ref = variance_oracle_1d(spec, g, dt, g.coord(static_cast<int>(x)));
    CHECK(std::abs(var - ref) < 5.0 * rel_se * ref);
  }
}

TEST_CASE("covariance is stationary across base points") {
  const GridSpec g(1, 64, 16.0);
  const NoiseSpec spec = gaussian_noise(1.0, 8);
  const double dt = 0.01;
  const int samples = 20000;
  RngStream rng(2024);

  const int lag = 5;
  const int base_a = 3, base_b = 31;
  double cov_a = 0.0, cov_b = 0.0, var0 = 0.0;
  for (int i = 0; i < samples; ++i) {
    const NoiseIncrement inc = sample_increment(spec, g, dt, rng);
    const auto at = [&](int j) { return inc.dw[static_cast<std::size_t>(j)].real(); };
    cov_a += at(base_a) * at(base_a + lag);
    cov_b += at(base_b) * at(base_b + lag);
    var0 += at(base_a) * at(base_a);
  }
  cov_a /= samples;
  cov_b /= samples;
  var0 /= samples;
  CHECK(std::abs(cov_a - cov_b) < 6.0 * var0 / std::sqrt(static_cast<double>(samples)));
}

TEST_CASE("increments from one stream are uncorrelated across steps") {
  const GridSpec g(1, 32, 8.0);
  const NoiseSpec spec = gaussian_noise(1.0, 4);
  const int samples = 10000;
  RngStream rng(5);

  double prev = 0.0, cross = 0.0, var = 0.0;
  for (int i = 0; i < samples + 1; ++i) {
    const NoiseIncrement inc = sample_increment(spec, g, 0.01, rng);
    const double w = inc.dw[7].real();
    if (i > 0) {
      cross += prev * w;
      var += prev * prev;
    }
    prev = w;
  }
  const double corr = cross / var;
  CHECK(std::abs(corr) < 3.0 / std::sqrt(static_cast<double>(samples)));
}

TEST_CASE("increments are bitwise identical under any scheduling") {
  const GridSpec g(1, 64, 16.0);
  const NoiseSpec spec = gaussian_noise(0.9, 8);
  const int streams = 8;

  std::vector<std::vector<Complex>> serial(streams), threaded(streams);
  for (int i = 0; i < streams; ++i) {
    RngStream rng(77, 0, static_cast<std::uint64_t>(i));
    serial[static_cast<std::size_t>(i)] =
        sample_increment(spec, g, 0.02, rng).dw.values();
  }
  parallel_for(streams, 4, [&](std::size_t i) {
    RngStream rng(77, 0, i);
    threaded[i] = sample_increment(spec, g, 0.02, rng).dw.values();
  });
  for (int i = 0; i < streams; ++i)
    CHECK(serial[static_cast<std::size_t>(i)] == threaded[static_cast<std::size_t>(i)]);
}

TEST_CASE("correction field closed forms") {
  SUBCASE("zero amplitude") {
    const GridSpec g(1, 32, 8.0);
    const Field f = correction_field(gaussian_noise(0.0, 4), g);
    for (const auto& v : f.values()) CHECK(v == Complex{0.0, 0.0});
  }
  SUBCASE("single constant mode") {
    const GridSpec g(1, 32, 8.0);
    const NoiseSpec spec = gaussian_noise(0.5, 0);
    const Field f = correction_field(spec, g);
    const double expected = 0.25 * ipow(spec.symbol(0.0), 2) / g.length;
    for (const auto& v : f.values())
      CHECK(v.real() == doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("full pair set collapses to a constant") {
    const GridSpec g(2, 16, 4.0);
    const NoiseSpec spec = gaussian_noise(0.8, 4, /*sigma=*/2.0);
    const Field f = correction_field(spec, g);
    double lo = 1e300, hi = -1e300;
    for (const auto& v : f.values()) {
      lo = std::min(lo, v.real());
      hi = std::max(hi, v.real());
    }
    CHECK((hi - lo) / hi < 1e-10);
    // independent sum over the lattice
    double acc = ipow(spec.symbol(0.0), 2) / ipow(g.length, 2);
    const double nu2 = 2.0 / ipow(g.length, 2);
    for (int m0 = -4; m0 <= 4; ++m0)
      for (int m1 = -4; m1 <= 4; ++m1) {
        if (m0 == 0 && m1 == 0) continue;
        const bool canonical = m0 > 0 || (m0 == 0 && m1 > 0);
        if (!canonical) continue;
        const double k2 = ipow(g.wavenumber(m0), 2) + ipow(g.wavenumber(m1), 2);
        acc += ipow(spec.symbol(k2), 2) * nu2;
      }
    acc *= spec.epsilon * spec.epsilon;
    CHECK(f[3].real() == doctest::Approx(acc).epsilon(1e-10));
  }
}

TEST_CASE("variance of the increment matches dt times the correction field") {
  const GridSpec g(1, 32, 8.0);
  const NoiseSpec spec = gaussian_noise(0.7, 6);
  const double dt = 0.05;
  const Field f_phi = correction_field(spec, g);
  const double oracle = variance_oracle_1d(spec, g, dt, g.coord(11));
  CHECK(dt * f_phi[11].real() == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("streams with distinct indices decorrelate") {
  const int n = 4000;
  RngStream a(9, 0, 1), b(9, 0, 2);
  double cross = 0.0, va = 0.0, vb = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = a.normal(), y = b.normal();
    cross += x * y;
    va += x * x;
    vb += y * y;
  }
  CHECK(std::abs(cross / std::sqrt(va * vb)) < 4.0 / std::sqrt(static_cast<double>(n)));

  RngStream c(9, 0, 1);
  for (int i = 0; i < 16; ++i) CHECK(RngStream(9, 0, 1).key() == c.key());
}
