#include "snls/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>
#include <vector>

namespace snls::detail {
namespace {

struct PlanCache {
  std::mutex mu;
  std::map<std::tuple<int, int, int>, fftw_plan> plans;

  fftw_plan get(const GridSpec& g, int sign) {
    const auto key = std::make_tuple(g.dim, g.n, sign);
    std::lock_guard<std::mutex> lock(mu);
    auto it = plans.find(key);
    if (it != plans.end()) return it->second;
    // FFTW_UNALIGNED keeps the plan valid for whatever arrays callers pass
    // to fftw_execute_dft later.
    std::vector<fftw_complex> scratch(g.size());
    int dims[3] = {g.n, g.n, g.n};
    fftw_plan plan = fftw_plan_dft(g.dim, dims, scratch.data(), scratch.data(),
                                   sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans.emplace(key, plan);
    return plan;
  }
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

}  // namespace

void dft(const GridSpec& grid, std::complex<double>* data, int sign) {
  fftw_plan plan = cache().get(grid, sign);
  auto* raw = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(plan, raw, raw);
}

}  // namespace snls::detail
