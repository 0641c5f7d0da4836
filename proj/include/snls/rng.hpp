#pragma once

#include <cstdint>
#include <random>

#include "snls/util.hpp"

namespace snls {

/// Reproducible per-trajectory random stream. The generator state is derived
/// only from (root, cell, index), so the draw sequence is identical no matter
/// how trajectories are scheduled across workers. A single stream must not be
/// shared between threads.
class RngStream {
 public:
  explicit RngStream(std::uint64_t root, std::uint64_t cell = 0,
                     std::uint64_t index = 0)
      : key_(derive_key(root, cell, index)), engine_(key_) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  std::uint64_t raw() { return engine_(); }

  std::uint64_t key() const { return key_; }

  static std::uint64_t derive_key(std::uint64_t root, std::uint64_t cell,
                                  std::uint64_t index) {
    std::uint64_t h = splitmix64(root);
    h = splitmix64(h ^ (0x9e3779b97f4a7c15ULL * (cell + 1)));
    h = splitmix64(h ^ (0xbf58476d1ce4e5b9ULL * (index + 1)));
    return h;
  }

 private:
  std::uint64_t key_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace snls
