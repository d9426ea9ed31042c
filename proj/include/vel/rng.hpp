#pragma once

#include <random>

namespace vel {

// seeded, stream-stable RNG used by every fuzz suite and scenario
struct Rng {
  std::mt19937_64 eng;
  explicit Rng(unsigned long long seed) : eng(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(eng);
  }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng); }
};

}  // namespace vel
