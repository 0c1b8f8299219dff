#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "wildscalar/grid.hpp"

namespace wildscalar {

/// Uniform [0,1) from the top 53 bits, independent of the standard library's distribution code.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

/// Mean-zero trigonometric polynomial with random coefficients on |k_i| <= kmax, scaled to unit sup-bound of the coefficient sum.
inline ScalarField random_smooth_field(int n, int kmax, std::mt19937_64& rng) {
  struct Mode {
    int k1, k2;
    double a, phase;
  };
  std::vector<Mode> modes;
  double total = 0.0;
  for (int k1 = -kmax; k1 <= kmax; ++k1)
    for (int k2 = 0; k2 <= kmax; ++k2) {
      if (k2 == 0 && k1 <= 0) continue;
      const Mode m{k1, k2, uniform(rng, -1.0, 1.0), uniform(rng, 0.0, 2.0 * std::numbers::pi)};
      total += std::abs(m.a);
      modes.push_back(m);
    }
  return ScalarField::sample(n, [&](double x1, double x2) {
    double s = 0.0;
    for (const auto& m : modes) s += m.a * std::cos(m.k1 * x1 + m.k2 * x2 + m.phase);
    return s / total;
  });
}

}  // namespace wildscalar
