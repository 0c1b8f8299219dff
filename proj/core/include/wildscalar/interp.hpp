#pragma once

#include <array>

#include "wildscalar/grid.hpp"

namespace wildscalar {

/// Six-point periodic Lagrange interpolation on a field that is first spectrally refined
/// by an integer factor (trigonometric interpolation onto the finer grid).
class PeriodicInterpolator {
 public:
  PeriodicInterpolator() = default;
  PeriodicInterpolator(const ScalarField& f, int refine);
  double operator()(double x1, double x2) const;
  int n() const { return g_.n; }

 private:
  ScalarField g_;
  double inv_h_ = 1.0;
};

struct VectorInterpolator {
  std::array<PeriodicInterpolator, 2> c;
  VectorInterpolator() = default;
  VectorInterpolator(const VectorField& f, int refine)
      : c{PeriodicInterpolator(f.c[0], refine), PeriodicInterpolator(f.c[1], refine)} {}
  Vec2 operator()(double x1, double x2) const { return {c[0](x1, x2), c[1](x1, x2)}; }
};

}  // namespace wildscalar
