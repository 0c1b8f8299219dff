#include "wildscalar/interp.hpp"

#include <cmath>
#include <numbers>

#include "wildscalar/spectral.hpp"

namespace wildscalar {

namespace {

void lagrange6(double t, double w[6]) {
  static constexpr double nodes[6] = {-2, -1, 0, 1, 2, 3};
  for (int a = 0; a < 6; ++a) {
    double num = 1.0, den = 1.0;
    for (int b = 0; b < 6; ++b) {
      if (a == b) continue;
      num *= t - nodes[b];
      den *= nodes[a] - nodes[b];
    }
    w[a] = num / den;
  }
}

}  // namespace

PeriodicInterpolator::PeriodicInterpolator(const ScalarField& f, int refine)
    : g_(refine > 1 ? resample(f, f.n * refine) : f), inv_h_(g_.n / (2.0 * std::numbers::pi)) {}

double PeriodicInterpolator::operator()(double x1, double x2) const {
  const int n = g_.n;
  const double s1 = x1 * inv_h_, s2 = x2 * inv_h_;
  const double f1 = std::floor(s1), f2 = std::floor(s2);
  double w1[6], w2[6];
  lagrange6(s1 - f1, w1);
  lagrange6(s2 - f2, w2);
  const long b1 = static_cast<long>(f1) - 2, b2 = static_cast<long>(f2) - 2;
  int idx2[6];
  for (int b = 0; b < 6; ++b) idx2[b] = static_cast<int>(((b2 + b) % n + n) % n);
  double acc = 0.0;
  for (int a = 0; a < 6; ++a) {
    const int i = static_cast<int>(((b1 + a) % n + n) % n);
    const double* row = &g_.v[static_cast<std::size_t>(i) * n];
    double r = 0.0;
    for (int b = 0; b < 6; ++b) r += w2[b] * row[idx2[b]];
    acc += w1[a] * r;
  }
  return acc;
}

}  // namespace wildscalar
