#include "wildscalar/norms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wildscalar/errors.hpp"

namespace wildscalar {

double c0_norm(const ScalarField& f) {
  double m = 0.0;
  for (double x : f.v) m = std::max(m, std::abs(x));
  return m;
}

double c0_norm(const VectorField& f) {
  double m = 0.0;
  for (std::size_t i = 0; i < f.c[0].v.size(); ++i) m = std::max(m, std::hypot(f.c[0].v[i], f.c[1].v[i]));
  return m;
}

double c0_norm(const ComplexField& f) {
  double m = 0.0;
  for (const cplx& z : f.v) m = std::max(m, std::abs(z));
  return m;
}

double c0_norm(const TimeSlab& s) {
  double m = 0.0;
  for (double x : s.raw()) m = std::max(m, std::abs(x));
  return m;
}

double c0_norm(const VectorSlab& s) {
  double m = 0.0;
  auto a = s.c[0].raw();
  auto b = s.c[1].raw();
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::hypot(a[i], b[i]));
  return m;
}

double ck_norm(const ScalarField& f, int k) {
  if (k < 0 || k > 4) throw Error(ErrorKind::InvalidArgument, "ck_norm supports 0 <= k <= 4");
  if (k == 0) return c0_norm(f);
  const Spectrum s = forward(f);
  double m = 0.0;
  for (int a = 0; a <= k; ++a) {
    Spectrum d = s;
    for (int i = 0; i < a; ++i) d = derivative(d, Axis::x1);
    for (int i = 0; i < k - a; ++i) d = derivative(d, Axis::x2);
    m = std::max(m, c0_norm(inverse(d)));
  }
  return m;
}

double holder_seminorm(const ScalarField& f, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::InvalidArgument, "holder alpha must lie in (0,1)");
  const int n = f.n;
  const double h = 2.0 * std::numbers::pi / n;
  static constexpr int dirs[4][2] = {{1, 0}, {0, 1}, {1, 1}, {1, -1}};
  double best = 0.0;
  for (int step = 1; step <= n / 2; step *= 2) {
    for (const auto& d : dirs) {
      const double dist = h * step * std::hypot(double(d[0]), double(d[1]));
      const double inv = 1.0 / std::pow(dist, alpha);
      for (int i = 0; i < n; ++i) {
        const int ii = ((i + d[0] * step) % n + n) % n;
        for (int j = 0; j < n; ++j) {
          const int jj = ((j + d[1] * step) % n + n) % n;
          best = std::max(best, std::abs(f(ii, jj) - f(i, j)) * inv);
        }
      }
    }
  }
  return best;
}

double holder_seminorm_exhaustive_slice(const ScalarField& f, double alpha, int row) {
  const int n = f.n;
  const double h = 2.0 * std::numbers::pi / n;
  double best = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const int sep = std::min(j - i, n - (j - i));
      best = std::max(best, std::abs(f(i, row) - f(j, row)) / std::pow(h * sep, alpha));
    }
  return best;
}

}  // namespace wildscalar
