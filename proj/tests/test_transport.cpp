#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "wildscalar/errors.hpp"
#include "wildscalar/interp.hpp"
#include "wildscalar/norms.hpp"
#include "wildscalar/spectral.hpp"
#include "wildscalar/transport.hpp"

using namespace wildscalar;
using std::numbers::pi;

namespace {

double wrap(double d) { return std::remainder(d, 2 * pi); }

DriftField shear_drift(int n, int m_t, double t0, double t1) {
  GridSpec g{2, n, m_t, t0, t1};
  std::vector<VectorField> frames;
  for (int j = 0; j < m_t; ++j) {
    const double t = g.time(j);
    frames.emplace_back(ScalarField::sample(n, [t](double, double y) { return t * std::sin(y); }), ScalarField(n));
  }
  return DriftField(g, std::move(frames), true, 2);
}

DriftField constant_drift(int n, int m_t, double t0, double t1, Vec2 u) {
  GridSpec g{2, n, m_t, t0, t1};
  std::vector<VectorField> frames(m_t, VectorField(ScalarField(n, u.x1), ScalarField(n, u.x2)));
  return DriftField(g, std::move(frames), true, 2);
}

}  // namespace

TEST_CASE("periodic interpolation reproduces a smooth field between nodes") {
  const int n = 32;
  auto f = [](double x, double y) { return std::sin(x) * std::cos(2 * y) + 0.5 * std::cos(3 * x - y); };
  const PeriodicInterpolator I(ScalarField::sample(n, f), 8);
  for (double x : {0.1, 1.234, 3.3, 6.2})
    for (double y : {0.05, 2.7, 5.9}) CHECK(I(x, y) == doctest::Approx(f(x, y)).epsilon(1e-9).scale(1));
}

TEST_CASE("characteristics of a time-linear shear match the closed form") {
  const DriftField drift = shear_drift(64, 9, 0.0, 2.0);
  for (const Vec2 x : {Vec2{0.3, 0.7}, Vec2{2.0, 4.0}, Vec2{5.5, 1.9}}) {
    const double t = 1.5, s = 0.25;
    const Vec2 y = advance_flow(drift, x, s, t);
    const double expect1 = x.x1 + std::sin(x.x2) * (s * s - t * t) / 2;
    CHECK(std::abs(wrap(y.x1 - expect1)) < 1e-8);
    CHECK(std::abs(wrap(y.x2 - x.x2)) < 1e-12);
  }
}

TEST_CASE("flow displacement converges under frame refinement") {
  const DriftField coarse = shear_drift(32, 5, 0.0, 2.0);
  const DriftField fine = shear_drift(32, 17, 0.0, 2.0);
  const VectorField dc = flow_displacement(coarse, 0.0, 2.0);
  const VectorField df = flow_displacement(fine, 0.0, 2.0);
  // Both resolve a time-linear drift exactly in time, so they agree to interpolation accuracy.
  CHECK(c0_norm(VectorField(dc.c[0] - df.c[0], dc.c[1] - df.c[1])) < 1e-6);
  const auto exact = ScalarField::sample(32, [](double, double y) { return -2.0 * std::sin(y); });
  CHECK(c0_norm(df.c[0] - exact) < 1e-6);
}

TEST_CASE("phase transported by a constant drift is a pure shift") {
  const Vec2 u{0.3, -0.2};
  const DriftField drift = constant_drift(32, 33, 0.0, 2.0, u);
  const Vec2 hat{1.0, 1.0};
  const double tau = 0.3;
  const PhaseFamily ph = solve_phase(drift, 3, hat, tau);
  CHECK(ph.t_center == doctest::Approx(3 * tau));
  CHECK(ph.max_deformation < 1e-10);
  int checked = 0;
  for (int j = 0; j < 33; ++j) {
    if (!ph.active(j)) continue;
    const double t = drift.grid().time(j);
    const ScalarField p = ph.pi_on(j, 32);
    const double expect = -(hat.x1 * u.x1 + hat.x2 * u.x2) * (t - ph.t_center);
    CHECK(c0_norm(p - ScalarField(32, expect)) < 1e-10);
    ++checked;
  }
  CHECK(checked >= 3);
}

TEST_CASE("excessive deformation is rejected") {
  const DriftField drift = shear_drift(32, 17, 0.0, 4.0);
  CHECK_THROWS_AS(solve_phase(drift, 6, {4.0, 0.0}, 0.6, 0.01), Error);
}

TEST_CASE("spatial mollification preserves means and rejects unresolved radii") {
  const auto f = ScalarField::sample(64, [](double x, double y) { return 2.0 + std::cos(x) * std::sin(3 * y); });
  const ScalarField g = spatial_mollify(f, 0.3);
  CHECK(g.mean() == doctest::Approx(2.0));
  CHECK(c0_norm(g - f) < 0.5);
  CHECK_THROWS_AS(spatial_mollify(f, 0.01), Error);
}

TEST_CASE("flow mollification leaves a transported profile equal to its spatial mollification") {
  const int n = 64, m_t = 33;
  const Vec2 u{0.7, 0.0};
  const DriftField drift = constant_drift(32, m_t, 0.0, 2.0, u);
  GridSpec g{2, n, m_t, 0.0, 2.0};
  TimeSlab f(g, "f");
  for (int j = 0; j < m_t; ++j) {
    const double t = g.time(j);
    f.set(j, ScalarField::sample(n, [&](double x, double y) { return std::cos(x - u.x1 * t) + 0.2 * std::sin(2 * y); }));
  }
  MollifyReport rep;
  const TimeSlab m = flow_mollify(f, drift, 0.3, 0.2, &rep);
  CHECK(rep.time_taps > 1);
  double worst = 0;
  for (int j = 0; j < m_t; ++j) worst = std::max(worst, c0_norm(m.get(j) - spatial_mollify(f.get(j), 0.3)));
  CHECK(worst < 1e-6);
}

TEST_CASE("coarse grid holds every retained mode") {
  CHECK(coarse_size_for(8.0, 512) == 64);
  CHECK(coarse_size_for(1.0, 512) == 32);
  CHECK(coarse_size_for(400.0, 512) == 512);
}
