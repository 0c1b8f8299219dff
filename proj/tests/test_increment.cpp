#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "wildscalar/errors.hpp"
#include "wildscalar/increment.hpp"
#include "wildscalar/norms.hpp"
#include "wildscalar/spectral.hpp"
#include "wildscalar/symbols.hpp"
#include "wildscalar/transport.hpp"

using namespace wildscalar;

namespace {

double bump(double t, double lo, double hi) {
  if (t <= lo || t >= hi) return 0.0;
  const double s = (t - lo) / (hi - lo);
  return std::pow(std::sin(M_PI * s), 4);
}

TimeSlab coefficient(const GridSpec& g, double amp) {
  TimeSlab c(g, "c");
  for (int j = 0; j < g.m_t; ++j) {
    const double b = amp * bump(g.time(j), 1.0, 2.0);
    c.set(j, ScalarField::sample(g.n, [b](double x, double y) { return b * (std::sin(x) + 0.5 * std::cos(y)); }));
  }
  return c;
}

}  // namespace

TEST_CASE("quintic smoothstep derivatives agree with finite differences") {
  const double h = 1e-5;
  for (double x : {0.1, 0.37, 0.5, 0.81}) {
    CHECK(smoothstep5_d1(x) == doctest::Approx((smoothstep5(x + h) - smoothstep5(x - h)) / (2 * h)).epsilon(1e-8));
    CHECK(smoothstep5_d2(x) == doctest::Approx((smoothstep5_d1(x + h) - smoothstep5_d1(x - h)) / (2 * h)).epsilon(1e-7));
  }
  CHECK(smoothstep5(0.0) == 0.0);
  CHECK(smoothstep5(1.0) == 1.0);
}

TEST_CASE("time cutoffs square-sum to one across the window") {
  const CutoffFamily cut = build_cutoffs(0.3, 0.0, 2.0);
  double worst = 0;
  for (int i = 0; i <= 4000; ++i) worst = std::max(worst, std::abs(cut.partition_sum(2.0 * i / 4000) - 1.0));
  CHECK(worst <= 1e-12);
  CHECK(CutoffFamily::profile(0.0) == 1.0);
  CHECK(CutoffFamily::profile(0.3) == 1.0);
  CHECK(CutoffFamily::profile(0.7) == 0.0);
  CHECK(CutoffFamily::profile(-0.5) == doctest::Approx(CutoffFamily::profile(0.5)));
  CHECK(cut.active(1.0).size() <= 2);
}

TEST_CASE("cutoffs longer than a third of the window are rejected") {
  CHECK_THROWS_AS(build_cutoffs(1.0, 0.0, 2.0), Error);
}

TEST_CASE("measured time support brackets the nonzero frames") {
  GridSpec g{2, 16, 41, 0.0, 4.0};
  bool empty = true;
  const auto [lo, hi] = measured_time_support(coefficient(g, 1.0), &empty);
  CHECK_FALSE(empty);
  CHECK(lo == doctest::Approx(1.1));
  CHECK(hi == doctest::Approx(1.9));
  measured_time_support(TimeSlab(g, "zero"), &empty);
  CHECK(empty);
}

TEST_CASE("lifting plateau covers the support and its derivatives obey the configured bounds") {
  GridSpec g{2, 16, 81, 0.0, 4.0};
  const TimeSlab c = coefficient(g, 0.5);
  const double delta = 1.0, tau_hat = 0.25, rate = 1.0 / tau_hat;
  const LiftingSpec L = build_lifting(c, 1, delta, tau_hat, rate, 4.0, 4.0);
  CHECK(L.e(1.5) == doctest::Approx(4.0));
  CHECK(L.e(L.it_lo - tau_hat) == doctest::Approx(4.0));
  CHECK(L.e(L.it_hi + 3.5 * tau_hat) == 0.0);
  for (const auto& chk : L.derivative_checks) CHECK(chk.pass());
  CHECK(L.min_dominance_margin > 0.0);
}

TEST_CASE("stress coefficients above half the lifting height are infeasible") {
  GridSpec g{2, 16, 81, 0.0, 4.0};
  CHECK_THROWS_AS(build_lifting(coefficient(g, 2.0), 1, 1.0, 0.25, 4.0, 4.0, 4.0), Error);
}

TEST_CASE("amplitude squares sum to the radicand") {
  GridSpec g{2, 32, 81, 0.0, 4.0};
  const TimeSlab c = coefficient(g, 0.5);
  for (int sign : {1, -1}) {
    const LiftingSpec L = build_lifting(c, sign, 1.0, 0.25, 4.0, 4.0, 4.0);
    const CutoffFamily cut = build_cutoffs(0.2, g.t0, g.t1);
    const AmplitudeSet A = build_amplitudes(L, cut, c, sign);
    double worst = 0;
    for (int j = 0; j < g.m_t; ++j) {
      ScalarField expect = c.get(j);
      expect *= double(sign);
      for (auto& v : expect.v) v += L.e(g.time(j));
      worst = std::max(worst, c0_norm(A.square_sum(j) - expect));
    }
    CHECK(worst <= 1e-10);
  }
}

TEST_CASE("assembled increment is mean free with a consistent potential and drift") {
  const int n = 64;
  GridSpec g{2, n, 41, 0.0, 4.0};
  const TimeSlab c = coefficient(g, 0.5);
  const SymbolSpec s = builtin_ipm();
  const LiftingSpec L = build_lifting(c, 1, 1.0, 0.25, 4.0, 4.0, 4.0);
  const CutoffFamily cut = build_cutoffs(0.4, g.t0, g.t1);
  const AmplitudeSet A = build_amplitudes(L, cut, c, 1);

  GridSpec dg{2, 32, 41, 0.0, 4.0};
  const DriftField still(dg, std::vector<VectorField>(41, VectorField(32)), true, 2);
  IncrementContext ctx;
  ctx.symbol = &s;
  ctx.frame = build_frame(s, {{1, 1}, {1, -1}});
  ctx.stage_parity = 0;
  ctx.lambda_next = 3.0;
  ctx.separation = 4.0;
  ctx.n = n;
  std::map<int, PhaseFamily> phases;
  for (int k = cut.k_min; k <= cut.k_max; ++k)
    phases.emplace(k, solve_phase(still, k, ctx.frame.xi1.as_vec() * (k % 2 != 0 ? 4.0 : 1.0), cut.tau));

  const IncrementSlabs inc = assemble_increment(ctx, A, phases, g);
  double wmax = 0;
  for (int j = 0; j < g.m_t; ++j) {
    const ScalarField W = inc.W.get(j);
    wmax = std::max(wmax, c0_norm(W));
    CHECK(std::abs(W.mean()) <= 1e-12 * std::max(1.0, c0_norm(W)));
    CHECK(c0_norm(divergence(inc.W_pot.get(j)) - W) <= 1e-10 * std::max(1.0, c0_norm(W)));
    const VectorField TW = apply_symbol(s, W), stored = inc.TW.get(j);
    CHECK(c0_norm(VectorField(TW.c[0] - stored.c[0], TW.c[1] - stored.c[1])) <= 1e-10 * std::max(1.0, c0_norm(W)));
  }
  CHECK(wmax > 0.0);
}
