#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>

#include "wildscalar/errors.hpp"
#include "wildscalar/iteration.hpp"
#include "wildscalar/norms.hpp"
#include "wildscalar/schedule.hpp"
#include "wildscalar/spectral.hpp"
#include "wildscalar/symbols.hpp"

using namespace wildscalar;
using Big = boost::multiprecision::cpp_bin_float_50;

namespace {

Model make_model(const ScheduleParams& p) {
  Model m;
  m.schedule = make_schedule(p);
  m.symbol = builtin_ipm();
  m.frame = build_frame(m.symbol, {{1, 1}, {1, -1}});
  return m;
}

ScheduleParams small_params(int Q) {
  ScheduleParams p;
  p.lambda0 = 2;
  p.K = 16;
  p.Q = Q;
  return p;
}

SeedSpec steady_seed(double p_scale, double m_scale) {
  SeedSpec s;
  s.p_scale = p_scale;
  s.m_scale = m_scale;
  s.chi_lo = -1.0;
  s.chi_hi = 10.0;
  s.chi_ramp = 0.0;
  return s;
}

double slab_diff(const TimeSlab& a, const TimeSlab& b) {
  double d = 0;
  for (int j = 0; j < a.grid().m_t; ++j) d = std::max(d, c0_norm(a.get(j) - b.get(j)));
  return d;
}

}  // namespace

TEST_CASE("frequency ladder and amplitudes follow the double-exponential schedule") {
  ScheduleParams p;
  p.lambda0 = 2;
  p.b = 2;
  p.beta = 0.5;
  p.Q = 3;
  const ParameterSchedule s(p);
  CHECK(s.lambda(1) == 4.0);
  CHECK(s.lambda(2) == 16.0);
  CHECK(s.lambda(3) == 256.0);
  CHECK(s.delta(3) == doctest::Approx(1.0 / 16));
  CHECK(s.lambda(-1) == s.lambda(0));
}

TEST_CASE("desk lifespan agrees with a high-precision evaluation") {
  const ParameterSchedule s{ScheduleParams{}};
  auto lam = [](int q) {
    const Big v = ceil(pow(Big(8), pow(Big(3) / 2, std::max(q, 0))));
    return v;
  };
  auto del = [&](int q) { return pow(lam(q), Big(-3) / 10); };
  for (int q : {0, 1}) {
    const Big tau = pow(lam(q + 1), Big(-1) / 2) * pow(lam(q - 1), Big(-1) / 2) * pow(del(q), Big(-1) / 4) *
                    pow(del(q - 2), Big(-1) / 4);
    CHECK(s.tau(q) == doctest::Approx(tau.convert_to<double>()).epsilon(1e-13));
    const Big tau_hat = 1 / (lam(q) * sqrt(del(q - 1)));
    CHECK(s.tau_hat(q) == doctest::Approx(tau_hat.convert_to<double>()).epsilon(1e-13));
  }
  CHECK(s.lambda(1) == 23.0);
  CHECK(s.lambda(2) == 108.0);
}

TEST_CASE("infeasible schedules are rejected") {
  ScheduleParams p;
  p.beta = 1.5;
  CHECK_THROWS_AS(make_schedule(p), Error);
}

TEST_CASE("a vanishing second field is rejected") {
  const Model m = make_model(small_params(1));
  GridSpec g{2, 32, 16, 0.0, 4.0};
  CHECK_THROWS_AS(init_tuple(m, g, steady_seed(1.0, 0.0)), Error);
}

TEST_CASE("steady seed stresses invert the quadratic residuals") {
  const Model m = make_model(small_params(1));
  GridSpec g{2, 32, 16, 0.0, 4.0};
  const IterationState s = init_tuple(m, g, steady_seed(1.0, 1.0));
  const double amp2 = m.schedule.delta(-1);
  // T[cos x1] = (0, -cos x1) and T[cos x2] = 0, so only the cross term survives.
  const ScalarField expect = ScalarField::sample(32, [amp2](double x, double y) { return amp2 * std::cos(x) * std::sin(y); });
  for (int j = 0; j < g.m_t; ++j) {
    CHECK(c0_norm(divergence(s.Rtil.get(j)) - expect) <= 1e-12);
    CHECK(c0_norm(divergence(s.Rbar.get(j))) <= 1e-12);
  }
  const ClosureReport c = check_closure(s, m);
  CHECK(c.pass());
  CHECK(c.mismatch_M <= 1e-12);
}

TEST_CASE("vanishing stresses leave the state unchanged") {
  const Model m = make_model(small_params(1));
  GridSpec g{2, 64, 16, 0.0, 4.0};
  const IterationState s = init_tuple(m, g, steady_seed(0.0, 1.0));
  CHECK(c0_norm(s.Rtil) <= 1e-14);
  CHECK(c0_norm(s.Rbar) <= 1e-14);
  const StepResult r = step(s, m);
  CHECK(r.next.q == 1);
  CHECK(slab_diff(r.next.P, s.P) <= 1e-14);
  CHECK(slab_diff(r.next.M, s.M) <= 1e-14);
  CHECK(c0_norm(r.next.Rtil) <= 1e-12);
}

TEST_CASE("a run with no steps returns the seed") {
  ScheduleParams p = small_params(0);
  const Model m = make_model(p);
  GridSpec g{2, 32, 16, 0.0, 4.0};
  const IterationState s = init_tuple(m, g, steady_seed(1.0, 1.0));
  const RunResult r = run_steps(s.clone(), m);
  CHECK_FALSE(r.failure.has_value());
  CHECK(r.ledger.empty());
  CHECK(r.state.q == 0);
  CHECK(slab_diff(r.state.P, s.P) == 0.0);
  CHECK(slab_diff(r.state.M, s.M) == 0.0);
}

TEST_CASE("one step on a small grid closes and pauses") {
  const Model m = make_model(small_params(1));
  GridSpec g{2, 128, 64, 0.0, 4.0};
  SeedSpec seed;
  seed.chi_lo = 1.4;
  seed.chi_hi = 2.6;
  seed.chi_ramp = 0.5;
  const IterationState s = init_tuple(m, g, seed);
  CHECK(check_closure(s, m).pass());
  const StepResult r = step(s, m);
  const ClosureReport c = check_closure(r.next, m);
  CHECK(c.pass());
  CHECK(c.mismatch_M <= 1e-10 * std::max(1.0, c.residual_scale));
  CHECK(r.row.pause_residual <= 1e-12);
  // Even steps leave the first solution P + M fixed.
  TimeSlab before = s.P.clone("b"), after = r.next.P.clone("a");
  for (int j = 0; j < g.m_t; ++j) {
    before.set(j, s.P.get(j) + s.M.get(j));
    after.set(j, r.next.P.get(j) + r.next.M.get(j));
  }
  CHECK(slab_diff(before, after) <= 1e-12);
  CHECK(slab_diff(r.next.M, s.M) > 0.0);
  CHECK(verify_inductive(r, m, 50.0).all_pass());
}
