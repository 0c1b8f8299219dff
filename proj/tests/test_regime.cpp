#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <gmpxx.h>

#include <random>

#include "wildscalar/errors.hpp"
#include "wildscalar/regime.hpp"

using namespace wildscalar;

namespace {

mpq_class pw(const mpq_class& b, int e) {
  mpq_class r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

/// Raw polynomial constraints for b > 1; both must hold strictly.
bool forced_ok(const mpq_class& b, int d, const mpq_class& gamma, const mpq_class& beta) {
  const mpq_class bd = pw(b, d);
  const mpq_class first = bd * beta - mpq_class(3, 4) * beta - beta / (4 * b * b) + 1 / (2 * b) - b / 2;
  const mpq_class second = b * (gamma - 1) - beta / 2 + bd * beta;
  return first < 0 && second < 0;
}

bool unforced_ok(const mpq_class& b, int d, const mpq_class& beta) {
  const mpq_class bd = pw(b, d);
  const mpq_class first = bd * beta - mpq_class(3, 4) * beta - beta / (4 * b) - (b - 1) / 2;
  const mpq_class second = bd * beta - b + 1 - beta / 2 - beta / (2 * b);
  return first < 0 && second < 0;
}

RegimeResult at_limit(int d, bool forced) {
  RegimeQuery q;
  q.b = 1;
  q.d = d;
  q.gamma = 0;
  q.forced = forced;
  return evaluate_regime(q);
}

}  // namespace

TEST_CASE("exponent thresholds in the b to one limit are exact") {
  CHECK(at_limit(1, true).alpha_sup == mpq_class(1, 3));
  CHECK(at_limit(2, true).alpha_sup == mpq_class(1, 5));
  CHECK(at_limit(2, true).beta_sup == mpq_class(2, 5));
  CHECK(at_limit(2, false).alpha_sup == mpq_class(1, 9));
  CHECK(at_limit(2, false).beta_sup == mpq_class(2, 9));
  for (int d = 1; d <= 6; ++d) {
    CHECK(at_limit(d, true).alpha_sup == mpq_class(1, 2 * d + 1));
    CHECK(at_limit(d, false).alpha_sup == mpq_class(1, 4 * d + 1));
    CHECK(at_limit(d, true).zeta_sup == mpq_class(1, 2 * d));
  }
  CHECK(at_limit(2, false).zeta_sup == mpq_class(1, 8));
  CHECK(to_fraction(at_limit(1, true).alpha_sup) == "1/3");
}

TEST_CASE("forced threshold at b = 2 agrees with a brute-force scan of the raw constraints") {
  const mpq_class b = 2;
  const Bound sup = forced_beta_sup(b, 2, 0);
  CHECK(sup.value == mpq_class(4, 17));
  mpq_class last_ok = 0;
  const int N = 10000;
  for (int k = 1; k < N; ++k) {
    const mpq_class beta(k, N);
    if (forced_ok(b, 2, 0, beta)) last_ok = beta;
  }
  CHECK(last_ok < sup.value);
  CHECK(sup.value - last_ok <= mpq_class(1, N));
  CHECK_FALSE(forced_ok(b, 2, 0, sup.value));
}

TEST_CASE("closed forms decide the raw constraints at random rational points") {
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<int> num(1, 400), den(2, 97), dim(1, 6);
  for (int i = 0; i < 100; ++i) {
    mpq_class b = 1 + mpq_class(num(rng), 100 * den(rng));
    b.canonicalize();
    mpq_class beta(num(rng), 400 + den(rng));
    beta.canonicalize();
    mpq_class gamma(num(rng) % 100, 100);
    gamma.canonicalize();
    const int d = dim(rng);
    CHECK((beta < forced_beta_sup(b, d, gamma).value) == forced_ok(b, d, gamma, beta));
    CHECK((beta < unforced_beta_sup(b, d).value) == unforced_ok(b, d, beta));
  }
}

TEST_CASE("thresholds decrease with dimension and dissipation order") {
  for (int d = 1; d < 6; ++d) {
    CHECK(at_limit(d + 1, true).beta_sup < at_limit(d, true).beta_sup);
    CHECK(at_limit(d + 1, false).beta_sup < at_limit(d, false).beta_sup);
    CHECK(at_limit(d, false).beta_sup < at_limit(d, true).beta_sup);
  }
  const mpq_class b(3, 2);
  mpq_class prev = forced_beta_sup(b, 2, 0).value;
  for (int g = 1; g <= 10; ++g) {
    const mpq_class cur = forced_beta_sup(b, 2, mpq_class(g, 10)).value;
    CHECK(cur <= prev);
    prev = cur;
  }
}

TEST_CASE("full-order dissipation leaves no admissible exponent") {
  RegimeQuery q;
  q.b = mpq_class(3, 2);
  q.d = 2;
  q.gamma = 1;
  const RegimeResult r = evaluate_regime(q);
  CHECK(r.beta_sup == 0);
  CHECK_FALSE(r.gamma_feasible);
  CHECK_THROWS_AS(forced_beta_sup(mpq_class(1, 2), 2, 0), Error);
}

TEST_CASE("geometric sums and the desk schedule report") {
  CHECK(geometric_sum(mpq_class(3, 2), 3) == mpq_class(19, 4));
  const ScheduleReport rep = check_schedule(make_schedule(ScheduleParams{}));
  CHECK(rep.beta_feasible);
  CHECK(rep.rows.size() == 2);
  for (const auto& row : rep.rows) {
    CHECK(row.margin_smallness >= 1.0);
    CHECK(row.margin_inverse >= 1.0);
  }
}
