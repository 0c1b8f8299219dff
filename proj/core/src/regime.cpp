#include "wildscalar/regime.hpp"

#include <algorithm>

#include "wildscalar/errors.hpp"

namespace wildscalar {

namespace {

void check_query(const mpq_class& b, int d) {
  if (b < 1) throw Error(ErrorKind::InvalidArgument, "b must be >= 1 (1 selects the limit)");
  if (d < 1) throw Error(ErrorKind::InvalidArgument, "d must be >= 1");
}

mpq_class power(const mpq_class& b, int e) {
  mpq_class r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

Bound min_of(Bound a, Bound b) { return b.value < a.value ? b : a; }

}  // namespace

mpq_class geometric_sum(const mpq_class& b, int d) {
  mpq_class s = 0, term = 1;
  for (int i = 0; i < d; ++i) {
    s += term;
    term *= b;
  }
  return s;
}

Bound forced_beta_sup(const mpq_class& b, int d, const mpq_class& gamma) {
  check_query(b, d);
  const mpq_class S = geometric_sum(b, d);
  mpq_class target = ((b + 1) / (2 * b)) / (S + (b + 1) / (4 * b * b));
  target.canonicalize();
  mpq_class diss = 2 * b * (1 - gamma) / (2 * power(b, d) - 1);
  diss.canonicalize();
  return min_of({target, "forced:stress-target"}, {diss, "forced:dissipation"});
}

Bound unforced_beta_sup(const mpq_class& b, int d) {
  check_query(b, d);
  const mpq_class S = geometric_sum(b, d);
  mpq_class first = 1 / (2 * (S + 1 / (4 * b)));
  first.canonicalize();
  mpq_class second = 1 / (S + 1 / (2 * b));
  second.canonicalize();
  return min_of({first, "unforced:first"}, {second, "unforced:second"});
}

mpq_class zeta_sup(const mpq_class& beta, const mpq_class& b, int d) {
  mpq_class chain = beta / (2 * b - beta / b);
  chain.canonicalize();
  mpq_class cap(1, 2 * d);
  cap.canonicalize();
  return std::min(chain, cap);
}

RegimeResult evaluate_regime(const RegimeQuery& q) {
  RegimeResult r;
  const Bound beta = q.forced ? forced_beta_sup(q.b, q.d, q.gamma) : unforced_beta_sup(q.b, q.d);
  r.beta_sup = beta.value;
  r.binding_constraint = beta.label;
  r.alpha_sup = r.beta_sup / (2 * q.b);
  r.alpha_sup.canonicalize();
  r.zeta_sup = zeta_sup(r.beta_sup, q.b, q.d);
  r.gamma_feasible = r.beta_sup > 0 && q.gamma < 1 - r.alpha_sup;
  return r;
}

std::string to_fraction(const mpq_class& v) {
  mpq_class c = v;
  c.canonicalize();
  return c.get_str();
}

double to_double(const mpq_class& v) { return v.get_d(); }

ScheduleReport check_schedule(const ParameterSchedule& s) {
  const auto& p = s.params();
  ScheduleReport rep;
  for (int q = 0; q < std::max(p.Q, 1); ++q) {
    const TauCondition c = s.tau_condition(q);
    rep.rows.push_back({q, c.tau, c.margin_smallness, c.margin_inverse});
  }
  const Bound b = forced_beta_sup(mpq_class(p.b), p.d, mpq_class(p.gamma));
  rep.beta_sup = b.value;
  rep.binding_constraint = b.label;
  const mpq_class beta(p.beta);
  rep.beta_margin = mpq_class(b.value - beta).get_d();
  rep.beta_feasible = beta < b.value;
  rep.alpha = beta / (2 * mpq_class(p.b));
  rep.alpha.canonicalize();
  rep.gamma_feasible = mpq_class(p.gamma) < 1 - rep.alpha;
  return rep;
}

}  // namespace wildscalar
