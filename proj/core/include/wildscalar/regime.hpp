#pragma once

#include <gmpxx.h>

#include <string>
#include <vector>

#include "wildscalar/schedule.hpp"

namespace wildscalar {

/// b == 1 selects the b -> 1+ limit; the closed forms are continuous there.
struct RegimeQuery {
  mpq_class b = 1;
  int d = 2;
  mpq_class gamma = 0;
  bool forced = true;
};

struct Bound {
  mpq_class value;
  std::string label;
};

struct RegimeResult {
  mpq_class beta_sup;
  mpq_class alpha_sup;
  mpq_class zeta_sup;
  bool gamma_feasible = false;
  std::string binding_constraint;
};

/// sum_{i<d} b^i by repeated multiplication.
mpq_class geometric_sum(const mpq_class& b, int d);

Bound forced_beta_sup(const mpq_class& b, int d, const mpq_class& gamma);
Bound unforced_beta_sup(const mpq_class& b, int d);
/// min(beta / (2b - beta / b), 1/(2d)).
mpq_class zeta_sup(const mpq_class& beta, const mpq_class& b, int d);
RegimeResult evaluate_regime(const RegimeQuery& q);

std::string to_fraction(const mpq_class& v);
double to_double(const mpq_class& v);

struct ScheduleConstraintRow {
  int q = 0;
  double tau = 0.0;
  double margin_smallness = 0.0;
  double margin_inverse = 0.0;
};

struct ScheduleReport {
  std::vector<ScheduleConstraintRow> rows;
  mpq_class beta_sup;
  std::string binding_constraint;
  /// beta_sup - beta with beta read exactly from its double value.
  double beta_margin = 0.0;
  bool beta_feasible = false;
  mpq_class alpha;
  bool gamma_feasible = false;
};

/// Per-step tau margins plus the asymptotic exponent comparison for the forced chains.
ScheduleReport check_schedule(const ParameterSchedule& s);

}  // namespace wildscalar
