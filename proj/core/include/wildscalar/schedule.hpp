#pragma once

#include <string>
#include <vector>

namespace wildscalar {

struct ScheduleParams {
  double lambda0 = 8.0;
  double b = 1.5;
  double beta = 0.3;
  int L = 2;
  int d = 2;
  double gamma = 0.5;
  double nu = 0.0;
  double K = 4.0;
  double C = 4.0;
  int Q = 2;
};

struct TauCondition {
  int q = 0;
  double tau = 0.0;
  double tau_hat = 0.0;          // upper bound on tau
  double inv_tau_bound = 0.0;    // upper bound on 1/tau
  double margin_smallness = 0.0; // tau_hat / tau
  double margin_inverse = 0.0;   // inv_tau_bound * tau
  bool ok() const { return margin_smallness >= 1.0 && margin_inverse >= 1.0; }
};

/// Frequency ladder and derived scales. Negative indices clamp to 0.
class ParameterSchedule {
 public:
  ParameterSchedule() = default;
  explicit ParameterSchedule(const ScheduleParams& p);

  const ScheduleParams& params() const { return p_; }
  double lambda(int q) const;
  double delta(int q) const;
  double tau(int q) const;
  double tau_hat(int q) const;
  double mu(int q) const;
  double eps_x(int q) const;
  double eps_t(int q) const;
  TauCondition tau_condition(int q) const;

 private:
  ScheduleParams p_;
  std::vector<double> lambda_;
};

/// Validates ranges and the two tau conditions for q < Q; throws ScheduleInfeasible naming the violation.
ParameterSchedule make_schedule(const ScheduleParams& p);

}  // namespace wildscalar
