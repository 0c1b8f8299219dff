#include "wildscalar/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wildscalar/errors.hpp"

namespace wildscalar {

ParameterSchedule::ParameterSchedule(const ScheduleParams& p) : p_(p) {
  const int top = std::max(p.Q, 0) + 3;
  lambda_.resize(top + 1);
  for (int q = 0; q <= top; ++q) lambda_[q] = std::ceil(std::pow(p.lambda0, std::pow(p.b, q)));
}

double ParameterSchedule::lambda(int q) const {
  q = std::max(q, 0);
  if (q < static_cast<int>(lambda_.size())) return lambda_[q];
  return std::ceil(std::pow(p_.lambda0, std::pow(p_.b, q)));
}

double ParameterSchedule::delta(int q) const { return std::pow(lambda(q), -p_.beta); }

double ParameterSchedule::tau(int q) const {
  return std::pow(lambda(q + 1), -0.5) * std::pow(lambda(q - 1), -0.5) * std::pow(delta(q), -0.25) *
         std::pow(delta(q - 2), -0.25);
}

double ParameterSchedule::tau_hat(int q) const { return 1.0 / (lambda(q) * std::sqrt(delta(q - 1))); }

double ParameterSchedule::mu(int q) const {
  const double inv_L = 1.0 / p_.L;
  return std::pow(lambda(q + 1), inv_L) * std::pow(lambda(q), 1.0 - inv_L);
}

double ParameterSchedule::eps_x(int q) const {
  return std::pow(lambda(q) / lambda(q + 1), 1.0 / p_.L) / lambda(q);
}

double ParameterSchedule::eps_t(int q) const { return 1.0 / (lambda(q + 1) * std::sqrt(delta(q))); }

TauCondition ParameterSchedule::tau_condition(int q) const {
  TauCondition c;
  c.q = q;
  c.tau = tau(q);
  c.tau_hat = tau_hat(q);
  c.inv_tau_bound = lambda(q + 1) * std::sqrt(delta(q));
  c.margin_smallness = c.tau_hat / c.tau;
  c.margin_inverse = c.inv_tau_bound * c.tau;
  return c;
}

ParameterSchedule make_schedule(const ScheduleParams& p) {
  std::vector<std::string> bad;
  if (!(p.lambda0 >= 2.0)) bad.push_back("lambda0 >= 2");
  if (!(p.b > 1.0)) bad.push_back("b > 1");
  if (!(p.beta > 0.0 && p.beta < 1.0)) bad.push_back("beta in (0,1)");
  if (p.L < 2) bad.push_back("L >= 2");
  if (p.d < 1) bad.push_back("d >= 1");
  if (!(p.gamma >= 0.0 && p.gamma <= 2.0)) bad.push_back("gamma in [0,2]");
  if (!(p.nu >= 0.0)) bad.push_back("nu >= 0");
  if (!(p.K >= 4.0)) bad.push_back("K >= 4");
  if (!(p.C >= 4.0)) bad.push_back("C >= 4");
  if (p.Q < 0) bad.push_back("Q >= 0");
  if (!bad.empty()) {
    std::ostringstream os;
    os << "schedule parameters out of range:";
    for (const auto& b : bad) os << ' ' << b << ';';
    throw Error(ErrorKind::ScheduleInfeasible, os.str());
  }
  ParameterSchedule s(p);
  for (int q = 0; q <= p.Q + 1; ++q)
    if (!(s.lambda(q + 1) > s.lambda(q)))
      throw Error(ErrorKind::ScheduleInfeasible, "lambda_q not strictly increasing at q=" + std::to_string(q));
  for (int q = 0; q < p.Q; ++q) {
    const TauCondition c = s.tau_condition(q);
    if (c.margin_smallness < 1.0)
      throw Error(ErrorKind::ScheduleInfeasible, "tau_q <= lambda_q^-1 delta_{q-1}^-1/2 violated at q=" +
                                                     std::to_string(q) + " (margin " + std::to_string(c.margin_smallness) + ")");
    if (c.margin_inverse < 1.0)
      throw Error(ErrorKind::ScheduleInfeasible, "1/tau_q <= lambda_{q+1} delta_q^1/2 violated at q=" +
                                                     std::to_string(q) + " (margin " + std::to_string(c.margin_inverse) + ")");
  }
  return s;
}

}  // namespace wildscalar
