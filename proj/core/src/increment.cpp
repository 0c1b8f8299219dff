#include "wildscalar/increment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wildscalar/errors.hpp"
#include "wildscalar/norms.hpp"

namespace wildscalar {

double smoothstep5(double x) {
  x = std::clamp(x, 0.0, 1.0);
  return x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
}

double smoothstep5_d1(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return 30.0 * x * x * (1.0 - x) * (1.0 - x);
}

double smoothstep5_d2(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return 60.0 * x * (1.0 - x) * (1.0 - 2.0 * x);
}

double CutoffFamily::profile(double s) {
  const double a = std::abs(s);
  if (a <= 1.0 / 3.0) return 1.0;
  if (a >= 2.0 / 3.0) return 0.0;
  return std::cos(0.5 * std::numbers::pi * smoothstep5(3.0 * a - 1.0));
}

double CutoffFamily::partition_sum(double t) const {
  double s = 0.0;
  for (int k = k_min; k <= k_max; ++k) {
    const double p = phi(k, t);
    s += p * p;
  }
  return s;
}

std::vector<int> CutoffFamily::active(double t) const {
  std::vector<int> ks;
  for (int k = k_min; k <= k_max; ++k)
    if (phi(k, t) > 0.0) ks.push_back(k);
  return ks;
}

CutoffFamily build_cutoffs(double tau, double t0, double t1) {
  if (!(tau > 0.0)) throw Error(ErrorKind::InvalidArgument, "tau must be positive");
  if (tau > (t1 - t0) / 3.0)
    throw Error(ErrorKind::WindowTooShort, "tau=" + std::to_string(tau) + " exceeds a third of the window");
  CutoffFamily c;
  c.tau = tau;
  c.t0 = t0;
  c.t1 = t1;
  c.k_min = static_cast<int>(std::floor(t0 / tau)) - 1;
  c.k_max = static_cast<int>(std::ceil(t1 / tau)) + 1;
  return c;
}

double LiftingSpec::h(double t) const {
  const double u = std::max({0.0, it_lo - tau_hat - t, t - (it_hi + tau_hat)});
  return 1.0 - smoothstep5(u / (2.0 * tau_hat));
}

double LiftingSpec::h_d1(double t) const {
  const double left = it_lo - tau_hat - t, right = t - (it_hi + tau_hat);
  if (left <= 0.0 && right <= 0.0) return 0.0;
  const double u = std::max(left, right);
  const double du = left > right ? -1.0 : 1.0;
  return -smoothstep5_d1(u / (2.0 * tau_hat)) / (2.0 * tau_hat) * du;
}

double LiftingSpec::h_d2(double t) const {
  const double left = it_lo - tau_hat - t, right = t - (it_hi + tau_hat);
  if (left <= 0.0 && right <= 0.0) return 0.0;
  const double u = std::max(left, right);
  return -smoothstep5_d2(u / (2.0 * tau_hat)) / (4.0 * tau_hat * tau_hat);
}

std::pair<double, double> measured_time_support(const TimeSlab& c, bool* empty, double floor) {
  const GridSpec& g = c.grid();
  std::vector<double> norms(g.m_t);
  double top = 0.0;
  for (int j = 0; j < g.m_t; ++j) {
    double m = 0.0;
    for (double v : c.frame(j)) m = std::max(m, std::abs(v));
    norms[j] = m;
    top = std::max(top, m);
  }
  int first = -1, last = -1;
  for (int j = 0; j < g.m_t; ++j)
    if (top > 0.0 && norms[j] > std::max(1e-13 * top, floor)) {
      if (first < 0) first = j;
      last = j;
    }
  if (empty) *empty = first < 0;
  if (first < 0) return {g.t0, g.t0};
  return {g.time(first), g.time(last)};
}

LiftingSpec build_lifting(const TimeSlab& c, int radicand_sign, double delta_q, double tau_hat, double rate, double K,
                          double C) {
  if (!(K >= 4.0) || !(C >= 4.0)) throw Error(ErrorKind::InvalidArgument, "lifting constants K and C must be >= 4");
  if (!(tau_hat > 0.0) || !(delta_q > 0.0)) throw Error(ErrorKind::InvalidArgument, "lifting scales must be positive");
  LiftingSpec L;
  L.K = K;
  L.C = C;
  L.delta_q = delta_q;
  L.tau_hat = tau_hat;
  L.rate = rate;
  bool empty = false;
  const auto [lo, hi] = measured_time_support(c, &empty, 1e-13 * K * delta_q);
  L.it_lo = lo;
  L.it_hi = hi;
  L.empty = empty;
  L.min_positivity_margin = 1.0;
  L.min_dominance_margin = 1.0;

  const GridSpec& g = c.grid();
  double ctop = 0.0;
  for (double v : c.raw()) ctop = std::max(ctop, std::abs(v));
  for (int j = 0; j < g.m_t && !empty; ++j) {
    const double e = L.e(g.time(j));
    for (double v : c.frame(j)) {
      if (std::abs(v) <= 1e-13 * ctop) continue;
      const double pos = (e + radicand_sign * v) / L.height();
      const double dom = (e - 2.0 * std::abs(v)) / L.height();
      L.min_positivity_margin = std::min(L.min_positivity_margin, pos);
      L.min_dominance_margin = std::min(L.min_dominance_margin, dom);
    }
  }
  if (L.min_positivity_margin <= 0.0 || L.min_dominance_margin <= 0.0)
    throw Error(ErrorKind::LiftingInfeasible,
                "lifting height K delta_q=" + std::to_string(L.height()) + " does not dominate the stress coefficient (max |c|=" +
                    std::to_string(ctop) + ", positivity margin " + std::to_string(L.min_positivity_margin) +
                    ", dominance margin " + std::to_string(L.min_dominance_margin) + ")");

  std::array<double, 3> sup{0.0, 0.0, 0.0};
  if (!empty) {
    const double a = lo - 3.0 * tau_hat, b = hi + 3.0 * tau_hat;
    const int samples = 20000;
    for (int i = 0; i <= samples; ++i) {
      const double t = a + (b - a) * i / samples;
      sup[0] = std::max(sup[0], std::abs(L.sqrt_e(t)));
      sup[1] = std::max(sup[1], std::abs(L.sqrt_e_d1(t)));
      sup[2] = std::max(sup[2], std::abs(L.sqrt_e_d2(t)));
    }
  }
  for (int r = 0; r < 3; ++r)
    L.derivative_checks[r] = {r, sup[r], C * std::pow(rate, r) * std::sqrt(delta_q)};
  return L;
}

AmplitudeSet::AmplitudeSet(const LiftingSpec& lifting, const CutoffFamily& cutoffs, const TimeSlab& c, int radicand_sign)
    : lifting_(lifting), cutoffs_(cutoffs), c_(c), sign_(radicand_sign) {}

ScalarField AmplitudeSet::radicand(int j) const {
  ScalarField r = c_.get(j);
  r *= static_cast<double>(sign_);
  const double e = lifting_.e(time(j));
  for (auto& v : r.v) v += e;
  return r;
}

ScalarField AmplitudeSet::amplitude(int k, int j) const {
  if (lifting_.empty) return ScalarField(c_.grid().n);
  const double p = cutoffs_.phi(k, time(j));
  ScalarField a = radicand(j);
  const double floor = 1e-12 * lifting_.height();
  for (auto& v : a.v) v = (v > 0.0 ? std::sqrt(0.5 * v) : (v >= -floor ? 0.0 : NAN)) * p;
  return a;
}

ScalarField AmplitudeSet::square_sum(int j) const {
  ScalarField s(c_.grid().n);
  for (int k = cutoffs_.k_min; k <= cutoffs_.k_max; ++k) {
    if (cutoffs_.phi(k, time(j)) == 0.0) continue;
    const ScalarField a = amplitude(k, j);
    for (std::size_t i = 0; i < s.v.size(); ++i) s.v[i] += 2.0 * a.v[i] * a.v[i];
  }
  return s;
}

AmplitudeSet build_amplitudes(const LiftingSpec& lifting, const CutoffFamily& cutoffs, const TimeSlab& c,
                              int radicand_sign) {
  AmplitudeSet set(lifting, cutoffs, c, radicand_sign);
  const double floor = 1e-12 * lifting.height();
  for (int j = 0; j < c.grid().m_t; ++j) {
    const ScalarField r = set.radicand(j);
    double worst = 0.0;
    for (double v : r.v) worst = std::min(worst, v);
    if (worst < -floor)
      throw Error(ErrorKind::NegativeRadicand, "amplitude radicand " + std::to_string(worst) + " at t=" +
                                                   std::to_string(set.time(j)));
  }
  return set;
}

std::vector<Packet> build_packets(const IncrementContext& ctx, const AmplitudeSet& amps,
                                  const std::map<int, PhaseFamily>& phases, int j) {
  std::vector<Packet> out;
  const double t = amps.time(j);
  const int n = ctx.n;
  const Vec2 dir = ctx.frame.direction(ctx.stage_parity).as_vec();
  for (int k : amps.cutoffs().active(t)) {
    ScalarField a = amps.amplitude(k, j);
    if (c0_norm(a) == 0.0) continue;
    auto it = phases.find(k);
    if (it == phases.end() || !it->second.active(j))
      throw Error(ErrorKind::InvalidArgument, "no phase for packet k=" + std::to_string(k) + " at frame " + std::to_string(j));
    const PhaseFamily& ph = it->second;
    Packet p;
    p.k = k;
    p.parity = ph.parity;
    p.hat_grad = ph.hat_grad;
    p.band = NearBand::make(ctx.lambda_next, dir, p.parity, 1, ctx.separation);
    check_band_resolved(p.band, n);
    const ScalarField pi = ph.pi_on(j, n);
    p.grad_xi = gradient(pi);
    for (auto& v : p.grad_xi.c[0].v) v += p.hat_grad.x1;
    for (auto& v : p.grad_xi.c[1].v) v += p.hat_grad.x2;
    const long f1 = std::lround(ctx.lambda_next * p.hat_grad.x1), f2 = std::lround(ctx.lambda_next * p.hat_grad.x2);
    p.E = ComplexField(n);
    ComplexField aE(n);
    for (int i1 = 0; i1 < n; ++i1)
      for (int i2 = 0; i2 < n; ++i2) {
        const long idx = ((f1 * i1 + f2 * i2) % n + n) % n;
        const double phase = 2.0 * std::numbers::pi * static_cast<double>(idx) / n + ctx.lambda_next * pi(i1, i2);
        const cplx e = std::polar(1.0, phase);
        p.E(i1, i2) = e;
        aE(i1, i2) = a(i1, i2) * e;
      }
    const ComplexSpectrum s = lp_project_near(forward(aE), p.band);
    p.W = inverse(s);
    auto [t1, t2] = apply_symbol(*ctx.symbol, s);
    p.TW = {std::move(t1), std::move(t2)};
    p.a = std::move(a);
    out.push_back(std::move(p));
  }
  return out;
}

IncrementFrame frame_increment(const std::vector<Packet>& packets, int n) {
  IncrementFrame f{ScalarField(n), VectorField(n), VectorField(n)};
  for (const auto& p : packets)
    for (std::size_t i = 0; i < f.W.v.size(); ++i) {
      f.W.v[i] += 2.0 * p.W.v[i].real();
      f.TW.c[0].v[i] += 2.0 * p.TW[0].v[i].real();
      f.TW.c[1].v[i] += 2.0 * p.TW[1].v[i].real();
    }
  f.W_pot = solve_div(f.W);
  return f;
}

IncrementSlabs assemble_increment(const IncrementContext& ctx, const AmplitudeSet& amps,
                                  const std::map<int, PhaseFamily>& phases, const GridSpec& grid) {
  IncrementSlabs s{TimeSlab(grid, "W"), VectorSlab(grid, "TW"), VectorSlab(grid, "W_pot")};
  for (int j = 0; j < grid.m_t; ++j) {
    const IncrementFrame f = frame_increment(build_packets(ctx, amps, phases, j), grid.n);
    s.W.set(j, f.W);
    s.TW.set(j, f.TW);
    s.W_pot.set(j, f.W_pot);
  }
  return s;
}

}  // namespace wildscalar
