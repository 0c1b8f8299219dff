#include "wildscalar/transport.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include "wildscalar/errors.hpp"
#include "wildscalar/norms.hpp"
#include "wildscalar/spectral.hpp"

namespace wildscalar {

DriftField::DriftField(const GridSpec& grid, std::vector<VectorField> frames, bool extend_in_time, int refine)
    : grid_(grid), frames_(std::move(frames)), extend_(extend_in_time) {
  if (static_cast<int>(frames_.size()) != grid_.m_t)
    throw Error(ErrorKind::InvalidArgument, "drift frame count must equal m_t");
  interp_.reserve(frames_.size());
  for (const auto& f : frames_) interp_.emplace_back(f, refine);
}

bool DriftField::contains(double s) const {
  const double slack = 1e-12 * (grid_.t1 - grid_.t0);
  return s >= grid_.t0 - slack && s <= grid_.t1 + slack;
}

Vec2 DriftField::operator()(const Vec2& x, double s) const {
  if (!contains(s)) {
    if (!extend_) throw Error(ErrorKind::OutOfWindow, "drift evaluated at t=" + std::to_string(s) + " outside window");
    s = std::clamp(s, grid_.t0, grid_.t1);
  }
  const double dt = grid_.dt();
  int j = static_cast<int>(std::floor((s - grid_.t0) / dt));
  j = std::clamp(j, 0, grid_.m_t - 2);
  const double theta = std::clamp((s - grid_.time(j)) / dt, 0.0, 1.0);
  const Vec2 a = interp_[j](x.x1, x.x2);
  if (theta == 0.0) return a;
  const Vec2 b = interp_[j + 1](x.x1, x.x2);
  return a * (1.0 - theta) + b * theta;
}

double DriftField::max_divergence() const {
  double m = 0.0;
  for (const auto& f : frames_) m = std::max(m, c0_norm(divergence(f)));
  return m;
}

double DriftField::max_gradient() const {
  double m = 0.0;
  for (const auto& f : frames_) m = std::max({m, ck_norm(f.c[0], 1), ck_norm(f.c[1], 1)});
  return m;
}

namespace {

Vec2 rk4_step(const DriftField& u, const Vec2& x, double t, double h) {
  const Vec2 k1 = u(x, t);
  const Vec2 k2 = u(x + k1 * (0.5 * h), t + 0.5 * h);
  const Vec2 k3 = u(x + k2 * (0.5 * h), t + 0.5 * h);
  const Vec2 k4 = u(x + k3 * h, t + h);
  return x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
}

/// RK4 for the characteristic augmented with the accumulated source integral of u . g.
std::pair<Vec2, double> rk4_step_source(const DriftField& u, const Vec2& x, double t, double h, const Vec2& g) {
  const Vec2 k1 = u(x, t);
  const Vec2 k2 = u(x + k1 * (0.5 * h), t + 0.5 * h);
  const Vec2 k3 = u(x + k2 * (0.5 * h), t + 0.5 * h);
  const Vec2 k4 = u(x + k3 * h, t + h);
  const Vec2 slope = (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (1.0 / 6.0);
  return {x + slope * h, slope.dot(g) * h};
}

int step_count(const DriftField& u, double span) {
  return std::max(1, static_cast<int>(std::ceil(std::abs(span) / u.grid().dt() - 1e-9)));
}

}  // namespace

Vec2 advance_flow(const DriftField& drift, const Vec2& x, double s, double t) {
  if (!drift.contains(s) || !drift.contains(t))
    throw Error(ErrorKind::OutOfWindow, "advance_flow times outside the drift window");
  const int steps = step_count(drift, s - t);
  const double h = (s - t) / steps;
  Vec2 y = x;
  for (int i = 0; i < steps; ++i) y = rk4_step(drift, y, t + i * h, h);
  return y;
}

VectorField flow_displacement(const DriftField& drift, double s, double t) {
  const int n = drift.grid().n;
  VectorField d(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Vec2 x{grid_coord(i, n), grid_coord(j, n)};
      const Vec2 y = advance_flow(drift, x, s, t);
      d.c[0](i, j) = y.x1 - x.x1;
      d.c[1](i, j) = y.x2 - x.x2;
    }
  return d;
}

ScalarField PhaseFamily::pi_on(int j, int n) const { return resample(pi.at(j), n); }

VectorField PhaseFamily::grad_pi_on(int j, int n) const { return resample(gradient(pi.at(j)), n); }

PhaseFamily solve_phase(const DriftField& drift, int k, const Vec2& hat_grad, double tau, double deformation_limit) {
  const GridSpec& g = drift.grid();
  PhaseFamily ph;
  ph.k = k;
  ph.parity = ((k % 2) + 2) % 2;
  ph.hat_grad = hat_grad;
  ph.t_center = k * tau;
  ph.t_lo = ph.t_center - (2.0 / 3.0) * tau;
  ph.t_hi = ph.t_center + (2.0 / 3.0) * tau;
  const int n = g.n;

  auto evolve = [&](const ScalarField& prev, double t_a, double t_b) {
    const PeriodicInterpolator ip(prev, 2);
    ScalarField next(n);
    const double h = t_a - t_b;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const Vec2 x{grid_coord(i, n), grid_coord(j, n)};
        const auto [foot, src] = rk4_step_source(drift, x, t_b, h, hat_grad);
        next(i, j) = ip(foot.x1, foot.x2) + src;
      }
    return next;
  };

  std::vector<int> ahead, behind;
  for (int j = 0; j < g.m_t; ++j) {
    const double t = g.time(j);
    if (t < ph.t_lo || t > ph.t_hi) continue;
    (t >= ph.t_center ? ahead : behind).push_back(j);
  }
  ScalarField prev(n);
  double t_prev = ph.t_center;
  for (int j : ahead) {
    const double t = g.time(j);
    prev = (t == t_prev) ? prev : evolve(prev, t_prev, t);
    t_prev = t;
    ph.pi[j] = prev;
  }
  prev = ScalarField(n);
  t_prev = ph.t_center;
  for (auto it = behind.rbegin(); it != behind.rend(); ++it) {
    const double t = g.time(*it);
    prev = evolve(prev, t_prev, t);
    t_prev = t;
    ph.pi[*it] = prev;
  }
  const double gn = hat_grad.norm();
  for (const auto& [j, p] : ph.pi) ph.max_deformation = std::max(ph.max_deformation, c0_norm(gradient(p)) / gn);
  if (ph.max_deformation > deformation_limit)
    throw Error(ErrorKind::DeformationExceeded, "phase k=" + std::to_string(k) + " deformed by " +
                                                    std::to_string(ph.max_deformation) + " of |grad xi_hat|");
  return ph;
}

namespace {

const std::vector<double>& kernel_multiplier(int n, double eps) {
  static std::map<std::pair<int, double>, std::vector<double>> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(n, eps);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  ScalarField k(n);
  const double two_pi = 2.0 * std::numbers::pi;
  double sum = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double d1 = grid_coord(i, n), d2 = grid_coord(j, n);
      d1 = std::min(d1, two_pi - d1);
      d2 = std::min(d2, two_pi - d2);
      const double r2 = (d1 * d1 + d2 * d2) / (eps * eps);
      const double w = r2 < 1.0 ? (1.0 - r2) * (1.0 - r2) * (1.0 - r2) : 0.0;
      k(i, j) = w;
      sum += w;
    }
  k *= 1.0 / sum;
  const Spectrum s = forward(k);
  std::vector<double> m(s.c.size());
  const double scale = static_cast<double>(n) * n;
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = s.c[i].real() * scale;
  m[0] = 1.0;
  return cache.emplace(key, std::move(m)).first->second;
}

/// Time-averaging taps: offsets with |k dt| < eps_t and weights (1 - s^2)^3.
std::vector<std::pair<int, double>> time_taps(double dt, double eps_t) {
  std::vector<std::pair<int, double>> taps{{0, 1.0}};
  if (eps_t <= 0.0) return taps;
  for (int k = 1; k * dt < eps_t; ++k) {
    const double s = k * dt / eps_t;
    const double w = (1.0 - s * s) * (1.0 - s * s) * (1.0 - s * s);
    taps.push_back({k, w});
    taps.push_back({-k, w});
  }
  return taps;
}

std::vector<TimeSlab> flow_mollify_many(const std::vector<const TimeSlab*>& fields, const DriftField& drift,
                                        double eps_x, double eps_t, MollifyReport* report) {
  const GridSpec& grid = fields.front()->grid();
  if (eps_x < 2.0 * grid.dx())
    throw Error(ErrorKind::UnderResolved, "eps_x=" + std::to_string(eps_x) + " is below two grid spacings");
  if (eps_t > 0.25 * (grid.t1 - grid.t0))
    throw Error(ErrorKind::InvalidArgument, "eps_t exceeds a quarter of the window");
  const int n = grid.n;
  const int nc = drift.grid().n;
  std::vector<TimeSlab> smooth;
  for (const TimeSlab* f : fields) {
    TimeSlab s(grid, f->name() + ".eps_x");
    for (int j = 0; j < grid.m_t; ++j) s.set(j, spatial_mollify(f->get(j), eps_x));
    smooth.push_back(std::move(s));
  }
  const auto taps = time_taps(grid.dt(), eps_t);
  int max_offset = 0;
  for (const auto& t : taps) max_offset = std::max(max_offset, std::abs(t.first));

  std::vector<TimeSlab> out;
  for (const TimeSlab* f : fields) out.emplace_back(grid, f->name() + ".eps");
  double err = 0.0;
  for (int j = 0; j < grid.m_t; ++j) {
    std::vector<ScalarField> acc;
    double wsum = 0.0;
    for (std::size_t q = 0; q < smooth.size(); ++q) acc.push_back(ScalarField(n));
    for (int dir : {1, -1}) {
      std::vector<Vec2> pos(static_cast<std::size_t>(nc) * nc);
      for (int a = 0; a < nc; ++a)
        for (int b = 0; b < nc; ++b) pos[static_cast<std::size_t>(a) * nc + b] = {grid_coord(a, nc), grid_coord(b, nc)};
      for (int k = (dir == 1 ? 0 : 1); k <= max_offset; ++k) {
        const int jj = j + dir * k;
        if (jj < 0 || jj >= grid.m_t) break;
        double w = 0.0;
        for (const auto& t : taps)
          if (t.first == dir * k) w = t.second;
        if (k > 0) {
          const double ta = grid.time(jj - dir), tb = grid.time(jj);
          for (auto& p : pos) p = rk4_step(drift, p, ta, tb - ta);
        }
        if (w == 0.0) continue;
        wsum += w;
        if (k == 0) {
          for (std::size_t q = 0; q < smooth.size(); ++q) acc[q].axpy(w, smooth[q].get(jj));
          continue;
        }
        VectorField disp(nc);
        for (int a = 0; a < nc; ++a)
          for (int b = 0; b < nc; ++b) {
            const Vec2& p = pos[static_cast<std::size_t>(a) * nc + b];
            disp.c[0](a, b) = p.x1 - grid_coord(a, nc);
            disp.c[1](a, b) = p.x2 - grid_coord(b, nc);
          }
        const VectorField dfull = resample(disp, n);
        for (std::size_t q = 0; q < smooth.size(); ++q) {
          const PeriodicInterpolator ip(smooth[q].get(jj), 1);
          for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
              acc[q](a, b) += w * ip(grid_coord(a, n) + dfull.c[0](a, b), grid_coord(b, n) + dfull.c[1](a, b));
        }
      }
    }
    for (std::size_t q = 0; q < smooth.size(); ++q) {
      acc[q] *= 1.0 / wsum;
      err = std::max(err, c0_norm(acc[q] - fields[q]->get(j)));
      out[q].set(j, acc[q]);
    }
  }
  if (report) {
    report->eps_x = eps_x;
    report->eps_t = eps_t;
    report->error_c0 = err;
    report->time_taps = static_cast<int>(taps.size());
  }
  return out;
}

}  // namespace

ScalarField spatial_mollify(const ScalarField& f, double eps_x) {
  if (eps_x < 2.0 * (2.0 * std::numbers::pi / f.n))
    throw Error(ErrorKind::UnderResolved, "eps_x=" + std::to_string(eps_x) + " is below two grid spacings");
  const auto& m = kernel_multiplier(f.n, eps_x);
  Spectrum s = forward(f);
  for (std::size_t i = 0; i < s.c.size(); ++i) s.c[i] *= m[i];
  return inverse(s);
}

TimeSlab flow_mollify(const TimeSlab& f, const DriftField& drift, double eps_x, double eps_t, MollifyReport* report) {
  return std::move(flow_mollify_many({&f}, drift, eps_x, eps_t, report).front());
}

VectorSlab flow_mollify(const VectorSlab& R, const DriftField& drift, double eps_x, double eps_t,
                        MollifyReport* report) {
  auto out = flow_mollify_many({&R.c[0], &R.c[1]}, drift, eps_x, eps_t, report);
  VectorSlab S;
  S.c[0] = std::move(out[0]);
  S.c[1] = std::move(out[1]);
  return S;
}

std::pair<VectorSlab, TimeSlab> flow_mollify(const VectorSlab& R_star, const TimeSlab& c1, const DriftField& drift,
                                             double eps_x, double eps_t, MollifyReport* report) {
  auto out = flow_mollify_many({&R_star.c[0], &R_star.c[1], &c1}, drift, eps_x, eps_t, report);
  VectorSlab R;
  R.c[0] = std::move(out[0]);
  R.c[1] = std::move(out[1]);
  return {std::move(R), std::move(out[2])};
}

int coarse_size_for(double mu, int n) {
  int nc = 32;
  while (nc < n && !(nc / 2 > 2.0 * mu + 1.0)) nc *= 2;
  return std::min(nc, n);
}

RegularizedState lp_mollify_state(const TimeSlab& P, const TimeSlab& M, const SymbolSpec& symbol, double mu, int L) {
  const GridSpec& grid = P.grid();
  RegularizedState rs;
  rs.coarse = grid;
  rs.coarse.n = coarse_size_for(mu, grid.n);
  rs.report.mu = mu;
  rs.report.coarse_n = rs.coarse.n;
  const int Lc = std::clamp(L, 1, 4);
  for (int j = 0; j < grid.m_t; ++j) {
    for (int which = 0; which < 2; ++which) {
      const ScalarField f = (which == 0 ? P : M).get(j);
      const ScalarField fe = lp_project_leq(f, mu);
      double bound = INFINITY;
      for (int i = 1; i <= Lc; ++i) bound = std::min(bound, std::pow(mu, -i) * ck_norm(f, i));
      const double err = c0_norm(f - fe);
      const ScalarField coarse = resample(fe, rs.coarse.n);
      if (which == 0) {
        rs.report.err_P = std::max(rs.report.err_P, err);
        rs.report.bound_P = std::max(rs.report.bound_P, bound);
        rs.TP.push_back(apply_symbol(symbol, coarse));
        rs.P.push_back(coarse);
      } else {
        rs.report.err_M = std::max(rs.report.err_M, err);
        rs.report.bound_M = std::max(rs.report.bound_M, bound);
        rs.TM.push_back(apply_symbol(symbol, coarse));
        rs.M.push_back(coarse);
      }
    }
  }
  return rs;
}

}  // namespace wildscalar
