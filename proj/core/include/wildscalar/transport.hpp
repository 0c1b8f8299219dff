#pragma once

#include <map>
#include <optional>
#include <vector>

#include "wildscalar/grid.hpp"
#include "wildscalar/interp.hpp"
#include "wildscalar/symbols.hpp"

namespace wildscalar {

/// Time-dependent drift sampled on the frames of a (typically coarse) grid. Values between frames
/// are linear in time; outside the window the nearest frame is held when extension is enabled.
class DriftField {
 public:
  DriftField() = default;
  DriftField(const GridSpec& grid, std::vector<VectorField> frames, bool extend_in_time = false, int refine = 2);
  Vec2 operator()(const Vec2& x, double s) const;
  const GridSpec& grid() const { return grid_; }
  const VectorField& frame(int j) const { return frames_[j]; }
  bool contains(double s) const;
  double max_divergence() const;
  double max_gradient() const;

 private:
  GridSpec grid_;
  std::vector<VectorField> frames_;
  std::vector<VectorInterpolator> interp_;
  bool extend_ = false;
};

/// Phi(x, s; t): the characteristic through x at time t, evaluated at time s (RK4, step <= frame spacing).
Vec2 advance_flow(const DriftField& drift, const Vec2& x, double s, double t);
/// Displacement Phi(x, s; t) - x at every point of the drift grid.
VectorField flow_displacement(const DriftField& drift, double s, double t);

/// Phase xi_I = hat_grad . x + pi_I for I = (k, +); the conjugate index uses -xi_I.
struct PhaseFamily {
  int k = 0;
  int parity = 0;
  Vec2 hat_grad;
  double t_center = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  /// Frame index -> perturbation on the drift grid.
  std::map<int, ScalarField> pi;
  double max_deformation = 0.0;

  bool active(int j) const { return pi.count(j) != 0; }
  /// Perturbation and its gradient resampled to an n-grid.
  ScalarField pi_on(int j, int n) const;
  VectorField grad_pi_on(int j, int n) const;
};

/// Solves (d/dt + drift . grad) xi = 0 with xi(t_center) = hat_grad . x by evolving the periodic
/// perturbation semi-Lagrangianly over the frames of the life window.
PhaseFamily solve_phase(const DriftField& drift, int k, const Vec2& hat_grad, double tau, double deformation_limit = 0.25);

struct MollifyReport {
  double eps_x = 0.0;
  double eps_t = 0.0;
  double error_c0 = 0.0;
  int time_taps = 0;
};

/// Spatial mollification by a compactly supported polynomial kernel of radius eps_x.
ScalarField spatial_mollify(const ScalarField& f, double eps_x);
/// Spatial mollification followed by time averaging along the drift's trajectories.
TimeSlab flow_mollify(const TimeSlab& f, const DriftField& drift, double eps_x, double eps_t,
                      MollifyReport* report = nullptr);
/// Componentwise version sharing one set of trajectories.
VectorSlab flow_mollify(const VectorSlab& R, const DriftField& drift, double eps_x, double eps_t,
                        MollifyReport* report = nullptr);
/// Stress and coefficient pair version.
std::pair<VectorSlab, TimeSlab> flow_mollify(const VectorSlab& R_star, const TimeSlab& c1, const DriftField& drift,
                                             double eps_x, double eps_t, MollifyReport* report = nullptr);

struct LpMollifyReport {
  double mu = 0.0;
  int coarse_n = 0;
  double err_P = 0.0, err_M = 0.0;
  double bound_P = 0.0, bound_M = 0.0;
};

/// Regularized fields P_eps, M_eps and their drifts, stored on a grid that holds every retained mode.
struct RegularizedState {
  GridSpec coarse;
  std::vector<ScalarField> P, M;
  std::vector<VectorField> TP, TM;
  LpMollifyReport report;
};

/// Smallest power-of-two grid (>= 32, <= n) whose Nyquist exceeds 2 mu.
int coarse_size_for(double mu, int n);

RegularizedState lp_mollify_state(const TimeSlab& P, const TimeSlab& M, const SymbolSpec& symbol, double mu, int L);

}  // namespace wildscalar
