#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wildscalar/errors.hpp"
#include "wildscalar/grid.hpp"
#include "wildscalar/schedule.hpp"
#include "wildscalar/symbols.hpp"

namespace wildscalar {

struct StepOptions {
  /// Frequency ratio between odd-k and even-k packets; must be an integer > 1.
  double separation = 4.0;
  double deformation_limit = 0.25;
  double closure_factor = 10.0;
  bool check_closure = true;
};

/// Everything a step needs besides the state.
struct Model {
  ParameterSchedule schedule;
  SymbolSpec symbol;
  SymbolFrame frame;
  StepOptions options;
};

/// P0 = p_scale delta_0^{1/2} cos(x1) chi(t), M0 = m_scale delta_0^{1/2} cos(x2) chi(t), plus optional random low modes.
struct SeedSpec {
  double p_scale = 1.0;
  double m_scale = 1.0;
  double chi_lo = 0.2;
  double chi_hi = 1.8;
  /// Zero ramp gives the indicator of [chi_lo, chi_hi].
  double chi_ramp = 0.8;
  int random_kmax = 0;
  double random_amp = 0.0;
  std::uint64_t seed = 1;

  double chi(double t) const;
};

struct IterationState {
  int q = 0;
  TimeSlab P, M;
  VectorSlab Rbar, Rtil;

  const GridSpec& grid() const { return P.grid(); }
  IterationState clone() const;
};

/// Second-order time derivative: centered inside, one-sided at the ends.
ScalarField time_derivative(const TimeSlab& s, int j);
/// Fourth-order centered time derivative, defined for 2 <= j <= m_t - 3.
ScalarField time_derivative4(const TimeSlab& s, int j);

/// Left-hand side of the P and M equations minus the dissipation, i.e. the divergence the stresses must produce.
ScalarField residual_P(const TimeSlab& P, const TimeSlab& M, int j, const SymbolSpec& s, double nu, double gamma);
ScalarField residual_M(const TimeSlab& P, const TimeSlab& M, int j, const SymbolSpec& s, double nu, double gamma);

struct ClosureReport {
  double mismatch_M = 0.0;
  double mismatch_P = 0.0;
  double residual_scale = 0.0;
  double discretization_estimate = 0.0;
  double threshold = 0.0;
  bool pass() const { return mismatch_M <= threshold && mismatch_P <= threshold; }
};

/// Compares div of the stored stresses with the direct residuals of the stored fields.
ClosureReport check_closure(const IterationState& s, const Model& model);

IterationState init_tuple(const Model& model, const GridSpec& grid, const SeedSpec& seed);

struct LedgerRow {
  int q = 0;
  double R_T = 0, R_D = 0, R_N = 0;
  std::array<double, 6> R_O{};
  double R_M = 0;
  double c_coeff = 0;
  double Rtil_total = 0;
  double delta_target = 0;
  double holder_alpha = 0;
  double pause_residual = 0;
};

/// Ordered name/value diagnostics for one step.
using Diagnostics = std::vector<std::pair<std::string, double>>;
double diag_value(const Diagnostics& d, const std::string& name);

struct StepResult {
  IterationState next;
  LedgerRow row;
  Diagnostics diag;
};

/// One convex-integration step. Throws on failure; the input state is never modified.
StepResult step(const IterationState& state, const Model& model);

struct BoundCheck {
  std::string name;
  double measured = 0.0;
  double bound = 0.0;
  bool gated = true;
  bool pass() const { return !gated || measured <= bound; }
};

struct InductiveReport {
  std::vector<BoundCheck> checks;
  bool all_pass() const;
};

InductiveReport verify_inductive(const StepResult& r, const Model& model, double budget);

struct RunFailure {
  ErrorKind kind = ErrorKind::InvalidArgument;
  std::string message;
  int failed_q = 0;
};

struct RunResult {
  IterationState state;
  std::vector<LedgerRow> ledger;
  std::vector<Diagnostics> diagnostics;
  std::optional<RunFailure> failure;
  double forcing_c0 = 0.0;
  double discrepancy = 0.0;
};

/// Runs steps from `start` until q == Q; on_step sees every completed step before the next begins.
RunResult run_steps(IterationState start, const Model& model,
                    const std::function<void(const IterationState&, const StepResult&)>& on_step = {});

}  // namespace wildscalar
