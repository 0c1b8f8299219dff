#pragma once

#include <array>
#include <map>
#include <vector>

#include "wildscalar/grid.hpp"
#include "wildscalar/spectral.hpp"
#include "wildscalar/symbols.hpp"
#include "wildscalar/transport.hpp"

namespace wildscalar {

/// phi_k(t) = phi((t - k tau) / tau) with sum_k phi_k^2 = 1.
struct CutoffFamily {
  double tau = 1.0;
  double t0 = 0.0, t1 = 1.0;
  int k_min = 0, k_max = 0;

  /// 1 on |s| <= 1/3, 0 on |s| >= 2/3, cos(pi/2 g(3|s| - 1)) between, with g the quintic smoothstep.
  static double profile(double s);
  double phi(int k, double t) const { return profile((t - k * tau) / tau); }
  double partition_sum(double t) const;
  std::vector<int> active(double t) const;
};

CutoffFamily build_cutoffs(double tau, double t0, double t1);

/// Quintic smoothstep on [0,1] and its first two derivatives.
double smoothstep5(double x);
double smoothstep5_d1(double x);
double smoothstep5_d2(double x);

struct LiftingBoundCheck {
  int r = 0;
  double measured = 0.0;
  double bound = 0.0;
  bool pass() const { return measured <= bound; }
};

/// e(t) = K delta_q h(t)^2 with h = 1 on [lo - tau_hat, hi + tau_hat] and a quintic ramp to 0 over a further 2 tau_hat.
struct LiftingSpec {
  double K = 4.0, C = 4.0;
  double delta_q = 0.0;
  double tau_hat = 0.0;
  double rate = 0.0;  // lambda_q delta_{q-1}^{1/2}
  double it_lo = 0.0, it_hi = 0.0;
  bool empty = false;

  double height() const { return K * delta_q; }
  double h(double t) const;
  double h_d1(double t) const;
  double h_d2(double t) const;
  double e(double t) const { return empty ? 0.0 : height() * h(t) * h(t); }
  double sqrt_e(double t) const { return empty ? 0.0 : std::sqrt(height()) * h(t); }
  double sqrt_e_d1(double t) const { return empty ? 0.0 : std::sqrt(height()) * h_d1(t); }
  double sqrt_e_d2(double t) const { return empty ? 0.0 : std::sqrt(height()) * h_d2(t); }

  std::array<LiftingBoundCheck, 3> derivative_checks;
  double min_positivity_margin = 0.0;  // min over the support of c of (e + s c) / e
  double min_dominance_margin = 0.0;   // min over the support of c of (e - 2|c|) / e
};

/// Time support of a coefficient slab: first and last frame whose maximum exceeds both 1e-13 of the slab maximum
/// and the absolute floor.
std::pair<double, double> measured_time_support(const TimeSlab& c, bool* empty, double floor = 0.0);

/// Builds e on the measured support of c, checks positivity e + s c > 0 and dominance e > 2|c| at every frame
/// (LiftingInfeasible otherwise), and measures the three derivative bounds of e^{1/2}.
LiftingSpec build_lifting(const TimeSlab& c, int radicand_sign, double delta_q, double tau_hat, double rate, double K,
                          double C);

/// a_I = ((e + s c) / 2)^{1/2} phi_k for both members of each conjugate pair, so that sum_I a_I^2 = e + s c.
class AmplitudeSet {
 public:
  AmplitudeSet(const LiftingSpec& lifting, const CutoffFamily& cutoffs, const TimeSlab& c, int radicand_sign);
  ScalarField radicand(int j) const;
  ScalarField amplitude(int k, int j) const;
  /// sum over all indices, conjugates included.
  ScalarField square_sum(int j) const;
  const LiftingSpec& lifting() const { return lifting_; }
  const CutoffFamily& cutoffs() const { return cutoffs_; }
  int sign() const { return sign_; }
  double time(int j) const { return c_.grid().time(j); }

 private:
  const LiftingSpec& lifting_;
  const CutoffFamily& cutoffs_;
  const TimeSlab& c_;
  int sign_;
};

/// Validates nonnegative radicands at every frame (NegativeRadicand otherwise).
AmplitudeSet build_amplitudes(const LiftingSpec& lifting, const CutoffFamily& cutoffs, const TimeSlab& c, int radicand_sign);

/// Everything about the (k,+) packet at one frame; the (k,-) packet is its complex conjugate.
struct Packet {
  int k = 0;
  int parity = 0;
  Vec2 hat_grad;       // unscaled: separation^parity * direction
  NearBand band;
  ScalarField a;
  VectorField grad_xi; // hat_grad + grad pi
  ComplexField E;      // exp(i lambda xi)
  ComplexField W;      // P_near[a E]
  std::array<ComplexField, 2> TW;
};

struct IncrementContext {
  const SymbolSpec* symbol = nullptr;
  SymbolFrame frame;
  int stage_parity = 0;
  double lambda_next = 1.0;
  double separation = 4.0;
  int n = 0;
};

/// Packets with nonzero amplitude at frame j; phases are looked up by k.
std::vector<Packet> build_packets(const IncrementContext& ctx, const AmplitudeSet& amps,
                                  const std::map<int, PhaseFamily>& phases, int j);

struct IncrementFrame {
  ScalarField W;
  VectorField TW;
  VectorField W_pot;
};

/// W = sum 2 Re W_I, T[W] and the potential with div W_pot = W.
IncrementFrame frame_increment(const std::vector<Packet>& packets, int n);

struct IncrementSlabs {
  TimeSlab W;
  VectorSlab TW;
  VectorSlab W_pot;
};

IncrementSlabs assemble_increment(const IncrementContext& ctx, const AmplitudeSet& amps,
                                  const std::map<int, PhaseFamily>& phases, const GridSpec& grid);

}  // namespace wildscalar
