#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "wildscalar/microlocal.hpp"
#include "wildscalar/norms.hpp"
#include "wildscalar/spectral.hpp"
#include "wildscalar/symbols.hpp"

using namespace wildscalar;

namespace {

PlaneWavePacket linear_packet(int n, double lambda, Vec2 hat, double re, double im) {
  PlaneWavePacket p;
  p.amp_re = ScalarField(n, re);
  p.amp_im = ScalarField(n, im);
  p.hat_grad = hat;
  p.pi = ScalarField(n);
  p.lambda = lambda;
  return p;
}

cplx mean_of(const ComplexField& f) {
  cplx s = 0;
  for (const auto& v : f.v) s += v;
  return s / double(f.v.size());
}

}  // namespace

TEST_CASE("linear phase with constant amplitude has no microlocal residual") {
  const SymbolSpec s = builtin_ipm();
  for (int parity : {0, 1}) {
    const double sep = 4.0;
    const Vec2 hat = Vec2{1.0, 1.0} * (parity ? sep : 1.0);
    const PlaneWavePacket p = linear_packet(128, 6.0, hat, 1.3, -0.4);
    const NearBand band = NearBand::make(6.0, {1.0, 1.0}, parity, 1, sep);
    for (MicroOp op : {MicroOp::Symbol, MicroOp::NearProjection}) {
      ResidualReport rep;
      microlocal_residual(p, op, s, band, &rep);
      CHECK(rep.residual_norm <= 1e-11);
    }
  }
}

TEST_CASE("principal term of a plane wave is the frozen symbol") {
  const SymbolSpec s = builtin_ipm();
  const PlaneWavePacket p = linear_packet(32, 5.0, {1.0, -1.0}, 0.8, 0.0);
  const NearBand band = NearBand::make(5.0, {1.0, -1.0}, 0, 1, 4.0);
  const PacketField pt = principal_term(p, MicroOp::Symbol, s, band);
  const ComplexField e = synthesize(p);
  const Vec2 m = s(1.0, -1.0);
  double worst = 0;
  for (std::size_t i = 0; i < e.v.size(); ++i) {
    worst = std::max(worst, std::abs(pt.comp[0].v[i] - m.x1 * e.v[i]));
    worst = std::max(worst, std::abs(pt.comp[1].v[i] - m.x2 * e.v[i]));
  }
  CHECK(worst < 1e-14);
}

TEST_CASE("frame directions are exactly transversal to their symbol") {
  const SymbolSpec s = builtin_ipm();
  for (const Vec2 hat : {Vec2{1, 1}, Vec2{1, -1}, Vec2{4, 4}, Vec2{4, -4}}) {
    const Vec2 m = s(hat);
    CHECK(hat.x1 * m.x1 + hat.x2 * m.x2 == 0.0);
  }
}

TEST_CASE("residual decays like the inverse frequency") {
  const SymbolSpec s = builtin_ipm();
  const auto rows = microlocal_scaling_suite(s, {1, 1}, 256, {8, 16, 32}, 7);
  CHECK(rows.size() == 6);
  const double slope = loglog_slope(rows, MicroOp::Symbol);
  CHECK(slope >= -1.3);
  CHECK(slope <= -0.7);
  for (const auto& r : rows) CHECK(std::isfinite(r.ratio));
}

TEST_CASE("self-interaction of a conjugate pair has the predicted zero mode") {
  const SymbolSpec s = builtin_ipm();
  const int n = 64;
  for (const Vec2 hat : {Vec2{1, 1}, Vec2{1, -1}, Vec2{4, 4}, Vec2{2, 3}}) {
    const double lambda = 6.0, a = 0.7;
    const PlaneWavePacket p = linear_packet(n, lambda, hat, a, 0.0);
    const ComplexField w = synthesize(p);
    ComplexField wb(n);
    for (std::size_t i = 0; i < w.v.size(); ++i) wb.v[i] = std::conj(w.v[i]);
    const auto [tw1, tw2] = apply_symbol(s, forward(w));
    const auto [twb1, twb2] = apply_symbol(s, forward(wb));
    ComplexField z1(n), z2(n);
    for (std::size_t i = 0; i < w.v.size(); ++i) {
      z1.v[i] = tw1.v[i] * wb.v[i] + twb1.v[i] * w.v[i];
      z2.v[i] = tw2.v[i] * wb.v[i] + twb2.v[i] * w.v[i];
    }
    const Vec2 mp = s(hat), mm = s(-hat);
    const double e1 = a * a * (mp.x1 + mm.x1), e2 = a * a * (mp.x2 + mm.x2);
    const double scale = std::max(std::hypot(e1, e2), 1e-300);
    CHECK(std::abs(mean_of(z1) - e1) <= 1e-8 * scale);
    CHECK(std::abs(mean_of(z2) - e2) <= 1e-8 * scale);
    CHECK(std::abs(hat.x1 * mp.x1 + hat.x2 * mp.x2) <= 1e-15 * hat.norm());
  }
}
