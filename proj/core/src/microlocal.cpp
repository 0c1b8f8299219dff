#include "wildscalar/microlocal.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include "wildscalar/errors.hpp"
#include "wildscalar/norms.hpp"
#include "wildscalar/random.hpp"

namespace wildscalar {

const char* to_string(MicroOp op) { return op == MicroOp::Symbol ? "T" : "P_near"; }

namespace {

bool present(const ScalarField& f) { return f.n > 0; }

void check_integer_frequency(const PlaneWavePacket& pkt) {
  const double f1 = pkt.lambda * pkt.hat_grad.x1, f2 = pkt.lambda * pkt.hat_grad.x2;
  if (std::abs(f1 - std::round(f1)) > 1e-9 || std::abs(f2 - std::round(f2)) > 1e-9)
    throw Error(ErrorKind::InvalidArgument, "lambda * hat_grad must be an integer frequency");
}

void check_resolved(const PlaneWavePacket& pkt, const NearBand& band, MicroOp op) {
  if (op == MicroOp::NearProjection) {
    check_band_resolved(band, pkt.n());
    return;
  }
  const double reach =
      pkt.lambda * std::max(std::abs(pkt.hat_grad.x1), std::abs(pkt.hat_grad.x2)) + 0.5 * pkt.lambda * pkt.hat_grad.norm();
  if (!(reach < 0.5 * pkt.n()))
    throw Error(ErrorKind::NyquistViolation, "packet frequency reach " + std::to_string(reach) + " exceeds Nyquist");
}

VectorField local_gradient(const PlaneWavePacket& pkt) {
  const int n = pkt.n();
  VectorField g(n);
  if (present(pkt.pi)) g = gradient(pkt.pi);
  for (auto& v : g.c[0].v) v += pkt.hat_grad.x1;
  for (auto& v : g.c[1].v) v += pkt.hat_grad.x2;
  return g;
}

}  // namespace

ComplexField synthesize(const PlaneWavePacket& pkt) {
  check_integer_frequency(pkt);
  const int n = pkt.n();
  ComplexField out(n);
  const long f1 = std::lround(pkt.lambda * pkt.hat_grad.x1), f2 = std::lround(pkt.lambda * pkt.hat_grad.x2);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      // Integer phase reduced modulo n keeps the linear part exact.
      const long idx = ((f1 * i + f2 * j) % n + n) % n;
      double ph = 2.0 * std::numbers::pi * static_cast<double>(idx) / n;
      if (present(pkt.pi)) ph += pkt.lambda * pkt.pi(i, j);
      const cplx a(pkt.amp_re(i, j), present(pkt.amp_im) ? pkt.amp_im(i, j) : 0.0);
      out(i, j) = a * std::polar(1.0, ph);
    }
  return out;
}

PacketField plane_wave_apply(const PlaneWavePacket& pkt, MicroOp op, const SymbolSpec& symbol, const NearBand& band) {
  check_resolved(pkt, band, op);
  const ComplexSpectrum s = forward(synthesize(pkt));
  PacketField out;
  if (op == MicroOp::NearProjection) {
    out.comp.push_back(inverse(lp_project_near(s, band)));
  } else {
    auto [a, b] = apply_symbol(symbol, s);
    out.comp.push_back(std::move(a));
    out.comp.push_back(std::move(b));
  }
  return out;
}

PacketField principal_term(const PlaneWavePacket& pkt, MicroOp op, const SymbolSpec& symbol, const NearBand& band) {
  const ComplexField base = synthesize(pkt);
  const VectorField g = local_gradient(pkt);
  const int n = pkt.n();
  PacketField out;
  if (op == MicroOp::NearProjection) {
    ComplexField p(n);
    for (std::size_t i = 0; i < p.v.size(); ++i)
      p.v[i] = base.v[i] * band.multiplier(pkt.lambda * g.c[0].v[i], pkt.lambda * g.c[1].v[i]);
    out.comp.push_back(std::move(p));
  } else {
    ComplexField p1(n), p2(n);
    for (std::size_t i = 0; i < p1.v.size(); ++i) {
      const Vec2 m = symbol(g.c[0].v[i], g.c[1].v[i]);
      p1.v[i] = base.v[i] * m.x1;
      p2.v[i] = base.v[i] * m.x2;
    }
    out.comp.push_back(std::move(p1));
    out.comp.push_back(std::move(p2));
  }
  return out;
}

PacketField microlocal_residual(const PlaneWavePacket& pkt, MicroOp op, const SymbolSpec& symbol, const NearBand& band,
                                ResidualReport* report) {
  PacketField exact = plane_wave_apply(pkt, op, symbol, band);
  const PacketField princ = principal_term(pkt, op, symbol, band);
  double norm = 0.0;
  for (std::size_t c = 0; c < exact.comp.size(); ++c) {
    auto& e = exact.comp[c].v;
    for (std::size_t i = 0; i < e.size(); ++i) {
      e[i] -= princ.comp[c].v[i];
      norm = std::max(norm, std::abs(e[i]));
    }
  }
  if (report) {
    ResidualReport r;
    r.residual_norm = norm;
    ScalarField mod(pkt.n());
    for (std::size_t i = 0; i < mod.v.size(); ++i)
      mod.v[i] = std::hypot(pkt.amp_re.v[i], present(pkt.amp_im) ? pkt.amp_im.v[i] : 0.0);
    r.amp_c0 = c0_norm(mod);
    double grad = ck_norm(pkt.amp_re, 1);
    if (present(pkt.amp_im)) grad = std::max(grad, ck_norm(pkt.amp_im, 1));
    r.amp_c1 = r.amp_c0 + grad;
    r.hessian_c0 = present(pkt.pi) ? ck_norm(pkt.pi, 2) : 0.0;
    const double denom = r.amp_c1 + r.amp_c0 * r.hessian_c0;
    r.ratio = denom > 0.0 ? norm * pkt.lambda / denom : 0.0;
    *report = r;
  }
  return exact;
}

std::vector<ScalingRow> microlocal_scaling_suite(const SymbolSpec& symbol, const IntVec& direction, int n,
                                                 const std::vector<double>& lambdas, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ScalarField amp = random_smooth_field(n, 3, rng);
  amp *= 0.4;
  for (auto& v : amp.v) v += 1.0;
  ScalarField pi = random_smooth_field(n, 2, rng);
  const double gmax = ck_norm(pi, 1);
  pi *= 0.1 * direction.as_vec().norm() / std::max(gmax, 1e-300);
  std::vector<ScalingRow> rows;
  for (double lam : lambdas) {
    PlaneWavePacket pkt;
    pkt.amp_re = amp;
    pkt.hat_grad = direction.as_vec();
    pkt.pi = pi;
    pkt.lambda = lam;
    const NearBand band = NearBand::make(lam, direction.as_vec(), 0, 1, 1.0);
    for (MicroOp op : {MicroOp::Symbol, MicroOp::NearProjection}) {
      ResidualReport r;
      microlocal_residual(pkt, op, symbol, band, &r);
      rows.push_back({lam, op, r.residual_norm, r.ratio});
    }
  }
  return rows;
}

double loglog_slope(const std::vector<ScalingRow>& rows, MicroOp op) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (const auto& r : rows) {
    if (r.op != op) continue;
    const double x = std::log(r.lambda), y = std::log(r.residual_norm);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m < 2) throw Error(ErrorKind::InvalidArgument, "slope needs at least two rows");
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

void write_scaling_csv(const std::filesystem::path& path, const std::vector<ScalingRow>& rows) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out << "lambda,op,residual_norm,ratio\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%s,%.17g,%.17g\n", r.lambda, to_string(r.op), r.residual_norm, r.ratio);
    out << buf;
  }
}

}  // namespace wildscalar
