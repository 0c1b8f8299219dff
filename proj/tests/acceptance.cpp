#include <gmpxx.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "wildscalar/checkpoint.hpp"
#include "wildscalar/config.hpp"
#include "wildscalar/errors.hpp"
#include "wildscalar/increment.hpp"
#include "wildscalar/microlocal.hpp"
#include "wildscalar/norms.hpp"
#include "wildscalar/random.hpp"
#include "wildscalar/regime.hpp"
#include "wildscalar/report.hpp"
#include "wildscalar/spectral.hpp"
#include "wildscalar/symbols.hpp"

using namespace wildscalar;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [" << what << "]";
    }
  }
};

int failures = 0;

void criterion(int id, const char* title, const std::function<void(Verdict&)>& body) {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(v);
  } catch (const std::exception& e) {
    v.pass = false;
    v.detail << " [exception: " << e.what() << "]";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!v.pass) ++failures;
  std::printf("criterion %d %s: %s (%.1fs)%s\n", id, title, v.pass ? "PASS" : "FAIL", secs, v.detail.str().c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("wildscalar_acceptance_" + name);
  fs::remove_all(p);
  return p;
}

TimeSlab bumped_coefficient(const GridSpec& g, double amp) {
  TimeSlab c(g, "c");
  for (int j = 0; j < g.m_t; ++j) {
    const double t = g.time(j);
    const double b = (t > 1.0 && t < 2.0) ? amp * std::pow(std::sin(M_PI * (t - 1.0)), 4) : 0.0;
    c.set(j, ScalarField::sample(g.n, [b](double x, double y) { return b * (std::sin(x) + 0.5 * std::cos(y)); }));
  }
  return c;
}

RunConfig small_config(int Q, const fs::path& out) {
  RunConfig c;
  c.grid = GridSpec{2, 128, 64, 0.0, 4.0};
  c.schedule.lambda0 = 2;
  c.schedule.K = 16;
  c.schedule.Q = Q;
  c.seed.chi_lo = 1.4;
  c.seed.chi_hi = 2.6;
  c.seed.chi_ramp = 0.5;
  c.write_microlocal = false;
  c.out_dir = out.string();
  c.scratch_dir = fs::temp_directory_path().string();
  return c;
}

double slab_diff(const TimeSlab& a, const TimeSlab& b) {
  double d = 0;
  for (int j = 0; j < a.grid().m_t; ++j) d = std::max(d, c0_norm(a.get(j) - b.get(j)));
  return d;
}

}  // namespace

int main() {
  criterion(1, "regime exactness", [](Verdict& v) {
    auto eval = [](int d, bool forced) {
      RegimeQuery q;
      q.b = 1;
      q.d = d;
      q.gamma = 0;
      q.forced = forced;
      return evaluate_regime(q);
    };
    v.require(eval(1, true).alpha_sup == mpq_class(1, 3), "forced d=1 alpha");
    v.require(eval(2, true).alpha_sup == mpq_class(1, 5), "forced d=2 alpha");
    v.require(eval(2, false).alpha_sup == mpq_class(1, 9), "unforced d=2 alpha");
    v.require(eval(2, true).beta_sup == mpq_class(2, 5), "forced d=2 beta");
    v.require(eval(2, false).beta_sup == mpq_class(2, 9), "unforced d=2 beta");
    for (int d = 1; d <= 6; ++d) {
      v.require(eval(d, true).alpha_sup == mpq_class(1, 2 * d + 1), "forced alpha d=" + std::to_string(d));
      v.require(eval(d, false).alpha_sup == mpq_class(1, 4 * d + 1), "unforced alpha d=" + std::to_string(d));
      v.require(eval(d, true).zeta_sup == mpq_class(1, 2 * d), "zeta d=" + std::to_string(d));
    }
  });

  criterion(2, "symbol structure", [](Verdict& v) {
    const SymbolSpec s = builtin_ipm();
    const SymbolReport rep = validate_symbol(s, 32);
    for (const auto& c : rep.checks) v.require(c.pass, c.property);
    std::mt19937_64 rng(2024);
    double worst = 0;
    for (int i = 0; i < 10; ++i) {
      const ScalarField th = random_smooth_field(256, 12, rng);
      const VectorField u = apply_symbol(s, th);
      const double scale = std::max(ck_norm(u.c[0], 1), ck_norm(u.c[1], 1));
      worst = std::max(worst, c0_norm(divergence(u)) / std::max(scale, 1e-300));
    }
    v.require(worst <= 1e-10, fmt("div T relative %.3e", worst, 0));
    v.detail << " div_rel=" << worst;
  });

  criterion(3, "microlocal scaling", [](Verdict& v) {
    const SymbolSpec s = builtin_ipm();
    const auto rows = microlocal_scaling_suite(s, {1, 1}, 512, {8, 16, 32, 64}, 5);
    const double slope = loglog_slope(rows, MicroOp::Symbol);
    v.require(slope >= -1.3 && slope <= -0.7, fmt("slope %.3f", slope, 0));
    v.detail << " slope=" << slope;
    PlaneWavePacket p;
    p.amp_re = ScalarField(512, 0.9);
    p.amp_im = ScalarField(512, 0.2);
    p.pi = ScalarField(512);
    p.hat_grad = {1.0, 1.0};
    for (double lam : {8.0, 16.0, 32.0, 64.0}) {
      p.lambda = lam;
      const NearBand band = NearBand::make(lam, {1.0, 1.0}, 0, 1, 4.0);
      for (MicroOp op : {MicroOp::Symbol, MicroOp::NearProjection}) {
        ResidualReport r;
        microlocal_residual(p, op, s, band, &r);
        v.require(r.residual_norm <= 1e-11, fmt("linear residual %.3e at lambda %.0f", r.residual_norm, lam));
      }
    }
  });

  criterion(4, "cancellation keystone", [](Verdict& v) {
    const SymbolSpec s = builtin_ipm();
    const int n = 128;
    for (const Vec2 hat : {Vec2{1, 1}, Vec2{1, -1}, Vec2{4, 4}, Vec2{4, -4}, Vec2{2, 3}}) {
      PlaneWavePacket p;
      const double a = 0.7;
      p.amp_re = ScalarField(n, a);
      p.amp_im = ScalarField(n);
      p.pi = ScalarField(n);
      p.hat_grad = hat;
      p.lambda = 5.0;
      const ComplexField w = synthesize(p);
      ComplexField wb(n);
      for (std::size_t i = 0; i < w.v.size(); ++i) wb.v[i] = std::conj(w.v[i]);
      const auto [tw1, tw2] = apply_symbol(s, forward(w));
      const auto [twb1, twb2] = apply_symbol(s, forward(wb));
      const ComplexField* tw[2] = {&tw1, &tw2};
      const ComplexField* twb[2] = {&twb1, &twb2};
      const Vec2 mp = s(hat), mm = s(-hat);
      const double expect[2] = {a * a * (mp.x1 + mm.x1), a * a * (mp.x2 + mm.x2)};
      const double scale = std::max(std::hypot(expect[0], expect[1]), 1e-300);
      for (int c = 0; c < 2; ++c) {
        cplx mean = 0;
        for (std::size_t i = 0; i < w.v.size(); ++i) mean += tw[c]->v[i] * wb.v[i] + twb[c]->v[i] * w.v[i];
        mean /= double(w.v.size());
        v.require(std::abs(mean - expect[c]) <= 1e-8 * scale, "zero mode");
      }
    }
    for (const Vec2 hat : {Vec2{1, 1}, Vec2{1, -1}, Vec2{4, 4}, Vec2{4, -4}}) {
      const Vec2 m = s(hat);
      v.require(hat.x1 * m.x1 + hat.x2 * m.x2 == 0.0, "transversality");
    }
  });

  criterion(5, "partition, lifting and amplitude identities", [](Verdict& v) {
    const CutoffFamily cut = build_cutoffs(0.3, 0.0, 4.0);
    double part = 0;
    for (int i = 0; i <= 40000; ++i) part = std::max(part, std::abs(cut.partition_sum(4.0 * i / 40000) - 1.0));
    v.require(part <= 1e-12, fmt("partition %.3e", part, 0));
    GridSpec g{2, 64, 81, 0.0, 4.0};
    const TimeSlab c = bumped_coefficient(g, 0.5);
    double sq = 0;
    for (int sign : {1, -1}) {
      const LiftingSpec L = build_lifting(c, sign, 1.0, 0.25, 4.0, 4.0, 4.0);
      for (const auto& chk : L.derivative_checks)
        v.require(chk.pass(), fmt("lifting derivative %.0f measured %.3e", chk.r, chk.measured));
      const CutoffFamily cf = build_cutoffs(0.2, g.t0, g.t1);
      const AmplitudeSet A = build_amplitudes(L, cf, c, sign);
      for (int j = 0; j < g.m_t; ++j) {
        ScalarField expect = c.get(j);
        expect *= double(sign);
        for (auto& x : expect.v) x += L.e(g.time(j));
        sq = std::max(sq, c0_norm(A.square_sum(j) - expect));
      }
    }
    v.require(sq <= 1e-10, fmt("square sum %.3e", sq, 0));
    v.detail << " partition=" << part << " square_sum=" << sq;
  });

  // One desk-default run serves closure, contraction and the transport scaling audit.
  const fs::path desk_dir = fresh_dir("desk");
  RunConfig desk;
  desk.out_dir = desk_dir.string();
  desk.scratch_dir = fs::temp_directory_path().string();
  desk.write_microlocal = false;
  std::optional<RunOutcome> desk_run;
  std::string desk_error;
  try {
    desk_run = execute_run(desk);
  } catch (const std::exception& e) {
    desk_error = e.what();
  }

  criterion(6, "closure after one desk step", [&](Verdict& v) {
    v.require(desk_run.has_value(), "desk run: " + desk_error);
    if (!desk_run) return;
    const auto& diags = desk_run->result.diagnostics;
    v.require(!diags.empty(), "no completed step");
    if (diags.empty()) return;
    const double mM = diag_value(diags[0], "closure_mismatch_M"), mP = diag_value(diags[0], "closure_mismatch_P");
    const double est = diag_value(diags[0], "closure_estimate");
    v.require(std::max(mM, mP) <= 10.0 * est, fmt("mismatch %.3e vs estimate %.3e", std::max(mM, mP), est));
    v.detail << " mismatch=" << std::max(mM, mP) << " estimate=" << est;
  });

  criterion(7, "contraction and pause over two desk steps", [&](Verdict& v) {
    v.require(desk_run.has_value(), "desk run: " + desk_error);
    if (!desk_run) return;
    const RunResult& r = desk_run->result;
    if (r.failure) v.require(false, "step failure at q=" + std::to_string(r.failure->failed_q) + ": " + r.failure->message);
    for (std::size_t i = 0; i < r.ledger.size(); ++i) {
      const double prev = diag_value(r.diagnostics[i], "Rtil_prev"), cur = r.ledger[i].Rtil_total;
      v.require(cur < prev, fmt("Rtil %.4g -> %.4g", prev, cur));
      v.require(r.ledger[i].pause_residual <= 1e-12, fmt("pause %.3e at step %.0f", r.ledger[i].pause_residual, double(i)));
    }
    if (!r.failure && r.state.q == desk.schedule.Q) {
      const auto seed = read_checkpoint(desk_dir / "checkpoints" / "q0");
      const double gap = 2.0 * c0_norm(r.state.M), ref = 2.0 * c0_norm(seed.state.M);
      v.require(gap > 0.5 * ref, fmt("solution gap %.4g vs %.4g", gap, 0.5 * ref));
    }
  });

  criterion(8, "scaling-form audit", [&](Verdict& v) {
    v.require(desk_run.has_value(), "desk run: " + desk_error);
    if (!desk_run) return;
    const RunResult& r = desk_run->result;
    const ParameterSchedule sch(desk.schedule);
    v.require(r.ledger.size() == std::size_t(desk.schedule.Q), "only " + std::to_string(r.ledger.size()) + " desk steps");
    for (std::size_t i = 0; i < r.ledger.size(); ++i) {
      const double rt = r.ledger[i].R_T, form = diag_value(r.diagnostics[i], "R_T_scale");
      v.require(rt <= 20 * form && rt >= form / 20, fmt("R_T %.3e vs form %.3e", rt, form));
      const double cc = r.ledger[i].c_coeff, lim = 50 * sch.delta(int(i) + 1);
      v.require(cc <= lim, fmt("c_coeff %.3e vs %.3e", cc, lim));
      v.detail << " q" << i << ":R_T/form=" << rt / form << ",c/delta=" << cc / sch.delta(int(i) + 1);
    }
    RunConfig diss = desk;
    diss.schedule.nu = 1.0;
    diss.schedule.gamma = 0.5;
    diss.schedule.Q = 1;
    // Dissipation of the seed enlarges the initial stress past K delta_0 / 2 at K = 4.
    diss.schedule.K = 5;
    diss.out_dir = fresh_dir("desk_dissipative").string();
    const RunOutcome d = execute_run(diss);
    v.require(!d.result.ledger.empty(), "dissipative run produced no step");
    for (std::size_t i = 0; i < d.result.ledger.size(); ++i) {
      const double rd = d.result.ledger[i].R_D, form = diag_value(d.result.diagnostics[i], "R_D_scale");
      v.require(rd <= 20 * form && rd >= form / 20, fmt("R_D %.3e vs form %.3e", rd, form));
      v.detail << " R_D/form=" << rd / form;
    }
  });

  criterion(9, "determinism and persistence", [](Verdict& v) {
    const fs::path a = fresh_dir("det_a"), b = fresh_dir("det_b"), c = fresh_dir("det_c");
    const RunOutcome ra = execute_run(small_config(2, a));
    const RunOutcome rb = execute_run(small_config(2, b));
    v.require(!ra.result.failure && !rb.result.failure, "small run failed");
    v.require(read_text(a / "ledger.csv") == read_text(b / "ledger.csv"), "ledgers differ between identical runs");
    execute_run(small_config(1, c));
    const RunOutcome rc = resume_run(c, {{"schedule.Q", "2"}});
    v.require(!rc.result.failure, "resumed run failed");
    const auto la = read_ledger_csv(a / "ledger.csv"), lc = read_ledger_csv(c / "ledger.csv");
    v.require(la.size() == 2 && lc.size() == 2, "ledger length");
    double worst = 0;
    for (std::size_t i = 0; i < std::min(la.size(), lc.size()); ++i) {
      const auto x = ledger_values(la[i]), y = ledger_values(lc[i]);
      for (std::size_t k = 0; k < x.size(); ++k) worst = std::max(worst, std::abs(x[k] - y[k]) / std::max(1.0, std::abs(x[k])));
    }
    const Checkpoint ca = read_checkpoint(a / "checkpoints" / "q2"), cc = read_checkpoint(c / "checkpoints" / "q2");
    worst = std::max({worst, slab_diff(ca.state.P, cc.state.P), slab_diff(ca.state.M, cc.state.M)});
    v.require(worst <= 1e-12, fmt("resume deviation %.3e", worst, 0));
    v.detail << " resume_deviation=" << worst;
  });

  std::printf("%s: %d criterion failure(s)\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
