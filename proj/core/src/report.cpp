#include "wildscalar/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "wildscalar/checkpoint.hpp"
#include "wildscalar/errors.hpp"
#include "wildscalar/microlocal.hpp"
#include "wildscalar/norms.hpp"

namespace wildscalar {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_num(const std::string& s, const fs::path& p) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::IoError, "malformed number '" + s + "' in " + p.string());
  }
}

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + p.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

std::vector<double> microlocal_lambdas(const IntVec& dir, int n) {
  std::vector<double> out;
  const double len = dir.as_vec().norm();
  for (double l : {8.0, 16.0, 32.0, 64.0})
    if (1.5 * l * len < 0.5 * n) out.push_back(l);
  return out;
}

struct RunContext {
  fs::path out;
  RunConfig cfg;
  std::string cfg_text;
  Model model;
};

void configure_storage(const RunConfig& cfg) {
  if (!cfg.scratch_dir.empty()) set_scratch_directory(cfg.scratch_dir);
  set_spill_threshold_bytes(static_cast<std::size_t>(cfg.spill_mb * 1024.0 * 1024.0));
}

void write_manifest(const RunContext& ctx, const RunOutcome& o) {
  const RunResult& r = o.result;
  json files = json::array({"config.cfg", "ledger.csv", "diagnostics.csv", "inductive.csv", "regime.csv"});
  if (fs::exists(ctx.out / "microlocal.csv")) files.push_back("microlocal.csv");
  json m = {{"seed", ctx.cfg.seed.seed},
            {"q_reached", r.state.q},
            {"Q", ctx.cfg.schedule.Q},
            {"grid", {{"d", ctx.cfg.grid.d}, {"n", ctx.cfg.grid.n}, {"m_t", ctx.cfg.grid.m_t},
                      {"window", {ctx.cfg.grid.t0, ctx.cfg.grid.t1}}}},
            {"forcing_c0", r.forcing_c0},
            {"discrepancy_c0", r.discrepancy},
            {"files", files},
            {"config", ctx.cfg_text}};
  if (o.last_checkpoint) m["last_checkpoint"] = o.last_checkpoint->string();
  if (r.failure) {
    m["failure"] = {{"kind", to_string(r.failure->kind)}, {"message", r.failure->message}, {"q", r.failure->failed_q}};
  } else {
    m["failure"] = nullptr;
  }
  int passed = 0, gated = 0;
  for (const auto& rec : o.inductive)
    if (rec.check.gated) ++gated, passed += rec.check.pass() ? 1 : 0;
  m["inductive"] = {{"gated", gated}, {"passed", passed}};
  write_text_atomic(ctx.out / "manifest.json", m.dump(2) + "\n");
}

void write_regime_for(const RunContext& ctx) {
  const auto& p = ctx.cfg.schedule;
  auto rows = regime_table({1, 2, 3, 4, 5, 6}, {true, false}, mpq_class(1), mpq_class(0));
  auto at_b = regime_table({p.d}, {true, false}, mpq_class(p.b), mpq_class(p.gamma));
  rows.insert(rows.end(), at_b.begin(), at_b.end());
  write_text_atomic(ctx.out / "regime.csv", format_regime_csv(rows));
}

/// Runs from `start` to Q, checkpointing and persisting after every step.
RunOutcome continue_run(const RunContext& ctx, IterationState start, RunOutcome o) {
  o.out_dir = ctx.out;
  auto persist = [&] {
    write_ledger_csv(ctx.out / "ledger.csv", o.result.ledger);
    write_diagnostics_csv(ctx.out / "diagnostics.csv", o.ledger_q, o.result.diagnostics);
    write_inductive_csv(ctx.out / "inductive.csv", o.inductive);
  };
  persist();
  const double budget = ctx.cfg.budget;
  std::vector<LedgerRow> prior = std::move(o.result.ledger);
  std::vector<Diagnostics> prior_diag = std::move(o.result.diagnostics);
  o.result.ledger = prior;
  o.result.diagnostics = prior_diag;

  RunResult r = run_steps(std::move(start), ctx.model, [&](const IterationState&, const StepResult& s) {
    const InductiveReport rep = verify_inductive(s, ctx.model, budget);
    for (const auto& c : rep.checks) o.inductive.push_back({s.row.q, c});
    o.last_checkpoint = write_checkpoint(ctx.out, s.next, ctx.cfg_text, ctx.model.schedule);
    o.result.ledger.push_back(s.row);
    o.result.diagnostics.push_back(s.diag);
    o.ledger_q.push_back(s.row.q);
    persist();
  });
  r.ledger.insert(r.ledger.begin(), prior.begin(), prior.end());
  r.diagnostics.insert(r.diagnostics.begin(), prior_diag.begin(), prior_diag.end());
  o.result = std::move(r);
  write_manifest(ctx, o);
  return o;
}

}  // namespace

const std::vector<std::string>& ledger_columns() {
  static const std::vector<std::string> cols = {"R_T",  "R_D",  "R_N",  "R_O1",    "R_O2",       "R_O3",
                                                "R_O4", "R_O5", "R_O6", "R_M",     "c_coeff",    "Rtil_total",
                                                "delta_target", "holder_alpha", "pause_residual"};
  return cols;
}

std::vector<double> ledger_values(const LedgerRow& r) {
  std::vector<double> v = {r.R_T, r.R_D, r.R_N};
  v.insert(v.end(), r.R_O.begin(), r.R_O.end());
  v.insert(v.end(), {r.R_M, r.c_coeff, r.Rtil_total, r.delta_target, r.holder_alpha, r.pause_residual});
  return v;
}

void write_ledger_csv(const fs::path& path, const std::vector<LedgerRow>& rows) {
  std::ostringstream os;
  os << "q";
  for (const auto& c : ledger_columns()) os << ',' << c;
  os << '\n';
  for (const auto& r : rows) {
    os << r.q;
    for (double v : ledger_values(r)) os << ',' << num(v);
    os << '\n';
  }
  write_text_atomic(path, os.str());
}

std::vector<LedgerRow> read_ledger_csv(const fs::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw Error(ErrorKind::IoError, "empty ledger " + path.string());
  std::vector<std::string> expect = {"q"};
  expect.insert(expect.end(), ledger_columns().begin(), ledger_columns().end());
  if (split(lines[0], ',') != expect) throw Error(ErrorKind::IoError, "unexpected ledger columns in " + path.string());
  std::vector<LedgerRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split(lines[i], ',');
    if (cells.size() != expect.size()) throw Error(ErrorKind::IoError, "ragged ledger row in " + path.string());
    std::vector<double> v;
    for (std::size_t k = 1; k < cells.size(); ++k) v.push_back(parse_num(cells[k], path));
    LedgerRow r;
    r.q = static_cast<int>(parse_num(cells[0], path));
    r.R_T = v[0];
    r.R_D = v[1];
    r.R_N = v[2];
    for (int k = 0; k < 6; ++k) r.R_O[k] = v[3 + k];
    r.R_M = v[9];
    r.c_coeff = v[10];
    r.Rtil_total = v[11];
    r.delta_target = v[12];
    r.holder_alpha = v[13];
    r.pause_residual = v[14];
    rows.push_back(r);
  }
  return rows;
}

void write_diagnostics_csv(const fs::path& path, const std::vector<int>& qs, const std::vector<Diagnostics>& diags) {
  std::ostringstream os;
  os << "q,key,value\n";
  for (std::size_t i = 0; i < diags.size(); ++i)
    for (const auto& [k, v] : diags[i]) os << qs.at(i) << ',' << k << ',' << num(v) << '\n';
  write_text_atomic(path, os.str());
}

std::pair<std::vector<int>, std::vector<Diagnostics>> read_diagnostics_csv(const fs::path& path) {
  std::pair<std::vector<int>, std::vector<Diagnostics>> out;
  const auto lines = read_lines(path);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto first = lines[i].find(',');
    const auto last = lines[i].rfind(',');
    if (first == std::string::npos || first == last) throw Error(ErrorKind::IoError, "malformed diagnostics row in " + path.string());
    const int q = static_cast<int>(parse_num(lines[i].substr(0, first), path));
    if (out.first.empty() || out.first.back() != q) {
      out.first.push_back(q);
      out.second.emplace_back();
    }
    out.second.back().emplace_back(lines[i].substr(first + 1, last - first - 1), parse_num(lines[i].substr(last + 1), path));
  }
  return out;
}

void write_inductive_csv(const fs::path& path, const std::vector<InductiveRecord>& rows) {
  std::ostringstream os;
  os << "q,bound,measured,limit,gated,pass\n";
  for (const auto& r : rows)
    os << r.q << ",\"" << r.check.name << "\"," << num(r.check.measured) << ',' << num(r.check.bound) << ','
       << (r.check.gated ? 1 : 0) << ',' << (r.check.pass() ? 1 : 0) << '\n';
  write_text_atomic(path, os.str());
}

std::vector<RegimeRow> regime_table(const std::vector<int>& dims, const std::vector<bool>& forced, const mpq_class& b,
                                    const mpq_class& gamma) {
  std::vector<RegimeRow> rows;
  for (int d : dims)
    for (bool f : forced) {
      RegimeQuery q;
      q.b = b;
      q.d = d;
      q.gamma = gamma;
      q.forced = f;
      rows.push_back({d, f, b, gamma, evaluate_regime(q)});
    }
  return rows;
}

std::string format_regime_csv(const std::vector<RegimeRow>& rows) {
  std::ostringstream os;
  os << "d,forced,b,gamma,beta_sup,beta_sup_dec,alpha_sup,alpha_sup_dec,zeta_sup,zeta_sup_dec,gamma_feasible,binding\n";
  for (const auto& r : rows) {
    const auto& x = r.result;
    os << r.d << ',' << (r.forced ? 1 : 0) << ',' << to_fraction(r.b) << ',' << to_fraction(r.gamma) << ','
       << to_fraction(x.beta_sup) << ',' << num(to_double(x.beta_sup)) << ',' << to_fraction(x.alpha_sup) << ','
       << num(to_double(x.alpha_sup)) << ',' << to_fraction(x.zeta_sup) << ',' << num(to_double(x.zeta_sup)) << ','
       << (x.gamma_feasible ? 1 : 0) << ',' << x.binding_constraint << '\n';
  }
  return os.str();
}

RunOutcome execute_run(const RunConfig& cfg) {
  std::vector<ConfigIssue> issues;
  validate_config(cfg, issues);
  if (!issues.empty()) throw Error(ErrorKind::ConfigError, format_issues(issues));
  RunContext ctx{cfg.out_dir, cfg, emit_config(cfg), build_model(cfg)};
  configure_storage(cfg);
  fs::create_directories(ctx.out);
  fs::remove_all(ctx.out / "checkpoints");
  write_text_atomic(ctx.out / "config.cfg", ctx.cfg_text);
  write_regime_for(ctx);

  IterationState start = init_tuple(ctx.model, cfg.grid, cfg.seed);
  RunOutcome o;
  o.last_checkpoint = write_checkpoint(ctx.out, start, ctx.cfg_text, ctx.model.schedule);
  if (cfg.write_microlocal) {
    const auto lambdas = microlocal_lambdas(ctx.model.frame.xi1, cfg.grid.n);
    if (!lambdas.empty())
      write_scaling_csv(ctx.out / "microlocal.csv",
                        microlocal_scaling_suite(ctx.model.symbol, ctx.model.frame.xi1, cfg.grid.n, lambdas, cfg.seed.seed));
  }
  return continue_run(ctx, std::move(start), std::move(o));
}

RunOutcome resume_run(const fs::path& run_dir, const std::vector<std::pair<std::string, std::string>>& overrides) {
  const auto latest = latest_checkpoint(run_dir);
  if (!latest) throw Error(ErrorKind::IoError, "no checkpoint under " + run_dir.string());
  Checkpoint cp = read_checkpoint(*latest);

  ParsedConfig parsed = parse_config_text(cp.config_text);
  for (const auto& [k, v] : overrides) apply_setting(parsed.config, k, v, parsed.issues);
  parsed.config.out_dir = run_dir.string();
  if (parsed.issues.empty()) validate_config(parsed.config, parsed.issues);
  if (!parsed.ok()) throw Error(ErrorKind::ConfigError, format_issues(parsed.issues));
  const RunConfig& cfg = parsed.config;
  if (!(cp.state.grid() == cfg.grid)) throw Error(ErrorKind::ConfigError, "checkpoint grid differs from configuration grid");

  RunContext ctx{run_dir, cfg, emit_config(cfg), build_model(cfg)};
  configure_storage(cfg);
  write_text_atomic(ctx.out / "config.cfg", ctx.cfg_text);
  write_regime_for(ctx);

  RunOutcome o;
  o.last_checkpoint = *latest;
  const int q0 = cp.state.q;
  if (fs::exists(run_dir / "ledger.csv"))
    for (const auto& r : read_ledger_csv(run_dir / "ledger.csv"))
      if (r.q < q0) o.result.ledger.push_back(r);
  if (fs::exists(run_dir / "diagnostics.csv")) {
    auto [qs, diags] = read_diagnostics_csv(run_dir / "diagnostics.csv");
    for (std::size_t i = 0; i < qs.size(); ++i)
      if (qs[i] < q0) o.ledger_q.push_back(qs[i]), o.result.diagnostics.push_back(std::move(diags[i]));
  }
  if (o.ledger_q.size() != o.result.ledger.size()) {
    o.ledger_q.clear();
    for (const auto& r : o.result.ledger) o.ledger_q.push_back(r.q);
    o.result.diagnostics.assign(o.result.ledger.size(), {});
  }
  return continue_run(ctx, std::move(cp.state), std::move(o));
}

std::string render_report(const fs::path& run_dir) {
  const auto rows = read_ledger_csv(run_dir / "ledger.csv");
  std::ostringstream os;
  json manifest;
  if (fs::exists(run_dir / "manifest.json")) manifest = json::parse(read_text(run_dir / "manifest.json"));

  os << "run directory: " << run_dir.string() << '\n';
  if (manifest.is_object()) {
    os << "stages completed: " << manifest.value("q_reached", 0) << " of " << manifest.value("Q", 0) << '\n';
    if (manifest.contains("failure") && !manifest["failure"].is_null())
      os << "halted: " << manifest["failure"].value("message", std::string()) << '\n';
    os << "forcing C0: " << num(manifest.value("forcing_c0", 0.0)) << '\n';
    os << "discrepancy C0: " << num(manifest.value("discrepancy_c0", 0.0)) << '\n';
  }

  std::map<int, double> rtil_prev;
  if (fs::exists(run_dir / "diagnostics.csv")) {
    auto [qs, diags] = read_diagnostics_csv(run_dir / "diagnostics.csv");
    for (std::size_t i = 0; i < qs.size(); ++i) rtil_prev[qs[i]] = diag_value(diags[i], "Rtil_prev");
  }

  char line[256];
  std::snprintf(line, sizeof line, "%3s %12s %12s %12s %10s %12s %12s\n", "q", "Rtil_prev", "Rtil_next", "delta_target",
                "contracts", "holder", "pause");
  os << line;
  for (const auto& r : rows) {
    const auto it = rtil_prev.find(r.q);
    const double prev = it == rtil_prev.end() ? NAN : it->second;
    std::snprintf(line, sizeof line, "%3d %12.4e %12.4e %12.4e %10s %12.4e %12.4e\n", r.q, prev, r.Rtil_total,
                  r.delta_target, std::isnan(prev) ? "?" : (r.Rtil_total < prev ? "yes" : "no"), r.holder_alpha,
                  r.pause_residual);
    os << line;
  }

  const fs::path plots = run_dir / "plots";
  fs::create_directories(plots);
  {
    std::ostringstream norms;
    norms << "q,term,value\n";
    for (const auto& r : rows) {
      const auto v = ledger_values(r);
      for (std::size_t k = 0; k < v.size(); ++k) norms << r.q << ',' << ledger_columns()[k] << ',' << num(v[k]) << '\n';
    }
    write_text_atomic(plots / "norm_series.csv", norms.str());
  }
  {
    std::ostringstream h;
    h << "q,holder_alpha,Rtil_total,delta_target\n";
    for (const auto& r : rows) h << r.q << ',' << num(r.holder_alpha) << ',' << num(r.Rtil_total) << ',' << num(r.delta_target) << '\n';
    write_text_atomic(plots / "holder_series.csv", h.str());
  }
  if (fs::exists(run_dir / "regime.csv")) {
    write_text_atomic(plots / "regime_overlay.csv", read_text(run_dir / "regime.csv"));
    os << "regime table: " << (plots / "regime_overlay.csv").string() << '\n';
  }
  os << "plot data: " << plots.string() << '\n';
  return os.str();
}

}  // namespace wildscalar
