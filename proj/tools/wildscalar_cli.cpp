#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>
#include <string>

#include "wildscalar/checkpoint.hpp"
#include "wildscalar/config.hpp"
#include "wildscalar/errors.hpp"
#include "wildscalar/regime.hpp"
#include "wildscalar/report.hpp"
#include "wildscalar/spectral.hpp"
#include "wildscalar/symbols.hpp"

namespace ws = wildscalar;

namespace {

constexpr int kOk = 0;
constexpr int kConfig = 2;
constexpr int kStep = 3;
constexpr int kIo = 4;

int exit_code_for(ws::ErrorKind k) {
  switch (k) {
    case ws::ErrorKind::IoError: return kIo;
    case ws::ErrorKind::ConfigError:
    case ws::ErrorKind::ScheduleInfeasible:
    case ws::ErrorKind::InvalidArgument:
    case ws::ErrorKind::NoFrame:
    case ws::ErrorKind::NonZeroMean:
    case ws::ErrorKind::WindowTooShort: return kConfig;
    default: return kStep;
  }
}

/// Accepts integers, fractions p/q and plain decimals.
mpq_class parse_rational(const std::string& s) {
  if (s.find('.') == std::string::npos) {
    mpq_class v(s);
    v.canonicalize();
    if (v.get_den() == 0) throw ws::Error(ws::ErrorKind::InvalidArgument, "zero denominator in " + s);
    return v;
  }
  const bool neg = !s.empty() && s[0] == '-';
  const std::string body = neg || (!s.empty() && s[0] == '+') ? s.substr(1) : s;
  const auto dot = body.find('.');
  const std::string digits = body.substr(0, dot) + body.substr(dot + 1);
  if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
    throw ws::Error(ws::ErrorKind::InvalidArgument, "not a rational number: " + s);
  mpz_class den = 1;
  for (std::size_t i = dot + 1; i < body.size(); ++i) den *= 10;
  mpq_class v(mpz_class(digits), den);
  v.canonicalize();
  return neg ? mpq_class(-v) : v;
}

void apply_thread_cap() {
  if (const char* t = std::getenv("WILDSCALAR_THREADS")) {
    const int n = std::atoi(t);
    if (n > 0) ws::set_fft_threads(n);
  }
}

struct Overrides {
  std::map<std::string, std::string> values;

  void attach(CLI::App* app) {
    for (const auto& key : ws::config_keys()) app->add_option("--" + key, values[key], "override " + key);
  }
  std::vector<std::pair<std::string, std::string>> given(CLI::App* app) const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [k, v] : values)
      if (app->count("--" + k) > 0) out.emplace_back(k, v);
    return out;
  }
};

int report_outcome(const ws::RunOutcome& o) {
  std::cout << "run directory: " << o.out_dir.string() << "\n";
  std::cout << "stages completed: " << o.result.state.q << ", ledger rows: " << o.result.ledger.size() << "\n";
  if (o.result.failure) {
    std::cerr << "step failure at q=" << o.result.failure->failed_q << ": " << o.result.failure->message << "\n";
    if (o.last_checkpoint) std::cerr << "last checkpoint: " << o.last_checkpoint->string() << "\n";
    return kStep;
  }
  return kOk;
}

int cmd_run(const std::string& config_path, const std::vector<std::pair<std::string, std::string>>& overrides) {
  ws::ParsedConfig parsed;
  if (!config_path.empty()) parsed = ws::parse_config_text(ws::read_text(config_path));
  if (!parsed.ok()) {
    std::cerr << ws::format_issues(parsed.issues) << "\n";
    return kConfig;
  }
  std::vector<ws::ConfigIssue> issues;
  for (const auto& [k, v] : overrides) ws::apply_setting(parsed.config, k, v, issues);
  if (issues.empty()) ws::validate_config(parsed.config, issues);
  if (!issues.empty()) {
    std::cerr << ws::format_issues(issues) << "\n";
    return kConfig;
  }
  return report_outcome(ws::execute_run(parsed.config));
}

int cmd_regime(const std::vector<int>& dims, bool forced, bool unforced, const std::string& b, const std::string& gamma,
               const std::string& csv) {
  std::vector<bool> kinds;
  if (forced || !unforced) kinds.push_back(true);
  if (unforced) kinds.push_back(false);
  const mpq_class bq = parse_rational(b), gq = parse_rational(gamma);
  if (bq < 1) throw ws::Error(ws::ErrorKind::InvalidArgument, "b must be >= 1");
  if (gq < 0) throw ws::Error(ws::ErrorKind::InvalidArgument, "gamma must be >= 0");
  for (int d : dims)
    if (d < 1) throw ws::Error(ws::ErrorKind::InvalidArgument, "d must be >= 1");
  const auto rows = ws::regime_table(dims, kinds, bq, gq);
  std::printf("%-3s %-8s %-8s %-8s %-26s %-26s %-26s %-9s %s\n", "d", "forced", "b", "gamma", "beta_sup", "alpha_sup",
              "zeta_sup", "gamma_ok", "binding");
  for (const auto& r : rows) {
    auto cell = [](const mpq_class& v) {
      char buf[64];
      std::snprintf(buf, sizeof buf, " (%.10g)", ws::to_double(v));
      return ws::to_fraction(v) + buf;
    };
    std::printf("%-3d %-8s %-8s %-8s %-26s %-26s %-26s %-9s %s\n", r.d, r.forced ? "yes" : "no",
                ws::to_fraction(r.b).c_str(), ws::to_fraction(r.gamma).c_str(), cell(r.result.beta_sup).c_str(),
                cell(r.result.alpha_sup).c_str(), cell(r.result.zeta_sup).c_str(),
                r.result.gamma_feasible ? "yes" : "no", r.result.binding_constraint.c_str());
  }
  if (!csv.empty()) ws::write_text_atomic(csv, ws::format_regime_csv(rows));
  return kOk;
}

int cmd_validate_symbol(const std::string& builtin, const std::string& table, int range) {
  if (builtin.empty() == table.empty()) {
    std::cerr << "exactly one of --builtin and --table is required\n";
    return kConfig;
  }
  const ws::SymbolSpec s = table.empty() ? ws::builtin_symbol(builtin) : ws::load_symbol_table(table);
  const ws::SymbolReport rep = ws::validate_symbol(s, range);
  for (const auto& c : rep.checks)
    std::printf("%-28s %s  worst=%.3e at (%d,%d)\n", c.property.c_str(), c.pass ? "PASS" : "FAIL", c.worst_value,
                c.worst_at.k1, c.worst_at.k2);
  std::printf("%s\n", rep.all_pass() ? "all checks pass" : "symbol rejected");
  return rep.all_pass() ? kOk : kConfig;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-solution convex-integration driver for active scalar equations"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Execute the iteration from a configuration");
  std::string config_path;
  run->add_option("--config,-c", config_path, "INI configuration file");
  Overrides run_over;
  run_over.attach(run);

  auto* regime = app.add_subcommand("regime", "Exact exponent thresholds");
  std::vector<int> dims{1, 2, 3, 4, 5, 6};
  bool forced = false, unforced = false;
  std::string b = "1", gamma = "0", regime_csv;
  regime->add_option("--d", dims, "dimensions");
  regime->add_flag("--forced", forced, "forced chains");
  regime->add_flag("--unforced", unforced, "unforced chains");
  regime->add_option("--b", b, "frequency growth exponent; 1 selects the limit")->capture_default_str();
  regime->add_option("--gamma", gamma, "dissipation order")->capture_default_str();
  regime->add_option("--csv", regime_csv, "also write the table as CSV");

  auto* validate = app.add_subcommand("validate-symbol", "Check evenness, degree 0 and transversality of a symbol");
  std::string builtin, table;
  int range = 16;
  validate->add_option("--builtin", builtin, "builtin symbol name");
  validate->add_option("--table", table, "JSON symbol table");
  validate->add_option("--range", range, "frequency box half-width")->capture_default_str();

  auto* report = app.add_subcommand("report", "Summarize a run directory and write plot data");
  std::string report_dir;
  report->add_option("--dir,dir", report_dir, "run directory")->required();

  auto* resume = app.add_subcommand("resume", "Continue a run from its newest checkpoint");
  std::string resume_dir;
  resume->add_option("--dir,dir", resume_dir, "run directory")->required();
  Overrides resume_over;
  resume_over.attach(resume);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  apply_thread_cap();
  try {
    if (*run) return cmd_run(config_path, run_over.given(run));
    if (*regime) return cmd_regime(dims, forced, unforced, b, gamma, regime_csv);
    if (*validate) return cmd_validate_symbol(builtin, table, range);
    if (*report) {
      std::cout << ws::render_report(report_dir);
      return kOk;
    }
    if (*resume) return report_outcome(ws::resume_run(resume_dir, resume_over.given(resume)));
  } catch (const ws::Error& e) {
    std::cerr << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kConfig;
  }
  return kOk;
}
