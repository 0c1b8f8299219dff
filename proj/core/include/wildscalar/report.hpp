#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wildscalar/config.hpp"
#include "wildscalar/iteration.hpp"
#include "wildscalar/regime.hpp"

namespace wildscalar {

/// Ledger column names after the leading q column.
const std::vector<std::string>& ledger_columns();
std::vector<double> ledger_values(const LedgerRow& r);
void write_ledger_csv(const std::filesystem::path& path, const std::vector<LedgerRow>& rows);
std::vector<LedgerRow> read_ledger_csv(const std::filesystem::path& path);

/// Long format: q,key,value.
void write_diagnostics_csv(const std::filesystem::path& path, const std::vector<int>& qs,
                           const std::vector<Diagnostics>& diags);
std::pair<std::vector<int>, std::vector<Diagnostics>> read_diagnostics_csv(const std::filesystem::path& path);

struct InductiveRecord {
  int q = 0;
  BoundCheck check;
};
void write_inductive_csv(const std::filesystem::path& path, const std::vector<InductiveRecord>& rows);

struct RegimeRow {
  int d = 0;
  bool forced = true;
  mpq_class b;
  mpq_class gamma;
  RegimeResult result;
};
std::vector<RegimeRow> regime_table(const std::vector<int>& dims, const std::vector<bool>& forced,
                                    const mpq_class& b, const mpq_class& gamma);
/// Columns d,forced,b,gamma,beta_sup,beta_sup_dec,alpha_sup,alpha_sup_dec,zeta_sup,zeta_sup_dec,gamma_feasible,binding.
std::string format_regime_csv(const std::vector<RegimeRow>& rows);

struct RunOutcome {
  std::filesystem::path out_dir;
  RunResult result;
  std::vector<int> ledger_q;
  std::vector<InductiveRecord> inductive;
  std::optional<std::filesystem::path> last_checkpoint;
};

/// Writes config.cfg, checkpoints, ledger.csv, diagnostics.csv, inductive.csv, regime.csv, microlocal.csv and manifest.json.
/// Step failures are returned in result.failure; config and IO problems throw.
RunOutcome execute_run(const RunConfig& cfg);

/// Continues from the newest checkpoint in run_dir with optional "section.key" overrides applied to the stored config.
RunOutcome resume_run(const std::filesystem::path& run_dir,
                      const std::vector<std::pair<std::string, std::string>>& overrides = {});

/// Human summary of a run directory; plot-ready series are written to run_dir/plots.
std::string render_report(const std::filesystem::path& run_dir);

}  // namespace wildscalar
