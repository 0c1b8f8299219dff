#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "wildscalar/grid.hpp"
#include "wildscalar/iteration.hpp"
#include "wildscalar/schedule.hpp"
#include "wildscalar/symbols.hpp"

namespace wildscalar {

struct RunConfig {
  GridSpec grid{2, 512, 128, 0.0, 2.0};
  ScheduleParams schedule;
  std::string symbol_builtin = "ipm";
  std::string symbol_table;
  std::vector<IntVec> frame_candidates{{1, 1}, {1, -1}};
  SeedSpec seed;
  StepOptions step;
  std::string out_dir = "out";
  std::string scratch_dir;
  double spill_mb = 128.0;
  bool write_microlocal = true;
  double budget = 50.0;
};

enum class IssueKind { Unknown, TypeMismatch, RangeViolation, Missing };
const char* to_string(IssueKind k);

struct ConfigIssue {
  IssueKind kind = IssueKind::RangeViolation;
  std::string key;
  std::string message;
};

struct ParsedConfig {
  RunConfig config;
  std::vector<ConfigIssue> issues;
  bool ok() const { return issues.empty(); }
};

/// INI text with sections grid, schedule, symbol, frame, seed, increment, io, verify. Missing keys keep defaults.
ParsedConfig parse_config_text(const std::string& text);
/// Throws ConfigError listing every issue; IoError when the file cannot be read.
RunConfig parse_config(const std::filesystem::path& path);
/// Applies "section.key" = value; issues are appended rather than thrown.
void apply_setting(RunConfig& cfg, const std::string& dotted_key, const std::string& value,
                   std::vector<ConfigIssue>& issues);
/// Cross-field checks (grid shape, schedule ranges, frame list, symbol source).
void validate_config(const RunConfig& cfg, std::vector<ConfigIssue>& issues);
/// Every known key in emission order.
std::vector<std::string> config_keys();
/// Doubles are written with 17 significant digits so parse(emit(c)) reproduces c bit for bit.
std::string emit_config(const RunConfig& cfg);
std::string format_issues(const std::vector<ConfigIssue>& issues);

std::string format_candidates(const std::vector<IntVec>& c);
std::vector<IntVec> parse_candidates(const std::string& s);

/// Schedule, symbol and frame for a validated configuration.
Model build_model(const RunConfig& cfg);

}  // namespace wildscalar
