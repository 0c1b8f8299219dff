#include "wildscalar/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <regex>
#include <sstream>

#include "wildscalar/errors.hpp"

namespace wildscalar {

const char* to_string(IssueKind k) {
  switch (k) {
    case IssueKind::Unknown: return "Unknown";
    case IssueKind::TypeMismatch: return "TypeMismatch";
    case IssueKind::RangeViolation: return "RangeViolation";
    case IssueKind::Missing: return "Missing";
  }
  return "?";
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool parse_double(const std::string& s, double& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  auto r = std::from_chars(b, e, out);
  return r.ec == std::errc() && r.ptr == e && std::isfinite(out);
}

bool parse_int(const std::string& s, long long& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  auto r = std::from_chars(b, e, out);
  return r.ec == std::errc() && r.ptr == e;
}

bool parse_u64(const std::string& s, std::uint64_t& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  auto r = std::from_chars(b, e, out);
  return r.ec == std::errc() && r.ptr == e;
}

bool parse_bool(const std::string& s, bool& out) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return out = true, true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return out = false, true;
  return false;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

using Issues = std::vector<ConfigIssue>;

struct Field {
  std::string key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&, Issues&)> set;
};

template <class Ref>
Field double_field(const std::string& key, Ref ref) {
  return {key, [ref](const RunConfig& c) { return fmt_double(ref(const_cast<RunConfig&>(c))); },
          [ref, key](RunConfig& c, const std::string& v, Issues& is) {
            double d;
            if (!parse_double(v, d)) return is.push_back({IssueKind::TypeMismatch, key, key + " expects a real number, got '" + v + "'"});
            ref(c) = d;
          }};
}

template <class Ref>
Field int_field(const std::string& key, Ref ref) {
  return {key, [ref](const RunConfig& c) { return std::to_string(ref(const_cast<RunConfig&>(c))); },
          [ref, key](RunConfig& c, const std::string& v, Issues& is) {
            long long i;
            if (!parse_int(v, i) || i < INT32_MIN || i > INT32_MAX)
              return is.push_back({IssueKind::TypeMismatch, key, key + " expects an integer, got '" + v + "'"});
            ref(c) = static_cast<int>(i);
          }};
}

template <class Ref>
Field string_field(const std::string& key, Ref ref) {
  return {key, [ref](const RunConfig& c) { return ref(const_cast<RunConfig&>(c)); },
          [ref](RunConfig& c, const std::string& v, Issues&) { ref(c) = v; }};
}

template <class Ref>
Field bool_field(const std::string& key, Ref ref) {
  return {key, [ref](const RunConfig& c) { return std::string(ref(const_cast<RunConfig&>(c)) ? "true" : "false"); },
          [ref, key](RunConfig& c, const std::string& v, Issues& is) {
            bool b;
            if (!parse_bool(v, b)) return is.push_back({IssueKind::TypeMismatch, key, key + " expects a boolean, got '" + v + "'"});
            ref(c) = b;
          }};
}

#define REF(expr) [](RunConfig& c) -> auto& { return c.expr; }

const std::vector<Field>& fields() {
  static const std::vector<Field> f = [] {
    std::vector<Field> v;
    v.push_back(int_field("grid.n", REF(grid.n)));
    v.push_back(int_field("grid.m_t", REF(grid.m_t)));
    v.push_back(double_field("grid.t0", REF(grid.t0)));
    v.push_back(double_field("grid.t1", REF(grid.t1)));
    v.push_back(double_field("schedule.lambda0", REF(schedule.lambda0)));
    v.push_back(double_field("schedule.b", REF(schedule.b)));
    v.push_back(double_field("schedule.beta", REF(schedule.beta)));
    v.push_back(int_field("schedule.L", REF(schedule.L)));
    v.push_back(int_field("schedule.d", REF(schedule.d)));
    v.push_back(double_field("schedule.gamma", REF(schedule.gamma)));
    v.push_back(double_field("schedule.nu", REF(schedule.nu)));
    v.push_back(double_field("schedule.K", REF(schedule.K)));
    v.push_back(double_field("schedule.C", REF(schedule.C)));
    v.push_back(int_field("schedule.Q", REF(schedule.Q)));
    v.push_back(string_field("symbol.builtin", REF(symbol_builtin)));
    v.push_back(string_field("symbol.table", REF(symbol_table)));
    v.push_back({"frame.candidates", [](const RunConfig& c) { return format_candidates(c.frame_candidates); },
                 [](RunConfig& c, const std::string& s, Issues& is) {
                   try {
                     c.frame_candidates = parse_candidates(s);
                   } catch (const Error& e) {
                     is.push_back({IssueKind::TypeMismatch, "frame.candidates", e.what()});
                   }
                 }});
    v.push_back(double_field("seed.p_scale", REF(seed.p_scale)));
    v.push_back(double_field("seed.m_scale", REF(seed.m_scale)));
    v.push_back(double_field("seed.chi_lo", REF(seed.chi_lo)));
    v.push_back(double_field("seed.chi_hi", REF(seed.chi_hi)));
    v.push_back(double_field("seed.chi_ramp", REF(seed.chi_ramp)));
    v.push_back(int_field("seed.random_kmax", REF(seed.random_kmax)));
    v.push_back(double_field("seed.random_amp", REF(seed.random_amp)));
    v.push_back({"seed.seed", [](const RunConfig& c) { return std::to_string(c.seed.seed); },
                 [](RunConfig& c, const std::string& s, Issues& is) {
                   std::uint64_t u;
                   if (!parse_u64(s, u)) return is.push_back({IssueKind::TypeMismatch, "seed.seed", "seed.seed expects an unsigned 64-bit integer"});
                   c.seed.seed = u;
                 }});
    v.push_back(double_field("increment.separation", REF(step.separation)));
    v.push_back(double_field("increment.deformation_limit", REF(step.deformation_limit)));
    v.push_back(string_field("io.out", REF(out_dir)));
    v.push_back(string_field("io.scratch", REF(scratch_dir)));
    v.push_back(double_field("io.spill_mb", REF(spill_mb)));
    v.push_back(bool_field("io.microlocal", REF(write_microlocal)));
    v.push_back(double_field("verify.budget", REF(budget)));
    v.push_back(double_field("verify.closure_factor", REF(step.closure_factor)));
    v.push_back(bool_field("verify.check_closure", REF(step.check_closure)));
    return v;
  }();
  return f;
}

#undef REF

void range(Issues& is, bool ok, const std::string& key, const std::string& what) {
  if (!ok) is.push_back({IssueKind::RangeViolation, key, key + " " + what});
}

}  // namespace

std::string format_candidates(const std::vector<IntVec>& c) {
  std::string s;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i) s += ';';
    s += "(" + std::to_string(c[i].k1) + "," + std::to_string(c[i].k2) + ")";
  }
  return s;
}

std::vector<IntVec> parse_candidates(const std::string& s) {
  static const std::regex item(R"(\s*\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\)\s*)");
  std::vector<IntVec> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ';')) {
    if (trim(part).empty()) continue;
    std::smatch m;
    if (!std::regex_match(part, m, item))
      throw Error(ErrorKind::ConfigError, "frame candidate '" + part + "' is not of the form (k1,k2)");
    out.push_back({std::stoi(m[1].str()), std::stoi(m[2].str())});
  }
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> k;
  for (const auto& f : fields()) k.push_back(f.key);
  return k;
}

void apply_setting(RunConfig& cfg, const std::string& dotted_key, const std::string& value, Issues& issues) {
  for (const auto& f : fields())
    if (f.key == dotted_key) return f.set(cfg, trim(value), issues);
  issues.push_back({IssueKind::Unknown, dotted_key, "unknown configuration key '" + dotted_key + "'"});
}

void validate_config(const RunConfig& c, Issues& is) {
  range(is, c.grid.n >= 8 && is_power_of_two(c.grid.n), "grid.n", "must be a power of two >= 8");
  range(is, c.grid.m_t >= 3, "grid.m_t", "must be >= 3");
  range(is, c.grid.t1 > c.grid.t0, "grid.t1", "must exceed grid.t0");
  const auto& s = c.schedule;
  range(is, s.lambda0 >= 2.0, "schedule.lambda0", "must be >= 2");
  range(is, s.b > 1.0, "schedule.b", "must be > 1");
  range(is, s.beta > 0.0 && s.beta < 1.0, "schedule.beta", "must lie in (0,1)");
  range(is, s.L >= 2, "schedule.L", "must be >= 2");
  range(is, s.d == 2, "schedule.d", "must be 2 for field computation");
  range(is, s.gamma >= 0.0 && s.gamma <= 2.0, "schedule.gamma", "must lie in [0,2]");
  range(is, s.nu >= 0.0, "schedule.nu", "must be >= 0");
  range(is, s.K >= 4.0, "schedule.K", "must be >= 4");
  range(is, s.C >= 4.0, "schedule.C", "must be >= 4");
  range(is, s.Q >= 0 && s.Q <= 16, "schedule.Q", "must lie in [0,16]");
  range(is, c.symbol_builtin.empty() != c.symbol_table.empty(), "symbol.builtin",
        "exactly one of symbol.builtin and symbol.table must be set");
  range(is, c.frame_candidates.size() >= 2, "frame.candidates", "needs at least two vectors");
  range(is, c.seed.chi_hi > c.seed.chi_lo, "seed.chi_hi", "must exceed seed.chi_lo");
  range(is, c.seed.chi_ramp >= 0.0 && 2.0 * c.seed.chi_ramp <= c.seed.chi_hi - c.seed.chi_lo + 1e-15, "seed.chi_ramp",
        "must be >= 0 and at most half the bump width");
  range(is, c.seed.random_kmax >= 0, "seed.random_kmax", "must be >= 0");
  range(is, c.step.separation > 1.0 && c.step.separation == std::round(c.step.separation), "increment.separation",
        "must be an integer > 1");
  range(is, c.step.deformation_limit > 0.0 && c.step.deformation_limit < 1.0, "increment.deformation_limit",
        "must lie in (0,1)");
  range(is, !c.out_dir.empty(), "io.out", "must not be empty");
  range(is, c.spill_mb > 0.0, "io.spill_mb", "must be positive");
  range(is, c.budget > 0.0, "verify.budget", "must be positive");
  range(is, c.step.closure_factor >= 1.0, "verify.closure_factor", "must be >= 1");
}

ParsedConfig parse_config_text(const std::string& text) {
  ParsedConfig out;
  boost::property_tree::ptree pt;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    out.issues.push_back({IssueKind::TypeMismatch, "", std::string("malformed configuration: ") + e.message() +
                                                           " at line " + std::to_string(e.line())});
    return out;
  }
  for (const auto& [section, body] : pt) {
    if (body.empty()) {
      out.issues.push_back({IssueKind::Unknown, section, "key '" + section + "' must live inside a section"});
      continue;
    }
    for (const auto& [key, val] : body) apply_setting(out.config, section + "." + key, val.data(), out.issues);
  }
  if (out.issues.empty()) validate_config(out.config, out.issues);
  return out;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot read configuration " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  ParsedConfig p = parse_config_text(ss.str());
  if (!p.ok()) throw Error(ErrorKind::ConfigError, format_issues(p.issues));
  return p.config;
}

std::string emit_config(const RunConfig& cfg) {
  std::ostringstream os;
  std::string current;
  for (const auto& f : fields()) {
    const auto dot = f.key.find('.');
    const std::string section = f.key.substr(0, dot), key = f.key.substr(dot + 1);
    if (section != current) {
      if (!current.empty()) os << '\n';
      os << '[' << section << "]\n";
      current = section;
    }
    os << key << " = " << f.get(cfg) << '\n';
  }
  return os.str();
}

std::string format_issues(const std::vector<ConfigIssue>& issues) {
  std::ostringstream os;
  for (std::size_t i = 0; i < issues.size(); ++i) {
    if (i) os << '\n';
    os << to_string(issues[i].kind) << ": " << issues[i].message;
  }
  return os.str();
}

Model build_model(const RunConfig& cfg) {
  Model m;
  m.schedule = make_schedule(cfg.schedule);
  if (!cfg.symbol_table.empty()) {
    m.symbol = load_symbol_table(cfg.symbol_table);
    const SymbolReport rep = validate_symbol(m.symbol, 16);
    if (!rep.all_pass()) {
      std::string bad;
      for (const auto& c : rep.checks)
        if (!c.pass) bad += " " + c.property;
      throw Error(ErrorKind::ConfigError, "symbol table fails validation:" + bad);
    }
  } else {
    m.symbol = builtin_symbol(cfg.symbol_builtin);
  }
  m.frame = build_frame(m.symbol, cfg.frame_candidates);
  m.options = cfg.step;
  return m;
}

}  // namespace wildscalar
