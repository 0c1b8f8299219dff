#include "wildscalar/symbols.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numbers>
#include <regex>

#include "json.hpp"
#include "wildscalar/errors.hpp"

namespace wildscalar {

bool SymbolReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const PropertyCheck& c) { return c.pass; });
}

SymbolSpec builtin_ipm() {
  SymbolSpec s;
  s.name = "ipm";
  s.eval = [](double k1, double k2) -> Vec2 {
    const double r2 = k1 * k1 + k2 * k2;
    if (r2 == 0.0) return {0.0, 0.0};
    return {k1 * k2 / r2, -k1 * k1 / r2};
  };
  return s;
}

SymbolSpec builtin_symbol(const std::string& name) {
  if (name == "ipm") return builtin_ipm();
  throw Error(ErrorKind::ConfigError, "unknown builtin symbol '" + name + "'");
}

SymbolSpec symbol_from_table(const std::string& name, const std::map<std::pair<int, int>, Vec2>& table) {
  if (table.empty()) throw Error(ErrorKind::ConfigError, "symbol table is empty");
  struct Entry {
    double angle;
    Vec2 value;
  };
  auto entries = std::make_shared<std::vector<Entry>>();
  for (const auto& [k, v] : table) {
    if (k.first == 0 && k.second == 0) continue;
    entries->push_back({std::atan2(double(k.second), double(k.first)), v});
  }
  auto exact = std::make_shared<std::map<std::pair<int, int>, Vec2>>(table);
  SymbolSpec s;
  s.name = name;
  s.eval = [entries, exact](double k1, double k2) -> Vec2 {
    if (k1 == 0.0 && k2 == 0.0) return {0.0, 0.0};
    if (k1 == std::round(k1) && k2 == std::round(k2)) {
      auto it = exact->find({int(k1), int(k2)});
      if (it != exact->end()) return it->second;
    }
    const double a = std::atan2(k2, k1);
    double best = 1e300;
    Vec2 val;
    for (const auto& e : *entries) {
      double d = std::abs(e.angle - a);
      d = std::min(d, 2.0 * std::numbers::pi - d);
      if (d < best) {
        best = d;
        val = e.value;
      }
    }
    return val;
  };
  return s;
}

SymbolSpec load_symbol_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open symbol table " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw Error(ErrorKind::ConfigError, "malformed symbol table: " + std::string(e.what()));
  }
  static const std::regex key_re(R"(\s*\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\)\s*)");
  std::map<std::pair<int, int>, Vec2> table;
  for (auto it = j.begin(); it != j.end(); ++it) {
    std::smatch m;
    const std::string key = it.key();
    if (!std::regex_match(key, m, key_re))
      throw Error(ErrorKind::ConfigError, "symbol table key '" + key + "' is not of the form (k1,k2)");
    const auto& v = it.value();
    if (!v.is_array() || v.size() != 2)
      throw Error(ErrorKind::ConfigError, "symbol table entry '" + key + "' must be a two-element array");
    table[{std::stoi(m[1].str()), std::stoi(m[2].str())}] = Vec2{v[0].get<double>(), v[1].get<double>()};
  }
  return symbol_from_table(path.filename().string(), table);
}

SymbolReport validate_symbol(const SymbolSpec& s, int freq_range) {
  if (freq_range < 1) throw Error(ErrorKind::InvalidArgument, "freq_range must be >= 1");
  constexpr double tol = 1e-12;
  PropertyCheck even, degree0, divfree, bounded;
  even.property = "even";
  degree0.property = "degree0";
  divfree.property = "divergence_free";
  bounded.property = "bounded";
  double sup = 0.0;
  for (int k1 = -freq_range; k1 <= freq_range; ++k1)
    for (int k2 = -freq_range; k2 <= freq_range; ++k2) {
      if (k1 == 0 && k2 == 0) continue;
      const Vec2 m = s(k1, k2);
      const IntVec at{k1, k2};
      const double e = (m - s(-k1, -k2)).norm();
      if (e > even.worst_value) even.worst_value = e, even.worst_at = at;
      for (int t = 2; t <= 4; ++t) {
        const double d = (m - s(double(t) * k1, double(t) * k2)).norm();
        if (d > degree0.worst_value) degree0.worst_value = d, degree0.worst_at = at;
      }
      const double dv = std::abs(k1 * m.x1 + k2 * m.x2) / std::hypot(double(k1), double(k2));
      if (dv > divfree.worst_value) divfree.worst_value = dv, divfree.worst_at = at;
      const double mag = m.norm();
      if (!std::isfinite(mag) || mag > sup) {
        sup = std::isfinite(mag) ? mag : INFINITY;
        bounded.worst_value = sup;
        bounded.worst_at = at;
      }
    }
  even.pass = even.worst_value <= tol;
  degree0.pass = degree0.worst_value <= tol;
  divfree.pass = divfree.worst_value <= tol;
  bounded.pass = std::isfinite(sup);
  return SymbolReport{{even, degree0, divfree, bounded}};
}

SymbolFrame build_frame(const SymbolSpec& s, const std::vector<IntVec>& candidates) {
  if (candidates.empty()) throw Error(ErrorKind::InvalidArgument, "frame candidate list is empty");
  auto even_part = [&](const IntVec& k) { return s(k.as_vec()) + s(-k.as_vec()); };
  for (std::size_t i = 0; i < candidates.size(); ++i)
    for (std::size_t j = i + 1; j < candidates.size(); ++j) {
      const Vec2 a1 = even_part(candidates[i]);
      const Vec2 a2 = even_part(candidates[j]);
      const double det = a1.x1 * a2.x2 - a1.x2 * a2.x1;
      if (a1.norm() == 0.0 || a2.norm() == 0.0) continue;
      if (std::abs(det) >= 1e-8 * a1.norm() * a2.norm())
        return SymbolFrame{candidates[i], candidates[j], a1, a2, det};
    }
  throw Error(ErrorKind::NoFrame, "even part of symbol '" + s.name + "' is degenerate over the candidates");
}

std::pair<ScalarField, ScalarField> decompose_stress(const VectorField& R, const SymbolFrame& f) {
  const int n = R.n();
  ScalarField c1(n), c2(n);
  const double inv = 1.0 / f.det;
  for (std::size_t i = 0; i < c1.v.size(); ++i) {
    const double r1 = R.c[0].v[i], r2 = R.c[1].v[i];
    c1.v[i] = (r1 * f.A2.x2 - r2 * f.A2.x1) * inv;
    c2.v[i] = (f.A1.x1 * r2 - f.A1.x2 * r1) * inv;
  }
  return {std::move(c1), std::move(c2)};
}

VectorField reassemble_stress(const ScalarField& c1, const ScalarField& c2, const SymbolFrame& f) {
  VectorField R(c1.n);
  R.add_along(c1, f.A1);
  R.add_along(c2, f.A2);
  return R;
}

namespace {

struct HalfTable {
  std::vector<Vec2> m;
};

/// Multiplier tables are cached per (symbol name, grid size).
const std::vector<Vec2>& half_table(const SymbolSpec& s, int n) {
  static std::map<std::pair<std::string, int>, std::vector<Vec2>> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(s.name, n);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  const int nc = n / 2 + 1;
  std::vector<Vec2> t(static_cast<std::size_t>(n) * nc);
  for (int i1 = 0; i1 < n; ++i1) {
    const int k1 = signed_wavenumber(i1, n);
    for (int k2 = 0; k2 < nc; ++k2) {
      if ((k1 == 0 && k2 == 0) || 2 * std::abs(k1) == n || 2 * k2 == n) continue;
      t[static_cast<std::size_t>(i1) * nc + k2] = s(double(k1), double(k2));
    }
  }
  return cache.emplace(key, std::move(t)).first->second;
}

const std::vector<Vec2>& full_table(const SymbolSpec& s, int n) {
  static std::map<std::pair<std::string, int>, std::vector<Vec2>> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(s.name, n);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::vector<Vec2> t(static_cast<std::size_t>(n) * n);
  for (int i1 = 0; i1 < n; ++i1) {
    const int k1 = signed_wavenumber(i1, n);
    for (int i2 = 0; i2 < n; ++i2) {
      const int k2 = signed_wavenumber(i2, n);
      if ((k1 == 0 && k2 == 0) || 2 * std::abs(k1) == n || 2 * std::abs(k2) == n) continue;
      t[static_cast<std::size_t>(i1) * n + i2] = s(double(k1), double(k2));
    }
  }
  return cache.emplace(key, std::move(t)).first->second;
}

}  // namespace

VectorField apply_symbol(const SymbolSpec& s, const Spectrum& theta) {
  const auto& t = half_table(s, theta.n);
  Spectrum a = theta, b = theta;
  for (std::size_t i = 0; i < t.size(); ++i) {
    a.c[i] *= t[i].x1;
    b.c[i] *= t[i].x2;
  }
  return VectorField(inverse(a), inverse(b));
}

VectorField apply_symbol(const SymbolSpec& s, const ScalarField& theta) { return apply_symbol(s, forward(theta)); }

std::pair<ComplexField, ComplexField> apply_symbol(const SymbolSpec& s, const ComplexSpectrum& f) {
  const auto& t = full_table(s, f.n);
  ComplexSpectrum a = f, b = f;
  for (std::size_t i = 0; i < t.size(); ++i) {
    a.c[i] *= t[i].x1;
    b.c[i] *= t[i].x2;
  }
  return {inverse(a), inverse(b)};
}

}  // namespace wildscalar
