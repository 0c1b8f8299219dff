#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "wildscalar/grid.hpp"
#include "wildscalar/spectral.hpp"

namespace wildscalar {

/// Drift multiplier m(xi). Evaluation at real frequencies is required by principal terms.
struct SymbolSpec {
  std::string name;
  std::function<Vec2(double, double)> eval;

  Vec2 operator()(double k1, double k2) const { return eval(k1, k2); }
  Vec2 operator()(const Vec2& k) const { return eval(k.x1, k.x2); }
};

struct IntVec {
  int k1 = 0;
  int k2 = 0;
  Vec2 as_vec() const { return {double(k1), double(k2)}; }
  bool operator==(const IntVec&) const = default;
};

struct SymbolFrame {
  IntVec xi1, xi2;
  Vec2 A1, A2;
  double det = 0.0;

  const IntVec& direction(int stage_parity) const { return stage_parity == 0 ? xi1 : xi2; }
  const Vec2& target(int stage_parity) const { return stage_parity == 0 ? A1 : A2; }
  const Vec2& other(int stage_parity) const { return stage_parity == 0 ? A2 : A1; }
};

struct PropertyCheck {
  std::string property;
  bool pass = true;
  double worst_value = 0.0;
  IntVec worst_at;
};

struct SymbolReport {
  std::vector<PropertyCheck> checks;
  bool all_pass() const;
};

/// m(xi) = (xi1 xi2, -xi1^2) / |xi|^2.
SymbolSpec builtin_ipm();
/// Symbol lookup by builtin name.
SymbolSpec builtin_symbol(const std::string& name);
/// JSON table {"(k1,k2)": [m1, m2]}. Non-tabulated frequencies fall back to the tabulated direction nearest in angle.
SymbolSpec load_symbol_table(const std::filesystem::path& path);
SymbolSpec symbol_from_table(const std::string& name, const std::map<std::pair<int, int>, Vec2>& table);

SymbolReport validate_symbol(const SymbolSpec& s, int freq_range);
SymbolFrame build_frame(const SymbolSpec& s, const std::vector<IntVec>& candidates);

/// Pointwise solve R = c1 A1 + c2 A2.
std::pair<ScalarField, ScalarField> decompose_stress(const VectorField& R, const SymbolFrame& frame);
VectorField reassemble_stress(const ScalarField& c1, const ScalarField& c2, const SymbolFrame& frame);

/// u = T[theta]; the zero mode of u is zero.
VectorField apply_symbol(const SymbolSpec& s, const ScalarField& theta);
VectorField apply_symbol(const SymbolSpec& s, const Spectrum& theta);
/// Complex-field application (both components).
std::pair<ComplexField, ComplexField> apply_symbol(const SymbolSpec& s, const ComplexSpectrum& f);

}  // namespace wildscalar
