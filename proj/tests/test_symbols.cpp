#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <random>

#include "wildscalar/errors.hpp"
#include "wildscalar/norms.hpp"
#include "wildscalar/random.hpp"
#include "wildscalar/spectral.hpp"
#include "wildscalar/symbols.hpp"

using namespace wildscalar;

namespace {

std::filesystem::path write_table(const std::string& name, bool break_evenness) {
  const auto p = std::filesystem::temp_directory_path() / name;
  std::ofstream out(p);
  out.precision(17);
  out << "{";
  bool first = true;
  for (int k1 = -6; k1 <= 6; ++k1)
    for (int k2 = -6; k2 <= 6; ++k2) {
      if (k1 == 0 && k2 == 0) continue;
      const double r2 = k1 * k1 + k2 * k2;
      double m1 = k1 * k2 / r2, m2 = -k1 * k1 / r2;
      if (break_evenness && k1 == 2 && k2 == 1) m1 += 0.1;
      out << (first ? "" : ",") << "\"(" << k1 << "," << k2 << ")\": [" << m1 << "," << m2 << "]";
      first = false;
    }
  out << "}";
  return p;
}

}  // namespace

TEST_CASE("porous-media symbol values at sample frequencies") {
  const SymbolSpec s = builtin_ipm();
  const Vec2 v = s(1.0, 2.0);
  CHECK(v.x1 == doctest::Approx(2.0 / 5));
  CHECK(v.x2 == doctest::Approx(-1.0 / 5));
  const Vec2 z = s(0.0, 3.0);
  CHECK(z.x1 == 0.0);
  CHECK(z.x2 == 0.0);
}

TEST_CASE("porous-media symbol is even, of degree zero and transversal at random frequencies") {
  const SymbolSpec s = builtin_ipm();
  std::mt19937_64 rng(17);
  for (int i = 0; i < 1000; ++i) {
    const double k1 = uniform(rng, -50, 50), k2 = uniform(rng, -50, 50), r = uniform(rng, 0.1, 10);
    const Vec2 m = s(k1, k2), mneg = s(-k1, -k2), mr = s(r * k1, r * k2);
    CHECK(std::abs(m.x1 - mneg.x1) + std::abs(m.x2 - mneg.x2) <= 1e-15);
    CHECK(std::abs(m.x1 - mr.x1) + std::abs(m.x2 - mr.x2) <= 1e-14);
    CHECK(std::abs(k1 * m.x1 + k2 * m.x2) <= 1e-13 * std::hypot(k1, k2));
  }
  CHECK(validate_symbol(s, 16).all_pass());
}

TEST_CASE("drift of a random field is divergence free") {
  const SymbolSpec s = builtin_ipm();
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 4; ++trial) {
    const ScalarField th = random_smooth_field(64, 8, rng);
    const VectorField u = apply_symbol(s, th);
    CHECK(c0_norm(divergence(u)) <= 1e-10 * std::max(1.0, ck_norm(u.c[0], 1) + ck_norm(u.c[1], 1)));
  }
}

TEST_CASE("symbol application matches a direct Fourier sum") {
  const SymbolSpec s = builtin_ipm();
  const int n = 8;
  std::mt19937_64 rng(29);
  const ScalarField th = random_smooth_field(n, 2, rng);
  const VectorField u = apply_symbol(s, th);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      std::complex<double> acc1 = 0, acc2 = 0;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          const int k1 = a <= n / 2 ? a : a - n, k2 = b <= n / 2 ? b : b - n;
          if (2 * std::abs(k1) == n || 2 * std::abs(k2) == n) continue;
          std::complex<double> c = 0;
          for (int p = 0; p < n; ++p)
            for (int q = 0; q < n; ++q)
              c += th(p, q) * std::exp(std::complex<double>(0, -(k1 * grid_coord(p, n) + k2 * grid_coord(q, n))));
          c /= double(n * n);
          const Vec2 m = s(double(k1), double(k2));
          const auto e = std::exp(std::complex<double>(0, k1 * grid_coord(i, n) + k2 * grid_coord(j, n)));
          acc1 += c * m.x1 * e;
          acc2 += c * m.x2 * e;
        }
      CHECK(u.c[0](i, j) == doctest::Approx(acc1.real()).epsilon(1e-12).scale(1));
      CHECK(u.c[1](i, j) == doctest::Approx(acc2.real()).epsilon(1e-12).scale(1));
    }
}

TEST_CASE("frame from the default candidates has independent even parts") {
  const SymbolSpec s = builtin_ipm();
  const SymbolFrame f = build_frame(s, {{1, 1}, {1, -1}});
  CHECK(f.A1.x1 == doctest::Approx(1.0));
  CHECK(f.A1.x2 == doctest::Approx(-1.0));
  CHECK(f.A2.x1 == doctest::Approx(-1.0));
  CHECK(f.A2.x2 == doctest::Approx(-1.0));
  CHECK(f.det == doctest::Approx(-2.0));
  CHECK_THROWS_AS(build_frame(s, {{0, 1}, {0, 2}}), Error);
}

TEST_CASE("stress decomposition reassembles to roundoff") {
  const SymbolSpec s = builtin_ipm();
  const SymbolFrame f = build_frame(s, {{1, 1}, {1, -1}});
  std::mt19937_64 rng(31);
  VectorField R(random_smooth_field(32, 4, rng), random_smooth_field(32, 4, rng));
  auto [c1, c2] = decompose_stress(R, f);
  const VectorField back = reassemble_stress(c1, c2, f);
  CHECK(c0_norm(VectorField(back.c[0] - R.c[0], back.c[1] - R.c[1])) <= 1e-12 * c0_norm(R));
}

TEST_CASE("tabulated symbols are validated") {
  const SymbolSpec good = load_symbol_table(write_table("ws_good_table.json", false));
  const SymbolReport ok = validate_symbol(good, 6);
  CHECK(ok.all_pass());
  const SymbolSpec bad = load_symbol_table(write_table("ws_bad_table.json", true));
  const SymbolReport rep = validate_symbol(bad, 6);
  CHECK_FALSE(rep.all_pass());
  bool even_failed = false;
  for (const auto& c : rep.checks)
    if (c.property == "even" && !c.pass) even_failed = true;
  CHECK(even_failed);
  CHECK_THROWS_AS(builtin_symbol("sqg-unknown"), Error);
}
