#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace wildscalar {

/// Uniform periodic grid on [0,2pi)^2 plus a uniform time sampling of a closed window.
struct GridSpec {
  int d = 2;
  int n = 64;
  int m_t = 16;
  double t0 = 0.0;
  double t1 = 1.0;

  void validate() const;
  double dx() const;
  /// Frames sit at t0 + j*dt for j = 0..m_t-1, so both window ends are sampled.
  double dt() const;
  double time(int j) const;
  std::size_t points() const { return static_cast<std::size_t>(n) * n; }
  bool operator==(const GridSpec&) const = default;
};

bool is_power_of_two(int v);

struct Vec2 {
  double x1 = 0.0;
  double x2 = 0.0;
  double norm() const;
  double dot(const Vec2& o) const { return x1 * o.x1 + x2 * o.x2; }
  Vec2 operator+(const Vec2& o) const { return {x1 + o.x1, x2 + o.x2}; }
  Vec2 operator-(const Vec2& o) const { return {x1 - o.x1, x2 - o.x2}; }
  Vec2 operator*(double s) const { return {x1 * s, x2 * s}; }
  Vec2 operator-() const { return {-x1, -x2}; }
};

/// Real samples on an n x n periodic grid, row-major with the x1 index outermost.
struct ScalarField {
  int n = 0;
  std::vector<double> v;

  ScalarField() = default;
  explicit ScalarField(int n_, double fill = 0.0);

  double& operator()(int i1, int i2) { return v[static_cast<std::size_t>(i1) * n + i2]; }
  double operator()(int i1, int i2) const { return v[static_cast<std::size_t>(i1) * n + i2]; }
  std::size_t size() const { return v.size(); }

  ScalarField& operator+=(const ScalarField& o);
  ScalarField& operator-=(const ScalarField& o);
  ScalarField& operator*=(double s);
  ScalarField& axpy(double a, const ScalarField& x);
  double mean() const;
  bool finite() const;

  /// Samples f(x1, x2) at the grid points.
  template <class F>
  static ScalarField sample(int n, F&& f);
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);

double grid_coord(int i, int n);

template <class F>
ScalarField ScalarField::sample(int n, F&& f) {
  ScalarField out(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = f(grid_coord(i, n), grid_coord(j, n));
  return out;
}

struct VectorField {
  std::array<ScalarField, 2> c;

  VectorField() = default;
  explicit VectorField(int n) : c{ScalarField(n), ScalarField(n)} {}
  VectorField(ScalarField a, ScalarField b) : c{std::move(a), std::move(b)} {}
  int n() const { return c[0].n; }
  ScalarField& operator[](int i) { return c[i]; }
  const ScalarField& operator[](int i) const { return c[i]; }
  VectorField& operator+=(const VectorField& o);
  VectorField& operator-=(const VectorField& o);
  VectorField& operator*=(double s);
  VectorField& axpy(double a, const VectorField& x);
  /// Adds the constant vector field s(x) * dir.
  VectorField& add_along(const ScalarField& s, const Vec2& dir);
};

/// Storage for m_t frames of an n x n real field. Large slabs spill to an unlinked
/// memory-mapped scratch file so the page cache can evict them.
class TimeSlab {
 public:
  TimeSlab() = default;
  TimeSlab(const GridSpec& grid, std::string name);
  TimeSlab(TimeSlab&&) noexcept;
  TimeSlab& operator=(TimeSlab&&) noexcept;
  TimeSlab(const TimeSlab&) = delete;
  TimeSlab& operator=(const TimeSlab&) = delete;
  ~TimeSlab();

  TimeSlab clone(const std::string& name) const;

  const GridSpec& grid() const { return grid_; }
  const std::string& name() const { return name_; }
  void set_name(std::string n) { name_ = std::move(n); }
  int frames() const { return grid_.m_t; }
  std::span<double> frame(int j);
  std::span<const double> frame(int j) const;
  std::span<const double> raw() const { return {data_, count_}; }
  std::span<double> raw() { return {data_, count_}; }
  ScalarField get(int j) const;
  void set(int j, const ScalarField& f);
  bool mapped() const { return mapped_; }

 private:
  void release();
  GridSpec grid_;
  std::string name_;
  double* data_ = nullptr;
  std::size_t count_ = 0;
  bool mapped_ = false;
};

struct VectorSlab {
  std::array<TimeSlab, 2> c;

  VectorSlab() = default;
  VectorSlab(const GridSpec& grid, const std::string& name);
  VectorSlab clone(const std::string& name) const;
  VectorField get(int j) const;
  void set(int j, const VectorField& f);
  TimeSlab& operator[](int i) { return c[i]; }
  const TimeSlab& operator[](int i) const { return c[i]; }
  const GridSpec& grid() const { return c[0].grid(); }
};

/// Slabs larger than the threshold are backed by scratch files in the given directory.
void set_scratch_directory(const std::filesystem::path& dir);
void set_spill_threshold_bytes(std::size_t bytes);
std::filesystem::path scratch_directory();

}  // namespace wildscalar
