#include "wildscalar/grid.hpp"

#include <fcntl.h>
#include <sys/mman.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <numbers>

#include "wildscalar/errors.hpp"

namespace wildscalar {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NyquistViolation: return "NyquistViolation";
    case ErrorKind::DeformationExceeded: return "DeformationExceeded";
    case ErrorKind::LiftingInfeasible: return "LiftingInfeasible";
    case ErrorKind::NegativeRadicand: return "NegativeRadicand";
    case ErrorKind::ScheduleInfeasible: return "ScheduleInfeasible";
    case ErrorKind::ClosureFailure: return "ClosureFailure";
    case ErrorKind::NoFrame: return "NoFrame";
    case ErrorKind::UnderResolved: return "UnderResolved";
    case ErrorKind::OutOfWindow: return "OutOfWindow";
    case ErrorKind::WindowTooShort: return "WindowTooShort";
    case ErrorKind::NonZeroMean: return "NonZeroMean";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

void GridSpec::validate() const {
  if (d != 2) throw Error(ErrorKind::InvalidArgument, "field grids are two-dimensional");
  if (n < 8 || !is_power_of_two(n)) throw Error(ErrorKind::InvalidArgument, "n must be a power of two >= 8");
  if (m_t < 2) throw Error(ErrorKind::InvalidArgument, "m_t must be >= 2");
  if (!(t1 > t0)) throw Error(ErrorKind::InvalidArgument, "window must satisfy t1 > t0");
}

double GridSpec::dx() const { return 2.0 * std::numbers::pi / n; }
double GridSpec::dt() const { return (t1 - t0) / (m_t - 1); }
double GridSpec::time(int j) const { return j == m_t - 1 ? t1 : t0 + j * dt(); }

double Vec2::norm() const { return std::hypot(x1, x2); }

double grid_coord(int i, int n) { return 2.0 * std::numbers::pi * i / n; }

ScalarField::ScalarField(int n_, double fill) : n(n_), v(static_cast<std::size_t>(n_) * n_, fill) {}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += o.v[i];
  return *this;
}
ScalarField& ScalarField::operator-=(const ScalarField& o) {
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= o.v[i];
  return *this;
}
ScalarField& ScalarField::operator*=(double s) {
  for (double& x : v) x *= s;
  return *this;
}
ScalarField& ScalarField::axpy(double a, const ScalarField& x) {
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += a * x.v[i];
  return *this;
}
double ScalarField::mean() const {
  long double s = 0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : static_cast<double>(s / v.size());
}
bool ScalarField::finite() const {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }

VectorField& VectorField::operator+=(const VectorField& o) {
  c[0] += o.c[0];
  c[1] += o.c[1];
  return *this;
}
VectorField& VectorField::operator-=(const VectorField& o) {
  c[0] -= o.c[0];
  c[1] -= o.c[1];
  return *this;
}
VectorField& VectorField::operator*=(double s) {
  c[0] *= s;
  c[1] *= s;
  return *this;
}
VectorField& VectorField::axpy(double a, const VectorField& x) {
  c[0].axpy(a, x.c[0]);
  c[1].axpy(a, x.c[1]);
  return *this;
}
VectorField& VectorField::add_along(const ScalarField& s, const Vec2& dir) {
  c[0].axpy(dir.x1, s);
  c[1].axpy(dir.x2, s);
  return *this;
}

namespace {
std::filesystem::path& scratch_dir_ref() {
  static std::filesystem::path dir = std::filesystem::temp_directory_path();
  return dir;
}
std::atomic<std::size_t>& spill_threshold() {
  static std::atomic<std::size_t> t{std::size_t(128) << 20};
  return t;
}
std::atomic<unsigned long>& scratch_counter() {
  static std::atomic<unsigned long> c{0};
  return c;
}
}  // namespace

void set_scratch_directory(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  scratch_dir_ref() = dir;
}
void set_spill_threshold_bytes(std::size_t bytes) { spill_threshold() = bytes; }
std::filesystem::path scratch_directory() { return scratch_dir_ref(); }

TimeSlab::TimeSlab(const GridSpec& grid, std::string name) : grid_(grid), name_(std::move(name)) {
  grid_.validate();
  count_ = grid_.points() * grid_.m_t;
  const std::size_t bytes = count_ * sizeof(double);
  if (bytes >= spill_threshold()) {
    const auto path = scratch_dir_ref() /
                      ("wildscalar-" + std::to_string(::getpid()) + "-" + std::to_string(scratch_counter()++) + ".slab");
    int fd = ::open(path.c_str(), O_RDWR | O_CREAT | O_TRUNC, 0600);
    if (fd < 0) throw Error(ErrorKind::IoError, "cannot create scratch file " + path.string());
    ::unlink(path.c_str());
    if (::ftruncate(fd, static_cast<off_t>(bytes)) != 0) {
      ::close(fd);
      throw Error(ErrorKind::IoError, "cannot size scratch file " + path.string());
    }
    void* p = ::mmap(nullptr, bytes, PROT_READ | PROT_WRITE, MAP_SHARED, fd, 0);
    ::close(fd);
    if (p == MAP_FAILED) throw Error(ErrorKind::IoError, "cannot map scratch file " + path.string());
    data_ = static_cast<double*>(p);
    mapped_ = true;
  } else {
    data_ = new double[count_]();
    mapped_ = false;
  }
}

TimeSlab::TimeSlab(TimeSlab&& o) noexcept
    : grid_(o.grid_), name_(std::move(o.name_)), data_(o.data_), count_(o.count_), mapped_(o.mapped_) {
  o.data_ = nullptr;
  o.count_ = 0;
}

TimeSlab& TimeSlab::operator=(TimeSlab&& o) noexcept {
  if (this != &o) {
    release();
    grid_ = o.grid_;
    name_ = std::move(o.name_);
    data_ = o.data_;
    count_ = o.count_;
    mapped_ = o.mapped_;
    o.data_ = nullptr;
    o.count_ = 0;
  }
  return *this;
}

TimeSlab::~TimeSlab() { release(); }

void TimeSlab::release() {
  if (!data_) return;
  if (mapped_)
    ::munmap(data_, count_ * sizeof(double));
  else
    delete[] data_;
  data_ = nullptr;
  count_ = 0;
}

TimeSlab TimeSlab::clone(const std::string& name) const {
  TimeSlab out(grid_, name);
  std::memcpy(out.data_, data_, count_ * sizeof(double));
  return out;
}

std::span<double> TimeSlab::frame(int j) {
  return {data_ + static_cast<std::size_t>(j) * grid_.points(), grid_.points()};
}
std::span<const double> TimeSlab::frame(int j) const {
  return {data_ + static_cast<std::size_t>(j) * grid_.points(), grid_.points()};
}

ScalarField TimeSlab::get(int j) const {
  ScalarField f(grid_.n);
  auto fr = frame(j);
  std::copy(fr.begin(), fr.end(), f.v.begin());
  return f;
}

void TimeSlab::set(int j, const ScalarField& f) {
  if (f.n != grid_.n) throw Error(ErrorKind::InvalidArgument, "frame size mismatch in slab " + name_);
  auto fr = frame(j);
  std::copy(f.v.begin(), f.v.end(), fr.begin());
}

VectorSlab::VectorSlab(const GridSpec& grid, const std::string& name)
    : c{TimeSlab(grid, name + ".1"), TimeSlab(grid, name + ".2")} {}

VectorSlab VectorSlab::clone(const std::string& name) const {
  VectorSlab out;
  out.c[0] = c[0].clone(name + ".1");
  out.c[1] = c[1].clone(name + ".2");
  return out;
}

VectorField VectorSlab::get(int j) const { return VectorField(c[0].get(j), c[1].get(j)); }
void VectorSlab::set(int j, const VectorField& f) {
  c[0].set(j, f.c[0]);
  c[1].set(j, f.c[1]);
}

}  // namespace wildscalar
