#include "wildscalar/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include "wildscalar/errors.hpp"
#include "wildscalar/norms.hpp"

namespace wildscalar {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

int& fft_threads() {
  static int t = 1;
  return t;
}

/// FFTW plans for one grid size. Plans use FFTW_ESTIMATE so the algorithm choice is reproducible.
class Engine {
 public:
  explicit Engine(int n) : n_(n) {
    const std::size_t real_count = static_cast<std::size_t>(n) * n;
    const std::size_t half_count = static_cast<std::size_t>(n) * (n / 2 + 1);
    rbuf_ = fftw_alloc_real(real_count);
    hbuf_ = fftw_alloc_complex(half_count);
    cbuf_ = fftw_alloc_complex(real_count);
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_plan_with_nthreads(fft_threads());
    r2c_ = fftw_plan_dft_r2c_2d(n, n, rbuf_, hbuf_, FFTW_ESTIMATE);
    c2r_ = fftw_plan_dft_c2r_2d(n, n, hbuf_, rbuf_, FFTW_ESTIMATE);
    fwd_ = fftw_plan_dft_2d(n, n, cbuf_, cbuf_, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_2d(n, n, cbuf_, cbuf_, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~Engine() {
    fftw_destroy_plan(r2c_);
    fftw_destroy_plan(c2r_);
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(rbuf_);
    fftw_free(hbuf_);
    fftw_free(cbuf_);
  }
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  double* real_buffer() { return rbuf_; }
  cplx* half_buffer() { return reinterpret_cast<cplx*>(hbuf_); }
  cplx* complex_buffer() { return reinterpret_cast<cplx*>(cbuf_); }
  void r2c() { fftw_execute(r2c_); }
  void c2r() { fftw_execute(c2r_); }
  void c2c_forward() { fftw_execute(fwd_); }
  void c2c_backward() { fftw_execute(bwd_); }
  int n() const { return n_; }

 private:
  int n_;
  double* rbuf_;
  fftw_complex* hbuf_;
  fftw_complex* cbuf_;
  fftw_plan r2c_, c2r_, fwd_, bwd_;
};

Engine& engine(int n) {
  static std::map<int, std::unique_ptr<Engine>> cache;
  static std::mutex m;
  std::lock_guard<std::mutex> lock(m);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, std::make_unique<Engine>(n)).first;
  return *it->second;
}

/// Septic smoothstep on [0,1]: C^3 with value 0 at 0 and 1 at 1.
double smooth7(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double x4 = x * x * x * x;
  return x4 * (35.0 + x * (-84.0 + x * (70.0 - 20.0 * x)));
}

/// Real field on the padded m-grid holding the modes of s.
std::vector<double> pad(const Spectrum& s, int m) {
  Engine& e = engine(m);
  const int n = s.n;
  const int mc = m / 2 + 1;
  cplx* h = e.half_buffer();
  std::fill(h, h + static_cast<std::size_t>(m) * mc, cplx(0.0, 0.0));
  for (int i1 = 0; i1 < n; ++i1) {
    const int k1 = signed_wavenumber(i1, n);
    if (2 * std::abs(k1) >= n) continue;
    const int r = (k1 + m) % m;
    for (int k2 = 0; 2 * k2 < n; ++k2) h[static_cast<std::size_t>(r) * mc + k2] = s.at(i1, k2);
  }
  e.c2r();
  return std::vector<double>(e.real_buffer(), e.real_buffer() + static_cast<std::size_t>(m) * m);
}

Spectrum unpad(const std::vector<double>& values, int m, int n) {
  Engine& e = engine(m);
  std::copy(values.begin(), values.end(), e.real_buffer());
  e.r2c();
  const int mc = m / 2 + 1;
  const double scale = 1.0 / (static_cast<double>(m) * m);
  const cplx* h = e.half_buffer();
  Spectrum out(n);
  for (int i1 = 0; i1 < n; ++i1) {
    const int k1 = signed_wavenumber(i1, n);
    if (2 * std::abs(k1) >= n) continue;
    const int r = (k1 + m) % m;
    for (int k2 = 0; 2 * k2 < n; ++k2) out.at(i1, k2) = h[static_cast<std::size_t>(r) * mc + k2] * scale;
  }
  return out;
}

int padded_size(int n) { return 3 * n / 2; }

}  // namespace

void set_fft_threads(int threads) {
  static std::once_flag once;
  std::call_once(once, [] { fftw_init_threads(); });
  std::lock_guard<std::mutex> lock(planner_mutex());
  fft_threads() = std::max(1, threads);
}

int signed_wavenumber(int idx, int n) { return idx <= n / 2 ? idx : idx - n; }

ScalarField ComplexField::real() const {
  ScalarField out(n);
  for (std::size_t i = 0; i < v.size(); ++i) out.v[i] = v[i].real();
  return out;
}
ScalarField ComplexField::imag() const {
  ScalarField out(n);
  for (std::size_t i = 0; i < v.size(); ++i) out.v[i] = v[i].imag();
  return out;
}

Spectrum forward(const ScalarField& f) {
  Engine& e = engine(f.n);
  std::copy(f.v.begin(), f.v.end(), e.real_buffer());
  e.r2c();
  Spectrum s(f.n);
  const double scale = 1.0 / (static_cast<double>(f.n) * f.n);
  const cplx* h = e.half_buffer();
  for (std::size_t i = 0; i < s.c.size(); ++i) s.c[i] = h[i] * scale;
  return s;
}

ScalarField inverse(const Spectrum& s) {
  Engine& e = engine(s.n);
  std::copy(s.c.begin(), s.c.end(), e.half_buffer());
  e.c2r();
  ScalarField f(s.n);
  std::copy(e.real_buffer(), e.real_buffer() + f.v.size(), f.v.begin());
  return f;
}

ComplexSpectrum forward(const ComplexField& f) {
  Engine& e = engine(f.n);
  std::copy(f.v.begin(), f.v.end(), e.complex_buffer());
  e.c2c_forward();
  ComplexSpectrum s(f.n);
  const double scale = 1.0 / (static_cast<double>(f.n) * f.n);
  const cplx* b = e.complex_buffer();
  for (std::size_t i = 0; i < s.c.size(); ++i) s.c[i] = b[i] * scale;
  return s;
}

ComplexField inverse(const ComplexSpectrum& s) {
  Engine& e = engine(s.n);
  std::copy(s.c.begin(), s.c.end(), e.complex_buffer());
  e.c2c_backward();
  ComplexField f(s.n);
  std::copy(e.complex_buffer(), e.complex_buffer() + f.v.size(), f.v.begin());
  return f;
}

void drop_nyquist(Spectrum& s) {
  const int n = s.n;
  for (int i2 = 0; i2 < s.cols(); ++i2) s.at(n / 2, i2) = 0.0;
  for (int i1 = 0; i1 < n; ++i1) s.at(i1, n / 2) = 0.0;
}

Spectrum derivative(const Spectrum& s, Axis axis) {
  Spectrum out = s;
  const int n = s.n;
  out.apply([&](int k1, int k2) {
    const int k = axis == Axis::x1 ? k1 : k2;
    if (2 * k == n) return cplx(0.0, 0.0);
    return cplx(0.0, static_cast<double>(k));
  });
  return out;
}

ScalarField derivative(const ScalarField& f, Axis axis) { return inverse(derivative(forward(f), axis)); }

ComplexField derivative(const ComplexField& f, Axis axis) {
  ComplexSpectrum s = forward(f);
  const int n = f.n;
  s.apply([&](int k1, int k2) {
    const int k = axis == Axis::x1 ? k1 : k2;
    if (2 * k == n) return cplx(0.0, 0.0);
    return cplx(0.0, static_cast<double>(k));
  });
  return inverse(s);
}

VectorField gradient(const ScalarField& f) {
  const Spectrum s = forward(f);
  return VectorField(inverse(derivative(s, Axis::x1)), inverse(derivative(s, Axis::x2)));
}

ScalarField divergence(const VectorField& v) {
  Spectrum a = derivative(forward(v.c[0]), Axis::x1);
  const Spectrum b = derivative(forward(v.c[1]), Axis::x2);
  for (std::size_t i = 0; i < a.c.size(); ++i) a.c[i] += b.c[i];
  return inverse(a);
}

ScalarField fractional_laplacian(const ScalarField& f, double gamma) {
  if (gamma < 0.0) throw Error(ErrorKind::InvalidArgument, "fractional_laplacian requires gamma >= 0");
  Spectrum s = forward(f);
  s.apply([&](int k1, int k2) {
    if (k1 == 0 && k2 == 0) return gamma == 0.0 ? 1.0 : 0.0;
    return std::pow(std::hypot(double(k1), double(k2)), gamma);
  });
  return inverse(s);
}

double lp_leq_multiplier(double k_abs, double mu) {
  if (k_abs <= 0.5 * mu) return 1.0;
  if (k_abs >= 2.0 * mu) return 0.0;
  const double s = smooth7((2.0 * mu - k_abs) / (1.5 * mu));
  return s * s;
}

Spectrum lp_project_leq(const Spectrum& s, double mu) {
  if (!(mu > 0.0)) throw Error(ErrorKind::InvalidArgument, "lp_project_leq requires mu > 0");
  Spectrum out = s;
  out.apply([&](int k1, int k2) { return lp_leq_multiplier(std::hypot(double(k1), double(k2)), mu); });
  return out;
}

ScalarField lp_project_leq(const ScalarField& f, double mu) { return inverse(lp_project_leq(forward(f), mu)); }

NearBand NearBand::make(double lambda, const Vec2& direction, int parity, int sign, double separation) {
  const double factor = parity == 0 ? 1.0 : separation;
  NearBand b;
  b.center = direction * (sign * factor * lambda);
  b.scale = factor * lambda * direction.norm();
  return b;
}

double NearBand::multiplier(double k1, double k2) const {
  const double r = std::hypot(k1 - center.x1, k2 - center.x2) / scale;
  if (r <= 0.25) return 1.0;
  if (r >= 0.5) return 0.0;
  return smooth7((0.5 - r) / 0.25);
}

double NearBand::reach() const { return std::max(std::abs(center.x1), std::abs(center.x2)) + 0.5 * scale; }

void check_band_resolved(const NearBand& band, int n) {
  if (!(band.reach() < 0.5 * n))
    throw Error(ErrorKind::NyquistViolation, "band support reaches wavenumber " + std::to_string(band.reach()) +
                                                 " but the grid Nyquist is " + std::to_string(n / 2));
}

ComplexSpectrum lp_project_near(const ComplexSpectrum& s, const NearBand& band) {
  check_band_resolved(band, s.n);
  ComplexSpectrum out = s;
  out.apply([&](int k1, int k2) { return band.multiplier(k1, k2); });
  return out;
}

ComplexField lp_project_near(const ComplexField& f, const NearBand& band) {
  return inverse(lp_project_near(forward(f), band));
}

Spectrum solve_div_component(const Spectrum& s, Axis axis) {
  Spectrum out = s;
  const int n = s.n;
  out.apply([&](int k1, int k2) {
    if (k1 == 0 && k2 == 0) return cplx(0.0, 0.0);
    const int k = axis == Axis::x1 ? k1 : k2;
    if (2 * k == n) return cplx(0.0, 0.0);
    return cplx(0.0, -static_cast<double>(k) / (double(k1) * k1 + double(k2) * k2));
  });
  return out;
}

VectorField solve_div(const ScalarField& f, const std::function<double(int, int)>* band) {
  const double scale = c0_norm(f);
  if (std::abs(f.mean()) > 1e-10 * std::max(scale, 1e-300) && scale > 0.0)
    throw Error(ErrorKind::NonZeroMean, "solve_div input has mean " + std::to_string(f.mean()));
  Spectrum s = forward(f);
  if (band) s.apply([&](int k1, int k2) { return (*band)(k1, k2); });
  return VectorField(inverse(solve_div_component(s, Axis::x1)), inverse(solve_div_component(s, Axis::x2)));
}

ScalarField dealiased_product(const ScalarField& a, const ScalarField& b) {
  const int n = a.n;
  const int m = padded_size(n);
  std::vector<double> pa = pad(forward(a), m);
  const std::vector<double> pb = pad(forward(b), m);
  for (std::size_t i = 0; i < pa.size(); ++i) pa[i] *= pb[i];
  return inverse(unpad(pa, m, n));
}

ScalarField advect(const VectorField& u, const ScalarField& f) {
  const int n = f.n;
  const int m = padded_size(n);
  const Spectrum fs = forward(f);
  std::vector<double> acc = pad(forward(u.c[0]), m);
  const std::vector<double> d1 = pad(derivative(fs, Axis::x1), m);
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] *= d1[i];
  const std::vector<double> u2 = pad(forward(u.c[1]), m);
  const std::vector<double> d2 = pad(derivative(fs, Axis::x2), m);
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += u2[i] * d2[i];
  return inverse(unpad(acc, m, n));
}

VectorField dealiased_product(const VectorField& u, const ScalarField& f) {
  const int n = f.n;
  const int m = padded_size(n);
  const std::vector<double> pf = pad(forward(f), m);
  VectorField out;
  for (int c = 0; c < 2; ++c) {
    std::vector<double> pu = pad(forward(u.c[c]), m);
    for (std::size_t i = 0; i < pu.size(); ++i) pu[i] *= pf[i];
    out.c[c] = inverse(unpad(pu, m, n));
  }
  return out;
}

ScalarField resample(const ScalarField& f, int n_new) {
  if (n_new == f.n) return f;
  const Spectrum s = forward(f);
  Spectrum out(n_new);
  const int lim = std::min(f.n, n_new);
  for (int i1 = 0; i1 < f.n; ++i1) {
    const int k1 = signed_wavenumber(i1, f.n);
    if (2 * std::abs(k1) >= lim) continue;
    const int r = (k1 + n_new) % n_new;
    for (int k2 = 0; 2 * k2 < lim; ++k2) out.at(r, k2) = s.at(i1, k2);
  }
  return inverse(out);
}

VectorField resample(const VectorField& f, int n_new) {
  return VectorField(resample(f.c[0], n_new), resample(f.c[1], n_new));
}

}  // namespace wildscalar
