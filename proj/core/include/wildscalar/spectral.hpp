#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "wildscalar/grid.hpp"

namespace wildscalar {

using cplx = std::complex<double>;

/// Signed wavenumber of FFT index idx on an n-point axis; the Nyquist index maps to +n/2.
int signed_wavenumber(int idx, int n);

/// Half-plane coefficients of a real field: n rows (k1) by n/2+1 columns (k2 >= 0),
/// normalized so that f(x) = sum_k c_k exp(i k.x).
struct Spectrum {
  int n = 0;
  std::vector<cplx> c;

  Spectrum() = default;
  explicit Spectrum(int n_) : n(n_), c(static_cast<std::size_t>(n_) * (n_ / 2 + 1)) {}
  int cols() const { return n / 2 + 1; }
  cplx& at(int i1, int i2) { return c[static_cast<std::size_t>(i1) * cols() + i2]; }
  const cplx& at(int i1, int i2) const { return c[static_cast<std::size_t>(i1) * cols() + i2]; }
  /// Multiplies every coefficient by mult(k1, k2).
  template <class F>
  Spectrum& apply(F&& mult);
};

/// Complex samples on an n x n grid (plane-wave packets).
struct ComplexField {
  int n = 0;
  std::vector<cplx> v;

  ComplexField() = default;
  explicit ComplexField(int n_) : n(n_), v(static_cast<std::size_t>(n_) * n_) {}
  cplx& operator()(int i1, int i2) { return v[static_cast<std::size_t>(i1) * n + i2]; }
  cplx operator()(int i1, int i2) const { return v[static_cast<std::size_t>(i1) * n + i2]; }
  ScalarField real() const;
  ScalarField imag() const;
};

/// Full n x n coefficients of a complex field.
struct ComplexSpectrum {
  int n = 0;
  std::vector<cplx> c;

  ComplexSpectrum() = default;
  explicit ComplexSpectrum(int n_) : n(n_), c(static_cast<std::size_t>(n_) * n_) {}
  cplx& at(int i1, int i2) { return c[static_cast<std::size_t>(i1) * n + i2]; }
  const cplx& at(int i1, int i2) const { return c[static_cast<std::size_t>(i1) * n + i2]; }
  template <class F>
  ComplexSpectrum& apply(F&& mult);
};

template <class F>
Spectrum& Spectrum::apply(F&& mult) {
  const int nc = cols();
  for (int i1 = 0; i1 < n; ++i1) {
    const int k1 = signed_wavenumber(i1, n);
    for (int i2 = 0; i2 < nc; ++i2) c[static_cast<std::size_t>(i1) * nc + i2] *= mult(k1, i2);
  }
  return *this;
}

template <class F>
ComplexSpectrum& ComplexSpectrum::apply(F&& mult) {
  for (int i1 = 0; i1 < n; ++i1) {
    const int k1 = signed_wavenumber(i1, n);
    for (int i2 = 0; i2 < n; ++i2) c[static_cast<std::size_t>(i1) * n + i2] *= mult(k1, signed_wavenumber(i2, n));
  }
  return *this;
}

Spectrum forward(const ScalarField& f);
ScalarField inverse(const Spectrum& s);
ComplexSpectrum forward(const ComplexField& f);
ComplexField inverse(const ComplexSpectrum& s);

/// Caps FFTW worker threads for plans created afterwards.
void set_fft_threads(int threads);

enum class Axis { x1 = 1, x2 = 2 };

/// Spectral partial derivative; Nyquist modes of odd-order derivatives are zeroed.
ScalarField derivative(const ScalarField& f, Axis axis);
Spectrum derivative(const Spectrum& s, Axis axis);
ComplexField derivative(const ComplexField& f, Axis axis);
VectorField gradient(const ScalarField& f);
ScalarField divergence(const VectorField& v);

/// Applies |k|^gamma. The zero mode is kept for gamma == 0 and zeroed otherwise.
ScalarField fractional_laplacian(const ScalarField& f, double gamma);

/// Squared smooth radial cutoff: 1 on |k| <= mu/2, 0 on |k| >= 2 mu.
double lp_leq_multiplier(double k_abs, double mu);
ScalarField lp_project_leq(const ScalarField& f, double mu);
Spectrum lp_project_leq(const Spectrum& s, double mu);

/// Frequency ball used by the near-frequency projection: radius/2 support, radius/4 flat region.
struct NearBand {
  Vec2 center;
  double scale = 1.0;

  /// Band centred at sign * separation^parity * lambda * direction with scale separation^parity * lambda * |direction|.
  static NearBand make(double lambda, const Vec2& direction, int parity, int sign, double separation);
  double multiplier(double k1, double k2) const;
  /// Largest per-axis wavenumber inside the support ball.
  double reach() const;
  NearBand conjugate() const { return {-center, scale}; }
};

/// Rejects with NyquistViolation when the band support is not representable on an n-grid.
void check_band_resolved(const NearBand& band, int n);
ComplexField lp_project_near(const ComplexField& f, const NearBand& band);
ComplexSpectrum lp_project_near(const ComplexSpectrum& s, const NearBand& band);

/// Gradient representative of the inverse divergence, optionally preceded by a band multiplier.
VectorField solve_div(const ScalarField& f, const std::function<double(int, int)>* band = nullptr);
Spectrum solve_div_component(const Spectrum& s, Axis axis);

/// Dealiased products: inputs are zero-padded to a 3n/2 grid and the product is truncated back to n.
ScalarField dealiased_product(const ScalarField& a, const ScalarField& b);
/// u . grad f with the same dealiasing.
ScalarField advect(const VectorField& u, const ScalarField& f);
/// Componentwise u f.
VectorField dealiased_product(const VectorField& u, const ScalarField& f);

/// Spectral resampling: zero-padding when growing, truncation when shrinking.
ScalarField resample(const ScalarField& f, int n_new);
VectorField resample(const VectorField& f, int n_new);

/// Zeroes Nyquist row and column.
void drop_nyquist(Spectrum& s);

}  // namespace wildscalar
