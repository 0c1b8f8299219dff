#pragma once

#include "wildscalar/grid.hpp"
#include "wildscalar/spectral.hpp"

namespace wildscalar {

double c0_norm(const ScalarField& f);
/// Maximum pointwise Euclidean length.
double c0_norm(const VectorField& f);
/// Maximum pointwise modulus.
double c0_norm(const ComplexField& f);
double c0_norm(const TimeSlab& s);
double c0_norm(const VectorSlab& s);

/// max over multi-indices of order k of max |d^alpha f|, spectral derivatives; k <= 4.
double ck_norm(const ScalarField& f, int k);

/// Hoelder seminorm estimated over dyadic grid offsets along the axes and both diagonals.
double holder_seminorm(const ScalarField& f, double alpha);
/// Exhaustive pairwise Hoelder quotient along the 1D slice with fixed x2 index.
double holder_seminorm_exhaustive_slice(const ScalarField& f, double alpha, int row);

}  // namespace wildscalar
