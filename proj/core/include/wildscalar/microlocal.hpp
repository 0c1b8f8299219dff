#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "wildscalar/grid.hpp"
#include "wildscalar/spectral.hpp"
#include "wildscalar/symbols.hpp"

namespace wildscalar {

/// a(x) exp(i lambda xi(x)) with xi = hat_grad . x + pi. An empty field stands for zero.
struct PlaneWavePacket {
  ScalarField amp_re;
  ScalarField amp_im;
  Vec2 hat_grad;
  ScalarField pi;
  double lambda = 1.0;
  int parity = 0;
  int sign = 1;

  int n() const { return amp_re.n; }
};

enum class MicroOp { Symbol, NearProjection };
const char* to_string(MicroOp op);

/// One complex component for the projection, two for the symbol.
struct PacketField {
  std::vector<ComplexField> comp;
};

/// Synthesizes a exp(i lambda xi) on the grid; lambda * hat_grad must be an integer vector.
ComplexField synthesize(const PlaneWavePacket& pkt);
/// Exact spectral application of the operator to the synthesized field.
PacketField plane_wave_apply(const PlaneWavePacket& pkt, MicroOp op, const SymbolSpec& symbol, const NearBand& band);
/// Multiplier frozen at the local frequency lambda grad xi(x), times the synthesized field.
PacketField principal_term(const PlaneWavePacket& pkt, MicroOp op, const SymbolSpec& symbol, const NearBand& band);

struct ResidualReport {
  double residual_norm = 0.0;
  double amp_c0 = 0.0;
  double amp_c1 = 0.0;
  double hessian_c0 = 0.0;
  /// residual_norm * lambda / (|a|_C1 + |a|_C0 |grad^2 xi|_C0); zero when both numerator and denominator vanish.
  double ratio = 0.0;
};

PacketField microlocal_residual(const PlaneWavePacket& pkt, MicroOp op, const SymbolSpec& symbol, const NearBand& band,
                                ResidualReport* report);

struct ScalingRow {
  double lambda = 0.0;
  MicroOp op = MicroOp::Symbol;
  double residual_norm = 0.0;
  double ratio = 0.0;
};

/// Fixed smooth amplitude and perturbation, frequency lambda * direction for each lambda.
std::vector<ScalingRow> microlocal_scaling_suite(const SymbolSpec& symbol, const IntVec& direction, int n,
                                                 const std::vector<double>& lambdas, std::uint64_t seed);
/// Least-squares slope of log residual against log lambda.
double loglog_slope(const std::vector<ScalingRow>& rows, MicroOp op);
void write_scaling_csv(const std::filesystem::path& path, const std::vector<ScalingRow>& rows);

}  // namespace wildscalar
