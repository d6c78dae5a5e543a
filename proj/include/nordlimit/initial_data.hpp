#pragma once

#include <array>
#include <optional>

#include "nordlimit/eos.hpp"
#include "nordlimit/fields.hpp"

namespace nordlimit {

/// Smooth localized perturbation of a quiet fluid. Each component gets
/// amplitude * bump(x), where bump is a periodic Gaussian-like profile of width sigma.
struct PerturbationSpec {
  double etaAmplitude = 0.0;
  double pAmplitude = 0.0;
  std::array<double, 3> vAmplitude{0.0, 0.0, 0.0};
  std::array<double, 3> center{0.0, 0.0, 0.0};
  double width = 1.0;

  void validate(const Grid3& g) const;
  bool isZero() const;
};

/// Quiet fluid the data perturb.
struct QuietFluid {
  double eta = 1.0;
  double p = 1.0;
};

/// Periodic bump exp((cos(2 pi (x - x0)/L) - 1) / (2 pi sigma / L)^2) per axis, dealiased.
ScalarField periodicBump(const Grid3& g, const std::array<double, 3>& center, double width);

struct DataBundle {
  Grid3 grid;
  QuietFluid quiet;
  StateField wInf;  // (eta, p, v1, v2, v3)
  ScalarField phiDeviation;  // phi - phiBar, shared by both systems
  ScalarField phiInf;
  ScalarField psi0;
  VecField psiJ;
  double phiBarInf = 0.0;

  // filled by liftToRelativistic
  LightSpeed c;
  ScalarField phiC;
  StateField wC;  // (eta, e^{4 phi / c^2} p, v)
  double phiBarC = 0.0;

  bool lifted() const { return !c.isInfinite(); }
};

/// Newtonian data. When box is given, every grid point must keep a relative
/// margin of at least minMargin inside it.
DataBundle buildNewtonianData(const PerturbationSpec& spec, const PhysicalConstants& consts, const EosFamily& eos,
                              const Grid3& grid, QuietFluid quiet, const std::optional<CompactBox>& box = std::nullopt,
                              double minMargin = 0.1);

/// Adds the finite-c datum. consts.c must be finite.
DataBundle liftToRelativistic(const DataBundle& bundle, const PhysicalConstants& consts, const EosFamily& eos);

/// Mollified relativistic fluid data (eta_s, e^{4 phi_c / c^2} p_s, v_s); for an
/// unlifted bundle, the mollified Newtonian data.
StateField smoothedFluidData(const DataBundle& bundle, double eps);

/// Throws DomainError naming the worst point if (eta, p) leaves the box margin.
void checkAdmissible(const StateField& w, const CompactBox& box, double minMargin, bool pressureIsP = false,
                     const ScalarField* phi = nullptr, LightSpeed c = LightSpeed());

}  // namespace nordlimit
