#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "nordlimit/euler_nordstrom.hpp"
#include "nordlimit/euler_poisson.hpp"

namespace nordlimit {

/// A variation wDot about the background fields (w, phi). For finite c, w holds
/// (eta, P, v); for c = inf it holds (eta, p, v) and phi only enters through gradients.
struct Variation {
  StateField wDot;
  StateField w;
  ScalarField phi;
};

/// Per-point fluid data of a background, throwing DomainError if Q <= 0 anywhere.
std::vector<FluidPoint> backgroundPoints(const StateField& w, const ScalarField& phi, const EosFamily& eos,
                                         LightSpeed c);

double currentDensity(const FluidPoint& fp, const Vec5& wDot, int mu);
ScalarField j0C(const Variation& var, const EosFamily& eos, LightSpeed c);
ScalarField jSpatialC(const Variation& var, const EosFamily& eos, LightSpeed c, int axis);

/// Smallest and largest eigenvalue of the J0 quadratic form at one point.
std::array<double, 2> formEigenvalues(const FluidPoint& fp);

struct RatioBounds {
  double minRatio = 0.0;
  double maxRatio = 0.0;
  std::size_t worstPoint = 0;  // where minRatio was attained
  Vec5 worstDirection{};       // unit variation attaining it (sampled mode only)
  bool positive() const { return minRatio > 0.0; }
};

/// J0(wDot, wDot) / |wDot|^2 over the grid for one variation field.
RatioBounds positivityRatio(const Variation& var, const EosFamily& eos, LightSpeed c);
/// Same ratio over samplesPerPoint random unit directions at every point.
RatioBounds positivityRatio(const StateField& w, const ScalarField& phi, const EosFamily& eos, LightSpeed c,
                            int samplesPerPoint, std::uint64_t seed);
/// Exact infimum and supremum over all variations (per-point eigenvalues).
RatioBounds positivityBounds(const StateField& w, const ScalarField& phi, const EosFamily& eos, LightSpeed c);

/// Reciprocal acoustical metric, symmetric 4x4 with index 0 = time.
using Metric4 = std::array<std::array<double, 4>, 4>;
Metric4 acousticMetricInverse(const FluidPoint& fp);
/// True iff h^{mu nu} xi_mu xi_nu < 0 and xi_0 > 0.
bool soundConeMembership(const FluidPoint& fp, const std::array<double, 4>& xi);

/// Mollified initial fluid data plus the initial potential.
struct SmoothedData {
  StateField w;
  ScalarField phi;
};
/// For a lifted bundle the finite-c data, otherwise the Newtonian data.
SmoothedData smoothedData(const DataBundle& b, double eps);

struct EovInhomogeneity {
  StateField fluid;  // (f, g, h1, h2, h3)
  ScalarField l;     // zero for c = inf
};

EovInhomogeneity assembleEovInhomogeneity(const RelState& s, const SmoothedData& sd, const EosFamily& eos,
                                          const PhysicalConstants& consts);
EovInhomogeneity assembleEovInhomogeneity(const NewtState& s, const SmoothedData& sd, const EosFamily& eos,
                                          const PhysicalConstants& consts);

/// First derivatives of the background along one coordinate direction.
struct BackgroundDerivative {
  double eta = 0, P = 0, phi = 0;
  std::array<double, 3> v{};
};

/// Divergence of the energy current expressed through the background derivatives
/// (index 0 = time) and the inhomogeneity b = (f, g, h).
double divergenceDensity(const FluidPoint& fp, const std::array<BackgroundDerivative, 4>& d, const Vec5& wDot,
                         const Vec5& b);

/// One output time of a trajectory: energy integral, integrated divergence and
/// the positivity bounds of the background.
struct EnergySample {
  double t = 0;
  double energy = 0;  // integral of J0
  double rhs = 0;     // integral of the divergence formula
  double minRatio = 0, maxRatio = 0;
};

EnergySample sampleEnergy(const NordstromSystem& sys, const RelState& s, const SmoothedData& sd);
EnergySample sampleEnergy(const PoissonSystem& sys, const NewtState& s, const SmoothedData& sd);

struct IdentityRow {
  double t, lhs, rhs, defect, minRatio, maxRatio;
};

struct IdentityReport {
  std::vector<IdentityRow> rows;
  double e0 = 0;
  double maxDefect = 0;  // max |lhs - rhs| / max(max |lhs|, e0)
};

/// Centered differences of the energy against the divergence integral. Samples
/// must be equally spaced in time.
IdentityReport divergenceIdentityCheck(const std::vector<EnergySample>& samples);

/// H^order energy of the potential deviation phi - phiRing:
/// sum w(k) [(kappa^2 + |k|^2) |phiDot_k|^2 + c^-2 |pi_k|^2].
double kleinGordonEnergy(const RelState& s, const ScalarField& phiRing, double kappa, LightSpeed c, int order);

}  // namespace nordlimit
