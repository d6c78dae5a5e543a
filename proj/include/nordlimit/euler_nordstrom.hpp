#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "nordlimit/eos.hpp"
#include "nordlimit/fields.hpp"
#include "nordlimit/initial_data.hpp"

namespace nordlimit {

using Vec5 = std::array<double, 5>;
using Mat5 = std::array<Vec5, 5>;

/// Everything the fluid equations need at one grid point. Works for finite c
/// and for c = inf (all c^-2 factors vanish, P = p, R = r_inf).
struct FluidPoint {
  LightSpeed c;
  double ic2 = 0;
  double eta = 0, P = 0, p = 0, phi = 0;
  std::array<double, 3> v{};
  double speedSq = 0;
  double expFactor = 1;  // e^{4 phi / c^2}
  double R = 0;          // e^{4 phi / c^2} r_c(eta, p)
  double Q = 0;
  double soundSq = 0;
  double lorentzSq = 1;
  double alpha = 0;      // gamma^2 (R + c^-2 P)

  // partials with respect to (eta, P, phi) at fixed v
  double dR[3] = {0, 0, 0};
  double dQ[3] = {0, 0, 0};
};

/// Throws DomainError, CausalityError or SuperluminalError outside the admissible set.
FluidPoint evaluatePoint(const EosFamily& eos, LightSpeed c, double eta, double P, const std::array<double, 3>& v,
                         double phi);

/// Coefficient matrices of the fluid equations, mu = 0 (time) or 1..3 (space).
Mat5 systemMatrix(const FluidPoint& fp, int mu);
/// Same matrices with the pressure row divided by Q: symmetric, and the quadratic
/// forms of the energy current.
Mat5 energyMatrix(const FluidPoint& fp, int mu);
/// Right-hand side of the fluid equations.
Vec5 systemSource(const FluidPoint& fp, const std::array<double, 3>& gradPhi, double pi);
/// Solves systemMatrix(fp, 0) x = r by the block inverse, falling back to LU.
Vec5 solveTimeMatrix(const FluidPoint& fp, const Vec5& r);
/// Dense 5x5 solve with partial pivoting. Throws SingularMatrixError.
Vec5 solveDense(Mat5 a, Vec5 r);
Mat5 inverseTimeMatrix(const FluidPoint& fp);

struct RelState {
  StateField w;  // (eta, P, v1, v2, v3)
  ScalarField phi;
  ScalarField pi;  // time derivative of phi
  double t = 0.0;
};

struct MatrixBundle {
  std::vector<Mat5> a0, a1, a2, a3;
  std::vector<Vec5> bRhs;
};

struct PotentialRate {
  ScalarField dPhi;
  ScalarField dPi;
};

struct StateRate {
  StateField dw;
  ScalarField dPhi;
  ScalarField dPi;
};

struct RunOptions {
  double tFinal = 0.2;
  double cfl = 0.5;
  double dt = 0.0;        // > 0 overrides the CFL rule (then adjusted to land on tFinal)
  CompactBox box;
  double minMargin = 0.01;
  bool checkBox = true;
};

struct RunStatus {
  bool aborted = false;
  std::string reason;
  int steps = 0;
  double dt = 0.0;
};

/// Euler-Nordstrom system at a fixed finite speed of light.
class NordstromSystem {
 public:
  NordstromSystem(PhysicalConstants consts, EosFamily eos);

  const PhysicalConstants& consts() const { return consts_; }
  const EosFamily& eos() const { return eos_; }

  FluidPoint pointAt(const RelState& s, std::size_t i) const;
  MatrixBundle assembleMatrices(const RelState& s) const;
  StateField fluidRhs(const RelState& s) const;
  PotentialRate potentialRhs(const RelState& s) const;
  /// Full time derivative of (W, phi, pi).
  StateRate rate(const RelState& s) const;
  RelState step(const RelState& s, double dt) const;

  /// cfl * h / max(c, max|v| + max sound speed)
  double stableDt(const RelState& s, double cfl) const;
  double maxSignalSpeed(const RelState& s) const;
  /// Smallest relative (eta, p) margin inside the box.
  double boxMargin(const RelState& s, const CompactBox& box) const;

  using Observer = std::function<void(const RelState&, int step)>;
  /// RK4 to tFinal; observer sees the initial state (step 0) and every accepted step.
  RunStatus run(RelState s, const RunOptions& opt, const Observer& observer, RelState* lastGood = nullptr) const;

 private:
  PhysicalConstants consts_;
  EosFamily eos_;
};

/// Quiet background (eta, P, 0, phiBar, 0) at this c.
RelState backgroundState(const Grid3& g, const NordstromSystem& sys, double etaBar, double pBar);

/// (W_c, phi_c, psi0) from a lifted bundle.
RelState initialState(const DataBundle& b);

}  // namespace nordlimit
