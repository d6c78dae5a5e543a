#pragma once

#include <functional>

#include "nordlimit/euler_nordstrom.hpp"

namespace nordlimit {

struct NewtState {
  StateField w;     // (eta, p, v1, v2, v3); background holds (etaBar, pBar, 0, 0, 0)
  ScalarField phi;  // constrained potential for w
  double t = 0.0;
};

/// Euler-Poisson system: the c = inf limit with the screened Poisson constraint.
class PoissonSystem {
 public:
  PoissonSystem(PhysicalConstants consts, EosFamily eos);

  const PhysicalConstants& consts() const { return consts_; }
  const EosFamily& eos() const { return eos_; }

  /// phiBar + H(4 pi G [r(eta, p) - r(etaBar, pBar)]) with the background of w.
  ScalarField solveConstraint(const StateField& w) const;
  NewtState withConstraint(StateField w, double t = 0.0) const;
  /// Relative L2 residual of (Delta - kappa^2) phi = 4 pi G R.
  double constraintResidual(const NewtState& s) const;

  StateField newtonianRhs(const NewtState& s) const;
  NewtState step(const NewtState& s, double dt) const;

  /// The same flow written with the mass density as the evolved variable:
  /// (eta, R, v) with p = A(eta) (R / m0)^gamma.
  StateField massFormRhs(const StateField& wr) const;
  StateField massFormStep(const StateField& wr, double dt) const;
  StateField toMassForm(const StateField& w) const;

  double maxSignalSpeed(const NewtState& s) const;
  /// cfl * h / max(max|v| + max sound speed, 1)
  double stableDt(const NewtState& s, double cfl) const;
  double boxMargin(const NewtState& s, const CompactBox& box) const;

  using Observer = std::function<void(const NewtState&, int step)>;
  RunStatus run(NewtState s, const RunOptions& opt, const Observer& observer, NewtState* lastGood = nullptr) const;

 private:
  PhysicalConstants consts_;
  EosFamily eos_;
};

NewtState backgroundState(const Grid3& g, const PoissonSystem& sys, double etaBar, double pBar);
NewtState initialState(const DataBundle& b, const PoissonSystem& sys);

}  // namespace nordlimit
