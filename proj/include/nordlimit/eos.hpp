#pragma once

#include <functional>
#include <string>
#include <vector>

#include "nordlimit/common.hpp"

namespace nordlimit {

struct ThermoPoint {
  double eta = 1.0;  // entropy per particle
  double p = 1.0;    // pressure

  bool admissible() const { return eta > 0.0 && p > 0.0 && std::isfinite(eta) && std::isfinite(p); }
};

/// Positive entropy coefficient A(eta) together with dA/deta.
struct EntropyCoefficient {
  struct Value {
    double a;
    double da;
  };
  std::function<Value(double)> eval;
  std::string description;

  static EntropyCoefficient constant(double a);
  /// a * eta^k
  static EntropyCoefficient powerLaw(double a, double k);
};

/// Polytropic family: A_c(eta) = A_inf(eta) (1 + a1 c^-2),
///   r_c(eta, p) = m0 (p / A_c)^(1/gamma) + c^-2 p / (gamma - 1).
struct EosFamily {
  double m0 = 1.0;
  double gamma = 2.0;
  EntropyCoefficient aInf = EntropyCoefficient::constant(1.0);
  double aPerturb = 0.0;

  void validate() const;
  /// Smallest c for which A_c stays positive (0 when a1 >= 0).
  double minLightSpeed() const;
  double aC(double eta, LightSpeed c) const;
};

/// r_c and the partial derivatives needed by chain rules.
struct DensityJet {
  double r;
  double rP;
  double rEta;
  double rPP;
  double rPEta;
};

DensityJet densityJet(const EosFamily& eos, LightSpeed c, ThermoPoint tp);

double massDensityC(const PhysicalConstants& consts, const EosFamily& eos, ThermoPoint tp);
double soundSpeedSqC(const PhysicalConstants& consts, const EosFamily& eos, ThermoPoint tp);
double qC(const PhysicalConstants& consts, const EosFamily& eos, ThermoPoint tp, double phi);

/// Constant potential of the quiet background. Closed form for c = inf, otherwise the
/// root of kappa^2 phi + 4 pi G e^{4 phi / c^2} (r_c - 3 c^-2 p) = 0.
double backgroundPotential(const PhysicalConstants& consts, const EosFamily& eos, double etaBar, double pBar);

/// Residual of the finite-c background constraint at phi.
double backgroundResidual(const PhysicalConstants& consts, const EosFamily& eos, double etaBar, double pBar,
                          double phi);

/// gamma_c(v)^2 = 1 / (1 - |v|^2 / c^2); exactly 1 for c = inf.
double lorentzFactorSq(LightSpeed c, double speedSq);

struct CompactBox {
  double etaMin = 0.5, etaMax = 2.0;
  double pMin = 0.5, pMax = 2.0;
  double speedMax = 1.0;                // velocity box radius
  double phiMin = -2.0, phiMax = 2.0;  // potential box

  void validate() const;
  bool contains(ThermoPoint tp) const {
    return tp.eta >= etaMin && tp.eta <= etaMax && tp.p >= pMin && tp.p <= pMax;
  }
  /// Signed distance of tp to the box boundary relative to the box size (negative outside).
  double relativeMargin(ThermoPoint tp) const;
};

struct RateFamily {
  std::string name;
  std::vector<double> deviation;  // max over the box, one entry per c
  double slope = 0.0;
  double residual = 0.0;
  bool flagged = false;           // slope > -1.9
};

struct RateReport {
  std::vector<double> cValues;
  std::vector<RateFamily> families;
  bool allPass() const;
};

RateReport hypothesisRateCheck(const PhysicalConstants& consts, const EosFamily& eos, const CompactBox& box,
                               const std::vector<double>& cList);

}  // namespace nordlimit
