#include "nordlimit/eos.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nordlimit/fit.hpp"

namespace nordlimit {

EntropyCoefficient EntropyCoefficient::constant(double a) {
  if (!(a > 0)) throw ParameterError("entropy coefficient must be positive");
  EntropyCoefficient e;
  e.eval = [a](double) { return Value{a, 0.0}; };
  std::ostringstream os;
  os.precision(17);
  os << "constant " << a;
  e.description = os.str();
  return e;
}

EntropyCoefficient EntropyCoefficient::powerLaw(double a, double k) {
  if (!(a > 0)) throw ParameterError("entropy coefficient must be positive");
  EntropyCoefficient e;
  e.eval = [a, k](double eta) {
    const double v = a * std::pow(eta, k);
    return Value{v, k * v / eta};
  };
  std::ostringstream os;
  os.precision(17);
  os << "power " << a << " " << k;
  e.description = os.str();
  return e;
}

void EosFamily::validate() const {
  if (!(m0 > 0)) throw ParameterError("m0 must be > 0");
  if (!(gamma > 1)) throw ParameterError("adiabatic exponent must be > 1");
  if (!aInf.eval) throw ParameterError("entropy coefficient not set");
}

double EosFamily::minLightSpeed() const { return aPerturb >= 0 ? 0.0 : std::sqrt(-aPerturb); }

double EosFamily::aC(double eta, LightSpeed c) const {
  const double a = aInf.eval(eta).a * (1.0 + aPerturb * c.invSq());
  if (!(a > 0)) throw DomainError("A_c(eta) <= 0: speed of light below the EOS threshold");
  return a;
}

namespace {

void requireAdmissible(ThermoPoint tp) {
  if (!tp.admissible()) {
    std::ostringstream os;
    os << "non-admissible thermodynamic point (eta=" << tp.eta << ", p=" << tp.p << ")";
    throw DomainError(os.str());
  }
}

}  // namespace

DensityJet densityJet(const EosFamily& eos, LightSpeed c, ThermoPoint tp) {
  requireAdmissible(tp);
  const auto av = eos.aInf.eval(tp.eta);
  const double a = av.a * (1.0 + eos.aPerturb * c.invSq());
  if (!(a > 0)) throw DomainError("A_c(eta) <= 0: speed of light below the EOS threshold");
  const double dlogA = av.da / av.a;
  const double g = eos.gamma;
  const double base = eos.m0 * std::pow(tp.p / a, 1.0 / g);
  const double ic2 = c.invSq();
  DensityJet j;
  j.r = base + ic2 * tp.p / (g - 1.0);
  j.rP = base / (g * tp.p) + ic2 / (g - 1.0);
  j.rEta = -base * dlogA / g;
  j.rPP = base * (1.0 / g) * (1.0 / g - 1.0) / (tp.p * tp.p);
  j.rPEta = -base * dlogA / (g * g * tp.p);
  return j;
}

double massDensityC(const PhysicalConstants& consts, const EosFamily& eos, ThermoPoint tp) {
  return densityJet(eos, consts.c, tp).r;
}

double soundSpeedSqC(const PhysicalConstants& consts, const EosFamily& eos, ThermoPoint tp) {
  const double s2 = 1.0 / densityJet(eos, consts.c, tp).rP;
  if (!(s2 > 0.0) || (!consts.c.isInfinite() && !(s2 < consts.c.sq()))) {
    std::ostringstream os;
    os << "sound speed squared " << s2 << " outside (0, c^2) at (eta=" << tp.eta << ", p=" << tp.p
       << "), c=" << consts.c.str();
    throw CausalityError(os.str());
  }
  return s2;
}

double qC(const PhysicalConstants& consts, const EosFamily& eos, ThermoPoint tp, double phi) {
  const double s2 = soundSpeedSqC(consts, eos, tp);
  const double r = massDensityC(consts, eos, tp);
  const double ic2 = consts.c.invSq();
  return s2 * std::exp(4.0 * phi * ic2) * (r + ic2 * tp.p);
}

double backgroundResidual(const PhysicalConstants& consts, const EosFamily& eos, double etaBar, double pBar,
                          double phi) {
  const double ic2 = consts.c.invSq();
  const double r = massDensityC(consts, eos, {etaBar, pBar});
  return consts.kappa * consts.kappa * phi +
         4.0 * kPi * consts.gravG * std::exp(4.0 * phi * ic2) * (r - 3.0 * ic2 * pBar);
}

double backgroundPotential(const PhysicalConstants& consts, const EosFamily& eos, double etaBar, double pBar) {
  consts.validate();
  const double k2 = consts.kappa * consts.kappa;
  const double r = massDensityC(consts, eos, {etaBar, pBar});
  if (consts.c.isInfinite()) return -4.0 * kPi * consts.gravG * r / k2;

  const double ic2 = consts.c.invSq();
  const double src = 4.0 * kPi * consts.gravG * (r - 3.0 * ic2 * pBar);
  auto F = [&](double x) { return k2 * x + src * std::exp(4.0 * x * ic2); };
  auto dF = [&](double x) { return k2 + 4.0 * ic2 * src * std::exp(4.0 * x * ic2); };

  double lo = -8.0 * kPi * consts.gravG * r / k2, hi = 0.0;
  double flo = F(lo), fhi = F(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo < 0) == (fhi < 0)) throw RootFindError("background potential: no sign change in bracket", lo, hi);

  double x = 0.5 * (lo + hi);
  const double tol = 1e-12;
  for (int it = 0; it < 200; ++it) {
    const double fx = F(x);
    if (std::abs(fx) <= tol) return x;
    if ((fx < 0) == (flo < 0)) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
    }
    const double d = dF(x);
    double xn = (d != 0.0) ? x - fx / d : 0.5 * (lo + hi);
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    if (xn == x) break;
    x = xn;
  }
  if (std::abs(F(x)) <= tol) return x;
  throw RootFindError("background potential: iteration did not reach |F| <= 1e-12", lo, hi);
}

double lorentzFactorSq(LightSpeed c, double speedSq) {
  const double d = 1.0 - speedSq * c.invSq();
  if (!(d > 0.0)) throw SuperluminalError("|v| >= c");
  return 1.0 / d;
}

void CompactBox::validate() const {
  if (!(etaMin > 0 && etaMax > etaMin)) throw ParameterError("compact box: need 0 < etaMin < etaMax");
  if (!(pMin > 0 && pMax > pMin)) throw ParameterError("compact box: need 0 < pMin < pMax");
  if (!(speedMax >= 0)) throw ParameterError("compact box: speedMax must be >= 0");
  if (!(phiMax >= phiMin)) throw ParameterError("compact box: phiMin > phiMax");
}

double CompactBox::relativeMargin(ThermoPoint tp) const {
  const double de = std::min(tp.eta - etaMin, etaMax - tp.eta) / (etaMax - etaMin);
  const double dp = std::min(tp.p - pMin, pMax - tp.p) / (pMax - pMin);
  return std::min(de, dp);
}

bool RateReport::allPass() const {
  return std::none_of(families.begin(), families.end(), [](const RateFamily& f) { return f.flagged; });
}

RateReport hypothesisRateCheck(const PhysicalConstants& consts, const EosFamily& eos, const CompactBox& box,
                               const std::vector<double>& cList) {
  box.validate();
  if (cList.size() < 3) throw ParameterError("rate check needs at least 3 values of c");
  const int m = 9;
  auto lin = [m](double a, double b, int i) { return a + (b - a) * i / (m - 1); };

  RateReport rep;
  rep.cValues = cList;
  RateFamily fr{"massDensity", {}, 0, 0, false};
  RateFamily fs{"soundSpeedSq", {}, 0, 0, false};
  RateFamily fg{"lorentzFactorSq", {}, 0, 0, false};
  RateFamily fe{"potentialExponential", {}, 0, 0, false};
  const PhysicalConstants inf = consts.withC(LightSpeed());

  for (double cv : cList) {
    const PhysicalConstants cc = consts.withC(LightSpeed(cv));
    double dr = 0, ds = 0, dg = 0, de = 0;
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        const ThermoPoint tp{lin(box.etaMin, box.etaMax, i), lin(box.pMin, box.pMax, j)};
        dr = std::max(dr, std::abs(massDensityC(cc, eos, tp) - massDensityC(inf, eos, tp)));
        ds = std::max(ds, std::abs(soundSpeedSqC(cc, eos, tp) - soundSpeedSqC(inf, eos, tp)));
      }
      const double s = lin(0.0, box.speedMax, i);
      dg = std::max(dg, std::abs(lorentzFactorSq(cc.c, s * s) - 1.0));
      const double ph = lin(box.phiMin, box.phiMax, i);
      de = std::max(de, std::abs(std::exp(4.0 * ph / (cv * cv)) - 1.0));
      de = std::max(de, std::abs(std::exp(-4.0 * ph / (cv * cv)) - 1.0));
    }
    fr.deviation.push_back(dr);
    fs.deviation.push_back(ds);
    fg.deviation.push_back(dg);
    fe.deviation.push_back(de);
  }
  for (RateFamily* f : {&fr, &fs, &fg, &fe}) {
    bool zero = std::all_of(f->deviation.begin(), f->deviation.end(), [](double d) { return d == 0.0; });
    if (zero) {
      // identically equal branches: no rate to fit, nothing to flag
      f->slope = -std::numeric_limits<double>::infinity();
    } else {
      const LogLogFit fit = fitLogLog(cList, f->deviation);
      f->slope = fit.slope;
      f->residual = fit.residual;
    }
    f->flagged = f->slope > -1.9;
    rep.families.push_back(*f);
  }
  return rep;
}

}  // namespace nordlimit
