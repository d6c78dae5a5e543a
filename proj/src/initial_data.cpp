#include "nordlimit/initial_data.hpp"

#include <cmath>
#include <sstream>

namespace nordlimit {

void PerturbationSpec::validate(const Grid3& g) const {
  if (!(width > 0) || width > g.length / 6.0) throw ParameterError("perturbation width must lie in (0, L/6]");
  for (double v : {etaAmplitude, pAmplitude, vAmplitude[0], vAmplitude[1], vAmplitude[2], center[0], center[1], center[2]})
    if (!std::isfinite(v)) throw ParameterError("perturbation parameters must be finite");
}

bool PerturbationSpec::isZero() const {
  return etaAmplitude == 0 && pAmplitude == 0 && vAmplitude[0] == 0 && vAmplitude[1] == 0 && vAmplitude[2] == 0;
}

ScalarField periodicBump(const Grid3& g, const std::array<double, 3>& center, double width) {
  const double k0 = 2.0 * kPi / g.length;
  const double s2 = (k0 * width) * (k0 * width);
  std::array<std::vector<double>, 3> prof;
  for (int a = 0; a < 3; ++a) {
    prof[a].resize(g.n);
    for (int i = 0; i < g.n; ++i) prof[a][i] = std::exp((std::cos(k0 * (g.coord(i) - center[a])) - 1.0) / s2);
  }
  ScalarField f(g);
  for (int k = 0; k < g.n; ++k)
    for (int j = 0; j < g.n; ++j)
      for (int i = 0; i < g.n; ++i) f[g.index(i, j, k)] = prof[0][i] * prof[1][j] * prof[2][k];
  return dealias(f);
}

void checkAdmissible(const StateField& w, const CompactBox& box, double minMargin, bool pressureIsP,
                     const ScalarField* phi, LightSpeed c) {
  double worst = std::numeric_limits<double>::infinity();
  std::size_t at = 0;
  ThermoPoint worstTp;
  for (std::size_t i = 0; i < w[0].size(); ++i) {
    double p = w[1][i];
    if (pressureIsP && phi) p *= std::exp(-4.0 * (*phi)[i] * c.invSq());
    const ThermoPoint tp{w[0][i], p};
    const double m = tp.admissible() ? box.relativeMargin(tp) : -std::numeric_limits<double>::infinity();
    if (!(m >= worst)) {
      worst = m;
      at = i;
      worstTp = tp;
    }
  }
  if (!(worst >= minMargin)) {
    const int n = w.grid.n;
    std::ostringstream os;
    os << "admissibility: relative box margin " << worst << " < " << minMargin << " at grid point (" << at % n << ","
       << (at / n) % n << "," << at / (std::size_t(n) * n) << ") with eta=" << worstTp.eta << " p=" << worstTp.p;
    throw DomainError(os.str());
  }
}

DataBundle buildNewtonianData(const PerturbationSpec& spec, const PhysicalConstants& consts, const EosFamily& eos,
                              const Grid3& grid, QuietFluid quiet, const std::optional<CompactBox>& box,
                              double minMargin) {
  grid.validate();
  consts.validate();
  eos.validate();
  spec.validate(grid);
  const PhysicalConstants inf = consts.withC(LightSpeed());

  DataBundle b;
  b.grid = grid;
  b.quiet = quiet;
  b.wInf = StateField(grid, {quiet.eta, quiet.p, 0.0, 0.0, 0.0});
  if (!spec.isZero()) {
    const ScalarField bump = periodicBump(grid, spec.center, spec.width);
    b.wInf[0].axpy(spec.etaAmplitude, bump);
    b.wInf[1].axpy(spec.pAmplitude, bump);
    for (int a = 0; a < 3; ++a) b.wInf[2 + a].axpy(spec.vAmplitude[a], bump);
  }
  b.wInf.validate();
  if (box) checkAdmissible(b.wInf, *box, minMargin);

  const double fourPiG = 4.0 * kPi * consts.gravG;
  b.phiBarInf = backgroundPotential(inf, eos, quiet.eta, quiet.p);
  const double rBar = massDensityC(inf, eos, {quiet.eta, quiet.p});

  ScalarField rho(grid), delta(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    rho[i] = massDensityC(inf, eos, {b.wInf[0][i], b.wInf[1][i]});
    delta[i] = fourPiG * (rho[i] - rBar);
  }
  b.phiDeviation = helmholtzSolve(delta, consts.kappa);
  b.phiInf = b.phiDeviation;
  for (double& x : b.phiInf.values()) x += b.phiBarInf;

  ScalarField div(grid);
  for (int a = 0; a < 3; ++a) {
    ScalarField flux(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) flux[i] = rho[i] * b.wInf[2 + a][i];
    div += spectralDerivative(flux, a);
  }
  div *= -fourPiG;
  b.psi0 = helmholtzSolve(div, consts.kappa);
  b.psiJ = gradient(b.phiInf);
  return b;
}

DataBundle liftToRelativistic(const DataBundle& bundle, const PhysicalConstants& consts, const EosFamily& eos) {
  if (consts.c.isInfinite()) throw ParameterError("liftToRelativistic needs a finite speed of light");
  DataBundle b = bundle;
  b.c = consts.c;
  b.phiBarC = backgroundPotential(consts, eos, bundle.quiet.eta, bundle.quiet.p);
  const double ic2 = consts.c.invSq();
  b.phiC = ScalarField(bundle.grid);
  for (std::size_t i = 0; i < b.phiC.size(); ++i) b.phiC[i] = bundle.phiDeviation[i] + b.phiBarC;
  const double pBarC = std::exp(4.0 * b.phiBarC * ic2) * bundle.quiet.p;
  b.wC = StateField(bundle.grid, {bundle.quiet.eta, pBarC, 0.0, 0.0, 0.0});
  b.wC[0] = bundle.wInf[0];
  for (std::size_t i = 0; i < b.phiC.size(); ++i) b.wC[1][i] = std::exp(4.0 * b.phiC[i] * ic2) * bundle.wInf[1][i];
  for (int a = 0; a < 3; ++a) b.wC[2 + a] = bundle.wInf[2 + a];
  return b;
}

StateField smoothedFluidData(const DataBundle& bundle, double eps) {
  StateField s = mollify(bundle.wInf, eps);
  if (!bundle.lifted()) return s;
  const double ic2 = bundle.c.invSq();
  s.background = bundle.wC.background;
  for (std::size_t i = 0; i < s[1].size(); ++i) s[1][i] *= std::exp(4.0 * bundle.phiC[i] * ic2);
  return s;
}

}  // namespace nordlimit
