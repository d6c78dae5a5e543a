#include "nordlimit/euler_nordstrom.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nordlimit/parallel.hpp"

namespace nordlimit {

NordstromSystem::NordstromSystem(PhysicalConstants consts, EosFamily eos) : consts_(consts), eos_(std::move(eos)) {
  consts_.validate();
  eos_.validate();
  if (consts_.c.isInfinite()) throw ParameterError("Euler-Nordstrom system needs a finite speed of light");
  if (consts_.c.value() <= eos_.minLightSpeed()) throw ParameterError("speed of light below the EOS threshold");
}

FluidPoint NordstromSystem::pointAt(const RelState& s, std::size_t i) const {
  try {
    return evaluatePoint(eos_, consts_.c, s.w[0][i], s.w[1][i], {s.w[2][i], s.w[3][i], s.w[4][i]}, s.phi[i]);
  } catch (const SuperluminalError&) {
    const int n = s.w.grid.n;
    std::ostringstream os;
    os << "|v| >= c at grid point (" << i % n << "," << (i / n) % n << "," << i / (std::size_t(n) * n) << ")";
    throw SuperluminalError(os.str());
  }
}

MatrixBundle NordstromSystem::assembleMatrices(const RelState& s) const {
  const std::size_t n = s.w.grid.size();
  MatrixBundle m;
  m.a0.resize(n);
  m.a1.resize(n);
  m.a2.resize(n);
  m.a3.resize(n);
  m.bRhs.resize(n);
  const VecField gphi = gradient(s.phi);
  parallelFor(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const FluidPoint fp = pointAt(s, i);
      m.a0[i] = systemMatrix(fp, 0);
      m.a1[i] = systemMatrix(fp, 1);
      m.a2[i] = systemMatrix(fp, 2);
      m.a3[i] = systemMatrix(fp, 3);
      m.bRhs[i] = systemSource(fp, {gphi[0][i], gphi[1][i], gphi[2][i]}, s.pi[i]);
    }
  });
  return m;
}

StateField NordstromSystem::fluidRhs(const RelState& s) const {
  const Grid3& g = s.w.grid;
  const std::size_t n = g.size();
  std::array<VecField, 5> dw;
  for (int c = 0; c < 5; ++c) dw[c] = gradient(s.w[c]);
  const VecField gphi = gradient(s.phi);

  StateField out(g, {0, 0, 0, 0, 0});
  parallelFor(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const FluidPoint fp = pointAt(s, i);
      Vec5 r = systemSource(fp, {gphi[0][i], gphi[1][i], gphi[2][i]}, s.pi[i]);
      for (int k = 0; k < 3; ++k) {
        const Mat5 a = systemMatrix(fp, k + 1);
        for (int row = 0; row < 5; ++row) {
          double acc = 0;
          for (int col = 0; col < 5; ++col) acc += a[row][col] * dw[col][k][i];
          r[row] -= acc;
        }
      }
      const Vec5 x = solveTimeMatrix(fp, r);
      for (int c = 0; c < 5; ++c) out[c][i] = x[c];
    }
  });
  for (int c = 0; c < 5; ++c) out[c] = dealias(out[c]);
  return out;
}

PotentialRate NordstromSystem::potentialRhs(const RelState& s) const {
  const Grid3& g = s.w.grid;
  const double c2 = consts_.c.sq(), ic2 = consts_.c.invSq();
  const double fourPiG = 4.0 * kPi * consts_.gravG;
  ScalarField src(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double E = std::exp(4.0 * s.phi[i] * ic2);
    const double p = s.w[1][i] / E;
    const double R = E * massDensityC(consts_, eos_, {s.w[0][i], p});
    src[i] = fourPiG * (R - 3.0 * ic2 * s.w[1][i]);
  }
  ScalarField op = helmholtzApply(s.phi, consts_.kappa);  // (Delta - kappa^2) phi
  PotentialRate r;
  r.dPhi = s.pi;
  r.dPi = ScalarField(g);
  for (std::size_t i = 0; i < g.size(); ++i) r.dPi[i] = c2 * (op[i] - src[i]);
  return r;
}

StateRate NordstromSystem::rate(const RelState& s) const {
  PotentialRate pr = potentialRhs(s);
  return {fluidRhs(s), std::move(pr.dPhi), std::move(pr.dPi)};
}

namespace {

RelState advance(const RelState& s, const StateRate& k, double h) {
  RelState o = s;
  for (int c = 0; c < 5; ++c) o.w[c].axpy(h, k.dw[c]);
  o.phi.axpy(h, k.dPhi);
  o.pi.axpy(h, k.dPi);
  o.t = s.t + h;
  return o;
}

}  // namespace

RelState NordstromSystem::step(const RelState& s, double dt) const {
  const StateRate k1 = rate(s);
  const StateRate k2 = rate(advance(s, k1, 0.5 * dt));
  const StateRate k3 = rate(advance(s, k2, 0.5 * dt));
  const StateRate k4 = rate(advance(s, k3, dt));
  RelState o = s;
  const double w1 = dt / 6.0, w2 = dt / 3.0;
  for (int c = 0; c < 5; ++c) {
    o.w[c].axpy(w1, k1.dw[c]).axpy(w2, k2.dw[c]).axpy(w2, k3.dw[c]).axpy(w1, k4.dw[c]);
  }
  o.phi.axpy(w1, k1.dPhi).axpy(w2, k2.dPhi).axpy(w2, k3.dPhi).axpy(w1, k4.dPhi);
  o.pi.axpy(w1, k1.dPi).axpy(w2, k2.dPi).axpy(w2, k3.dPi).axpy(w1, k4.dPi);
  o.t = s.t + dt;
  return o;
}

double NordstromSystem::maxSignalSpeed(const RelState& s) const {
  double vmax = 0, smax = 0;
  for (std::size_t i = 0; i < s.w.grid.size(); ++i) {
    const FluidPoint fp = pointAt(s, i);
    vmax = std::max(vmax, std::sqrt(fp.speedSq));
    smax = std::max(smax, std::sqrt(fp.soundSq));
  }
  return vmax + smax;
}

double NordstromSystem::stableDt(const RelState& s, double cfl) const {
  return cfl * s.w.grid.spacing() / std::max(consts_.c.value(), maxSignalSpeed(s));
}

double NordstromSystem::boxMargin(const RelState& s, const CompactBox& box) const {
  const double ic2 = consts_.c.invSq();
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < s.w.grid.size(); ++i) {
    const ThermoPoint tp{s.w[0][i], s.w[1][i] * std::exp(-4.0 * s.phi[i] * ic2)};
    m = std::min(m, tp.admissible() ? box.relativeMargin(tp) : -std::numeric_limits<double>::infinity());
  }
  return m;
}

namespace {

bool allFinite(const RelState& s) {
  for (int c = 0; c < 5; ++c)
    for (double x : s.w[c].values())
      if (!std::isfinite(x)) return false;
  for (double x : s.phi.values())
    if (!std::isfinite(x)) return false;
  for (double x : s.pi.values())
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

RunStatus NordstromSystem::run(RelState s, const RunOptions& opt, const Observer& observer, RelState* lastGood) const {
  RunStatus st;
  if (!(opt.tFinal > 0)) throw ParameterError("run: tFinal must be > 0");
  if (!(opt.cfl > 0 && opt.cfl <= 1)) throw ParameterError("run: cfl must lie in (0, 1]");
  const double h = s.w.grid.spacing();
  double dt = opt.dt > 0 ? opt.dt : stableDt(s, opt.cfl);
  const int nSteps = std::max(1, int(std::ceil(opt.tFinal / dt - 1e-9)));
  dt = opt.tFinal / nSteps;
  st.dt = dt;
  const double t0 = s.t;
  if (observer) observer(s, 0);
  if (lastGood) *lastGood = s;
  for (int n = 1; n <= nSteps; ++n) {
    try {
      const double speed = std::max(consts_.c.value(), maxSignalSpeed(s));
      if (dt * speed / h > 1.0) {
        std::ostringstream os;
        os << "CFL violation: dt * max signal speed / h = " << dt * speed / h << " > 1";
        throw SuperluminalError(os.str());
      }
      RelState next = step(s, dt);
      next.t = t0 + n * dt;
      if (!allFinite(next)) throw DomainError("non-finite value after step " + std::to_string(n));
      if (opt.checkBox) {
        const double m = boxMargin(next, opt.box);
        if (!(m >= opt.minMargin)) {
          std::ostringstream os;
          os << "admissibility margin " << m << " below " << opt.minMargin << " of the box at t=" << next.t;
          throw DomainError(os.str());
        }
      }
      double vmax = 0;
      for (std::size_t i = 0; i < next.w.grid.size(); ++i)
        vmax = std::max(vmax, next.w[2][i] * next.w[2][i] + next.w[3][i] * next.w[3][i] + next.w[4][i] * next.w[4][i]);
      if (std::sqrt(vmax) >= 0.5 * consts_.c.value()) throw SuperluminalError("|v| reached c/2");
      s = std::move(next);
    } catch (const Error& e) {
      st.aborted = true;
      st.reason = e.what();
      return st;
    }
    st.steps = n;
    if (lastGood) *lastGood = s;
    if (observer) observer(s, n);
  }
  return st;
}

RelState backgroundState(const Grid3& g, const NordstromSystem& sys, double etaBar, double pBar) {
  const double phiBar = backgroundPotential(sys.consts(), sys.eos(), etaBar, pBar);
  const double PBar = std::exp(4.0 * phiBar * sys.consts().c.invSq()) * pBar;
  RelState s;
  s.w = StateField(g, {etaBar, PBar, 0, 0, 0});
  s.phi = ScalarField(g, phiBar);
  s.pi = ScalarField(g, 0.0);
  return s;
}

RelState initialState(const DataBundle& b) {
  if (!b.lifted()) throw ParameterError("initialState: data bundle has no finite-c lift");
  RelState s;
  s.w = b.wC;
  s.phi = b.phiC;
  s.pi = b.psi0;
  return s;
}

}  // namespace nordlimit
