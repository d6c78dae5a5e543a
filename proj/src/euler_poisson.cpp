#include "nordlimit/euler_poisson.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nordlimit/parallel.hpp"

namespace nordlimit {

PoissonSystem::PoissonSystem(PhysicalConstants consts, EosFamily eos) : consts_(consts), eos_(std::move(eos)) {
  consts_.c = LightSpeed();
  consts_.validate();
  eos_.validate();
}

ScalarField PoissonSystem::solveConstraint(const StateField& w) const {
  const Grid3& g = w.grid;
  const double etaBar = w.background[0], pBar = w.background[1];
  const double phiBar = backgroundPotential(consts_, eos_, etaBar, pBar);
  const double rBar = massDensityC(consts_, eos_, {etaBar, pBar});
  const double fourPiG = 4.0 * kPi * consts_.gravG;
  ScalarField src(g);
  for (std::size_t i = 0; i < g.size(); ++i) src[i] = fourPiG * (massDensityC(consts_, eos_, {w[0][i], w[1][i]}) - rBar);
  ScalarField phi = helmholtzSolve(src, consts_.kappa);
  for (double& x : phi.values()) x += phiBar;
  return phi;
}

NewtState PoissonSystem::withConstraint(StateField w, double t) const {
  NewtState s;
  s.phi = solveConstraint(w);
  s.w = std::move(w);
  s.t = t;
  return s;
}

double PoissonSystem::constraintResidual(const NewtState& s) const {
  const Grid3& g = s.w.grid;
  const double fourPiG = 4.0 * kPi * consts_.gravG;
  ScalarField src(g);
  for (std::size_t i = 0; i < g.size(); ++i) src[i] = fourPiG * massDensityC(consts_, eos_, {s.w[0][i], s.w[1][i]});
  ScalarField r = helmholtzApply(s.phi, consts_.kappa);
  r -= src;
  return l2Norm(r) / std::max(l2Norm(src), 1e-300);
}

StateField PoissonSystem::newtonianRhs(const NewtState& s) const {
  const Grid3& g = s.w.grid;
  std::array<VecField, 5> d;
  for (int c = 0; c < 5; ++c) d[c] = gradient(s.w[c]);
  const VecField gphi = gradient(s.phi);
  StateField out(g, {0, 0, 0, 0, 0});
  parallelFor(g.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const ThermoPoint tp{s.w[0][i], s.w[1][i]};
      const double R = massDensityC(consts_, eos_, tp);
      if (!(R > 0)) throw DomainError("non-positive mass density");
      const double Q = soundSpeedSqC(consts_, eos_, tp) * R;
      const double v[3] = {s.w[2][i], s.w[3][i], s.w[4][i]};
      auto adv = [&](int c) { return v[0] * d[c][0][i] + v[1] * d[c][1][i] + v[2] * d[c][2][i]; };
      out[0][i] = -adv(0);
      out[1][i] = -adv(1) - Q * (d[2][0][i] + d[3][1][i] + d[4][2][i]);
      for (int j = 0; j < 3; ++j) out[2 + j][i] = -adv(2 + j) - d[1][j][i] / R - gphi[j][i];
    }
  });
  for (int c = 0; c < 5; ++c) out[c] = dealias(out[c]);
  return out;
}

NewtState PoissonSystem::step(const NewtState& s, double dt) const {
  auto stage = [&](const StateField& k, double h) {
    StateField w = s.w;
    for (int c = 0; c < 5; ++c) w[c].axpy(h, k[c]);
    return withConstraint(std::move(w), s.t + h);
  };
  const StateField k1 = newtonianRhs(s);
  const StateField k2 = newtonianRhs(stage(k1, 0.5 * dt));
  const StateField k3 = newtonianRhs(stage(k2, 0.5 * dt));
  const StateField k4 = newtonianRhs(stage(k3, dt));
  StateField w = s.w;
  for (int c = 0; c < 5; ++c)
    w[c].axpy(dt / 6.0, k1[c]).axpy(dt / 3.0, k2[c]).axpy(dt / 3.0, k3[c]).axpy(dt / 6.0, k4[c]);
  return withConstraint(std::move(w), s.t + dt);
}

StateField PoissonSystem::toMassForm(const StateField& w) const {
  StateField r = w;
  r.background[1] = massDensityC(consts_, eos_, {w.background[0], w.background[1]});
  for (std::size_t i = 0; i < w.grid.size(); ++i) r[1][i] = massDensityC(consts_, eos_, {w[0][i], w[1][i]});
  return r;
}

StateField PoissonSystem::massFormRhs(const StateField& wr) const {
  const Grid3& g = wr.grid;
  // back to pressure to get the potential
  StateField w = wr;
  w.background[1] = eos_.aInf.eval(wr.background[0]).a * std::pow(wr.background[1] / eos_.m0, eos_.gamma);
  for (std::size_t i = 0; i < g.size(); ++i)
    w[1][i] = eos_.aInf.eval(wr[0][i]).a * std::pow(wr[1][i] / eos_.m0, eos_.gamma);
  const ScalarField phi = solveConstraint(w);
  std::array<VecField, 5> d;
  for (int c = 0; c < 5; ++c) d[c] = gradient(c == 1 ? w[1] : wr[c]);
  const VecField gphi = gradient(phi);
  std::array<ScalarField, 3> flux;
  for (int a = 0; a < 3; ++a) {
    flux[a] = ScalarField(g);
    for (std::size_t i = 0; i < g.size(); ++i) flux[a][i] = wr[1][i] * wr[2 + a][i];
  }
  ScalarField div = spectralDerivative(flux[0], 0) + spectralDerivative(flux[1], 1) + spectralDerivative(flux[2], 2);
  StateField out(g, {0, 0, 0, 0, 0});
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double v[3] = {wr[2][i], wr[3][i], wr[4][i]};
    auto adv = [&](int c) { return v[0] * d[c][0][i] + v[1] * d[c][1][i] + v[2] * d[c][2][i]; };
    out[0][i] = -adv(0);
    out[1][i] = -div[i];
    for (int j = 0; j < 3; ++j) out[2 + j][i] = -adv(2 + j) - d[1][j][i] / wr[1][i] - gphi[j][i];
  }
  for (int c = 0; c < 5; ++c) out[c] = dealias(out[c]);
  return out;
}

StateField PoissonSystem::massFormStep(const StateField& wr, double dt) const {
  auto stage = [&](const StateField& k, double h) {
    StateField w = wr;
    for (int c = 0; c < 5; ++c) w[c].axpy(h, k[c]);
    return w;
  };
  const StateField k1 = massFormRhs(wr);
  const StateField k2 = massFormRhs(stage(k1, 0.5 * dt));
  const StateField k3 = massFormRhs(stage(k2, 0.5 * dt));
  const StateField k4 = massFormRhs(stage(k3, dt));
  StateField w = wr;
  for (int c = 0; c < 5; ++c)
    w[c].axpy(dt / 6.0, k1[c]).axpy(dt / 3.0, k2[c]).axpy(dt / 3.0, k3[c]).axpy(dt / 6.0, k4[c]);
  return w;
}

double PoissonSystem::maxSignalSpeed(const NewtState& s) const {
  double vmax = 0, smax = 0;
  for (std::size_t i = 0; i < s.w.grid.size(); ++i) {
    const double v2 = s.w[2][i] * s.w[2][i] + s.w[3][i] * s.w[3][i] + s.w[4][i] * s.w[4][i];
    vmax = std::max(vmax, std::sqrt(v2));
    smax = std::max(smax, std::sqrt(soundSpeedSqC(consts_, eos_, {s.w[0][i], s.w[1][i]})));
  }
  return vmax + smax;
}

double PoissonSystem::stableDt(const NewtState& s, double cfl) const {
  return cfl * s.w.grid.spacing() / std::max(maxSignalSpeed(s), 1.0);
}

double PoissonSystem::boxMargin(const NewtState& s, const CompactBox& box) const {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < s.w.grid.size(); ++i) {
    const ThermoPoint tp{s.w[0][i], s.w[1][i]};
    m = std::min(m, tp.admissible() ? box.relativeMargin(tp) : -std::numeric_limits<double>::infinity());
  }
  return m;
}

RunStatus PoissonSystem::run(NewtState s, const RunOptions& opt, const Observer& observer, NewtState* lastGood) const {
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
      const double speed = std::max(maxSignalSpeed(s), 1.0);
      if (dt * speed / h > 1.0) {
        std::ostringstream os;
        os << "CFL violation: dt * max signal speed / h = " << dt * speed / h << " > 1";
        throw DomainError(os.str());
      }
      NewtState next = step(s, dt);
      next.t = t0 + n * dt;
      next.w.validate();
      if (opt.checkBox) {
        const double m = boxMargin(next, opt.box);
        if (!(m >= opt.minMargin)) {
          std::ostringstream os;
          os << "admissibility margin " << m << " below " << opt.minMargin << " of the box at t=" << next.t;
          throw DomainError(os.str());
        }
      }
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

NewtState backgroundState(const Grid3& g, const PoissonSystem& sys, double etaBar, double pBar) {
  return sys.withConstraint(StateField(g, {etaBar, pBar, 0, 0, 0}));
}

NewtState initialState(const DataBundle& b, const PoissonSystem& sys) { return sys.withConstraint(b.wInf); }

}  // namespace nordlimit
