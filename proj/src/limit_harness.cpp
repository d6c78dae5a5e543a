#include "nordlimit/limit_harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>

#include "nordlimit/fit.hpp"
#include "nordlimit/parallel.hpp"

namespace nordlimit {

namespace {

StateField difference(const StateField& a, const StateField& b) {
  StateField d(a.grid, std::vector<double>(a.ncomp(), 0.0));
  for (std::size_t k = 0; k < a.ncomp(); ++k) d[k] = a[k] - b[k];
  return d;
}

struct ResidualFields {
  StateField fluid;
  ScalarField potential;
};

ResidualFields residualFields(const std::array<const StateField*, 5>& st, const ScalarField& phi, double dt,
                              const StateField& wRing, const ScalarField& phiRing, const PoissonSystem& ep) {
  const StateField& mid = *st[2];
  const Grid3& g = mid.grid;
  const EosFamily& eos = ep.eos();
  const StateField rate = ep.newtonianRhs(NewtState{mid, phi, 0.0});

  ResidualFields out{StateField(g, std::vector<double>(mid.ncomp(), 0.0)), ScalarField(g)};
  const double w = 1.0 / (12.0 * dt);
  parallelFor(g.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      Vec5 r;
      for (int k = 0; k < 5; ++k) {
        const double d = ((*st[0])[k][i] - 8.0 * (*st[1])[k][i] + 8.0 * (*st[3])[k][i] - (*st[4])[k][i]) * w;
        r[k] = d - rate[k][i];
      }
      const FluidPoint fp = evaluatePoint(eos, LightSpeed(), mid[0][i], mid[1][i], {mid[2][i], mid[3][i], mid[4][i]},
                                          phi[i]);
      const Mat5 a = systemMatrix(fp, 0);
      for (int k = 0; k < 5; ++k) {
        double s = 0;
        for (int j = 0; j < 5; ++j) s += a[k][j] * r[j];
        out.fluid[k][i] = s;
      }
    }
  });

  const PhysicalConstants& inf = ep.consts();
  const double fourPiG = 4.0 * kPi * inf.gravG;
  out.potential = helmholtzApply(phi - phiRing, inf.kappa);
  for (std::size_t i = 0; i < g.size(); ++i)
    out.potential[i] -= fourPiG * (massDensityC(inf, eos, {mid[0][i], mid[1][i]}) -
                                   massDensityC(inf, eos, {wRing[0][i], wRing[1][i]}));
  return out;
}

// l = (kappa^2 - Delta) phiRing + 4 pi G (R - 3 c^-2 P)
ScalarField kgForcing(const RelState& s, const ScalarField& ringOp, const EosFamily& eos,
                      const PhysicalConstants& consts) {
  const auto pts = backgroundPoints(s.w, s.phi, eos, consts.c);
  const double ic2 = consts.c.invSq(), fourPiG = 4.0 * kPi * consts.gravG;
  ScalarField l(s.w.grid);
  for (std::size_t i = 0; i < pts.size(); ++i) l[i] = -ringOp[i] + fourPiG * (pts[i].R - 3.0 * ic2 * pts[i].P);
  return l;
}

struct NewtonianOutput {
  StateField w;
  ScalarField phi;
  std::optional<StateField> fluidResidual;
};

SlopeFit fitFamily(const std::string& name, const std::vector<double>& c, const std::vector<double>& y,
                   double threshold) {
  SlopeFit f;
  f.name = name;
  f.threshold = threshold;
  if (std::all_of(y.begin(), y.end(), [](double v) { return v == 0.0; })) {
    f.slope = -std::numeric_limits<double>::infinity();
    f.pass = true;
    return f;
  }
  try {
    const LogLogFit fit = fitLogLog(c, y);
    f.slope = fit.slope;
    f.residual = fit.residual;
    f.pass = fit.slope <= threshold;
  } catch (const Error&) {
    f.slope = std::numeric_limits<double>::quiet_NaN();
    f.pass = false;
  }
  return f;
}

void finishTrajectory(TrajectoryReport& tr) {
  tr.minRatio = std::numeric_limits<double>::infinity();
  tr.maxRatio = 0.0;
  for (const auto& r : tr.rows) {
    tr.supWdiff = std::max(tr.supWdiff, r.wDiff);
    tr.supPhidiff = std::max(tr.supPhidiff, r.phiDiff);
    tr.supFluidResidual = std::max(tr.supFluidResidual, r.fluidResidual);
    tr.supFluidResidualRaw = std::max(tr.supFluidResidualRaw, r.fluidResidualRaw);
    tr.supPotentialResidual = std::max(tr.supPotentialResidual, r.potentialResidual);
    tr.minRatio = std::min(tr.minRatio, r.minRatio);
    tr.maxRatio = std::max(tr.maxRatio, r.maxRatio);
    if (r.kgBound > 0) tr.kgWorst = std::max(tr.kgWorst, r.kgEnergy / r.kgBound);
  }
  if (tr.rows.empty()) tr.minRatio = 0.0;
}

}  // namespace

StateField newtonianVariables(const RelState& s, LightSpeed c, double phiBar) {
  StateField w = s.w;
  const double ic2 = c.invSq();
  for (std::size_t i = 0; i < w.grid.size(); ++i) w[1][i] *= std::exp(-4.0 * s.phi[i] * ic2);
  w.background[1] *= std::exp(-4.0 * phiBar * ic2);
  return w;
}

ResidualNorms approximateSolutionResiduals(const std::array<const StateField*, 5>& stencil, const ScalarField& phi,
                                           double dt, const StateField& wRing, const ScalarField& phiRing,
                                           const PoissonSystem& ep, int order) {
  if (!(dt > 0)) throw ParameterError("residuals: dt must be > 0");
  const ResidualFields r = residualFields(stencil, phi, dt, wRing, phiRing, ep);
  return {sobolevNorm(r.fluid, order - 1), sobolevNorm(r.potential, order - 1)};
}

const SlopeFit& SweepReport::fit(const std::string& name) const {
  for (const auto& f : fits)
    if (f.name == name) return f;
  throw ParameterError("no fit named " + name);
}

bool SweepReport::kgHolds() const {
  for (const auto& r : runs)
    if (r.kgWorst > 1.0 + 1e-3) return false;
  return !runs.empty();
}

SweepReport runSweep(const LabConfig& cfg) {
  cfg.validate();
  const EosFamily eos = cfg.eos();
  const PhysicalConstants consts = cfg.constants();
  const int N = cfg.sobolevOrder;
  const DataBundle data = buildNewtonianData(cfg.perturbation, consts, eos, cfg.grid, cfg.quiet, cfg.box);

  SweepReport rep;
  rep.sobolevOrder = N;
  rep.outputEvery = cfg.outputEvery;
  {
    const PhysicalConstants kc = consts.withC(LightSpeed(cfg.cValues.back()));
    const NordstromSystem en(kc, eos);
    const double dt0 = en.stableDt(initialState(liftToRelativistic(data, kc, eos)), cfg.cfl);
    rep.steps = std::max(1, int(std::ceil(cfg.tFinal / dt0 - 1e-9)));
    rep.dt = cfg.tFinal / rep.steps;
  }
  const int steps = rep.steps;
  const double dt = rep.dt;
  auto isOutput = [&](int m) { return m >= 0 && m <= steps && (m % cfg.outputEvery == 0 || m == steps); };

  // two extra steps so the centred stencil reaches the last output
  RunOptions opt;
  opt.tFinal = (steps + 2) * dt;
  opt.cfl = cfg.cfl;
  opt.dt = dt;
  opt.box = cfg.box;
  opt.minMargin = cfg.minMargin;

  const PoissonSystem ep(consts, eos);
  std::map<int, NewtonianOutput> newt;
  {
    TrajectoryReport& tr = rep.newtonian;
    const NewtState s0 = initialState(data, ep);
    const StateField wRing = s0.w;
    const ScalarField phiRing = s0.phi;
    std::deque<std::pair<int, NewtState>> buf;
    auto observe = [&](const NewtState& s, int n) {
      buf.emplace_back(n, s);
      if (buf.size() > 5) buf.pop_front();
      const int m = n - 2;
      if (!isOutput(m)) return;
      const NewtState& mid = buf[buf.size() - 3].second;
      DiagnosticRow row;
      row.t = mid.t;
      NewtonianOutput out{mid.w, mid.phi, std::nullopt};
      if (m >= 2) {
        const ResidualFields r = residualFields({&buf[0].second.w, &buf[1].second.w, &buf[2].second.w,
                                                 &buf[3].second.w, &buf[4].second.w},
                                                mid.phi, dt, wRing, phiRing, ep);
        row.fluidResidualRaw = sobolevNorm(r.fluid, N - 1);
        row.fluidResidual = row.fluidResidualRaw;
        row.potentialResidual = sobolevNorm(r.potential, N - 1);
        out.fluidResidual = r.fluid;
      }
      const RatioBounds pb = positivityBounds(mid.w, mid.phi, eos, LightSpeed());
      row.minRatio = pb.minRatio;
      row.maxRatio = pb.maxRatio;
      tr.rows.push_back(row);
      newt.emplace(m, std::move(out));
    };
    try {
      tr.status = ep.run(s0, opt, observe);
    } catch (const Error& e) {
      tr.status.aborted = true;
      tr.status.reason = e.what();
    }
    finishTrajectory(tr);
    if (tr.status.aborted) {
      rep.aborted = true;
      rep.abortReason = "c=inf: " + tr.status.reason;
      return rep;
    }
  }

  const std::size_t nc = cfg.cValues.size();
  rep.runs.resize(nc);
  runTasks(nc, [&](std::size_t ci) {
    TrajectoryReport& tr = rep.runs[ci];
    const LightSpeed c(cfg.cValues[ci]);
    tr.c = c;
    try {
      const PhysicalConstants kc = consts.withC(c);
      const DataBundle lifted = liftToRelativistic(data, kc, eos);
      const NordstromSystem en(kc, eos);
      tr.phiBarGap = std::abs(data.phiBarInf - lifted.phiBarC);
      const RelState s0 = initialState(lifted);
      const StateField wRing = newtonianVariables(s0, c, lifted.phiBarC);
      const ScalarField& phiRing = lifted.phiC;
      const ScalarField ringOp = helmholtzApply(phiRing, consts.kappa);
      const double e0 = kleinGordonEnergy(s0, phiRing, consts.kappa, c, N);

      std::vector<double> supL;  // running sup of the forcing norm, per step
      std::deque<std::pair<int, RelState>> buf;
      std::deque<StateField> wbuf;
      auto observe = [&](const RelState& s, int n) {
        const double l = sobolevNorm(kgForcing(s, ringOp, eos, kc), N);
        supL.push_back(supL.empty() ? l : std::max(supL.back(), l));
        buf.emplace_back(n, s);
        wbuf.push_back(newtonianVariables(s, c, lifted.phiBarC));
        if (buf.size() > 5) {
          buf.pop_front();
          wbuf.pop_front();
        }
        const int m = n - 2;
        if (!isOutput(m)) return;
        const std::size_t k = buf.size() - 3;
        const RelState& mid = buf[k].second;
        const NewtonianOutput& ref = newt.at(m);
        DiagnosticRow row;
        row.t = mid.t;
        row.wDiff = sobolevNorm(difference(ref.w, wbuf[k]), N - 1);
        ScalarField dphi = ref.phi - mid.phi;
        const double shift = data.phiBarInf - lifted.phiBarC;
        for (std::size_t i = 0; i < dphi.size(); ++i) dphi[i] -= shift;
        row.phiDiff = sobolevNorm(dphi, N + 1);
        if (m >= 2) {
          const ResidualFields r =
              residualFields({&wbuf[0], &wbuf[1], &wbuf[2], &wbuf[3], &wbuf[4]}, mid.phi, dt, wRing, phiRing, ep);
          row.fluidResidualRaw = sobolevNorm(r.fluid, N - 1);
          row.fluidResidual = sobolevNorm(difference(r.fluid, *ref.fluidResidual), N - 1);
          row.potentialResidual = sobolevNorm(r.potential, N - 1);
        }
        const RatioBounds pb = positivityBounds(mid.w, mid.phi, eos, c);
        row.minRatio = pb.minRatio;
        row.maxRatio = pb.maxRatio;
        row.kgEnergy = kleinGordonEnergy(mid, phiRing, consts.kappa, c, N);
        row.kgBound = e0 + c.value() * mid.t * supL[std::size_t(m)];
        tr.rows.push_back(row);
      };
      tr.status = en.run(s0, opt, observe);
    } catch (const Error& e) {
      tr.status.aborted = true;
      tr.status.reason = e.what();
    }
    finishTrajectory(tr);
  });

  for (const auto& tr : rep.runs) {
    if (tr.status.aborted) {
      rep.aborted = true;
      rep.abortReason = "c=" + tr.c.str() + ": " + tr.status.reason;
      return rep;
    }
  }

  const std::vector<double>& cs = cfg.cValues;
  std::vector<double> fw, fp, fg, fe1, fe2;
  for (const auto& tr : rep.runs) {
    fw.push_back(tr.supWdiff);
    fp.push_back(tr.supPhidiff);
    fg.push_back(tr.phiBarGap);
    fe1.push_back(tr.supFluidResidual);
    fe2.push_back(tr.supPotentialResidual);
  }
  SlopeFit fluid = fitFamily("fluid", cs, fw, -0.9);
  fluid.pass = fluid.pass && fluid.residual <= 0.15;
  rep.fits.push_back(fluid);
  rep.fits.push_back(fitFamily("potential", cs, fp, -0.9));
  SlopeFit gap = fitFamily("phiBarGap", cs, fg, -1.9);
  gap.pass = std::abs(gap.slope + 2.0) <= 0.1;
  rep.fits.push_back(gap);
  rep.fits.push_back(fitFamily("fluidResidual", cs, fe1, -1.9));
  rep.fits.push_back(fitFamily("potentialResidual", cs, fe2, -0.9));

  rep.monotone = true;
  for (std::size_t i = 1; i < nc; ++i)
    if (!(rep.runs[i].supWdiff < rep.runs[i - 1].supWdiff)) rep.monotone = false;

  double lo = rep.newtonian.minRatio, hi = lo;
  for (const auto& tr : rep.runs) {
    lo = std::min(lo, tr.minRatio);
    hi = std::max(hi, tr.minRatio);
  }
  rep.positivityVariation = rep.newtonian.minRatio > 0 ? (hi - lo) / rep.newtonian.minRatio
                                                        : std::numeric_limits<double>::infinity();
  return rep;
}

RateReport matrixRateCheck(const EosFamily& eos, const CompactBox& box, const std::vector<double>& cList) {
  box.validate();
  if (cList.size() < 3) throw ParameterError("rate check needs at least 3 values of c");
  const int m = 5;
  auto lin = [](double a, double b, int i, int n) { return a + (b - a) * i / (n - 1); };
  const std::array<std::array<double, 3>, 5> dirs{{{1, 0, 0},
                                                   {0, 1, 0},
                                                   {0, 0, 1},
                                                   {0.5773502691896258, 0.5773502691896258, 0.5773502691896258},
                                                   {0.4364357804719847, -0.8728715609439694, 0.2182178902359924}}};

  RateReport rep;
  rep.cValues = cList;
  std::vector<RateFamily> fam;
  for (const char* name : {"energyMatrix0", "energyMatrix1", "energyMatrix2", "energyMatrix3", "timeMatrixInverse"})
    fam.push_back(RateFamily{name, {}, 0, 0, false});

  for (double cv : cList) {
    const LightSpeed c(cv);
    std::array<double, 5> dev{};
    for (int ie = 0; ie < m; ++ie)
      for (int ip = 0; ip < m; ++ip)
        for (int is = 0; is < 3; ++is)
          for (const auto& d : dirs)
            for (int iphi = 0; iphi < 3; ++iphi) {
              const double eta = lin(box.etaMin, box.etaMax, ie, m), p = lin(box.pMin, box.pMax, ip, m);
              const double sp = lin(0.0, box.speedMax, is, 3), phi = lin(box.phiMin, box.phiMax, iphi, 3);
              const std::array<double, 3> v{sp * d[0], sp * d[1], sp * d[2]};
              const FluidPoint fc = evaluatePoint(eos, c, eta, std::exp(4.0 * phi * c.invSq()) * p, v, phi);
              const FluidPoint fi = evaluatePoint(eos, LightSpeed(), eta, p, v, phi);
              auto maxDiff = [](const Mat5& a, const Mat5& b) {
                double r = 0;
                for (int i = 0; i < 5; ++i)
                  for (int j = 0; j < 5; ++j) r = std::max(r, std::abs(a[i][j] - b[i][j]));
                return r;
              };
              for (int mu = 0; mu < 4; ++mu)
                dev[mu] = std::max(dev[mu], maxDiff(energyMatrix(fc, mu), energyMatrix(fi, mu)));
              dev[4] = std::max(dev[4], maxDiff(inverseTimeMatrix(fc), inverseTimeMatrix(fi)));
            }
    for (int k = 0; k < 5; ++k) fam[k].deviation.push_back(dev[k]);
  }
  for (auto& f : fam) {
    if (std::all_of(f.deviation.begin(), f.deviation.end(), [](double d) { return d == 0.0; })) {
      f.slope = -std::numeric_limits<double>::infinity();
    } else {
      const LogLogFit fit = fitLogLog(cList, f.deviation);
      f.slope = fit.slope;
      f.residual = fit.residual;
    }
    f.flagged = f.slope > -1.9;
    rep.families.push_back(f);
  }
  return rep;
}

namespace {

template <class Sys, class State>
IdentityReport identityRun(const Sys& sys, State s, const SmoothedData& sd, double dt, int steps) {
  std::vector<EnergySample> samples;
  samples.push_back(sampleEnergy(sys, s, sd));
  const double t0 = s.t;
  for (int n = 1; n <= steps; ++n) {
    s = sys.step(s, dt);
    s.t = t0 + n * dt;
    samples.push_back(sampleEnergy(sys, s, sd));
  }
  return divergenceIdentityCheck(samples);
}

}  // namespace

IdentityStudy divergenceStudy(const LabConfig& cfg, LightSpeed c, double tFinal, double dt) {
  cfg.validate();
  if (!(tFinal > 0 && dt > 0)) throw ParameterError("divergence study: tFinal and dt must be > 0");
  const int steps = std::max(2, int(std::ceil(tFinal / dt - 1e-9)));
  const double h = tFinal / steps;
  const EosFamily eos = cfg.eos();
  const PhysicalConstants consts = cfg.constants();
  const DataBundle data = buildNewtonianData(cfg.perturbation, consts, eos, cfg.grid, cfg.quiet, cfg.box);
  IdentityStudy out;
  out.c = c;
  if (c.isInfinite()) {
    const PoissonSystem sys(consts, eos);
    const SmoothedData sd = smoothedData(data, cfg.mollifier);
    const NewtState s0 = initialState(data, sys);
    out.coarse = identityRun(sys, s0, sd, h, steps);
    out.fine = identityRun(sys, s0, sd, h / 2, 2 * steps);
  } else {
    const PhysicalConstants kc = consts.withC(c);
    const DataBundle lifted = liftToRelativistic(data, kc, eos);
    const NordstromSystem sys(kc, eos);
    const SmoothedData sd = smoothedData(lifted, cfg.mollifier);
    const RelState s0 = initialState(lifted);
    out.coarse = identityRun(sys, s0, sd, h, steps);
    out.fine = identityRun(sys, s0, sd, h / 2, 2 * steps);
  }
  return out;
}

KleinGordonCheck kleinGordonCheck(const LabConfig& cfg, LightSpeed c) {
  cfg.validate();
  if (c.isInfinite()) throw ParameterError("Klein-Gordon check needs a finite c");
  const EosFamily eos = cfg.eos();
  const PhysicalConstants kc = cfg.constants().withC(c);
  const int N = cfg.sobolevOrder;
  const DataBundle lifted =
      liftToRelativistic(buildNewtonianData(cfg.perturbation, kc.withC(LightSpeed()), eos, cfg.grid, cfg.quiet, cfg.box),
                         kc, eos);
  const NordstromSystem en(kc, eos);
  const ScalarField& phiRing = lifted.phiC;
  const ScalarField ringOp = helmholtzApply(phiRing, kc.kappa);
  const RelState s0 = initialState(lifted);
  const double e0 = kleinGordonEnergy(s0, phiRing, kc.kappa, c, N);

  KleinGordonCheck out;
  double supL = 0;
  RunOptions opt;
  opt.tFinal = cfg.tFinal;
  opt.cfl = cfg.cfl;
  opt.box = cfg.box;
  opt.minMargin = cfg.minMargin;
  try {
    out.status = en.run(s0, opt, [&](const RelState& s, int) {
      supL = std::max(supL, sobolevNorm(kgForcing(s, ringOp, eos, kc), N));
      KleinGordonRow r{s.t, kleinGordonEnergy(s, phiRing, kc.kappa, c, N), e0 + c.value() * s.t * supL};
      out.worstRatio = std::max(out.worstRatio, r.energy / r.bound);
      out.rows.push_back(r);
    });
  } catch (const Error& e) {
    out.status.aborted = true;
    out.status.reason = e.what();
  }
  return out;
}

EllipticCheck ellipticCheck(const Grid3& g, double kappa, int samples, std::uint64_t seed) {
  EllipticCheck out;
  out.constant = ellipticConstant(g, kappa);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  ScalarField src(g);
  for (int t = 0; t < samples; ++t) {
    for (std::size_t i = 0; i < g.size(); ++i) src[i] = normal(rng);
    const ScalarField phi = helmholtzSolve(src, kappa);
    out.worst = std::max(out.worst, sobolevNorm(phi, 2) / l2Norm(helmholtzApply(phi, kappa)));
  }
  return out;
}

std::string formatReal(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9e", v);
  return buf;
}

namespace {

std::ofstream openOut(const std::filesystem::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error("cannot write " + p.string());
  return f;
}

std::string fixed(double v, int digits) {
  if (!std::isfinite(v)) return formatReal(v);
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::vector<std::string> emitReport(const SweepReport& rep, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create " + dir + ": " + ec.message());
  const fs::path base(dir);

  {
    auto f = openOut(base / "sweep.csv");
    f << "c,supWdiff,supPhidiff,phiBarGap\n";
    for (const auto& r : rep.runs)
      f << formatReal(r.c.value()) << ',' << formatReal(r.supWdiff) << ',' << formatReal(r.supPhidiff) << ','
        << formatReal(r.phiBarGap) << '\n';
    if (!f) throw Error("write failed: sweep.csv");
  }
  {
    auto f = openOut(base / "diagnostics.csv");
    f << "c,t,wDiff,phiDiff,fluidResidual,fluidResidualRaw,potentialResidual,minRatio,maxRatio,kgEnergy,kgBound\n";
    auto dump = [&](const TrajectoryReport& tr) {
      for (const auto& r : tr.rows)
        f << tr.c.str() << ',' << formatReal(r.t) << ',' << formatReal(r.wDiff) << ',' << formatReal(r.phiDiff) << ','
          << formatReal(r.fluidResidual) << ',' << formatReal(r.fluidResidualRaw) << ','
          << formatReal(r.potentialResidual) << ',' << formatReal(r.minRatio) << ',' << formatReal(r.maxRatio) << ','
          << formatReal(r.kgEnergy) << ',' << formatReal(r.kgBound) << '\n';
    };
    dump(rep.newtonian);
    for (const auto& tr : rep.runs) dump(tr);
    if (!f) throw Error("write failed: diagnostics.csv");
  }
  {
    auto f = openOut(base / "summary.txt");
    auto verdict = [](bool ok) { return ok ? "PASS" : "FAIL"; };
    f << "Newtonian limit sweep\n";
    f << "  order N = " << rep.sobolevOrder << ", dt = " << formatReal(rep.dt) << ", steps = " << rep.steps
      << ", outputs every " << rep.outputEvery << " steps (sup over output times)\n";
    if (rep.aborted) f << "  ABORTED: " << rep.abortReason << "\n";
    f << "\nper-run sup norms (fluid H^" << rep.sobolevOrder - 1 << ", potential H^" << rep.sobolevOrder + 1
      << " proxy, residuals H^" << rep.sobolevOrder - 1 << ")\n";
    f << "  c          fluid            potential        phiBarGap        fluidResidual    potentialResidual  "
         "minRatio         kgWorst\n";
    auto line = [&](const TrajectoryReport& tr) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "  %-10s ", tr.c.str().c_str());
      f << buf << formatReal(tr.supWdiff) << "  " << formatReal(tr.supPhidiff) << "  " << formatReal(tr.phiBarGap)
        << "  " << formatReal(tr.supFluidResidual) << "  " << formatReal(tr.supPotentialResidual) << "    "
        << formatReal(tr.minRatio) << "  " << formatReal(tr.kgWorst) << "\n";
    };
    line(rep.newtonian);
    for (const auto& tr : rep.runs) line(tr);
    if (!rep.fits.empty()) {
      f << "\nfitted log-log slopes\n";
      for (const auto& ft : rep.fits) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "  %-18s", ft.name.c_str());
        f << buf << " slope " << fixed(ft.slope, 4) << "  residual " << fixed(ft.residual, 4);
        if (ft.name == "phiBarGap")
          f << "  target -2 +- 0.1  ";
        else
          f << "  target <= " << fixed(ft.threshold, 1) << "  ";
        f << verdict(ft.pass) << "\n";
      }
      f << "\nfluid differences strictly decreasing: " << verdict(rep.monotone) << "\n";
      f << "positivity minima variation " << fixed(rep.positivityVariation, 4) << " (limit 0.1): "
        << verdict(rep.positivityVariation <= 0.1 && rep.newtonian.minRatio > 0) << "\n";
      f << "Klein-Gordon energy bound: " << verdict(rep.kgHolds()) << "\n";
    }
    if (!f) throw Error("write failed: summary.txt");
  }
  return {"sweep.csv", "diagnostics.csv", "summary.txt"};
}

void writeIdentityCsv(const IdentityReport& rep, const std::string& path) {
  auto f = openOut(path);
  f << "t,lhs,rhs,defect,minRatio,maxRatio\n";
  for (const auto& r : rep.rows)
    f << formatReal(r.t) << ',' << formatReal(r.lhs) << ',' << formatReal(r.rhs) << ',' << formatReal(r.defect) << ','
      << formatReal(r.minRatio) << ',' << formatReal(r.maxRatio) << '\n';
  if (!f) throw Error("write failed: " + path);
}

}  // namespace nordlimit
