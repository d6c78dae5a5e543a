#include "nordlimit/energy_currents.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "nordlimit/parallel.hpp"

namespace nordlimit {

namespace {

Vec5 pointOf(const StateField& f, std::size_t i) { return {f[0][i], f[1][i], f[2][i], f[3][i], f[4][i]}; }

double quadForm(const Mat5& a, const Vec5& x) {
  double s = 0;
  for (int i = 0; i < 5; ++i) {
    double r = 0;
    for (int j = 0; j < 5; ++j) r += a[i][j] * x[j];
    s += x[i] * r;
  }
  return s;
}

double normSq(const Vec5& x) {
  double s = 0;
  for (double y : x) s += y * y;
  return s;
}

// splitmix64, so each grid point gets its own stream independent of threading
std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace

std::vector<FluidPoint> backgroundPoints(const StateField& w, const ScalarField& phi, const EosFamily& eos,
                                         LightSpeed c) {
  const std::size_t n = w.grid.size();
  std::vector<FluidPoint> pts(n);
  parallelFor(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      pts[i] = evaluatePoint(eos, c, w[0][i], w[1][i], {w[2][i], w[3][i], w[4][i]}, phi[i]);
      if (!(pts[i].Q > 0)) {
        std::ostringstream os;
        os << "energy current needs Q > 0; Q = " << pts[i].Q << " at grid index " << i;
        throw DomainError(os.str());
      }
    }
  });
  return pts;
}

double currentDensity(const FluidPoint& fp, const Vec5& wDot, int mu) { return quadForm(energyMatrix(fp, mu), wDot); }

ScalarField j0C(const Variation& var, const EosFamily& eos, LightSpeed c) { return jSpatialC(var, eos, c, -1); }

ScalarField jSpatialC(const Variation& var, const EosFamily& eos, LightSpeed c, int axis) {
  if (axis < -1 || axis > 2) throw ParameterError("jSpatialC: axis must be 0, 1 or 2");
  const auto pts = backgroundPoints(var.w, var.phi, eos, c);
  ScalarField out(var.w.grid);
  for (std::size_t i = 0; i < pts.size(); ++i) out[i] = currentDensity(pts[i], pointOf(var.wDot, i), axis + 1);
  return out;
}

std::array<double, 2> formEigenvalues(const FluidPoint& fp) {
  // blocks: eta (1), v transverse (alpha, alpha), and the (P, v parallel) pair
  const double k = fp.ic2 * fp.lorentzSq;
  const double a = 1.0 / fp.Q, d = fp.alpha * fp.lorentzSq, b = k * std::sqrt(fp.speedSq);
  const double mid = 0.5 * (a + d), rad = std::sqrt(0.25 * (a - d) * (a - d) + b * b);
  const double lo = mid - rad, hi = mid + rad;
  // lo from the product avoids cancellation when b is tiny
  const double loStable = (a * d - b * b) / hi;
  return {std::min({1.0, fp.alpha, b == 0.0 ? lo : loStable}), std::max({1.0, fp.alpha, hi})};
}

RatioBounds positivityRatio(const Variation& var, const EosFamily& eos, LightSpeed c) {
  const auto pts = backgroundPoints(var.w, var.phi, eos, c);
  RatioBounds r;
  r.minRatio = std::numeric_limits<double>::infinity();
  r.maxRatio = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec5 x = pointOf(var.wDot, i);
    const double n2 = normSq(x);
    if (n2 == 0.0) continue;
    const double q = currentDensity(pts[i], x, 0) / n2;
    if (q < r.minRatio) {
      r.minRatio = q;
      r.worstPoint = i;
      const double s = 1.0 / std::sqrt(n2);
      for (int j = 0; j < 5; ++j) r.worstDirection[j] = x[j] * s;
    }
    r.maxRatio = std::max(r.maxRatio, q);
  }
  return r;
}

RatioBounds positivityRatio(const StateField& w, const ScalarField& phi, const EosFamily& eos, LightSpeed c,
                            int samplesPerPoint, std::uint64_t seed) {
  const auto pts = backgroundPoints(w, phi, eos, c);
  RatioBounds r;
  r.minRatio = std::numeric_limits<double>::infinity();
  r.maxRatio = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::mt19937_64 rng(mix(seed ^ mix(i)));
    std::normal_distribution<double> un;
    const Mat5 a = energyMatrix(pts[i], 0);
    for (int s = 0; s < samplesPerPoint; ++s) {
      Vec5 x;
      for (double& y : x) y = un(rng);
      const double inv = 1.0 / std::sqrt(normSq(x));
      for (double& y : x) y *= inv;
      const double q = quadForm(a, x);
      if (q < r.minRatio) {
        r.minRatio = q;
        r.worstPoint = i;
        r.worstDirection = x;
      }
      r.maxRatio = std::max(r.maxRatio, q);
    }
  }
  return r;
}

RatioBounds positivityBounds(const StateField& w, const ScalarField& phi, const EosFamily& eos, LightSpeed c) {
  const auto pts = backgroundPoints(w, phi, eos, c);
  RatioBounds r;
  r.minRatio = std::numeric_limits<double>::infinity();
  r.maxRatio = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto ev = formEigenvalues(pts[i]);
    if (ev[0] < r.minRatio) {
      r.minRatio = ev[0];
      r.worstPoint = i;
    }
    r.maxRatio = std::max(r.maxRatio, ev[1]);
  }
  return r;
}

Metric4 acousticMetricInverse(const FluidPoint& fp) {
  const double s = fp.lorentzSq * (1.0 / fp.soundSq - fp.ic2);
  Metric4 h{};
  h[0][0] = -fp.ic2 - s;
  for (int j = 0; j < 3; ++j) {
    h[0][j + 1] = h[j + 1][0] = -s * fp.v[j];
    for (int k = 0; k < 3; ++k) h[j + 1][k + 1] = (j == k ? 1.0 : 0.0) - s * fp.v[j] * fp.v[k];
  }
  return h;
}

bool soundConeMembership(const FluidPoint& fp, const std::array<double, 4>& xi) {
  if (!(xi[0] > 0)) return false;
  const Metric4 h = acousticMetricInverse(fp);
  double q = 0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) q += h[a][b] * xi[a] * xi[b];
  return q < 0;
}

SmoothedData smoothedData(const DataBundle& b, double eps) {
  return {smoothedFluidData(b, eps), b.lifted() ? b.phiC : b.phiInf};
}

namespace {

StateField fluidInhomogeneity(const std::vector<FluidPoint>& pts, const ScalarField& phi, const ScalarField* pi,
                              const StateField& ws) {
  const Grid3& g = phi.grid();
  const VecField gphi = gradient(phi);
  std::array<VecField, 5> ds;
  for (int c = 0; c < 5; ++c) ds[c] = gradient(ws[c]);
  StateField out(g, {0, 0, 0, 0, 0});
  parallelFor(g.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      Vec5 r = systemSource(pts[i], {gphi[0][i], gphi[1][i], gphi[2][i]}, pi ? (*pi)[i] : 0.0);
      for (int k = 0; k < 3; ++k) {
        const Mat5 a = systemMatrix(pts[i], k + 1);
        for (int row = 0; row < 5; ++row)
          for (int col = 0; col < 5; ++col) r[row] -= a[row][col] * ds[col][k][i];
      }
      for (int c = 0; c < 5; ++c) out[c][i] = r[c];
    }
  });
  return out;
}

}  // namespace

EovInhomogeneity assembleEovInhomogeneity(const RelState& s, const SmoothedData& sd, const EosFamily& eos,
                                          const PhysicalConstants& consts) {
  const auto pts = backgroundPoints(s.w, s.phi, eos, consts.c);
  EovInhomogeneity out;
  out.fluid = fluidInhomogeneity(pts, s.phi, &s.pi, sd.w);
  // l = (kappa^2 - Delta) phiRing + 4 pi G (R - 3 c^-2 P), source not dealiased
  const double ic2 = consts.c.invSq(), fourPiG = 4.0 * kPi * consts.gravG;
  out.l = helmholtzApply(sd.phi, consts.kappa);
  for (std::size_t i = 0; i < pts.size(); ++i) out.l[i] = -out.l[i] + fourPiG * (pts[i].R - 3.0 * ic2 * pts[i].P);
  return out;
}

EovInhomogeneity assembleEovInhomogeneity(const NewtState& s, const SmoothedData& sd, const EosFamily& eos,
                                          const PhysicalConstants&) {
  const auto pts = backgroundPoints(s.w, s.phi, eos, LightSpeed());
  EovInhomogeneity out;
  out.fluid = fluidInhomogeneity(pts, s.phi, nullptr, sd.w);
  out.l = ScalarField(s.w.grid, 0.0);
  return out;
}

double divergenceDensity(const FluidPoint& fp, const std::array<BackgroundDerivative, 4>& d, const Vec5& wDot,
                         const Vec5& b) {
  const double ic2 = fp.ic2, g2 = fp.lorentzSq, k = ic2 * g2;
  const double h = fp.R + ic2 * fp.P;
  const auto& v = fp.v;
  const double etaD = wDot[0], PD = wDot[1];
  const std::array<double, 3> vD{wDot[2], wDot[3], wDot[4]};
  const double vvD = v[0] * vD[0] + v[1] * vD[1] + v[2] * vD[2];

  // derivatives of Q, alpha and v . dv along each direction
  std::array<double, 4> dQ, dAlpha, vdv;
  for (int mu = 0; mu < 4; ++mu) {
    const auto& e = d[mu];
    dQ[mu] = fp.dQ[0] * e.eta + fp.dQ[1] * e.P + fp.dQ[2] * e.phi;
    const double dh = fp.dR[0] * e.eta + fp.dR[1] * e.P + fp.dR[2] * e.phi + ic2 * e.P;
    vdv[mu] = v[0] * e.v[0] + v[1] * e.v[1] + v[2] * e.v[2];
    const double dg2 = 2.0 * ic2 * g2 * g2 * vdv[mu];
    dAlpha[mu] = dg2 * h + g2 * dh;
  }
  const double divV = d[1].v[0] + d[2].v[1] + d[3].v[2];
  // transport derivative v^mu d_mu with v^0 = 1
  auto along = [&](const std::array<double, 4>& f) { return f[0] + v[0] * f[1] + v[1] * f[2] + v[2] * f[3]; };

  double out = etaD * etaD * divV;
  out += (-along(dQ) / (fp.Q * fp.Q) + divV / fp.Q) * PD * PD;

  const double vTv = along(vdv);  // v_j d_t v^j + v_a v^j d_j v^a
  for (int kk = 0; kk < 3; ++kk) {
    const double dtv = d[0].v[kk] + v[0] * d[1].v[kk] + v[1] * d[2].v[kk] + v[2] * d[3].v[kk];
    out += 2.0 * k * (dtv + v[kk] * divV + 2.0 * k * v[kk] * vTv) * PD * vD[kk];
  }

  const double vdotvD = vD[0] * vD[0] + vD[1] * vD[1] + vD[2] * vD[2];
  out += (along(dAlpha) + fp.alpha * divV) * (vdotvD + k * vvD * vvD);

  double vDdv = 0;  // vDot_a (d_t v^a + v^j d_j v^a)
  for (int a = 0; a < 3; ++a) vDdv += vD[a] * (d[0].v[a] + v[0] * d[1].v[a] + v[1] * d[2].v[a] + v[2] * d[3].v[a]);
  out += 2.0 * ic2 * g2 * g2 * h * (vvD * vDdv + k * vvD * vvD * vTv);

  out += 2.0 * etaD * b[0] + 2.0 * PD * b[1] / fp.Q + 2.0 * (vD[0] * b[2] + vD[1] * b[3] + vD[2] * b[4]);
  return out;
}

namespace {

EnergySample sampleGeneric(const std::vector<FluidPoint>& pts, const StateField& w, const ScalarField& phi,
                           const StateField& dtW, const ScalarField* dtPhi, const StateField& ws,
                           const StateField& b, double t) {
  const Grid3& g = w.grid;
  std::array<VecField, 5> dw;
  for (int c = 0; c < 5; ++c) dw[c] = gradient(w[c]);
  const VecField dphi = gradient(phi);
  const std::size_t n = g.size();
  std::vector<double> j0(n), div(n), lo(n), hi(n);
  parallelFor(n, [&](std::size_t beg, std::size_t end) {
    for (std::size_t i = beg; i < end; ++i) {
      std::array<BackgroundDerivative, 4> d;
      d[0] = {dtW[0][i], dtW[1][i], dtPhi ? (*dtPhi)[i] : 0.0, {dtW[2][i], dtW[3][i], dtW[4][i]}};
      for (int a = 0; a < 3; ++a)
        d[a + 1] = {dw[0][a][i], dw[1][a][i], dphi[a][i], {dw[2][a][i], dw[3][a][i], dw[4][a][i]}};
      Vec5 wDot;
      for (int c = 0; c < 5; ++c) wDot[c] = w[c][i] - ws[c][i];
      j0[i] = currentDensity(pts[i], wDot, 0);
      div[i] = divergenceDensity(pts[i], d, wDot, pointOf(b, i));
      const auto ev = formEigenvalues(pts[i]);
      lo[i] = ev[0];
      hi[i] = ev[1];
    }
  });
  // fixed-order sums keep the result independent of the thread count
  const double h3 = std::pow(g.spacing(), 3);
  EnergySample s;
  s.t = t;
  for (std::size_t i = 0; i < n; ++i) {
    s.energy += j0[i];
    s.rhs += div[i];
  }
  s.energy *= h3;
  s.rhs *= h3;
  s.minRatio = *std::min_element(lo.begin(), lo.end());
  s.maxRatio = *std::max_element(hi.begin(), hi.end());
  return s;
}

}  // namespace

EnergySample sampleEnergy(const NordstromSystem& sys, const RelState& s, const SmoothedData& sd) {
  const auto pts = backgroundPoints(s.w, s.phi, sys.eos(), sys.consts().c);
  const StateField dtW = sys.fluidRhs(s);
  const EovInhomogeneity inh = assembleEovInhomogeneity(s, sd, sys.eos(), sys.consts());
  return sampleGeneric(pts, s.w, s.phi, dtW, &s.pi, sd.w, inh.fluid, s.t);
}

EnergySample sampleEnergy(const PoissonSystem& sys, const NewtState& s, const SmoothedData& sd) {
  const auto pts = backgroundPoints(s.w, s.phi, sys.eos(), LightSpeed());
  const StateField dtW = sys.newtonianRhs(s);
  const EovInhomogeneity inh = assembleEovInhomogeneity(s, sd, sys.eos(), sys.consts());
  return sampleGeneric(pts, s.w, s.phi, dtW, nullptr, sd.w, inh.fluid, s.t);
}

IdentityReport divergenceIdentityCheck(const std::vector<EnergySample>& samples) {
  IdentityReport rep;
  if (samples.size() < 3) throw ParameterError("divergenceIdentityCheck needs at least 3 samples");
  rep.e0 = samples.front().energy;
  double lhsMax = 0, defMax = 0;
  for (std::size_t i = 1; i + 1 < samples.size(); ++i) {
    const double dt = samples[i + 1].t - samples[i - 1].t;
    if (!(dt > 0)) throw ParameterError("divergenceIdentityCheck: times must increase");
    const double lhs = (samples[i + 1].energy - samples[i - 1].energy) / dt;
    rep.rows.push_back({samples[i].t, lhs, samples[i].rhs, std::abs(lhs - samples[i].rhs), samples[i].minRatio,
                        samples[i].maxRatio});
    lhsMax = std::max(lhsMax, std::abs(lhs));
    defMax = std::max(defMax, std::abs(lhs - samples[i].rhs));
  }
  const double scale = std::max(lhsMax, rep.e0);
  for (auto& r : rep.rows) r.defect = scale > 0 ? r.defect / scale : r.defect;
  rep.maxDefect = scale > 0 ? defMax / scale : defMax;
  return rep;
}

double kleinGordonEnergy(const RelState& s, const ScalarField& phiRing, double kappa, LightSpeed c, int order) {
  const Grid3& g = s.phi.grid();
  const Spectrum a = forwardTransform(s.phi - phiRing);
  const Spectrum p = forwardTransform(s.pi);
  const double ic2 = c.invSq();
  double sum = 0;
  forEachMode(g, [&](std::size_t idx, int ix, int iy, int iz, double mult) {
    const double w = sobolevWeight(order, derivativeWavenumber(ix, g), derivativeWavenumber(iy, g),
                                   derivativeWavenumber(iz, g));
    const double kx = wavenumber(ix, g), ky = wavenumber(iy, g), kz = wavenumber(iz, g);
    const double k2 = kx * kx + ky * ky + kz * kz;
    sum += mult * w * ((kappa * kappa + k2) * std::norm(a[idx]) + ic2 * std::norm(p[idx]));
  });
  const double n3 = double(g.size());
  return std::sqrt(sum * g.volume() / (n3 * n3));
}

}  // namespace nordlimit
