#include <cmath>
#include <sstream>

#include "nordlimit/euler_nordstrom.hpp"

namespace nordlimit {

FluidPoint evaluatePoint(const EosFamily& eos, LightSpeed c, double eta, double P, const std::array<double, 3>& v,
                         double phi) {
  FluidPoint fp;
  fp.c = c;
  fp.ic2 = c.invSq();
  fp.eta = eta;
  fp.P = P;
  fp.phi = phi;
  fp.v = v;
  fp.speedSq = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
  fp.lorentzSq = lorentzFactorSq(c, fp.speedSq);
  fp.expFactor = std::exp(4.0 * phi * fp.ic2);
  fp.p = P / fp.expFactor;
  const DensityJet j = densityJet(eos, c, {eta, fp.p});
  fp.soundSq = 1.0 / j.rP;
  if (!(fp.soundSq > 0) || (!c.isInfinite() && !(fp.soundSq < c.sq()))) {
    std::ostringstream os;
    os << "sound speed squared " << fp.soundSq << " outside (0, c^2) at eta=" << eta << " p=" << fp.p;
    throw CausalityError(os.str());
  }
  fp.R = fp.expFactor * j.r;
  const double h = fp.R + fp.ic2 * P;
  fp.Q = h / j.rP;
  fp.alpha = fp.lorentzSq * h;

  // R = E r(eta, P / E), E = e^{4 phi / c^2}
  fp.dR[0] = fp.expFactor * j.rEta;
  fp.dR[1] = j.rP;
  fp.dR[2] = 4.0 * fp.ic2 * (fp.R - j.rP * P);
  // Q = (R + c^-2 P) / r_p(eta, P / E)
  const double dpdPhi = -4.0 * fp.ic2 * fp.p;
  const double rp2 = j.rP * j.rP;
  fp.dQ[0] = fp.dR[0] / j.rP - h * j.rPEta / rp2;
  fp.dQ[1] = (fp.dR[1] + fp.ic2) / j.rP - h * j.rPP / (fp.expFactor * rp2);
  fp.dQ[2] = fp.dR[2] / j.rP - h * j.rPP * dpdPhi / rp2;
  return fp;
}

Mat5 systemMatrix(const FluidPoint& fp, int mu) {
  Mat5 a{};
  const double k = fp.ic2 * fp.lorentzSq;  // beta^(i) = k v^i, beta^(i,j) = k v^i v^j
  const auto& v = fp.v;
  if (mu == 0) {
    a[0][0] = 1.0;
    a[1][1] = 1.0;
    for (int j = 0; j < 3; ++j) {
      a[1][2 + j] = fp.Q * k * v[j];
      a[2 + j][1] = k * v[j];
      for (int l = 0; l < 3; ++l) a[2 + j][2 + l] = fp.alpha * ((j == l ? 1.0 : 0.0) + k * v[j] * v[l]);
    }
    return a;
  }
  const int m = mu - 1;
  const double vm = v[m];
  a[0][0] = vm;
  a[1][1] = vm;
  for (int j = 0; j < 3; ++j) {
    const double dmj = (m == j ? 1.0 : 0.0) + k * v[m] * v[j];
    a[1][2 + j] = fp.Q * dmj;
    a[2 + j][1] = dmj;
    for (int l = 0; l < 3; ++l) a[2 + j][2 + l] = fp.alpha * vm * ((j == l ? 1.0 : 0.0) + k * v[j] * v[l]);
  }
  return a;
}

Mat5 energyMatrix(const FluidPoint& fp, int mu) {
  Mat5 a = systemMatrix(fp, mu);
  for (int j = 1; j < 5; ++j) a[1][j] /= fp.Q;
  // mirror so the form is symmetric to the bit
  for (int j = 2; j < 5; ++j) a[1][j] = a[j][1];
  for (int j = 2; j < 5; ++j)
    for (int l = j + 1; l < 5; ++l) a[l][j] = a[j][l];
  return a;
}

Vec5 systemSource(const FluidPoint& fp, const std::array<double, 3>& gradPhi, double pi) {
  Vec5 b{};
  const auto& v = fp.v;
  const double vdphi = v[0] * gradPhi[0] + v[1] * gradPhi[1] + v[2] * gradPhi[2];
  const double dtPhi = fp.ic2 * (pi + vdphi);  // c^-2 (d_t phi + v . grad phi)
  b[1] = (4.0 * fp.P - 3.0 * fp.Q) * dtPhi;
  const double coef = 3.0 * fp.ic2 * fp.P - fp.R;
  for (int j = 0; j < 3; ++j) b[2 + j] = coef * (gradPhi[j] + v[j] / fp.lorentzSq * dtPhi);
  return b;
}

Vec5 solveDense(Mat5 a, Vec5 r) {
  for (int col = 0; col < 5; ++col) {
    int piv = col;
    for (int i = col + 1; i < 5; ++i)
      if (std::abs(a[i][col]) > std::abs(a[piv][col])) piv = i;
    if (a[piv][col] == 0.0) throw SingularMatrixError("singular 5x5 system");
    std::swap(a[piv], a[col]);
    std::swap(r[piv], r[col]);
    for (int i = col + 1; i < 5; ++i) {
      const double f = a[i][col] / a[col][col];
      for (int j = col; j < 5; ++j) a[i][j] -= f * a[col][j];
      r[i] -= f * r[col];
    }
  }
  Vec5 x{};
  for (int i = 4; i >= 0; --i) {
    double s = r[i];
    for (int j = i + 1; j < 5; ++j) s -= a[i][j] * x[j];
    x[i] = s / a[i][i];
  }
  return x;
}

Vec5 solveTimeMatrix(const FluidPoint& fp, const Vec5& r) {
  // A0 = 1 (+) [[1, Q b^T], [b, N]], b = c^-2 g^2 v, N = alpha (I + c^-2 g^2 v v^T),
  // N^-1 = (I - c^-2 v v^T) / alpha
  const auto& v = fp.v;
  const double k = fp.ic2 * fp.lorentzSq;
  const double schur = 1.0 - fp.Q * fp.ic2 * fp.ic2 * fp.lorentzSq * fp.speedSq / fp.alpha;
  const double blockNorm = std::max({1.0, std::abs(fp.Q) * k * std::sqrt(fp.speedSq), std::abs(fp.alpha) * fp.lorentzSq});
  if (!(std::abs(schur) >= 1e-12 * blockNorm)) return solveDense(systemMatrix(fp, 0), r);

  auto applyNinv = [&](const std::array<double, 3>& y) {
    const double vy = v[0] * y[0] + v[1] * y[1] + v[2] * y[2];
    std::array<double, 3> out;
    for (int j = 0; j < 3; ++j) out[j] = (y[j] - fp.ic2 * v[j] * vy) / fp.alpha;
    return out;
  };
  const std::array<double, 3> rv{r[2], r[3], r[4]};
  const std::array<double, 3> nrv = applyNinv(rv);
  const double bNrv = k * (v[0] * nrv[0] + v[1] * nrv[1] + v[2] * nrv[2]);
  const double xP = (r[1] - fp.Q * bNrv) / schur;
  const std::array<double, 3> rem{rv[0] - k * v[0] * xP, rv[1] - k * v[1] * xP, rv[2] - k * v[2] * xP};
  const std::array<double, 3> xv = applyNinv(rem);
  return {r[0], xP, xv[0], xv[1], xv[2]};
}

Mat5 inverseTimeMatrix(const FluidPoint& fp) {
  Mat5 inv{};
  for (int col = 0; col < 5; ++col) {
    Vec5 e{};
    e[col] = 1.0;
    const Vec5 x = solveTimeMatrix(fp, e);
    for (int row = 0; row < 5; ++row) inv[row][col] = x[row];
  }
  return inv;
}

}  // namespace nordlimit
