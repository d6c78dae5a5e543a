#include "nordlimit/fields.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>


namespace nordlimit {

void Grid3::validate() const {
  if (n < 16 || (n & (n - 1)) != 0) throw ParameterError("grid: n must be a power of two >= 16");
  if (!(length > 0) || !std::isfinite(length)) throw ParameterError("grid: length must be > 0");
}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
  for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
  return *this;
}
ScalarField& ScalarField::operator-=(const ScalarField& o) {
  for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
  return *this;
}
ScalarField& ScalarField::operator*=(double s) {
  for (double& x : v_) x *= s;
  return *this;
}
ScalarField& ScalarField::axpy(double s, const ScalarField& o) {
  for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += s * o.v_[i];
  return *this;
}
ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }

StateField::StateField(const Grid3& g, const std::vector<double>& bg) : grid(g), background(bg) {
  for (double b : bg) comp.emplace_back(g, b);
}

void StateField::validate() const {
  const std::size_t nc = comp.size();
  if (nc != 1 && nc != 3 && nc != 5 && nc != 10) throw DomainError("state field: component count must be 1, 3, 5 or 10");
  if (background.size() != nc) throw DomainError("state field: background size mismatch");
  for (std::size_t c = 0; c < nc; ++c)
    for (std::size_t i = 0; i < comp[c].size(); ++i)
      if (!std::isfinite(comp[c][i])) {
        std::ostringstream os;
        os << "state field: non-finite value in component " << c << " at index " << i;
        throw DomainError(os.str());
      }
}

// ---- FFT plumbing ----------------------------------------------------------

namespace {

struct Plans {
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;
};

std::mutex gPlanMutex;

const Plans& plansFor(int n) {
  static std::map<int, std::unique_ptr<Plans>> cache;
  std::lock_guard<std::mutex> lk(gPlanMutex);
  auto it = cache.find(n);
  if (it != cache.end()) return *it->second;
  auto p = std::make_unique<Plans>();
  const std::size_t nr = std::size_t(n) * n * n, nc = std::size_t(n) * n * (n / 2 + 1);
  double* r = fftw_alloc_real(nr);
  fftw_complex* c = fftw_alloc_complex(nc);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  p->fwd = fftw_plan_dft_r2c_3d(n, n, n, r, c, flags);
  p->inv = fftw_plan_dft_c2r_3d(n, n, n, c, r, flags);
  fftw_free(r);
  fftw_free(c);
  if (!p->fwd || !p->inv) throw Error("FFTW plan creation failed");
  return *cache.emplace(n, std::move(p)).first->second;
}

}  // namespace

std::size_t spectrumSize(const Grid3& g) { return std::size_t(g.n) * g.n * (g.n / 2 + 1); }

Spectrum forwardTransform(const ScalarField& f) {
  const Plans& p = plansFor(f.grid().n);
  Spectrum s(spectrumSize(f.grid()));
  std::vector<double> in(f.values());
  fftw_execute_dft_r2c(p.fwd, in.data(), reinterpret_cast<fftw_complex*>(s.data()));
  return s;
}

ScalarField inverseTransform(const Spectrum& s, const Grid3& g) {
  const Plans& p = plansFor(g.n);
  Spectrum work(s);
  ScalarField out(g);
  fftw_execute_dft_c2r(p.inv, reinterpret_cast<fftw_complex*>(work.data()), out.data());
  out *= 1.0 / double(g.size());
  return out;
}

double wavenumber(int j, const Grid3& g) { return 2.0 * kPi * modeNumber(j, g.n) / g.length; }

double derivativeWavenumber(int j, const Grid3& g) {
  if (j == g.n / 2) return 0.0;
  return wavenumber(j, g);
}

ScalarField spectralDerivative(const ScalarField& f, int axis) {
  if (axis < 0 || axis > 2) throw ParameterError("derivative axis must be 0, 1 or 2");
  const Grid3& g = f.grid();
  Spectrum s = forwardTransform(f);
  forEachMode(g, [&](std::size_t idx, int ix, int iy, int iz, double) {
    const int j = axis == 0 ? ix : (axis == 1 ? iy : iz);
    s[idx] *= std::complex<double>(0.0, derivativeWavenumber(j, g));
  });
  return inverseTransform(s, g);
}

VecField gradient(const ScalarField& f) {
  const Grid3& g = f.grid();
  const Spectrum s = forwardTransform(f);
  VecField out;
  for (int axis = 0; axis < 3; ++axis) {
    Spectrum d(s);
    forEachMode(g, [&](std::size_t idx, int ix, int iy, int iz, double) {
      const int j = axis == 0 ? ix : (axis == 1 ? iy : iz);
      d[idx] *= std::complex<double>(0.0, derivativeWavenumber(j, g));
    });
    out[axis] = inverseTransform(d, g);
  }
  return out;
}

namespace {

double kSquared(const Grid3& g, int ix, int iy, int iz) {
  const double kx = wavenumber(ix, g), ky = wavenumber(iy, g), kz = wavenumber(iz, g);
  return kx * kx + ky * ky + kz * kz;
}

template <class Mult>
ScalarField applyMultiplier(const ScalarField& f, Mult&& mult) {
  const Grid3& g = f.grid();
  Spectrum s = forwardTransform(f);
  forEachMode(g, [&](std::size_t idx, int ix, int iy, int iz, double) { s[idx] *= mult(ix, iy, iz); });
  return inverseTransform(s, g);
}

}  // namespace

ScalarField laplacian(const ScalarField& f) {
  const Grid3& g = f.grid();
  return applyMultiplier(f, [&](int ix, int iy, int iz) { return -kSquared(g, ix, iy, iz); });
}

ScalarField helmholtzSolve(const ScalarField& source, double kappa) {
  if (!(kappa > 0)) throw ParameterError("helmholtzSolve: kappa must be > 0");
  const Grid3& g = source.grid();
  const double k2 = kappa * kappa;
  return applyMultiplier(source, [&](int ix, int iy, int iz) { return -1.0 / (kSquared(g, ix, iy, iz) + k2); });
}

ScalarField helmholtzApply(const ScalarField& phi, double kappa) {
  const Grid3& g = phi.grid();
  const double k2 = kappa * kappa;
  return applyMultiplier(phi, [&](int ix, int iy, int iz) { return -(kSquared(g, ix, iy, iz) + k2); });
}

ScalarField dealias(const ScalarField& f) {
  const int n = f.grid().n, cut = n / 3;
  return applyMultiplier(f, [&](int ix, int iy, int iz) {
    const bool keep = std::abs(modeNumber(ix, n)) <= cut && std::abs(modeNumber(iy, n)) <= cut &&
                      std::abs(modeNumber(iz, n)) <= cut;
    return keep ? 1.0 : 0.0;
  });
}

ScalarField mollify(const ScalarField& f, double eps) {
  if (!(eps >= 0)) throw ParameterError("mollify: eps must be >= 0");
  if (eps == 0.0) return f;
  const Grid3& g = f.grid();
  return applyMultiplier(f, [&](int ix, int iy, int iz) { return std::exp(-0.5 * eps * eps * kSquared(g, ix, iy, iz)); });
}

StateField mollify(const StateField& f, double eps) {
  StateField out = f;
  for (std::size_t c = 0; c < f.ncomp(); ++c) out.comp[c] = mollify(f.comp[c], eps);
  return out;
}

double sobolevWeight(int order, double kx, double ky, double kz) {
  const double x2 = kx * kx, y2 = ky * ky, z2 = kz * kz;
  double w = 0.0;
  double px = 1.0;
  for (int a = 0; a <= order; ++a) {
    double py = 1.0;
    for (int b = 0; a + b <= order; ++b) {
      double pz = 1.0;
      for (int c = 0; a + b + c <= order; ++c) {
        w += px * py * pz;
        pz *= z2;
      }
      py *= y2;
    }
    px *= x2;
  }
  return w;
}

namespace {

double sobolevNormSq(const ScalarField& f, int order, double background) {
  if (order < 0 || order > 5) throw ParameterError("Sobolev order must be in [0, 5]");
  const Grid3& g = f.grid();
  Spectrum s = forwardTransform(f);
  s[0] -= background * double(g.size());
  double sum = 0.0;
  forEachMode(g, [&](std::size_t idx, int ix, int iy, int iz, double mult) {
    const double w = sobolevWeight(order, derivativeWavenumber(ix, g), derivativeWavenumber(iy, g),
                                   derivativeWavenumber(iz, g));
    sum += mult * w * std::norm(s[idx]);
  });
  const double n3 = double(g.size());
  return sum * g.volume() / (n3 * n3);
}

}  // namespace

double sobolevNorm(const ScalarField& f, int order, double background) {
  return std::sqrt(sobolevNormSq(f, order, background));
}

double sobolevNorm(const StateField& f, int order) {
  double s = 0.0;
  for (std::size_t c = 0; c < f.ncomp(); ++c) s += sobolevNormSq(f.comp[c], order, f.background[c]);
  return std::sqrt(s);
}

double ellipticConstant(const Grid3& g, double kappa) {
  if (!(kappa > 0)) throw ParameterError("ellipticConstant: kappa must be > 0");
  double worst = 0.0;
  forEachMode(g, [&](std::size_t, int ix, int iy, int iz, double) {
    const double w = sobolevWeight(2, derivativeWavenumber(ix, g), derivativeWavenumber(iy, g), derivativeWavenumber(iz, g));
    worst = std::max(worst, std::sqrt(w) / (kSquared(g, ix, iy, iz) + kappa * kappa));
  });
  return worst;
}

double l2Norm(const ScalarField& f) {
  double s = 0.0;
  for (double x : f.values()) s += x * x;
  const double h = f.grid().spacing();
  return std::sqrt(s * h * h * h);
}

double lInfNorm(const ScalarField& f) {
  double m = 0.0;
  for (double x : f.values()) m = std::max(m, std::abs(x));
  return m;
}

double lInfNorm(const StateField& f) {
  double m = 0.0;
  for (std::size_t c = 0; c < f.ncomp(); ++c)
    for (double x : f.comp[c].values()) m = std::max(m, std::abs(x - f.background[c]));
  return m;
}

double mean(const ScalarField& f) {
  double s = 0.0;
  for (double x : f.values()) s += x;
  return s / double(f.size());
}

double integrate(const ScalarField& f) { return mean(f) * f.grid().volume(); }

// ---- snapshots ----------------------------------------------------------------

namespace {

template <class T>
void putLE(std::ostream& os, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  os.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T getLE(std::istream& is) {
  unsigned char b[sizeof(T)];
  is.read(reinterpret_cast<char*>(b), sizeof(T));
  if (!is) throw Error("snapshot: truncated file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

}  // namespace

void writeSnapshot(const std::string& path, const Grid3& g, double t, const std::vector<const ScalarField*>& comps) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("snapshot: cannot open " + path + " for writing");
  os.write("NRDF", 4);
  putLE<std::uint32_t>(os, 1);
  putLE<std::uint32_t>(os, std::uint32_t(g.n));
  putLE<double>(os, g.length);
  putLE<double>(os, t);
  putLE<std::uint32_t>(os, std::uint32_t(comps.size()));
  for (const ScalarField* f : comps) {
    if (!(f->grid() == g)) throw ParameterError("snapshot: component grid mismatch");
    for (double x : f->values()) putLE<double>(os, x);
  }
  if (!os) throw Error("snapshot: write failed for " + path);
}

void writeSnapshot(const std::string& path, const StateField& f, double t) {
  std::vector<const ScalarField*> c;
  for (const auto& x : f.comp) c.push_back(&x);
  writeSnapshot(path, f.grid, t, c);
}

Snapshot readSnapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("snapshot: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "NRDF", 4) != 0) throw Error("snapshot: bad magic in " + path);
  Snapshot s;
  s.version = getLE<std::uint32_t>(is);
  s.grid.n = int(getLE<std::uint32_t>(is));
  s.grid.length = getLE<double>(is);
  s.time = getLE<double>(is);
  const std::uint32_t nc = getLE<std::uint32_t>(is);
  s.grid.validate();
  for (std::uint32_t c = 0; c < nc; ++c) {
    ScalarField f(s.grid);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = getLE<double>(is);
    s.comp.push_back(std::move(f));
  }
  return s;
}

}  // namespace nordlimit
