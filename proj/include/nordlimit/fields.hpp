#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "nordlimit/common.hpp"

namespace nordlimit {

/// Periodic cube [0, L)^3 sampled at n points per axis, x fastest.
struct Grid3 {
  int n = 32;
  double length = 2.0 * kPi;

  void validate() const;
  double spacing() const { return length / n; }
  double volume() const { return length * length * length; }
  std::size_t size() const { return std::size_t(n) * n * n; }
  std::size_t index(int i, int j, int k) const { return std::size_t(i) + std::size_t(n) * (j + std::size_t(n) * k); }
  double coord(int i) const { return i * spacing(); }
  bool operator==(const Grid3& o) const { return n == o.n && length == o.length; }
};

class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(const Grid3& g, double value = 0.0) : grid_(g), v_(g.size(), value) {}

  const Grid3& grid() const { return grid_; }
  std::size_t size() const { return v_.size(); }
  double& operator[](std::size_t i) { return v_[i]; }
  double operator[](std::size_t i) const { return v_[i]; }
  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  std::vector<double>& values() { return v_; }
  const std::vector<double>& values() const { return v_; }

  ScalarField& operator+=(const ScalarField& o);
  ScalarField& operator-=(const ScalarField& o);
  ScalarField& operator*=(double s);
  /// this += s * o
  ScalarField& axpy(double s, const ScalarField& o);

 private:
  Grid3 grid_;
  std::vector<double> v_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);

using VecField = std::array<ScalarField, 3>;

/// Multi-component field with the constant array it is measured against.
struct StateField {
  Grid3 grid;
  std::vector<ScalarField> comp;
  std::vector<double> background;

  StateField() = default;
  StateField(const Grid3& g, const std::vector<double>& bg);

  std::size_t ncomp() const { return comp.size(); }
  ScalarField& operator[](std::size_t c) { return comp[c]; }
  const ScalarField& operator[](std::size_t c) const { return comp[c]; }
  /// Throws DomainError on a non-finite value or an unsupported component count.
  void validate() const;
};

// ---- spectral services ----------------------------------------------------

using Spectrum = std::vector<std::complex<double>>;

/// Size of the half spectrum, n * n * (n/2 + 1).
std::size_t spectrumSize(const Grid3& g);
/// Unnormalized forward transform.
Spectrum forwardTransform(const ScalarField& f);
/// Inverse transform including the 1/n^3 normalization.
ScalarField inverseTransform(const Spectrum& s, const Grid3& g);

/// Signed mode number of array index j on an axis of n points.
inline int modeNumber(int j, int n) { return j <= n / 2 ? j : j - n; }
/// Wavenumber used by first derivatives (Nyquist mapped to 0).
double derivativeWavenumber(int j, const Grid3& g);
/// True wavenumber 2 pi m / L (Nyquist kept), used by even-order operators.
double wavenumber(int j, const Grid3& g);

/// Visits every half-spectrum mode: fn(index, ix, iy, iz, multiplicity) with
/// multiplicity 2 for modes whose conjugate partner is not stored.
template <class Fn>
void forEachMode(const Grid3& g, Fn&& fn) {
  const int n = g.n, nh = n / 2 + 1;
  std::size_t idx = 0;
  for (int iz = 0; iz < n; ++iz)
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < nh; ++ix, ++idx) fn(idx, ix, iy, iz, (ix == 0 || ix == n / 2) ? 1.0 : 2.0);
}

ScalarField spectralDerivative(const ScalarField& f, int axis);
VecField gradient(const ScalarField& f);
ScalarField laplacian(const ScalarField& f);
/// Solves (Delta - kappa^2) phi = source mode by mode.
ScalarField helmholtzSolve(const ScalarField& source, double kappa);
/// Applies (Delta - kappa^2).
ScalarField helmholtzApply(const ScalarField& phi, double kappa);
/// 2/3 rule: zero every mode with |m| > n/3 on any axis.
ScalarField dealias(const ScalarField& f);
/// Gaussian filter exp(-eps^2 |k|^2 / 2).
ScalarField mollify(const ScalarField& f, double eps);
StateField mollify(const StateField& f, double eps);

/// sum over |alpha| <= j of kx^2a1 ky^2a2 kz^2a3.
double sobolevWeight(int order, double kx, double ky, double kz);
double sobolevNorm(const ScalarField& f, int order, double background = 0.0);
double sobolevNorm(const StateField& f, int order);
/// Largest ratio ||phi||_{H^2} / ||(Delta - kappa^2) phi||_{L^2} over the grid's modes.
double ellipticConstant(const Grid3& g, double kappa);
double l2Norm(const ScalarField& f);
double lInfNorm(const ScalarField& f);
double lInfNorm(const StateField& f);
double mean(const ScalarField& f);
/// Riemann sum of f over the cube.
double integrate(const ScalarField& f);

// ---- snapshots ------------------------------------------------------------

struct Snapshot {
  std::uint32_t version = 1;
  Grid3 grid;
  double time = 0.0;
  std::vector<ScalarField> comp;
};

void writeSnapshot(const std::string& path, const Grid3& g, double t, const std::vector<const ScalarField*>& comps);
void writeSnapshot(const std::string& path, const StateField& f, double t);
Snapshot readSnapshot(const std::string& path);

}  // namespace nordlimit
