#include "doctest.h"

#include <cmath>
#include <limits>
#include <random>

#include "nordlimit/eos.hpp"

using namespace nordlimit;

namespace {

EosFamily unitEos(double a = 1.0, double a1 = 0.0) {
  EosFamily e;
  e.m0 = 1.0;
  e.gamma = 2.0;
  e.aInf = EntropyCoefficient::constant(a);
  e.aPerturb = a1;
  return e;
}

PhysicalConstants withC(double c) {
  PhysicalConstants k;
  if (std::isfinite(c)) k.c = LightSpeed(c);
  return k;
}

// ulp distance between two doubles of the same sign
double ulps(double a, double b) { return std::abs(a - b) / std::abs(std::nextafter(b, 2 * b) - b); }

}  // namespace

TEST_CASE("mass density: polytropic closed form") {
  CHECK(massDensityC(withC(10), unitEos(), {1.0, 4.0}) == doctest::Approx(2.04).epsilon(1e-15));
  CHECK(massDensityC(withC(INFINITY), unitEos(), {1.0, 1.0}) == 1.0);
}

TEST_CASE("mass density: scaled gap c^2 |r_c - r_inf| is constant") {
  // with a1 = 0 the gap is exactly p / (gamma - 1) c^-2
  const ThermoPoint tp{1.3, 0.7};
  const EosFamily e = unitEos(1.0, 0.5);
  std::vector<double> scaled;
  for (double c : {10.0, 100.0, 1000.0}) {
    const double d = massDensityC(withC(c), e, tp) - massDensityC(withC(INFINITY), e, tp);
    scaled.push_back(d * c * c);
  }
  // frozen value: p/(gamma-1) - m0 (p/A)^{1/2} a1/2 at leading order
  const double lead = 0.7 - std::sqrt(0.7) * 0.25;
  CHECK(scaled[1] == doctest::Approx(scaled[2]).epsilon(1e-3));
  CHECK(scaled[2] == doctest::Approx(lead).epsilon(1e-3));
  CHECK(scaled[0] == doctest::Approx(lead).epsilon(1e-2));
}

TEST_CASE("non-admissible points are rejected") {
  CHECK_THROWS_AS(massDensityC(withC(10), unitEos(), {1.0, 0.0}), DomainError);
  CHECK_THROWS_AS(massDensityC(withC(10), unitEos(), {-1.0, 1.0}), DomainError);
  CHECK_THROWS_AS(soundSpeedSqC(withC(10), unitEos(), {1.0, std::nan("")}), DomainError);
}

TEST_CASE("sound speed") {
  CHECK(soundSpeedSqC(withC(INFINITY), unitEos(), {1.0, 1.0}) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(soundSpeedSqC(withC(10), unitEos(), {1.0, 1.0}) == doctest::Approx(1.0 / 0.51).epsilon(1e-14));

  SUBCASE("central differences of r_c") {
    const EosFamily e = unitEos(1.7, 0.3);
    const double h = 1e-5;
    for (double p : {0.5, 1.0, 3.0})
      for (double c : {10.0, 40.0}) {
        const auto k = withC(c);
        const double fd = (massDensityC(k, e, {1.2, p + h}) - massDensityC(k, e, {1.2, p - h})) / (2 * h);
        CHECK(std::abs(1.0 / soundSpeedSqC(k, e, {1.2, p}) - fd) <= 1e-8);
      }
  }

  SUBCASE("causality violation is reported") {
    // gamma = 3 allows S^2 up to 2 c^2; at p = 1000, c = 2 it is about 7.8 > 4
    EosFamily stiff = unitEos();
    stiff.gamma = 3.0;
    CHECK_THROWS_AS(soundSpeedSqC(withC(2.0), stiff, {1.0, 1000.0}), CausalityError);
  }
}

TEST_CASE("Q equals gamma P") {
  const EosFamily e = unitEos();
  CHECK(qC(withC(10), e, {1.0, 3.0}, 0.0) == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(qC(withC(INFINITY), e, {1.0, 3.0}, 0.0) == doctest::Approx(6.0).epsilon(1e-15));
  const double q = qC(withC(10), e, {1.0, 3.0}, 1.0);
  CHECK(q == doctest::Approx(6.0 * std::exp(0.04)).epsilon(1e-14));
  CHECK(q == doctest::Approx(2.0 * std::exp(0.04) * 3.0).epsilon(1e-15));
}

TEST_CASE("property: Q - gamma P within 4 ulps on random admissible points") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ue(0.5, 2.0), up(0.5, 2.0), uphi(-2.0, 2.0), ua(0.5, 3.0);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    EosFamily e = unitEos(ua(rng), 0.5);
    e.gamma = 1.0 + ua(rng);
    const double c = 10.0 + 100.0 * ue(rng);
    const ThermoPoint tp{ue(rng), up(rng)};
    const double phi = uphi(rng);
    const double P = std::exp(4 * phi / (c * c)) * tp.p;
    worst = std::max(worst, ulps(qC(withC(c), e, tp, phi), e.gamma * P));
  }
  MESSAGE("max ulp distance of Q from gamma P: " << worst);
  CHECK(worst <= 4.0);
}

TEST_CASE("property: thermodynamic monotonicity dr/dp > 0") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  const EosFamily e = unitEos(1.0, 0.5);
  const double h = 1e-6;
  for (int i = 0; i < 1000; ++i) {
    const ThermoPoint tp{u(rng), u(rng)};
    const auto k = withC(10.0 * u(rng));
    CHECK((massDensityC(k, e, {tp.eta, tp.p + h}) - massDensityC(k, e, {tp.eta, tp.p - h})) > 0.0);
  }
}

TEST_CASE("property: c = 1e8 agrees with the infinite branch") {
  const EosFamily e = unitEos(1.3, 0.5);
  double worst = 0;
  for (double eta = 0.5; eta <= 2.0; eta += 0.25)
    for (double p = 0.5; p <= 2.0; p += 0.25) {
      const double a = massDensityC(withC(1e8), e, {eta, p}), b = massDensityC(withC(INFINITY), e, {eta, p});
      worst = std::max(worst, std::abs(a - b) / b);
    }
  CHECK(worst <= 1e-12);
}

TEST_CASE("density jet matches finite differences") {
  EosFamily e = unitEos();
  e.aInf = EntropyCoefficient::powerLaw(1.5, 0.8);
  e.gamma = 5.0 / 3.0;
  const auto c = LightSpeed(15.0);
  const ThermoPoint tp{1.1, 0.9};
  const double h = 1e-5;
  const auto j = densityJet(e, c, tp);
  auto r = [&](double eta, double p) { return densityJet(e, c, {eta, p}).r; };
  auto rp = [&](double eta, double p) { return densityJet(e, c, {eta, p}).rP; };
  CHECK(j.rEta == doctest::Approx((r(tp.eta + h, tp.p) - r(tp.eta - h, tp.p)) / (2 * h)).epsilon(1e-8));
  CHECK(j.rPP == doctest::Approx((rp(tp.eta, tp.p + h) - rp(tp.eta, tp.p - h)) / (2 * h)).epsilon(1e-8));
  CHECK(j.rPEta == doctest::Approx((rp(tp.eta + h, tp.p) - rp(tp.eta - h, tp.p)) / (2 * h)).epsilon(1e-8));
}

TEST_CASE("background potential") {
  PhysicalConstants k;
  SUBCASE("closed form at c = inf") {
    CHECK(backgroundPotential(k, unitEos(), 1.0, 1.0) == doctest::Approx(-4 * M_PI).epsilon(1e-15));
  }
  SUBCASE("root residual and convergence") {
    const EosFamily e = unitEos(10.0, 0.5);
    const double inf = backgroundPotential(k, e, 1.0, 0.25);
    std::vector<double> scaled;
    for (double c : {10.0, 20.0, 40.0, 100.0, 1000.0}) {
      const auto kc = k.withC(LightSpeed(c));
      const double phi = backgroundPotential(kc, e, 1.0, 0.25);
      CHECK(std::abs(backgroundResidual(kc, e, 1.0, 0.25, phi)) <= 1e-12);
      scaled.push_back(c * c * std::abs(phi - inf));
    }
    for (double s : scaled) CHECK(s < 2.0 * scaled.front());
    CHECK(scaled.back() == doctest::Approx(scaled[scaled.size() - 2]).epsilon(1e-2));
  }
  SUBCASE("kappa must be positive") {
    k.kappa = 0.0;
    CHECK_THROWS_AS(backgroundPotential(k, unitEos(), 1.0, 1.0), ParameterError);
  }
  SUBCASE("no root in bracket") {
    // source r - 3 p / c^2 < 0 leaves no sign change
    const auto kc = k.withC(LightSpeed(1.0));
    CHECK_THROWS_AS(backgroundPotential(kc, unitEos(), 1.0, 4.0), RootFindError);
  }
}

TEST_CASE("Lorentz factor") {
  CHECK(lorentzFactorSq(LightSpeed(10.0), 36.0) == doctest::Approx(1.5625).epsilon(1e-15));
  CHECK(lorentzFactorSq(LightSpeed(1000.0), 0.0) == 1.0);
  CHECK(lorentzFactorSq(LightSpeed(), 1e6) == 1.0);
  CHECK_THROWS_AS(lorentzFactorSq(LightSpeed(1.0), 1.0), SuperluminalError);
}

TEST_CASE("hypothesis rate check") {
  const EosFamily e = unitEos(1.0, 0.5);
  CompactBox box;  // eta, p in [0.5, 2]
  const auto rep = hypothesisRateCheck(PhysicalConstants{}, e, box, {10, 20, 40, 80});
  REQUIRE(rep.families.size() == 4);
  for (const auto& f : rep.families) {
    MESSAGE(f.name << " slope " << f.slope);
    CHECK_FALSE(f.flagged);
  }
  CHECK(rep.families[0].slope == doctest::Approx(-2.0).epsilon(0.025));
  CHECK(rep.allPass());
  CHECK_THROWS_AS(hypothesisRateCheck(PhysicalConstants{}, e, box, {10, 20}), ParameterError);
}
