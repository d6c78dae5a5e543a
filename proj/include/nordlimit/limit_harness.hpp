#pragma once

#include <array>
#include <string>
#include <vector>

#include "nordlimit/config.hpp"
#include "nordlimit/energy_currents.hpp"
#include "nordlimit/euler_poisson.hpp"

namespace nordlimit {

/// Newtonian variables of an EN state: (eta, e^{-4 phi / c^2} P, v). phiBar rescales
/// the background pressure the same way.
StateField newtonianVariables(const RelState& s, LightSpeed c, double phiBar);

struct ResidualNorms {
  double fluid = 0.0;      // H^{N-1} of A0_inf (d_t W - newtonian rate)
  double potential = 0.0;  // H^{N-1} of the screened Poisson residual
};

/// Residuals of the Newtonian equations on a trajectory. stencil holds the Newtonian
/// variables at t - 2dt .. t + 2dt, phi the potential at t; wRing is the initial
/// fluid and phiRing the initial potential of the same run.
ResidualNorms approximateSolutionResiduals(const std::array<const StateField*, 5>& stencil, const ScalarField& phi,
                                           double dt, const StateField& wRing, const ScalarField& phiRing,
                                           const PoissonSystem& ep, int order);

struct DiagnosticRow {
  double t = 0.0;
  double wDiff = 0.0;
  double phiDiff = 0.0;
  double fluidResidual = -1.0;  // -1 where the stencil does not fit
  double fluidResidualRaw = -1.0;
  double potentialResidual = -1.0;
  double minRatio = 0.0;
  double maxRatio = 0.0;
  double kgEnergy = 0.0;  // 0 for the Newtonian run
  double kgBound = 0.0;
};

struct TrajectoryReport {
  LightSpeed c;
  RunStatus status;
  double supWdiff = 0.0;
  double supPhidiff = 0.0;
  double phiBarGap = 0.0;
  double supFluidResidual = 0.0;     // with the Newtonian run's residual field subtracted
  double supFluidResidualRaw = 0.0;
  double supPotentialResidual = 0.0;
  double minRatio = 0.0;
  double maxRatio = 0.0;
  double kgWorst = 0.0;  // max over output times of E(t) / bound(t)
  std::vector<DiagnosticRow> rows;
};

struct SlopeFit {
  std::string name;
  double slope = 0.0;
  double residual = 0.0;
  double threshold = 0.0;  // pass when slope <= threshold
  bool pass = false;
};

struct SweepReport {
  int sobolevOrder = 4;
  double dt = 0.0;
  int steps = 0;
  int outputEvery = 1;
  TrajectoryReport newtonian;
  std::vector<TrajectoryReport> runs;  // ascending c
  std::vector<SlopeFit> fits;          // fluid, potential, gap, fluidResidual, potentialResidual
  bool monotone = false;
  double positivityVariation = 0.0;    // (max - min) / newtonian min of the per-run minima
  bool aborted = false;
  std::string abortReason;

  const SlopeFit& fit(const std::string& name) const;
  bool kgHolds() const;
};

/// Runs EP once and EN for every c from matched data on the step of the largest c.
/// Sub-run aborts stop the sweep and leave a partial report.
SweepReport runSweep(const LabConfig& cfg);

/// Deviation of the symmetric matrices a^mu and of the inverse time matrix from their
/// c = inf values, maximised over the box, with a fitted slope per family.
RateReport matrixRateCheck(const EosFamily& eos, const CompactBox& box, const std::vector<double>& cList);

struct IdentityStudy {
  LightSpeed c;
  IdentityReport coarse;
  IdentityReport fine;  // half step
  double ratio() const { return fine.maxDefect > 0 ? coarse.maxDefect / fine.maxDefect : 0.0; }
};

/// Divergence identity on the perturbed run at c over [0, tFinal] with step dt and dt/2.
IdentityStudy divergenceStudy(const LabConfig& cfg, LightSpeed c, double tFinal, double dt);

struct KleinGordonRow {
  double t = 0.0;
  double energy = 0.0;
  double bound = 0.0;  // E(0) + c t sup_{s <= t} |l(s)|_{H^N}
};

struct KleinGordonCheck {
  RunStatus status;
  std::vector<KleinGordonRow> rows;  // every step
  double worstRatio = 0.0;           // max energy / bound
  bool pass() const { return !status.aborted && worstRatio <= 1.0 + 1e-3; }
};

/// Perturbed EN run at c over [0, cfg.tFinal] with the energy bound checked every step.
KleinGordonCheck kleinGordonCheck(const LabConfig& cfg, LightSpeed c);

struct EllipticCheck {
  double constant = 0.0;  // sup over modes of the H^2 / L^2 multiplier
  double worst = 0.0;     // largest measured ratio
  bool pass() const { return worst <= constant * (1 + 1e-12); }
};

/// |phi|_{H^2} / |(Delta - kappa^2) phi|_{L^2} over random white-noise sources.
EllipticCheck ellipticCheck(const Grid3& g, double kappa, int samples, std::uint64_t seed);

/// Writes sweep.csv, diagnostics.csv and summary.txt into dir. Returns the file names written.
std::vector<std::string> emitReport(const SweepReport& report, const std::string& dir);
/// Energy identity rows as CSV.
void writeIdentityCsv(const IdentityReport& rep, const std::string& path);

std::string formatReal(double v);

}  // namespace nordlimit
