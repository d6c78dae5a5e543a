#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nordlimit/eos.hpp"
#include "nordlimit/fields.hpp"
#include "nordlimit/initial_data.hpp"

namespace nordlimit {

/// Everything a run or sweep needs. Text form is "key = value" lines grouped in
/// [sections]; lists are whitespace separated.
struct LabConfig {
  Grid3 grid{32, 2.0 * kPi};
  double gravG = 1.0;
  double kappa = 1.0;

  double m0 = 1.0;
  double gamma = 2.0;
  double entropyCoef = 10.0;     // A_inf(eta) = coef * eta^exponent
  double entropyExponent = 0.0;
  double aPerturb = 0.5;

  QuietFluid quiet{1.0, 0.25};
  PerturbationSpec perturbation;
  CompactBox box;

  double tFinal = 0.2;
  double cfl = 0.5;
  double minMargin = 0.01;
  double mollifier = 0.1;
  int outputEvery = 8;
  double runC = 20.0;  // light speed for run-en

  std::vector<double> cValues{10, 20, 40, 80, 160};
  int sobolevOrder = 4;

  std::uint64_t seed = 1;
  int positivitySamples = 1000;

  LabConfig();

  EosFamily eos() const;
  PhysicalConstants constants() const;  // c = inf
  /// Throws ParameterError naming the offending key.
  void validate() const;

  bool operator==(const LabConfig&) const;
};

struct ConfigParse {
  LabConfig config;
  std::vector<std::string> unknownKeys;  // "section.key"
};

/// Unknown keys are collected; with strict they raise ParameterError listing all of them.
ConfigParse parseConfig(const std::string& text, bool strict);
ConfigParse loadConfig(const std::string& path, bool strict);
/// Full-precision text that parses back to an equal config.
std::string serializeConfig(const LabConfig& cfg);

}  // namespace nordlimit
