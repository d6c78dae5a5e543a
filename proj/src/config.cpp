#include "nordlimit/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace nordlimit {

namespace {

enum class Kind { Real, Int, U64, RealList, Real3 };

struct Key {
  std::string name;  // section.key
  Kind kind;
  void* target;
};

std::vector<Key> keysOf(LabConfig& c) {
  return {
      {"grid.n", Kind::Int, &c.grid.n},
      {"grid.length", Kind::Real, &c.grid.length},
      {"physics.G", Kind::Real, &c.gravG},
      {"physics.kappa", Kind::Real, &c.kappa},
      {"eos.m0", Kind::Real, &c.m0},
      {"eos.gamma", Kind::Real, &c.gamma},
      {"eos.entropy_coef", Kind::Real, &c.entropyCoef},
      {"eos.entropy_exponent", Kind::Real, &c.entropyExponent},
      {"eos.a1", Kind::Real, &c.aPerturb},
      {"background.eta", Kind::Real, &c.quiet.eta},
      {"background.p", Kind::Real, &c.quiet.p},
      {"perturbation.eta_amplitude", Kind::Real, &c.perturbation.etaAmplitude},
      {"perturbation.p_amplitude", Kind::Real, &c.perturbation.pAmplitude},
      {"perturbation.v_amplitude", Kind::Real3, c.perturbation.vAmplitude.data()},
      {"perturbation.center", Kind::Real3, c.perturbation.center.data()},
      {"perturbation.width", Kind::Real, &c.perturbation.width},
      {"box.eta_min", Kind::Real, &c.box.etaMin},
      {"box.eta_max", Kind::Real, &c.box.etaMax},
      {"box.p_min", Kind::Real, &c.box.pMin},
      {"box.p_max", Kind::Real, &c.box.pMax},
      {"box.speed_max", Kind::Real, &c.box.speedMax},
      {"box.phi_min", Kind::Real, &c.box.phiMin},
      {"box.phi_max", Kind::Real, &c.box.phiMax},
      {"run.t_final", Kind::Real, &c.tFinal},
      {"run.cfl", Kind::Real, &c.cfl},
      {"run.min_margin", Kind::Real, &c.minMargin},
      {"run.mollifier", Kind::Real, &c.mollifier},
      {"run.output_every", Kind::Int, &c.outputEvery},
      {"run.c", Kind::Real, &c.runC},
      {"sweep.c_values", Kind::RealList, &c.cValues},
      {"sweep.sobolev_order", Kind::Int, &c.sobolevOrder},
      {"check.seed", Kind::U64, &c.seed},
      {"check.positivity_samples", Kind::Int, &c.positivitySamples},
  };
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double toReal(const std::string& tok, const std::string& key) {
  double v = 0;
  const auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (r.ec != std::errc() || r.ptr != tok.data() + tok.size())
    throw ParameterError("config: " + key + ": '" + tok + "' is not a number");
  return v;
}

std::vector<std::string> split(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string t; is >> t;) out.push_back(t);
  return out;
}

void assign(const Key& k, const std::string& value) {
  const auto toks = split(value);
  auto one = [&]() -> const std::string& {
    if (toks.size() != 1) throw ParameterError("config: " + k.name + " expects one value");
    return toks[0];
  };
  switch (k.kind) {
    case Kind::Real:
      *static_cast<double*>(k.target) = toReal(one(), k.name);
      break;
    case Kind::Int: {
      const double v = toReal(one(), k.name);
      if (v != double(int(v))) throw ParameterError("config: " + k.name + " must be an integer");
      *static_cast<int*>(k.target) = int(v);
      break;
    }
    case Kind::U64: {
      std::uint64_t v = 0;
      const std::string& t = one();
      const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
      if (r.ec != std::errc() || r.ptr != t.data() + t.size())
        throw ParameterError("config: " + k.name + " must be an unsigned integer");
      *static_cast<std::uint64_t*>(k.target) = v;
      break;
    }
    case Kind::RealList: {
      auto& out = *static_cast<std::vector<double>*>(k.target);
      out.clear();
      for (const auto& t : toks) out.push_back(toReal(t, k.name));
      break;
    }
    case Kind::Real3: {
      if (toks.size() != 3) throw ParameterError("config: " + k.name + " expects three values");
      auto* out = static_cast<double*>(k.target);
      for (int i = 0; i < 3; ++i) out[i] = toReal(toks[i], k.name);
      break;
    }
  }
}

std::string fmt(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);  // shortest round-trip form
  return std::string(buf, r.ptr);
}

std::string render(const Key& k) {
  switch (k.kind) {
    case Kind::Real:
      return fmt(*static_cast<const double*>(k.target));
    case Kind::Int:
      return std::to_string(*static_cast<const int*>(k.target));
    case Kind::U64:
      return std::to_string(*static_cast<const std::uint64_t*>(k.target));
    case Kind::RealList: {
      std::string s;
      for (double v : *static_cast<const std::vector<double>*>(k.target)) s += (s.empty() ? "" : " ") + fmt(v);
      return s;
    }
    case Kind::Real3: {
      const auto* p = static_cast<const double*>(k.target);
      return fmt(p[0]) + " " + fmt(p[1]) + " " + fmt(p[2]);
    }
  }
  return "";
}

}  // namespace

LabConfig::LabConfig() {
  perturbation.etaAmplitude = 0.1;
  perturbation.pAmplitude = 0.05;
  perturbation.vAmplitude = {0.1, -0.05, 0.08};
  perturbation.center = {kPi, kPi, kPi};
  perturbation.width = kPi / 4.0;
  box.etaMin = 0.5;
  box.etaMax = 2.0;
  box.pMin = 0.1;
  box.pMax = 0.6;
  box.speedMax = 1.0;
  box.phiMin = -3.0;
  box.phiMax = -1.0;
}

EosFamily LabConfig::eos() const {
  EosFamily e;
  e.m0 = m0;
  e.gamma = gamma;
  e.aInf = entropyExponent == 0.0 ? EntropyCoefficient::constant(entropyCoef)
                                  : EntropyCoefficient::powerLaw(entropyCoef, entropyExponent);
  e.aPerturb = aPerturb;
  return e;
}

PhysicalConstants LabConfig::constants() const {
  PhysicalConstants k;
  k.gravG = gravG;
  k.kappa = kappa;
  return k;
}

void LabConfig::validate() const {
  grid.validate();
  constants().validate();
  if (!(entropyCoef > 0)) throw ParameterError("eos.entropy_coef must be > 0");
  eos().validate();
  if (!(quiet.eta > 0 && quiet.p > 0)) throw ParameterError("background: eta and p must be > 0");
  perturbation.validate(grid);
  box.validate();
  if (!(tFinal > 0)) throw ParameterError("run.t_final must be > 0");
  if (!(cfl > 0 && cfl <= 1)) throw ParameterError("run.cfl must lie in (0, 1]");
  if (!(minMargin >= 0 && minMargin < 0.5)) throw ParameterError("run.min_margin must lie in [0, 0.5)");
  if (!(mollifier >= 0)) throw ParameterError("run.mollifier must be >= 0");
  if (outputEvery < 1) throw ParameterError("run.output_every must be >= 1");
  if (!(runC > 0)) throw ParameterError("run.c must be > 0");
  if (cValues.size() < 3) throw ParameterError("sweep.c_values needs at least 3 values");
  for (std::size_t i = 0; i < cValues.size(); ++i) {
    if (!(cValues[i] > 0)) throw ParameterError("sweep.c_values must be positive");
    if (i > 0 && !(cValues[i] > cValues[i - 1])) throw ParameterError("sweep.c_values must be strictly ascending");
  }
  if (sobolevOrder < 4) throw ParameterError("sweep.sobolev_order must be >= 4");
  if (sobolevOrder > 4) throw ParameterError("sweep.sobolev_order above 4 is not supported (norms stop at order 5)");
  if (positivitySamples < 1) throw ParameterError("check.positivity_samples must be >= 1");
}

bool LabConfig::operator==(const LabConfig& o) const {
  return serializeConfig(*this) == serializeConfig(o);
}

ConfigParse parseConfig(const std::string& text, bool strict) {
  ConfigParse out;
  auto keys = keysOf(out.config);
  std::map<std::string, const Key*> index;
  for (const auto& k : keys) index[k.name] = &k;

  std::istringstream is(text);
  std::string line, section;
  int lineNo = 0;
  while (std::getline(is, line)) {
    ++lineNo;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParameterError("config line " + std::to_string(lineNo) + ": malformed section");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParameterError("config line " + std::to_string(lineNo) + ": expected key = value");
    const std::string name = section + "." + trim(line.substr(0, eq));
    const auto it = index.find(name);
    if (it == index.end()) {
      out.unknownKeys.push_back(name);
      continue;
    }
    assign(*it->second, trim(line.substr(eq + 1)));
  }
  if (strict && !out.unknownKeys.empty()) {
    std::string msg = "config: unknown keys:";
    for (const auto& k : out.unknownKeys) msg += " " + k;
    throw ParameterError(msg);
  }
  return out;
}

ConfigParse loadConfig(const std::string& path, bool strict) {
  std::ifstream f(path);
  if (!f) throw ParameterError("cannot open config file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parseConfig(ss.str(), strict);
}

std::string serializeConfig(const LabConfig& cfg) {
  LabConfig copy = cfg;
  const auto keys = keysOf(copy);
  std::string out, section;
  for (const auto& k : keys) {
    const auto dot = k.name.find('.');
    const std::string sec = k.name.substr(0, dot);
    if (sec != section) {
      out += (out.empty() ? "[" : "\n[") + sec + "]\n";
      section = sec;
    }
    out += k.name.substr(dot + 1) + " = " + render(k) + "\n";
  }
  return out;
}

}  // namespace nordlimit
