// nordlimit: runs the Euler-Nordstrom / Euler-Poisson experiments from a config file.

#include <unistd.h>

#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <thread>

#include "nordlimit/config.hpp"
#include "nordlimit/limit_harness.hpp"
#include "nordlimit/parallel.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace nordlimit;

namespace {

constexpr const char* kVersion = "0.1.0";

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kFailed = 2;

struct Options {
  std::string config;
  std::string out = "nordlimit_out";
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  std::optional<std::uint64_t> seed;
  bool strict = false;
  std::string snapshot;
};

std::string utcNow() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json configJson(const LabConfig& cfg) {
  json out = json::object();
  std::istringstream is(serializeConfig(cfg));
  std::string line, section;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line.front() == '[') {
      section = line.substr(1, line.size() - 2);
      out[section] = json::object();
      continue;
    }
    const auto eq = line.find(" = ");
    const std::string key = line.substr(0, eq), value = line.substr(eq + 3);
    std::istringstream vs(value);
    std::vector<std::string> toks;
    for (std::string t; vs >> t;) toks.push_back(t);
    if (key == "seed") {
      out[section][key] = std::stoull(value);
    } else if (toks.size() == 1) {
      out[section][key] = std::stod(toks[0]);
    } else {
      json arr = json::array();
      for (const auto& t : toks) arr.push_back(std::stod(t));
      out[section][key] = arr;
    }
  }
  return out;
}

class Manifest {
 public:
  Manifest(std::string command, const Options& o) {
    j_["tool"] = "nordlimit";
    j_["version"] = kVersion;
    j_["command"] = std::move(command);
    j_["started"] = utcNow();
    char host[256] = {0};
    gethostname(host, sizeof host - 1);
    j_["host"] = {{"name", host}, {"hardware_threads", std::thread::hardware_concurrency()}, {"threads", o.threads}};
    j_["config_file"] = o.config;
    j_["files"] = json::array();
    j_["checks"] = json::object();
  }
  void config(const LabConfig& cfg) { j_["config"] = configJson(cfg); }
  void file(const std::string& name) { j_["files"].push_back(name); }
  void check(const std::string& name, bool pass) { j_["checks"][name] = pass; }
  void note(const std::string& key, json v) { j_[key] = std::move(v); }

  void write(const fs::path& dir, const std::string& status, const std::string& reason) {
    j_["status"] = status;
    if (!reason.empty()) j_["reason"] = reason;
    j_["finished"] = utcNow();
    std::error_code ec;
    fs::create_directories(dir, ec);
    std::ofstream f(dir / "manifest.json");
    if (!f) {
      std::cerr << "warning: cannot write " << (dir / "manifest.json").string() << "\n";
      return;
    }
    f << j_.dump(2) << "\n";
  }

 private:
  json j_;
};

std::ofstream openCsv(const fs::path& p) {
  std::ofstream f(p);
  if (!f) throw Error("cannot write " + p.string());
  return f;
}

bool isOutputStep(int n, int every, int last) { return n % every == 0 || n == last; }

// ---- commands -------------------------------------------------------------

int cmdRunEn(const LabConfig& cfg, const fs::path& out, Manifest& man) {
  const LightSpeed c(cfg.runC);
  const EosFamily eos = cfg.eos();
  const PhysicalConstants kc = cfg.constants().withC(c);
  const DataBundle lifted = liftToRelativistic(
      buildNewtonianData(cfg.perturbation, cfg.constants(), eos, cfg.grid, cfg.quiet, cfg.box), kc, eos);
  const NordstromSystem en(kc, eos);
  const RelState s0 = initialState(lifted);
  const RelState bg = backgroundState(cfg.grid, en, cfg.quiet.eta, cfg.quiet.p);

  RunOptions opt;
  opt.tFinal = cfg.tFinal;
  opt.cfl = cfg.cfl;
  opt.box = cfg.box;
  opt.minMargin = cfg.minMargin;
  const int last = std::max(1, int(std::ceil(opt.tFinal / en.stableDt(s0, opt.cfl) - 1e-9)));

  fs::create_directories(out);
  auto csv = openCsv(out / "en_trajectory.csv");
  man.file("en_trajectory.csv");
  csv << "t,fluidDeviation,potentialDeviation,boxMargin,minRatio\n";
  double drift = 0;
  RelState lastGood;
  const RunStatus st = en.run(s0, opt, [&](const RelState& s, int n) {
    if (!isOutputStep(n, cfg.outputEvery, last)) return;
    const double dw = lInfNorm(s.w);
    const double dphi = lInfNorm(s.phi - bg.phi);
    drift = std::max({drift, dw, dphi});
    csv << formatReal(s.t) << ',' << formatReal(dw) << ',' << formatReal(dphi) << ','
        << formatReal(en.boxMargin(s, cfg.box)) << ',' << formatReal(positivityBounds(s.w, s.phi, eos, c).minRatio)
        << '\n';
  }, &lastGood);
  writeSnapshot((out / "en_final.snap").string(), cfg.grid, lastGood.t,
                {&lastGood.w[0], &lastGood.w[1], &lastGood.w[2], &lastGood.w[3], &lastGood.w[4], &lastGood.phi,
                 &lastGood.pi});
  man.file("en_final.snap");
  man.note("run", {{"c", cfg.runC}, {"steps", st.steps}, {"dt", st.dt}, {"t_end", lastGood.t}, {"drift", drift}});

  std::cout << "run-en c=" << c.str() << ": " << st.steps << " steps, dt " << formatReal(st.dt) << ", t "
            << formatReal(lastGood.t) << "\n";
  std::cout << "max deviation from the quiet background: " << formatReal(drift) << "\n";
  if (st.aborted) throw Error("aborted: " + st.reason);
  if (cfg.perturbation.isZero()) {
    man.check("quiet_drift", drift <= 1e-10);
    if (drift > 1e-10) return kFailed;
  }
  return kOk;
}

int cmdRunEp(const LabConfig& cfg, const fs::path& out, Manifest& man) {
  const EosFamily eos = cfg.eos();
  const PoissonSystem ep(cfg.constants(), eos);
  const DataBundle data = buildNewtonianData(cfg.perturbation, cfg.constants(), eos, cfg.grid, cfg.quiet, cfg.box);
  const NewtState s0 = initialState(data, ep);
  const NewtState bg = backgroundState(cfg.grid, ep, cfg.quiet.eta, cfg.quiet.p);

  RunOptions opt;
  opt.tFinal = cfg.tFinal;
  opt.cfl = cfg.cfl;
  opt.box = cfg.box;
  opt.minMargin = cfg.minMargin;
  const int last = std::max(1, int(std::ceil(opt.tFinal / ep.stableDt(s0, opt.cfl) - 1e-9)));

  fs::create_directories(out);
  auto csv = openCsv(out / "ep_trajectory.csv");
  man.file("ep_trajectory.csv");
  csv << "t,fluidDeviation,potentialDeviation,constraintResidual,minRatio\n";
  double drift = 0;
  NewtState lastGood;
  const RunStatus st = ep.run(s0, opt, [&](const NewtState& s, int n) {
    if (!isOutputStep(n, cfg.outputEvery, last)) return;
    const double dw = lInfNorm(s.w);
    const double dphi = lInfNorm(s.phi - bg.phi);
    drift = std::max({drift, dw, dphi});
    csv << formatReal(s.t) << ',' << formatReal(dw) << ',' << formatReal(dphi) << ','
        << formatReal(ep.constraintResidual(s)) << ','
        << formatReal(positivityBounds(s.w, s.phi, eos, LightSpeed()).minRatio) << '\n';
  }, &lastGood);
  writeSnapshot((out / "ep_final.snap").string(), cfg.grid, lastGood.t,
                {&lastGood.w[0], &lastGood.w[1], &lastGood.w[2], &lastGood.w[3], &lastGood.w[4], &lastGood.phi});
  man.file("ep_final.snap");
  man.note("run", {{"c", "inf"}, {"steps", st.steps}, {"dt", st.dt}, {"t_end", lastGood.t}, {"drift", drift}});

  std::cout << "run-ep: " << st.steps << " steps, dt " << formatReal(st.dt) << ", t " << formatReal(lastGood.t)
            << "\n";
  std::cout << "max deviation from the quiet background: " << formatReal(drift) << "\n";
  if (st.aborted) throw Error("aborted: " + st.reason);
  if (cfg.perturbation.isZero()) {
    man.check("quiet_drift", drift <= 1e-10);
    if (drift > 1e-10) return kFailed;
  }
  return kOk;
}

int cmdSweep(const LabConfig& cfg, const fs::path& out, Manifest& man) {
  const SweepReport rep = runSweep(cfg);
  for (const auto& f : emitReport(rep, out.string())) man.file(f);
  std::ifstream summary(out / "summary.txt");
  std::cout << summary.rdbuf();
  man.note("sweep", {{"dt", rep.dt}, {"steps", rep.steps}, {"sup_over", "output times"}});
  if (rep.aborted) throw Error("aborted: " + rep.abortReason);

  bool ok = true;
  for (const auto& f : rep.fits) {
    man.check("slope_" + f.name, f.pass);
    ok = ok && f.pass;
  }
  const bool positivity = rep.newtonian.minRatio > 0 && rep.positivityVariation <= 0.1;
  man.check("monotone", rep.monotone);
  man.check("positivity", positivity);
  man.check("klein_gordon", rep.kgHolds());
  ok = ok && rep.monotone && positivity && rep.kgHolds();
  return ok ? kOk : kFailed;
}

int cmdCheck(const LabConfig& cfg, const fs::path& out, Manifest& man) {
  fs::create_directories(out);
  auto csv = openCsv(out / "check.csv");
  man.file("check.csv");
  csv << "check,value,limit,pass\n";
  bool ok = true;
  auto record = [&](const std::string& name, double value, const std::string& limit, bool pass) {
    csv << name << ',' << formatReal(value) << ',' << limit << ',' << (pass ? 1 : 0) << '\n';
    man.check(name, pass);
    std::cout << (pass ? "PASS " : "FAIL ") << name << " = " << formatReal(value) << " (" << limit << ")\n";
    ok = ok && pass;
  };

  const EosFamily eos = cfg.eos();
  const PhysicalConstants consts = cfg.constants();
  for (const RateReport& r : {hypothesisRateCheck(consts, eos, cfg.box, cfg.cValues),
                              matrixRateCheck(eos, cfg.box, cfg.cValues)})
    for (const auto& f : r.families) record("rate_" + f.name, f.slope, "<= -1.9", !f.flagged);

  // divergence identity on a common step for both systems
  const LightSpeed c(cfg.runC);
  const PhysicalConstants kc = consts.withC(c);
  const DataBundle data = buildNewtonianData(cfg.perturbation, consts, eos, cfg.grid, cfg.quiet, cfg.box);
  const DataBundle lifted = liftToRelativistic(data, kc, eos);
  const double dt = NordstromSystem(kc, eos).stableDt(initialState(lifted), cfg.cfl);
  double minRatio = std::numeric_limits<double>::infinity();
  for (const LightSpeed cc : {c, LightSpeed()}) {
    const IdentityStudy st = divergenceStudy(cfg, cc, cfg.tFinal, dt);
    const std::string tag = cc.isInfinite() ? "inf" : cc.str();
    writeIdentityCsv(st.coarse, (out / ("energy_c" + tag + ".csv")).string());
    man.file("energy_c" + tag + ".csv");
    record("identity_defect_c" + tag, st.coarse.maxDefect, "<= 1e-3", st.coarse.maxDefect <= 1e-3);
    record("identity_order_c" + tag, st.ratio(), "4 +- 1", std::abs(st.ratio() - 4.0) <= 1.0);
    for (const auto& r : st.coarse.rows) minRatio = std::min(minRatio, r.minRatio);
  }
  record("positivity_min", minRatio, "> 0", minRatio > 0);

  // sampled directions never go below the exact infimum
  const RelState s0 = initialState(lifted);
  const RatioBounds exact = positivityBounds(s0.w, s0.phi, eos, c);
  const RatioBounds sampled = positivityRatio(s0.w, s0.phi, eos, c, cfg.positivitySamples, cfg.seed);
  record("positivity_sampled", sampled.minRatio, ">= exact infimum",
         sampled.minRatio > 0 && sampled.minRatio >= exact.minRatio * (1 - 1e-12));

  const KleinGordonCheck kg = kleinGordonCheck(cfg, c);
  if (kg.status.aborted) throw Error("aborted: " + kg.status.reason);
  {
    auto f = openCsv(out / "klein_gordon.csv");
    man.file("klein_gordon.csv");
    f << "t,energy,bound\n";
    for (const auto& r : kg.rows) f << formatReal(r.t) << ',' << formatReal(r.energy) << ',' << formatReal(r.bound) << '\n';
  }
  record("klein_gordon_ratio", kg.worstRatio, "<= 1.001", kg.pass());

  const EllipticCheck el = ellipticCheck(cfg.grid, cfg.kappa, 1000, cfg.seed);
  record("elliptic_ratio", el.worst, "<= " + formatReal(el.constant), el.pass());
  return ok ? kOk : kFailed;
}

int cmdInfo(const std::string& path, int order) {
  const Snapshot s = readSnapshot(path);
  std::cout << "snapshot " << path << "\n";
  std::cout << "  version " << s.version << ", grid " << s.grid.n << "^3, length " << formatReal(s.grid.length)
            << ", t " << formatReal(s.time) << ", components " << s.comp.size() << "\n";
  std::cout << "  comp  mean             l2               linf             H^" << order << " of deviation\n";
  for (std::size_t k = 0; k < s.comp.size(); ++k) {
    const double m = mean(s.comp[k]);
    std::cout << "  " << k << "     " << formatReal(m) << "  " << formatReal(l2Norm(s.comp[k])) << "  "
              << formatReal(lInfNorm(s.comp[k])) << "  " << formatReal(sobolevNorm(s.comp[k], order, m)) << "\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Newtonian limit lab: Euler-Nordstrom against Euler-Poisson on a periodic grid"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Options o;
  app.add_option("--config", o.config, "config file (key = value sections); defaults when omitted");
  app.add_option("--out", o.out, "output directory (NORDLIMIT_OUT overrides)");
  app.add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", o.seed, "seed for randomised checks");
  app.add_flag("--strict", o.strict, "reject unknown config keys");

  auto* runEn = app.add_subcommand("run-en", "evolve Euler-Nordstrom at run.c");
  auto* runEp = app.add_subcommand("run-ep", "evolve Euler-Poisson");
  auto* sweep = app.add_subcommand("sweep", "c sweep against Euler-Poisson with fitted rates");
  auto* check = app.add_subcommand("check", "invariant suite: rates, positivity, energy identity, Klein-Gordon");
  auto* info = app.add_subcommand("info", "print a snapshot header and norms");
  info->add_option("snapshot", o.snapshot, "snapshot file")->required();
  for (auto* s : {runEn, runEp, sweep, check, info}) s->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }
  setThreadCount(o.threads);

  if (info->parsed()) {
    try {
      return cmdInfo(o.snapshot, 4);
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kUsage;
    }
  }

  const std::string command = app.get_subcommands().front()->get_name();
  if (const char* env = std::getenv("NORDLIMIT_OUT"); env && *env) o.out = env;
  const fs::path out(o.out);
  Manifest man(command, o);

  LabConfig cfg;
  try {
    if (!o.config.empty()) {
      const ConfigParse p = loadConfig(o.config, o.strict);
      for (const auto& k : p.unknownKeys) std::cerr << "warning: unknown config key " << k << " ignored\n";
      cfg = p.config;
    }
    if (o.seed) cfg.seed = *o.seed;
    cfg.validate();
    man.config(cfg);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    man.write(out, "config-error", e.what());
    return kUsage;
  }

  int code = kOk;
  std::string status = "ok", reason;
  try {
    if (command == "run-en") code = cmdRunEn(cfg, out, man);
    else if (command == "run-ep") code = cmdRunEp(cfg, out, man);
    else if (command == "sweep") code = cmdSweep(cfg, out, man);
    else code = cmdCheck(cfg, out, man);
    if (code != kOk) status = "check-failed";
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    code = kUsage;
    status = "config-error";
    reason = e.what();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    code = kFailed;
    status = "aborted";
    reason = e.what();
  }
  man.write(out, status, reason);
  return code;
}
