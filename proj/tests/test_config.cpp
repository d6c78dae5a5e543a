#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "nordlimit/config.hpp"

using namespace nordlimit;

namespace {

std::string sourceFile(const std::string& rel) { return std::string(NORDLIMIT_SOURCE_DIR) + "/" + rel; }

}  // namespace

TEST_CASE("defaults validate and survive a text round trip") {
  const LabConfig d;
  CHECK_NOTHROW(d.validate());
  const std::string text = serializeConfig(d);
  const ConfigParse p = parseConfig(text, true);
  CHECK(p.unknownKeys.empty());
  CHECK(p.config == d);
  CHECK(serializeConfig(p.config) == text);
}

TEST_CASE("round trip keeps awkward values bit for bit") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.1, 3.0);
  for (int t = 0; t < 50; ++t) {
    LabConfig c;
    c.gravG = u(rng);
    c.kappa = u(rng);
    c.quiet.p = u(rng) / 7.0;
    c.perturbation.vAmplitude = {u(rng) * 1e-3, -u(rng), u(rng) / 3.0};
    c.cValues = {u(rng), 10 + u(rng), 100 + u(rng), 1e3 + u(rng)};
    c.seed = rng();
    const LabConfig back = parseConfig(serializeConfig(c), true).config;
    CHECK(back.gravG == c.gravG);
    CHECK(back.kappa == c.kappa);
    CHECK(back.quiet.p == c.quiet.p);
    CHECK(back.perturbation.vAmplitude == c.perturbation.vAmplitude);
    CHECK(back.cValues == c.cValues);
    CHECK(back.seed == c.seed);
    CHECK(back == c);
  }
}

TEST_CASE("shipped reference config equals the built-in defaults") {
  const ConfigParse p = loadConfig(sourceFile("configs/reference.ini"), true);
  CHECK(p.config == LabConfig());
  const ConfigParse q = loadConfig(sourceFile("configs/quiet.ini"), true);
  CHECK(q.config.perturbation.isZero());
  CHECK_NOTHROW(q.config.validate());
}

TEST_CASE("unknown keys warn by default and fail in strict mode") {
  const std::string text = "[grid]\nn = 16\nbogus = 3\n[extra]\nthing = 1\n";
  const ConfigParse p = parseConfig(text, false);
  CHECK(p.config.grid.n == 16);
  REQUIRE(p.unknownKeys.size() == 2);
  CHECK(p.unknownKeys[0] == "grid.bogus");
  CHECK(p.unknownKeys[1] == "extra.thing");
  try {
    parseConfig(text, true);
    FAIL("strict parse accepted unknown keys");
  } catch (const ParameterError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("grid.bogus") != std::string::npos);
    CHECK(msg.find("extra.thing") != std::string::npos);
  }
}

TEST_CASE("comments, spacing and lists") {
  const std::string text =
      "# header\n\n  [ sweep ]  \n c_values =  5   50 500 ; trailing\n[run]\nt_final=0.125\n";
  const LabConfig c = parseConfig(text, true).config;
  CHECK(c.cValues == std::vector<double>{5, 50, 500});
  CHECK(c.tFinal == 0.125);
}

TEST_CASE("malformed input is rejected") {
  CHECK_THROWS_AS(parseConfig("[grid\nn = 3\n", false), ParameterError);
  CHECK_THROWS_AS(parseConfig("[grid]\nn 16\n", false), ParameterError);
  CHECK_THROWS_AS(parseConfig("[grid]\nn = sixteen\n", false), ParameterError);
  CHECK_THROWS_AS(parseConfig("[grid]\nn = 16.5\n", false), ParameterError);
  CHECK_THROWS_AS(parseConfig("[perturbation]\ncenter = 1 2\n", false), ParameterError);
  CHECK_THROWS_AS(parseConfig("[check]\nseed = -1\n", false), ParameterError);
  CHECK_THROWS_AS(loadConfig("/nonexistent/nordlimit.ini", false), ParameterError);
}

TEST_CASE("validation names the offending parameter") {
  auto message = [](const LabConfig& c) -> std::string {
    try {
      c.validate();
    } catch (const ParameterError& e) {
      return e.what();
    }
    return "";
  };
  LabConfig c;
  c.kappa = 0;
  CHECK(message(c).find("kappa must be > 0") != std::string::npos);
  CHECK(message(loadConfig(sourceFile("configs/broken_kappa.ini"), true).config).find("kappa must be > 0") !=
        std::string::npos);

  c = LabConfig();
  c.cValues = {10, 20};
  CHECK(message(c).find("sweep.c_values") != std::string::npos);
  c.cValues = {10, 40, 20};
  CHECK(message(c).find("ascending") != std::string::npos);
  c = LabConfig();
  c.tFinal = 0;
  CHECK(message(c).find("run.t_final") != std::string::npos);
  c = LabConfig();
  c.sobolevOrder = 3;
  CHECK(message(c).find("sweep.sobolev_order") != std::string::npos);
  c = LabConfig();
  c.grid.n = 15;
  CHECK(!message(c).empty());
  c = LabConfig();
  c.outputEvery = 0;
  CHECK(message(c).find("run.output_every") != std::string::npos);
}

TEST_CASE("derived objects follow the fields") {
  LabConfig c;
  c.entropyExponent = 1.5;
  c.gravG = 2.0;
  const EosFamily e = c.eos();
  CHECK(e.gamma == c.gamma);
  CHECK(e.aInf.eval(2.0).a == doctest::Approx(10.0 * std::pow(2.0, 1.5)).epsilon(1e-15));
  CHECK(c.constants().gravG == 2.0);
  CHECK(c.constants().c.isInfinite());
}
