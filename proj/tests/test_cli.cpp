#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tsavoid/commands.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tsavoid;

namespace {

const std::string kConfigs = TSAVOID_CONFIG_DIR;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("tsavoid_cli_" + name);
  fs::remove_all(p);
  return p;
}

int run(const std::string& args) {
  const std::string cmd = std::string(TSAVOID_BIN) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string cfg(const std::string& name) { return kConfigs + "/" + name + ".json"; }

json load(const std::string& path) {
  std::ifstream in(path);
  return json::parse(in);
}

std::string write_variant(const std::string& base, const std::string& name,
                          const std::function<void(json&)>& edit) {
  json j = load(cfg(base));
  edit(j);
  const fs::path p = fs::temp_directory_path() / ("tsavoid_cli_" + name + ".json");
  std::ofstream(p) << j.dump(2);
  return p.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("synthesize") {
  std::ostringstream out, err;
  CHECK(cmd_synthesize(cfg("example_reals"), std::nullopt, out, err) == kExitOk);
  CHECK(out.str().find("[1.5 (3/2), -0.5 (-1/2)]") != std::string::npos);

  const fs::path o = scratch("synth.json");
  std::ostringstream out2;
  CHECK(cmd_synthesize(cfg("example_p12"), o.string(), out2, err) == kExitOk);
  CHECK(out2.str().find("graininess mu = 0\n") != std::string::npos);
  CHECK(out2.str().find("graininess mu = 2\n") != std::string::npos);
  const json j = load(o.string());
  REQUIRE(j["entries"].size() == 2);
  CHECK(j["entries"][1]["Q"][0][0].get<double>() == doctest::Approx(11.0 / 18));
  CHECK(j["entries"][1]["hilger"]["inside"][0] == false);

  CHECK(run("synthesize -c " + cfg("matching_failure")) == kExitMatching);
  const std::string singular = write_variant("example_z", "singular", [](json& j) {
    j["K"] = {{0, 0}};
    j["timescale"] = {{"generator", "reals"}, {"window", {0, 1}}};
  });
  CHECK(run("synthesize -c " + singular) == kExitSingularLyapunov);
  std::ostringstream o3, e3;
  CHECK(cmd_synthesize(singular, std::nullopt, o3, e3) == kExitSingularLyapunov);
  CHECK(e3.str().find("mu=0") != std::string::npos);
}

TEST_CASE("simulate") {
  const fs::path d = scratch("sim_z");
  CHECK(run("simulate -c " + cfg("example_z") + " -d " + d.string()) == kExitOk);
  for (int i = 0; i < 10; ++i) {
    char stem[16];
    std::snprintf(stem, sizeof stem, "run_%03d", i);
    CHECK(fs::exists(d / (std::string(stem) + ".csv")));
    const json j = load((d / (std::string(stem) + ".json")).string());
    CHECK(j["verdict"] == "avoided");
    CHECK(j["config"]["timescale"]["generator"] == "hgrid");
  }
  CHECK(run("simulate -c " + cfg("sabotage_gain_z") + " -d " + scratch("sab").string()) ==
        kExitAvoidanceViolated);
  CHECK(run("simulate -c " + cfg("sabotage_zero_z") + " -d " + scratch("sab0").string()) ==
        kExitAvoidanceViolated);
  const std::string empty = write_variant("example_z", "empty", [](json& j) {
    j["simulation"]["x0"] = json::array();
  });
  CHECK(run("simulate -c " + empty + " -d " + scratch("empty").string()) == kExitConfig);
  const std::string inside = write_variant("example_z", "inside", [](json& j) {
    j["simulation"]["x0"] = {{0.1, 0.1}};
  });
  CHECK(run("simulate -c " + inside + " -d " + scratch("inside").string()) == kExitConfig);
}

TEST_CASE("simulate is deterministic and honours TSAVOID_SEED") {
  const std::string rnd = write_variant("example_p12", "random", [](json& j) {
    j["simulation"]["pursuer"] = {{"policy", "random"}};
    j["simulation"]["x0"] = {{1.5, 0.5}};
    j["timescale"]["window"] = {0, 6};
  });
  const fs::path a = scratch("det_a"), b = scratch("det_b"), c = scratch("det_c");
  std::ostringstream o, e;
  ::unsetenv(kSeedEnv);
  CHECK(cmd_simulate(rnd, a.string(), o, e) == kExitOk);
  CHECK(cmd_simulate(rnd, b.string(), o, e) == kExitOk);
  CHECK(slurp(a / "run_000.csv") == slurp(b / "run_000.csv"));
  ::setenv(kSeedEnv, "12345", 1);
  CHECK(cmd_simulate(rnd, c.string(), o, e) == kExitOk);
  CHECK(slurp(a / "run_000.csv") != slurp(c / "run_000.csv"));
  ::setenv(kSeedEnv, "not-a-number", 1);
  CHECK(cmd_simulate(rnd, c.string(), o, e) == kExitConfig);
  ::unsetenv(kSeedEnv);
}

TEST_CASE("verify") {
  for (const char* name : {"example_reals", "example_z", "example_p12"}) {
    CHECK(run(std::string("verify -c ") + cfg(name)) == kExitOk);
  }
  CHECK(run("verify -c " + cfg("empty_zone")) == kExitConfig);
  CHECK(run("verify -c " + cfg("pure_violated")) == kExitConditionFailed);
  std::ostringstream out, err;
  CHECK(cmd_verify(cfg("sabotage_gain_z"), out, err) == kExitConditionFailed);
  CHECK(out.str().find("witness: ") != std::string::npos);
}

TEST_CASE("reproduce-paper") {
  CHECK(run("reproduce-paper") == kExitOk);
  std::ostringstream out, err;
  CHECK(cmd_reproduce_paper(out, err) == kExitOk);
  for (const char* s : {"singular line: 1*x1 = 2*x2", "singular line: 2*x1 = 3*x2",
                        "singular line: 4*x1 = 5*x2", "(11/18)", "(-2/7)"}) {
    CHECK(out.str().find(s) != std::string::npos);
  }
}

TEST_CASE("config errors") {
  CHECK(run("verify -c /nonexistent.json") == kExitConfig);
  const std::string unknown = write_variant("example_z", "unknown", [](json& j) { j["bogus"] = 1; });
  CHECK(run("verify -c " + unknown) == kExitConfig);
  const std::string dims = write_variant("example_z", "dims", [](json& j) { j["K"] = {{1, 2, 3}}; });
  CHECK(run("synthesize -c " + dims) == kExitConfig);
  const fs::path bad = scratch("bad.json");
  std::ofstream(bad) << "{ not json";
  CHECK(run("synthesize -c " + bad.string()) == kExitConfig);
  CHECK(run("frobnicate") == kExitConfig);
}

TEST_CASE("as_fraction") {
  CHECK(as_fraction(-2.0 / 9) == std::make_pair(-2LL, 9LL));
  CHECK(as_fraction(11.0 / 18) == std::make_pair(11LL, 18LL));
  CHECK(as_fraction(3.0) == std::make_pair(3LL, 1LL));
  CHECK(as_fraction(0.0) == std::make_pair(0LL, 1LL));
  CHECK_FALSE(as_fraction(std::sqrt(2.0)).has_value());
}
