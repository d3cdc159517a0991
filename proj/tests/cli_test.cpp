#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "projnod/errors.hpp"
#include "projnod_cli/commands.hpp"
#include "projnod_cli/scenario.hpp"

namespace projnod::cli {
namespace {

namespace fs = std::filesystem;

std::string scenario_path(const std::string& name) { return std::string(PROJNOD_SCENARIO_DIR) + "/" + name + ".json"; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("projnod_cli_test_" + name);
  fs::remove_all(dir);
  return dir;
}

const char* kSmallRing = R"({
  "graph": {"type": "ring", "n": 4},
  "constraints": {"options": 2, "default": [1, 0]}
})";

std::string with(const std::string& extra) {
  return std::string(R"({
  "graph": {"type": "ring", "n": 4},
  "constraints": {"options": 2, "default": [1, 0]},
)") + extra + "\n}";
}

TEST(ScenarioTest, DefaultsAreExplicitInResolvedDocument) {
  const Scenario sc = parse_scenario(kSmallRing);
  const auto& r = sc.resolved;
  EXPECT_EQ(r["params"]["d"], 0.3);
  EXPECT_EQ(r["params"]["u"], 0.14);
  EXPECT_EQ(r["params"]["sigmoid"], "tanh");
  EXPECT_EQ(r["integrator"]["dt"], 0.01);
  EXPECT_EQ(r["integrator"]["horizon"], 100.0);
  EXPECT_EQ(r["integrator"]["model"], "full");
  EXPECT_EQ(r["initial"]["type"], "seeded");
  EXPECT_EQ(r["seed"], 1u);
  // ring(4): lambda = 2, u* = 0.15, default window [0.5, 1.5] u*.
  EXPECT_DOUBLE_EQ(r["sweep"]["u_min"].get<double>(), 0.075);
  EXPECT_DOUBLE_EQ(r["sweep"]["u_max"].get<double>(), 0.22499999999999998);
  EXPECT_EQ(r["bias"].size(), 4u);
  // Re-parsing the resolved document reproduces the same run identity.
  nlohmann::json again = r;
  again.erase("output");
  EXPECT_EQ(parse_scenario(again.dump()).hash, sc.hash);
}

TEST(ScenarioTest, HashTracksRunInputsOnly) {
  const Scenario base = parse_scenario(kSmallRing);
  EXPECT_EQ(base.hash.size(), 16u);
  Overrides out;
  out.out_dir = "/somewhere/else";
  EXPECT_EQ(parse_scenario(kSmallRing, out).hash, base.hash);
  Overrides seed;
  seed.seed = 99;
  const Scenario seeded = parse_scenario(kSmallRing, seed);
  EXPECT_NE(seeded.hash, base.hash);
  EXPECT_EQ(seeded.seed, 99u);
  Overrides dt;
  dt.dt = 0.02;
  EXPECT_EQ(parse_scenario(kSmallRing, dt).integrator.dt, 0.02);
  EXPECT_NE(parse_scenario(kSmallRing, dt).hash, base.hash);
}

TEST(ScenarioTest, FnvMatchesReferenceVectors) {
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
  EXPECT_EQ(fnv1a_hex("foobar"), "85944171f73967e8");
}

TEST(ScenarioTest, ErrorsNameLineAndPointer) {
  try {
    parse_scenario(with(R"(  "params": {
    "d": 0.3,
    "gamma": -1
  })"));
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.pointer(), "/params/gamma");
    EXPECT_NE(std::string(e.what()).find("line 6"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_scenario(with(R"("extra": 1)")), ConfigError);
  EXPECT_THROW(parse_scenario(with(R"("bias": {"5": [1, 0]})")), ConfigError);
  EXPECT_THROW(parse_scenario(with(R"("bias": [[1, 0], [0, 0]])")), ConfigError);
  EXPECT_THROW(parse_scenario(with(R"("integrator": {"model": "reduced", "dt": 0})")), ConfigError);
  EXPECT_THROW(parse_scenario(with(R"("params": {"sigmoid": "relu"})")), ConfigError);
  EXPECT_THROW(parse_scenario(with(R"("initial": {"type": "explicit", "z": [[1, 2]]})")), ConfigError);
  EXPECT_THROW(parse_scenario(with(R"("seed": -4)")), ConfigError);
  EXPECT_THROW(parse_scenario("{\"graph\": {\"type\": \"ring\", \"n\": 1}, \"constraints\": {\"options\": 1}}"),
               ConfigError);
  EXPECT_THROW(parse_scenario("{\"graph\": {\"type\": \"hexagon\", \"n\": 6}}"), ConfigError);
  EXPECT_THROW(parse_scenario("[1, 2"), ConfigError);
}

TEST(ScenarioTest, AsymmetricAdjacencyNamesInvariant) {
  try {
    load_scenario(scenario_path("asymmetric"));
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.invariant(), "adjacency-symmetric");
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(ScenarioTest, LocateLine) {
  const std::string text = "{\n  \"a\": {\n    \"b\": [1,\n      2]\n  },\n  \"c/d\": \"x\"\n}";
  EXPECT_EQ(locate_line(text, ""), 1);
  EXPECT_EQ(locate_line(text, "/a"), 2);
  EXPECT_EQ(locate_line(text, "/a/b"), 3);
  EXPECT_EQ(locate_line(text, "/a/b/1"), 4);
  EXPECT_EQ(locate_line(text, "/c~1d"), 6);
  EXPECT_FALSE(locate_line(text, "/zzz").has_value());
}

TEST(ScenarioTest, HeterogeneousAlignmentHelper) {
  const Scenario sc = load_scenario(scenario_path("ring6_centrality"));
  const EffectiveNetwork en = effective_adjacency(sc.graph, sc.constraints);
  EXPECT_NEAR(en.alignment(0, 1), 0.9, 1e-15);
  EXPECT_EQ(en.alignment(2, 3), 1.0);
}

TEST(ScenarioTest, InitialStateKinds) {
  const Scenario eff = parse_scenario(with(R"("initial": {"type": "effective", "y": [1, -2, 0, 3]})"));
  EXPECT_EQ(eff.initial_state().col(0), (Eigen::Vector4d(1, -2, 0, 3)));
  const Scenario seeded = parse_scenario(kSmallRing);
  EXPECT_EQ(seeded.initial_state(), seeded_initial_state(seeded.constraints, 1, 0.01));
}

TEST(SimulateTest, BiasSignFlipsWithConstraint) {
  const SimulateResult hom = run_simulate(load_scenario(scenario_path("complete6_homogeneous")));
  EXPECT_NEAR((*hom.effective_bias)(1), 0.577, 1e-3);
  for (const auto& d : hom.decisions) EXPECT_EQ(d, "positive");
  const SimulateResult het = run_simulate(load_scenario(scenario_path("complete6_skewed")));
  EXPECT_NEAR((*het.effective_bias)(1), -0.302, 1e-3);
  for (const auto& d : het.decisions) EXPECT_EQ(d, "negative");
  EXPECT_LE(het.drift.maxCoeff(), 1e-8);
  EXPECT_EQ(het.summary["decisions"].size(), 6u);
}

TEST(SimulateTest, SubcriticalWithoutBiasIsNeutral) {
  const SimulateResult r = run_simulate(parse_scenario(R"({
    "graph": {"type": "complete", "n": 6},
    "constraints": {"options": 3, "default": [1, 1, 1]},
    "params": {"u": 0.05}
  })"));
  EXPECT_LE(r.final_y->cwiseAbs().maxCoeff(), 1e-6);
  for (const auto& d : r.decisions) EXPECT_EQ(d, "neutral");
}

TEST(SimulateTest, ReducedModelAgreesWithFull) {
  Scenario full = load_scenario(scenario_path("complete6_skewed"));
  const SimulateResult a = run_simulate(full);
  full.model = "reduced";
  const SimulateResult b = run_simulate(full);
  EXPECT_LE((*a.final_y - *b.final_y).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(SimulateTest, RankTwoHasNoEffectiveState) {
  const SimulateResult r = run_simulate(load_scenario(scenario_path("star4_rank2")));
  EXPECT_FALSE(r.final_y.has_value());
  EXPECT_TRUE(r.summary["final_y"].is_null());
  EXPECT_LE(r.drift.maxCoeff(), 1e-8);
}

TEST(BifurcateTest, PitchforkAtThreshold) {
  const Scenario sc = load_scenario(scenario_path("complete6_pitchfork"));
  const BifurcateResult r = run_bifurcate(sc);
  EXPECT_NEAR(r.ls.u_star, 0.0857142857142857142857, 1e-15);
  const double step = (sc.sweep.u_max - sc.sweep.u_min) / (sc.sweep.u_steps - 1);
  for (int s = 0; s < sc.sweep.u_steps; ++s) {
    const double u = r.newton.grid[s];
    if (u < r.ls.u_star - step) EXPECT_EQ(r.newton.equilibria_at(s), 1) << u;
    if (u > r.ls.u_star + step) EXPECT_EQ(r.newton.equilibria_at(s), 3) << u;
  }
  EXPECT_EQ(r.unfolding.grid, r.newton.grid);
}

TEST(BifurcateTest, PersistentBranchFollowsUnfoldingSign) {
  for (const auto& [name, sign] : {std::pair{"complete6_homogeneous", 1.0}, std::pair{"complete6_skewed", -1.0}}) {
    Overrides ov;
    ov.u_min = 0.02;
    ov.u_max = 0.2;
    ov.u_steps = 19;
    const BifurcateResult r = run_bifurcate(load_scenario(scenario_path(name), ov));
    EXPECT_GT(r.ls.unfold * sign, 0.0) << name;
    // The branch continued from the lowest u never passes through the neutral state.
    const int b0 = r.newton.at(0).front()->branch;
    int samples = 0;
    for (const auto& pt : r.newton.points) {
      if (pt.branch != b0) continue;
      ++samples;
      EXPECT_GT(pt.x_ls * sign, 0.0) << name << " u=" << pt.u;
      EXPECT_EQ(pt.stability, Stability::Stable) << name << " u=" << pt.u;
    }
    EXPECT_EQ(samples, 19) << name;
  }
}

TEST(CentralityTest, RingsAreMinimalAtTheHeterogeneousAgent) {
  for (const char* name : {"ring6_centrality", "ring7_centrality"}) {
    const CentralityResult r = run_centrality(load_scenario(scenario_path(name)));
    const Eigen::VectorXd approx = *r.report.approx;
    const int n = static_cast<int>(approx.size());
    for (int dist = 1; dist <= n / 2; ++dist) {
      EXPECT_GT(approx(dist), approx(0)) << name;
      EXPECT_GE(approx(dist) + 1e-15, approx(dist - 1)) << name;
    }
    EXPECT_EQ(r.summary["ranking"].back(), 1) << name;
    EXPECT_NEAR(r.summary["delta"].get<double>(), -0.1, 1e-15);
  }
}

TEST(CentralityTest, UniformStarHubIsTwiceLeaf) {
  const CentralityResult r = run_centrality(load_scenario(scenario_path("star5_uniform")));
  const Eigen::VectorXd& v = r.report.exact.vector;
  for (int j = 1; j < 5; ++j) EXPECT_NEAR(v(0) / v(j), 2.0, 1e-12);
  EXPECT_NEAR(r.summary["lambda_exact"].get<double>(), 2.0, 1e-12);
}

TEST(VerifyTest, ValidScenariosPass) {
  for (const char* name : {"complete6_homogeneous", "complete6_skewed", "ring6_centrality", "star5_uniform"}) {
    const VerifyResult r = run_verify(load_scenario(scenario_path(name)));
    EXPECT_TRUE(r.ok()) << name;
    for (const auto& c : r.checks) EXPECT_EQ(c.status, "pass") << name << " " << c.name << " " << c.detail;
    EXPECT_EQ(r.checks.size(), 6u);
  }
}

TEST(VerifyTest, RankTwoSkipsReducedChecks) {
  const VerifyResult r = run_verify(load_scenario(scenario_path("star4_rank2")));
  EXPECT_TRUE(r.ok());
  int skipped = 0;
  for (const auto& c : r.checks) {
    if (c.status == "skipped (rank>1)") ++skipped;
    if (c.name == "invariance-drift") EXPECT_EQ(c.status, "pass");
  }
  EXPECT_EQ(skipped, 3);
}

TEST(DeterminismTest, OutputsAreByteIdentical) {
  const Scenario sc = load_scenario(scenario_path("complete6_skewed"));
  std::ostringstream log;
  Scenario a = sc, b = sc;
  a.out_dir = fresh_dir("a").string();
  b.out_dir = fresh_dir("b").string();
  for (Scenario* s : {&a, &b}) {
    write_simulate(*s, run_simulate(*s), log);
    write_centrality(*s, run_centrality(*s), log);
  }
  Overrides small;
  small.u_steps = 9;
  small.horizon = 30;
  Scenario c = load_scenario(scenario_path("complete6_skewed"), small), d = c;
  c.out_dir = a.out_dir;
  d.out_dir = b.out_dir;
  write_bifurcate(c, run_bifurcate(c), log);
  write_bifurcate(d, run_bifurcate(d), log);
  write_sweep(c, run_sweep(c, 1), log);
  write_sweep(d, run_sweep(d, 4), log);
  int files = 0;
  for (const auto& entry : fs::directory_iterator(a.out_dir)) {
    const fs::path other = fs::path(b.out_dir) / entry.path().filename();
    ASSERT_TRUE(fs::exists(other)) << other;
    EXPECT_EQ(slurp(entry.path()), slurp(other)) << entry.path().filename();
    ++files;
  }
  EXPECT_EQ(files, 7);
}

TEST(DeterminismTest, EveryOutputCarriesHashAndSeed) {
  Overrides small;
  small.u_steps = 5;
  small.horizon = 10;
  Scenario sc = load_scenario(scenario_path("complete6_homogeneous"), small);
  sc.out_dir = fresh_dir("headers").string();
  std::ostringstream log;
  write_simulate(sc, run_simulate(sc), log);
  write_bifurcate(sc, run_bifurcate(sc), log);
  write_centrality(sc, run_centrality(sc), log);
  write_sweep(sc, run_sweep(sc), log);
  write_verify(sc, run_verify(sc), log);
  for (const auto& entry : fs::directory_iterator(sc.out_dir)) {
    const std::string body = slurp(entry.path());
    if (entry.path().extension() == ".csv") {
      EXPECT_EQ(body.rfind("# scenario_hash=" + sc.hash + "\n# seed=7\n", 0), 0u) << entry.path();
    } else {
      const auto doc = nlohmann::json::parse(body);
      EXPECT_EQ(doc["scenario_hash"], sc.hash) << entry.path();
      EXPECT_EQ(doc["seed"], 7u) << entry.path();
    }
  }
}

TEST(SweepTest, ParallelMatchesSerial) {
  Overrides ov;
  ov.u_steps = 12;
  ov.horizon = 40;
  const Scenario sc = load_scenario(scenario_path("complete6_homogeneous"), ov);
  const SweepResult one = run_sweep(sc, 1), many = run_sweep(sc, 6);
  ASSERT_EQ(one.rows.size(), 12u);
  for (std::size_t k = 0; k < 12; ++k) {
    EXPECT_EQ(one.rows[k].u, many.rows[k].u);
    EXPECT_EQ(one.rows[k].z, many.rows[k].z);
  }
  // Above threshold the agents commit to the bias direction.
  EXPECT_GT(one.rows.back().y->minCoeff(), 0.0);
}

class BinaryTest : public ::testing::Test {
 protected:
  static int run(const std::string& args) {
    const std::string cmd = std::string(PROJNOD_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
  }
};

TEST_F(BinaryTest, ExitCodes) {
  const std::string out = " --out " + fresh_dir("bin").string();
  EXPECT_EQ(run("centrality --config " + scenario_path("ring6_centrality") + out), 0);
  EXPECT_EQ(run("verify --config " + scenario_path("star4_rank2") + out), 0);
  EXPECT_EQ(run("verify --config " + scenario_path("asymmetric") + out), 1);
  EXPECT_EQ(run("simulate --config " + scenario_path("asymmetric") + out), 2);
  EXPECT_EQ(run("simulate --config /nonexistent.json" + out), 2);
  EXPECT_EQ(run("simulate" + out), 2);
  EXPECT_EQ(run("simulate --config " + scenario_path("complete6_homogeneous") + " --dt 100 --horizon 100000" + out), 3);
  EXPECT_EQ(run("simulate --config " + scenario_path("complete6_homogeneous") + " --print-config"), 0);
  EXPECT_EQ(run("bifurcate --config " + scenario_path("star4_rank2") + out), 2);
}

TEST_F(BinaryTest, CommandLineRunsAreByteIdentical) {
  const fs::path a = fresh_dir("cli_a"), b = fresh_dir("cli_b");
  for (const fs::path& dir : {a, b}) {
    ASSERT_EQ(run("simulate --config " + scenario_path("complete6_skewed") + " --seed 11 --horizon 20 --out " +
                  dir.string()),
              0);
  }
  const std::string csv = slurp(a / "complete6_skewed_trajectory.csv");
  EXPECT_FALSE(csv.empty());
  EXPECT_EQ(csv, slurp(b / "complete6_skewed_trajectory.csv"));
  EXPECT_NE(csv.find("# seed=11\n"), std::string::npos);
}

}  // namespace
}  // namespace projnod::cli
