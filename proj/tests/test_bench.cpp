#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "aa/bench.hpp"
#include "aa/solve.hpp"

namespace aa {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class TempDir {
 public:
  explicit TempDir(const std::string& tag)
      : path_(fs::temp_directory_path() /
              (tag + "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name())) {
    fs::remove_all(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunSpec hb_spec() {
  RunSpec spec;
  spec.family = Family::hb_linear;
  spec.sizes = {{"n", 50}};
  spec.methods = {Method::km, Method::aa1s};
  spec.config.k_max = 200;
  return spec;
}

TEST(RunSpecJson, ParsesAllKeys) {
  const json j = json::parse(R"({
    "family": "vi_mdp", "sizes": {"S": 20, "A": 4}, "methods": ["km", "aa1s"],
    "repeats": 3,
    "config": {"memory": 7, "alpha": 1.0, "tol": 1e-8, "seed": 9, "record_timing": false}
  })");
  const RunSpec spec = run_spec_from_json(j);
  EXPECT_EQ(spec.family, Family::vi_mdp);
  EXPECT_EQ(spec.sizes.at("S"), 20);
  ASSERT_EQ(spec.methods.size(), 2u);
  EXPECT_EQ(spec.methods[1], Method::aa1s);
  EXPECT_EQ(spec.repeats, 3);
  EXPECT_EQ(spec.config.memory, 7);
  EXPECT_EQ(spec.config.seed, 9u);
  EXPECT_FALSE(spec.config.record_timing);
  EXPECT_DOUBLE_EQ(spec.config.theta_bar, 0.01);
}

TEST(RunSpecJson, RoundTrip) {
  RunSpec spec = hb_spec();
  spec.config.tau = 0.01;
  const RunSpec back = run_spec_from_json(to_json(spec));
  EXPECT_EQ(back.family, spec.family);
  EXPECT_EQ(back.methods, spec.methods);
  EXPECT_EQ(back.config.tau, 0.01);
  EXPECT_EQ(back.config.k_max, 200);
  EXPECT_EQ(back.sizes.at("n"), 50);
}

TEST(RunSpecJson, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(run_spec_from_json(json::parse(R"({"famly": "vi_mdp"})")), std::invalid_argument);
  EXPECT_THROW(run_spec_from_json(json::parse(R"({"config": {"mem": 3}})")),
               std::invalid_argument);
  EXPECT_THROW(run_spec_from_json(json::parse(R"({"family": "nope"})")), std::invalid_argument);
  EXPECT_THROW(run_spec_from_json(json::parse(R"({"methods": ["aa9"]})")), std::invalid_argument);
  EXPECT_THROW(run_spec_from_json(json::parse(R"({"repeats": "x"})")), std::invalid_argument);
  EXPECT_THROW(run_spec_from_json(json::parse("[1]")), std::invalid_argument);
}

TEST(RunSpec, Validate) {
  RunSpec spec;
  spec.repeats = 0;
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  spec = RunSpec{};
  spec.methods.clear();
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  spec = RunSpec{};
  spec.csv_path = "x.csv";
  EXPECT_THROW(spec.validate(), std::invalid_argument);
}

TEST(TraceCsv, HeaderAndRows) {
  FixedPointProblem p;
  p.dim = 1;
  p.map = [](const Vector& x) { return Vector(0.5 * x); };
  p.regime = Regime::contractive(0.5, "l2");
  SolveConfig c;
  c.km_alpha = 1.0;
  c.k_max = 2;
  c.record_timing = false;
  const SolveResult r = run(p, Vector::Ones(1), c, Method::km);
  std::ostringstream out;
  write_trace_csv(out, Method::km, r);
  EXPECT_EQ(out.str(),
            "k,method,step_type,residual_l2,relative_residual,f_evals_cum,elapsed_s\n"
            "0,km,init,0.5,1,1,0\n"
            "1,km,KM,0.25,0.5,2,0\n"
            "2,km,KM,0.125,0.25,3,0\n");
}

TEST(CmdRun, WritesTracesAndSummary) {
  TempDir dir("aa_run");
  const RunSummary s = cmd_run(hb_spec(), dir.path());
  ASSERT_EQ(s.instances.size(), 1u);
  EXPECT_TRUE(fs::exists(dir.path() / "instance_000" / "km.csv"));
  EXPECT_TRUE(fs::exists(dir.path() / "instance_000" / "aa1s.csv"));
  const json j = json::parse(slurp(dir.path() / "summary.json"));
  EXPECT_EQ(j["spec"]["family"], "hb_linear");
  ASSERT_EQ(j["instances"][0]["runs"].size(), 2u);
  EXPECT_EQ(j["instances"][0]["runs"][0]["method"], "km");
  EXPECT_EQ(j["instances"][0]["seed"], 456);
  EXPECT_DOUBLE_EQ(s.instances[0].runs[0].time_ratio.value_or(0.0), 1.0);
  // Trace length matches the reported iteration count.
  std::ifstream in(dir.path() / "instance_000" / "km.csv");
  int lines = 0;
  for (std::string line; std::getline(in, line);) ++lines;
  EXPECT_EQ(lines, s.instances[0].runs[0].iterations + 2);
}

TEST(CmdRun, RepeatsUseConsecutiveSeeds) {
  TempDir dir("aa_repeat");
  RunSpec spec = hb_spec();
  spec.repeats = 3;
  const RunSummary s = cmd_run(spec, dir.path(), 3);
  ASSERT_EQ(s.instances.size(), 3u);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(s.instances[i].seed, 456u + i);
    EXPECT_TRUE(fs::exists(dir.path() / s.instances[i].directory / "aa1s.csv"));
  }
  EXPECT_NE(slurp(dir.path() / "instance_000" / "km.csv"),
            slurp(dir.path() / "instance_001" / "km.csv"));
}

TEST(CmdRun, UnreachableToleranceIsNotConverged) {
  TempDir dir("aa_tol");
  RunSpec spec = hb_spec();
  spec.methods = {Method::km};
  spec.config.tol = 1e-300;
  spec.config.k_max = 20;
  const RunSummary s = cmd_run(spec, dir.path());
  EXPECT_FALSE(s.instances[0].runs[0].converged);
  EXPECT_FALSE(s.instances[0].runs[0].iterations_to_tol.has_value());
  EXPECT_EQ(s.instances[0].runs[0].status, "max_iterations");
}

TEST(CmdRun, DeterministicTracesAreByteIdentical) {
  TempDir a("aa_det_a"), b("aa_det_b");
  RunSpec spec;
  spec.family = Family::pgd_nnls;
  spec.sizes = {{"m", 10}, {"n", 20}};
  spec.config.record_timing = false;
  spec.repeats = 2;
  cmd_run(spec, a.path(), 1);
  cmd_run(spec, b.path(), 4);
  for (const char* inst : {"instance_000", "instance_001"}) {
    for (const char* m : {"km.csv", "aa1.csv", "aa1s.csv", "aa2.csv"}) {
      EXPECT_EQ(slurp(a.path() / inst / m), slurp(b.path() / inst / m)) << inst << '/' << m;
    }
  }
  EXPECT_EQ(slurp(a.path() / "summary.json"), slurp(b.path() / "summary.json"));
}

TEST(CmdRun, InvalidConfigForRegime) {
  TempDir dir("aa_bad");
  RunSpec spec;
  spec.sizes = {{"m", 5}, {"n", 8}};
  spec.config.alpha = 1.0;
  EXPECT_THROW(cmd_run(spec, dir.path()), std::invalid_argument);
}

TEST(CmdSweepMemory, KeysAndFiles) {
  TempDir dir("aa_sweep");
  RunSpec spec;
  spec.family = Family::vi_mdp;
  spec.sizes = {{"S", 20}, {"A", 4}};
  spec.config.alpha = 1.0;
  const MemorySweepSummary s = cmd_sweep_memory(spec, {2, 5}, dir.path());
  for (const char* f : {"aa1s_m2.csv", "aa1_m2.csv", "aa1s_m5.csv", "aa1_m5.csv"}) {
    EXPECT_TRUE(fs::exists(dir.path() / "instance_000" / f)) << f;
  }
  const json j = json::parse(slurp(dir.path() / "summary.json"));
  std::vector<std::string> keys;
  for (const auto& [k, _] : j["memories"].items()) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"2", "5"}));
  EXPECT_EQ(j["memories"]["5"]["aa1s"]["iterations_to_tol"].size(), 1u);
  ASSERT_EQ(s.instances[0].runs.size(), 4u);
  EXPECT_EQ(s.instances[0].runs[2].memory, 5);
}

TEST(CmdSweepMemory, Errors) {
  TempDir dir("aa_sweep_err");
  RunSpec spec;
  EXPECT_THROW(cmd_sweep_memory(spec, {}, dir.path()), std::invalid_argument);
  EXPECT_THROW(cmd_sweep_memory(spec, {0}, dir.path()), std::invalid_argument);
  EXPECT_THROW(cmd_sweep_memory(spec, {3, 3}, dir.path()), std::invalid_argument);
}

TEST(CmdVerify, ListsEverySuiteOnce) {
  TempDir dir("aa_verify");
  VerifyOptions opts;
  opts.probes = 50;
  const auto reports = cmd_verify(opts, dir.path());
  EXPECT_EQ(reports.size(), invariant_suites().size());
  const json j = json::parse(slurp(dir.path() / "verify.json"));
  EXPECT_EQ(j["suites"].size(), reports.size());
  EXPECT_TRUE(j["passed"].get<bool>());
}

TEST(CmdGenerate, WritesInstanceFiles) {
  TempDir dir("aa_gen");
  RunSpec spec;
  spec.family = Family::scs_lp;
  spec.sizes = {{"m", 4}, {"n", 3}};
  spec.repeats = 2;
  cmd_generate(spec, dir.path());
  const json j = json::parse(slurp(dir.path() / "instance_001.json"));
  EXPECT_EQ(j["family"], "scs_lp");
  EXPECT_TRUE(fs::exists(dir.path() / "instance_000.json"));
}

TEST(InstanceJson, CarriesStartAndSolution) {
  SeededRng rng(3);
  const auto gp = generate(Family::hb_linear, rng, {{"n", 4}});
  const json j = instance_to_json(gp);
  EXPECT_EQ(j["x0"].size(), 8u);
  EXPECT_EQ(j["known_solution"].size(), 8u);
}

}  // namespace
}  // namespace aa
