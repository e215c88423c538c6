#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "ppmx/engine.hpp"
#include "ppmx/io.hpp"
#include "ppmx/predict.hpp"
#include "ppmx/simulate.hpp"

using namespace ppmx;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  fs::path p = fs::temp_directory_path() / ("ppmx_test_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("doubles survive the 17-digit round trip") {
  Rng rng(71);
  for (int i = 0; i < 200; ++i) {
    double x = std::exp(40 * (rng.uniform() - 0.5)) * (rng.uniform() < 0.5 ? -1 : 1);
    CHECK(parse_double(format_double(x), "t") == x);
  }
}

TEST_CASE("cohort csv round trip is exact") {
  ScenarioSpec spec = ScenarioSpec::preset("s1");
  spec.seed = 3;
  GeneratedDataset ds = generate_scenario(spec);
  auto dir = temp_dir("cohort");
  write_cohort_csv((dir / "train.csv").string(), ds.train);
  CohortData back = read_cohort_csv((dir / "train.csv").string());
  CHECK(back.K == ds.train.K);
  CHECK(back.P == ds.train.P);
  CHECK(back.Q == ds.train.Q);
  REQUIRE(back.arm_count() == ds.train.arm_count());
  for (int a = 0; a < back.arm_count(); ++a) {
    CHECK(back.arms[a].ids == ds.train.arms[a].ids);
    CHECK(back.arms[a].y == ds.train.arms[a].y);
    CHECK(back.arms[a].z == ds.train.arms[a].z);
    CHECK(back.arms[a].x == ds.train.arms[a].x);
  }
}

TEST_CASE("schema violations are rejected with named diagnostics") {
  auto dir = temp_dir("schema");
  {
    std::ofstream f(dir / "bad1.csv");
    f << "id,arm,z_1,x_1\np1,1,0.5,0.2\n";  // no response column
  }
  CHECK_THROWS_WITH_AS(read_cohort_csv((dir / "bad1.csv").string()),
                       doctest::Contains("response"), std::invalid_argument);
  {
    std::ofstream f(dir / "bad2.csv");
    f << "id,arm,response,z_1,x_1\np1,1,1,0.5,\n";  // empty numeric field
  }
  CHECK_THROWS(read_cohort_csv((dir / "bad2.csv").string()));
  {
    std::ofstream f(dir / "bad3.csv");
    f << "id,arm,response,z_1,x_1\np1,1,1,0.5,nan\n";  // non-finite
  }
  CHECK_THROWS(read_cohort_csv((dir / "bad3.csv").string()));
  {
    std::ofstream f(dir / "bad4.csv");
    f << "id,arm,response,z_1,x_2\np1,1,1,0.5,1.0\n";  // gap in covariate numbering
  }
  CHECK_THROWS_WITH_AS(read_cohort_csv((dir / "bad4.csv").string()), doctest::Contains("x_1"),
                       std::invalid_argument);
}

TEST_CASE("config json: overrides, unknown keys, appendix-weights alias") {
  nlohmann::json j = nlohmann::json::parse(R"({
    "iterations": 500, "burnin": 100, "similarity": {"enabled": false},
    "hyper": {"nu0": 5.0}, "paper_appendix_weights": true
  })");
  MCMCConfig cfg = config_from_json(j);
  CHECK(cfg.iterations == 500);
  CHECK(cfg.burnin == 100);
  CHECK_FALSE(cfg.sim.enabled);
  CHECK(cfg.hyper.nu0 == 5.0);
  CHECK_FALSE(cfg.v_ratio);
  CHECK(cfg.thinning == 5);  // default preserved

  nlohmann::json bad = {{"iterationz", 10}};
  CHECK_THROWS_WITH_AS(config_from_json(bad), doctest::Contains("iterationz"),
                       std::invalid_argument);

  // echo round trip
  MCMCConfig back = config_from_json(config_to_json(cfg));
  CHECK(back.iterations == cfg.iterations);
  CHECK(back.v_ratio == cfg.v_ratio);
  CHECK(back.sim.enabled == cfg.sim.enabled);
}

TEST_CASE("trace round trip reproduces identical predictions") {
  ScenarioSpec spec = ScenarioSpec::preset("s1");
  spec.seed = 17;
  GeneratedDataset ds = generate_scenario(spec);
  MCMCConfig cfg;
  cfg.iterations = 300;
  cfg.burnin = 100;
  cfg.thinning = 10;
  cfg.seed = 777;
  TraceStore tr = run_chain(ds.train, cfg);

  auto dir = temp_dir("trace");
  write_run(dir.string(), ds.train, cfg, {tr}, nlohmann::json::object());
  LoadedRun run = load_run(dir.string());
  REQUIRE(run.chains.size() == 1);
  TraceStore& back = run.chains[0];
  CHECK(back.kept() == tr.kept());

  PredictionConfig pc;
  pc.omega.omega = (Vector(3) << 0, 40, 100).finished();
  pc.sim = cfg.effective_sim();
  pc.m_slots = cfg.m_standby;
  pc.seed = 5;
  Matrix z(2, ds.train.P), x(2, ds.train.Q);
  z.setConstant(0.2);
  x.setConstant(0.5);
  std::vector<std::string> ids{"a", "b"};
  auto p1 = predict_patients(tr, z, x, ids, pc);
  auto p2 = predict_patients(back, z, x, ids, pc);
  for (std::size_t i = 0; i < p1.size(); ++i) {
    CHECK(p1[i].phi == p2[i].phi);
    CHECK(p1[i].median_probs == p2[i].median_probs);
    CHECK(p1[i].recommended == p2[i].recommended);
  }
}

TEST_CASE("recommendations csv round trip") {
  std::vector<Recommendation> recs;
  Recommendation r;
  r.id = "p7";
  r.phi = (Vector(2) << 46.7, 80.0).finished();
  r.recommended = 2;
  r.tie = false;
  r.median_probs = (Matrix(2, 3) << 0.2, 0.3, 0.5, 0.1, 0.1, 0.8).finished();
  recs.push_back(r);
  auto dir = temp_dir("recs");
  write_recommendations_csv((dir / "rec.csv").string(), recs);
  auto back = read_recommendations_csv((dir / "rec.csv").string());
  REQUIRE(back.size() == 1);
  CHECK(back[0].id == "p7");
  CHECK(back[0].phi == recs[0].phi);
  CHECK(back[0].median_probs == recs[0].median_probs);
  CHECK(back[0].recommended == 2);
}

TEST_CASE("newdata dimension mismatch is rejected") {
  auto dir = temp_dir("nd");
  {
    std::ofstream f(dir / "nd.csv");
    f << "id,z_1,x_1\nn1,0.1,0.4\n";
  }
  CHECK_THROWS(read_newdata_csv((dir / "nd.csv").string(), 2, 1));
  NewData nd = read_newdata_csv((dir / "nd.csv").string(), 1, 1);
  CHECK(nd.ids == std::vector<std::string>{"n1"});
}

TEST_CASE("cli end-to-end: exit codes and file outputs") {
  const char* cli = std::getenv("PPMX_CLI");
  REQUIRE_MESSAGE(cli != nullptr, "PPMX_CLI must point at the built binary");
  auto dir = temp_dir("cli");
  auto run = [&](const std::string& args) {
    std::string cmd = std::string(cli) + " " + args + " > " + (dir / "out.log").string() +
                      " 2> " + (dir / "err.log").string();
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
  };

  // usage error: unknown subcommand / missing required
  CHECK(run("frobnicate") == 1);
  CHECK(run("fit --data missing.csv --out x") == 1);  // --seed required

  // simulate a small dataset and fit briefly
  std::string sim_dir = (dir / "sim").string();
  CHECK(run("simulate --scenario s1 --seed 9 --out " + sim_dir) == 0);
  CHECK(fs::exists(sim_dir + "/train.csv"));
  CHECK(fs::exists(sim_dir + "/truth.csv"));
  CHECK(fs::exists(sim_dir + "/partition.csv"));

  std::string fit_dir = (dir / "fit").string();
  CHECK(run("fit --data " + sim_dir + "/train.csv --out " + fit_dir +
            " --seed 42 --iterations 120 --burnin 40 --thinning 4") == 0);
  CHECK(fs::exists(fit_dir + "/meta.json"));
  CHECK(fs::exists(fit_dir + "/report.txt"));
  CHECK(fs::exists(fit_dir + "/chain_1/partitions_1.csv"));

  std::string rec = (dir / "rec.csv").string();
  CHECK(run("predict --trace " + fit_dir + " --newdata " + sim_dir + "/newdata.csv --out " +
            rec + " --seed 5 --omega 0,40,100") == 0);
  CHECK(fs::exists(rec));

  std::string metrics = (dir / "metrics.csv").string();
  CHECK(run("evaluate --recommendations " + rec + " --truth " + sim_dir + "/truth.csv --out " +
            metrics) == 0);
  CHECK(fs::exists(metrics));

  // runtime error: data file with a missing column -> exit 2
  {
    std::ofstream f(dir / "broken.csv");
    f << "id,arm,z_1,x_1\np1,1,0.5,0.2\n";
  }
  CHECK(run("fit --data " + (dir / "broken.csv").string() + " --out " + (dir / "f2").string() +
            " --seed 1") == 2);

  // empty newdata -> exit 0, empty output
  {
    std::ofstream f(dir / "empty.csv");
    f << "id";
    for (int j = 1; j <= 2; ++j) f << ",z_" << j;
    for (int j = 1; j <= 4; ++j) f << ",x_" << j;
    f << "\n";
  }
  std::string rec2 = (dir / "rec_empty.csv").string();
  CHECK(run("predict --trace " + fit_dir + " --newdata " + (dir / "empty.csv").string() +
            " --out " + rec2 + " --seed 5") == 0);
  CHECK(read_recommendations_csv(rec2).empty());
}
