#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "crl/harness.hpp"

using namespace crl;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  REQUIRE(is);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

nlohmann::json minimal_config_json() {
  return {
      {"experiment_id", "t"},
      {"env", "pendulum"},
      {"sampler",
       {{"mode", "relative_normal"}, {"sigma_rel", 0.1},
        {"varied_features", {"l"}}, {"seed", 1}}},
      {"n_instances", 3},
      {"agent", {{"kind", "ddpg"}}},
      {"total_steps", 100},
      {"eval_interval", 50},
      {"seeds", {0}},
  };
}

// Tiny pendulum DDPG run that finishes in well under a second.
ExperimentConfig tiny_config(const std::string& id) {
  ExperimentConfig cfg;
  cfg.experiment_id = id;
  cfg.env = "pendulum";
  cfg.sampler.mode = SamplerMode::kRelativeNormal;
  cfg.sampler.sigma_rel = 0.25;
  cfg.sampler.varied_features = {"l"};
  cfg.sampler.seed = 9;
  cfg.n_instances = 3;
  cfg.visibility = VisibilityMode::hidden();
  cfg.agent.kind = "ddpg";
  cfg.agent.ddpg.hidden = {8};
  cfg.agent.ddpg.batch_size = 16;
  cfg.agent.ddpg.learning_starts = 32;
  cfg.total_steps = 200;
  cfg.eval_interval = 100;
  cfg.eval_episodes_per_instance = 1;
  cfg.seeds = {0};
  return cfg;
}

struct OutputRootGuard {
  explicit OutputRootGuard(const fs::path& p) {
    setenv("CRL_OUTPUT_ROOT", p.string().c_str(), 1);
  }
  ~OutputRootGuard() { unsetenv("CRL_OUTPUT_ROOT"); }
};

fs::path fresh_dir(const std::string& tag) {
  fs::path p = fs::temp_directory_path() / ("crl_harness_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("unknown config keys are a hard error") {
  auto j = minimal_config_json();
  j["typo_key"] = 1;
  REQUIRE_THROWS_AS(parse_experiment_config(j), std::invalid_argument);

  j = minimal_config_json();
  j["sampler"]["sigma"] = 0.5;  // allowed
  REQUIRE_NOTHROW(parse_experiment_config(j));
  j["sampler"]["sgima_rel"] = 0.5;
  REQUIRE_THROWS_AS(parse_experiment_config(j), std::invalid_argument);

  j = minimal_config_json();
  j["agent"]["actor_lr"] = 1e-4;  // allowed for ddpg
  REQUIRE_NOTHROW(parse_experiment_config(j));
  j["agent"]["exploration_fraction"] = 0.1;  // dqn-only key under ddpg
  REQUIRE_THROWS_AS(parse_experiment_config(j), std::invalid_argument);
}

TEST_CASE("eval interval must divide total steps") {
  auto j = minimal_config_json();
  j["eval_interval"] = 33;
  REQUIRE_THROWS_AS(parse_experiment_config(j), std::invalid_argument);
}

TEST_CASE("visible_subset requires features") {
  auto j = minimal_config_json();
  j["visibility"] = {{"mode", "visible_subset"}};
  REQUIRE_THROWS_AS(parse_experiment_config(j), std::invalid_argument);
  j["visibility"] = {{"mode", "visible_subset"}, {"features", {"l"}}};
  REQUIRE_NOTHROW(parse_experiment_config(j));
}

TEST_CASE("config json round-trips through parse") {
  ExperimentConfig a = tiny_config("rt");
  ExperimentConfig b = parse_experiment_config(experiment_config_to_json(a));
  REQUIRE(experiment_config_to_json(b) == experiment_config_to_json(a));
  REQUIRE(config_hash(a) == config_hash(b));
}

TEST_CASE("config hash is sensitive to every changed field") {
  ExperimentConfig a = tiny_config("h");
  ExperimentConfig b = a;
  b.sampler.sigma_rel = 0.5;
  REQUIRE(config_hash(a) != config_hash(b));
  ExperimentConfig c = a;
  c.agent.ddpg.tau = 0.01;
  REQUIRE(config_hash(a) != config_hash(c));
}

TEST_CASE("mean_std of (1,3) is (2,1)") {
  auto [m, s] = harness_detail::mean_std({1.0, 3.0});
  REQUIRE(m == Approx(2.0));
  REQUIRE(s == Approx(1.0));
}

TEST_CASE("eval records survive a CSV round trip") {
  std::vector<EvalRecord> recs;
  EvalRecord r;
  r.experiment_id = "e";
  r.env = "pendulum";
  r.varied_features = "l;g";
  r.sigma_rel = 0.1 + 1e-17;
  r.visibility = "hidden";
  r.seed = 3;
  r.step = 5000;
  r.mean_return = -123.456789012345678;
  r.std_return = 0.25;
  r.n_episodes = 10;
  r.crash_count = 2;
  recs.push_back(r);
  r.seed = 4;
  r.mean_return = 1e-300;
  recs.push_back(r);

  fs::path dir = fresh_dir("csv");
  const std::string path = (dir / "r.csv").string();
  write_eval_records_csv(recs, path);
  auto back = read_eval_records_csv(path);
  REQUIRE(back.size() == 2);
  REQUIRE(back[0].varied_features == "l;g");
  REQUIRE(back[0].mean_return == recs[0].mean_return);  // %.17g is lossless
  REQUIRE(back[1].mean_return == recs[1].mean_return);
  REQUIRE(back[0].crash_count == 2);

  // header mismatch is rejected
  std::ofstream(dir / "bad.csv") << "step,mean\n1,2\n";
  REQUIRE_THROWS_AS(read_eval_records_csv((dir / "bad.csv").string()),
                    std::runtime_error);
}

TEST_CASE("final_performance averages the last k aggregated points") {
  std::vector<EvalRecord> recs;
  for (std::uint64_t seed : {0ull, 1ull}) {
    for (int i = 1; i <= 4; ++i) {
      EvalRecord r;
      r.seed = seed;
      r.step = i * 100;
      r.mean_return = i * 10.0 + (seed ? 2.0 : 0.0);  // step means 11,21,31,41
      recs.push_back(r);
    }
  }
  REQUIRE(final_performance(recs, 2) == Approx(36.0));
  REQUIRE(final_performance(recs, 100) == Approx(26.0));  // clamps to all
  REQUIRE_THROWS_AS(final_performance({}, 2), std::invalid_argument);
}

TEST_CASE("training runs are byte-identical across repeats") {
  fs::path root_a = fresh_dir("det_a"), root_b = fresh_dir("det_b");
  ExperimentConfig cfg = tiny_config("det");
  {
    OutputRootGuard g(root_a);
    run_training(cfg);
  }
  {
    OutputRootGuard g(root_b);
    run_training(cfg);
  }
  for (const char* rel :
       {"det/records.csv", "det/instances.jsonl", "det/config.json",
        "det/seed_0/records.csv", "det/seed_0/checkpoint.bin"}) {
    REQUIRE(slurp((root_a / rel).string()) == slurp((root_b / rel).string()));
  }
  // different training seed changes the results
  ExperimentConfig other = cfg;
  other.seeds = {1};
  fs::path root_c = fresh_dir("det_c");
  {
    OutputRootGuard g(root_c);
    run_training(other);
  }
  REQUIRE(slurp((root_a / "det/seed_0/records.csv").string()) !=
          slurp((root_c / "det/seed_1/records.csv").string()));
  // but the instance set only depends on the sampler seed
  REQUIRE(slurp((root_a / "det/instances.jsonl").string()) ==
          slurp((root_c / "det/instances.jsonl").string()));
}

TEST_CASE("one record per seed per eval point") {
  fs::path root = fresh_dir("rec");
  OutputRootGuard g(root);
  ExperimentConfig cfg = tiny_config("rec");
  cfg.total_steps = 100;
  cfg.eval_interval = 100;
  cfg.seeds = {0, 1};
  ExperimentResult res = run_training(cfg);
  auto recs = read_eval_records_csv((root / "rec/records.csv").string());
  REQUIRE(recs.size() == 2);
  for (const auto& r : recs) {
    REQUIRE(r.step == 100);
    REQUIRE(r.n_episodes == 3);  // one episode per instance
    REQUIRE(r.env == "pendulum");
    REQUIRE(r.visibility == "hidden");
  }
  REQUIRE(res.seed_runs.size() == 2);
  REQUIRE_FALSE(res.seed_runs[0].failed);
}

TEST_CASE("transfer config validates gravity against lander bounds") {
  nlohmann::json j = {
      {"checkpoint", "x.bin"},
      {"targets", {{{"label", "mars"}, {"gravity", 3.7}}}},
  };
  fs::path dir = fresh_dir("tc");
  std::ofstream(dir / "ok.json") << j.dump();
  TransferConfig c = load_transfer_config((dir / "ok.json").string());
  auto [lo, hi] = c.in_distribution_interval();
  REQUIRE(lo == Approx(0.858));
  REQUIRE(hi == Approx(6.542));
  REQUIRE(c.game_over_penalty == 10000.0);

  j["targets"].push_back({{"label", "jupiter"}, {"gravity", 24.79}});
  std::ofstream(dir / "bad.json") << j.dump();
  REQUIRE_THROWS_AS(load_transfer_config((dir / "bad.json").string()),
                    std::invalid_argument);

  j["targets"] = {{{"label", "mars"}, {"gravity", 3.7}}};
  j["typo"] = 1;
  std::ofstream(dir / "key.json") << j.dump();
  REQUIRE_THROWS_AS(load_transfer_config((dir / "key.json").string()),
                    std::invalid_argument);
}

TEST_CASE("transfer evaluates a lander checkpoint per target") {
  fs::path dir = fresh_dir("transfer");
  // untrained tiny agent; transfer only needs a structurally valid checkpoint
  DqnConfig dqn_cfg;
  dqn_cfg.hidden = {8};
  DqnAgent agent(8, 4, dqn_cfg, 1, 1);
  Checkpoint ck = agent.checkpoint(1, "h");
  ck.header["env"] = "lander";
  ck.header["visibility"] = visibility_to_json(VisibilityMode::hidden());
  const std::string ck_path = (dir / "checkpoint.bin").string();
  ck.save(ck_path);

  TransferConfig cfg;
  cfg.checkpoint = ck_path;
  cfg.targets = {{"neptune", 11.15}, {"mars", 3.7}};
  cfg.episodes_per_target = 2;
  cfg.output_dir = (dir / "out").string();
  TransferResult res = run_transfer(cfg);

  REQUIRE(res.targets.size() == 2);
  REQUIRE_FALSE(res.targets[0].in_distribution);  // 11.15 > 6.542
  REQUIRE(res.targets[1].in_distribution);
  for (const auto& t : res.targets) {
    REQUIRE(t.returns.size() == 2);
    REQUIRE(t.crashed.size() == 2);
    int crashes = 0;
    for (bool c : t.crashed) crashes += c;
    REQUIRE(crashes == t.crashes);
    // crashes under the 10000 penalty imply strongly negative returns
    for (std::size_t ep = 0; ep < t.returns.size(); ++ep)
      if (t.crashed[ep]) REQUIRE(t.returns[ep] < -9000.0);
  }
  REQUIRE(fs::exists(dir / "out/transfer.csv"));
  REQUIRE(fs::exists(dir / "out/transfer_summary.csv"));
  REQUIRE(fs::exists(dir / "out/transfer.svg"));

  // repeat run is deterministic
  TransferResult res2 = run_transfer(cfg);
  for (std::size_t i = 0; i < res.targets.size(); ++i)
    REQUIRE(res.targets[i].returns == res2.targets[i].returns);

  // architecture mismatch between checkpoint and visibility dim
  ck.header["visibility"] = visibility_to_json(VisibilityMode::visible_all());
  ck.save(ck_path);
  REQUIRE_THROWS_AS(run_transfer(cfg), std::runtime_error);
}

TEST_CASE("checkpoint binary round-trips header and blobs") {
  fs::path dir = fresh_dir("ck");
  Checkpoint ck;
  ck.header = {{"agent", "dqn"}, {"sizes", {3, 8, 2}}, {"seed", 7}};
  ck.blobs = {{1.0f, -2.5f, 3.25f}, {0.0f}};
  const std::string path = (dir / "c.bin").string();
  ck.save(path);
  Checkpoint back = Checkpoint::load(path);
  REQUIRE(back.header == ck.header);
  REQUIRE(back.blobs == ck.blobs);
}
