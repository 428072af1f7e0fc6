#pragma once

// Config-driven experiment runner: seeded training with periodic greedy
// evaluation, the Q1 context-variation sweep, the Q2 visibility pairing, the
// Q3 gravity-transfer protocol, and CSV/SVG emission.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <map>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "crl/cmdp.hpp"
#include "crl/ddpg.hpp"
#include "crl/dqn.hpp"
#include "crl/envs/registry.hpp"
#include "crl/sampler.hpp"
#include "crl/svg.hpp"

namespace crl {

// --- configuration --------------------------------------------------------

struct AgentConfig {
  std::string kind;  // "dqn" or "ddpg"
  DqnConfig dqn;
  DdpgConfig ddpg;
};

struct ExperimentConfig {
  std::string experiment_id;
  std::string env;
  SamplerSpec sampler;
  int n_instances = 100;
  VisibilityMode visibility;
  AgentConfig agent;
  std::int64_t total_steps = 1000000;
  std::int64_t eval_interval = 5000;
  int eval_instances = 0;  // 0: all train instances
  int eval_episodes_per_instance = 1;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  std::string output_dir = "runs";
  double gamma = 1.0;  // reporting discount; 1.0 = plain episode return

  void check() const {
    if (experiment_id.empty()) throw std::invalid_argument("config: empty experiment_id");
    if (seeds.empty()) throw std::invalid_argument("config: seeds must be nonempty");
    if (total_steps < 1 || eval_interval < 1 || total_steps % eval_interval != 0)
      throw std::invalid_argument(
          "config: eval_interval must divide total_steps");
    if (n_instances < 1) throw std::invalid_argument("config: n_instances >= 1");
    if (agent.kind != "dqn" && agent.kind != "ddpg")
      throw std::invalid_argument("config: agent.kind must be dqn or ddpg");
  }
};

namespace harness_detail {

inline void require_keys(const nlohmann::json& obj,
                         const std::vector<std::string>& allowed,
                         const std::string& where) {
  for (const auto& [k, v] : obj.items()) {
    (void)v;
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
      throw std::invalid_argument("config: unknown key '" + k + "' in " + where);
  }
}

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string join(const std::vector<std::string>& v, char sep = ';') {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += v[i];
  }
  return out;
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace harness_detail

inline VisibilityMode parse_visibility(const nlohmann::json& j) {
  harness_detail::require_keys(j, {"mode", "features", "normalize"}, "visibility");
  VisibilityMode v;
  const std::string mode = j.value("mode", "hidden");
  if (mode == "hidden") v.kind = VisibilityMode::Kind::kHidden;
  else if (mode == "visible_all") v.kind = VisibilityMode::Kind::kVisibleAll;
  else if (mode == "visible_subset") v.kind = VisibilityMode::Kind::kVisibleSubset;
  else throw std::invalid_argument("config: unknown visibility mode '" + mode + "'");
  v.features = j.value("features", std::vector<std::string>{});
  if (v.kind == VisibilityMode::Kind::kVisibleSubset && v.features.empty())
    throw std::invalid_argument("config: visible_subset needs features");
  v.normalize = j.value("normalize", false);
  return v;
}

inline nlohmann::json visibility_to_json(const VisibilityMode& v) {
  std::string mode;
  switch (v.kind) {
    case VisibilityMode::Kind::kHidden: mode = "hidden"; break;
    case VisibilityMode::Kind::kVisibleAll: mode = "visible_all"; break;
    case VisibilityMode::Kind::kVisibleSubset: mode = "visible_subset"; break;
  }
  return {{"mode", mode}, {"features", v.features}, {"normalize", v.normalize}};
}

inline std::string visibility_label(const VisibilityMode& v) {
  switch (v.kind) {
    case VisibilityMode::Kind::kHidden: return "hidden";
    case VisibilityMode::Kind::kVisibleAll: return "visible_all";
    case VisibilityMode::Kind::kVisibleSubset:
      return "visible_subset:" + harness_detail::join(v.features, '+');
  }
  return "?";
}

inline SamplerSpec parse_sampler(const nlohmann::json& j) {
  harness_detail::require_keys(
      j, {"mode", "sigma_rel", "mu", "sigma", "varied_features", "seed"},
      "sampler");
  SamplerSpec s;
  s.mode = sampler_mode_from_string(j.value("mode", "relative_normal"));
  s.sigma_rel = j.value("sigma_rel", 0.0);
  s.mu = j.value("mu", 0.0);
  s.sigma = j.value("sigma", 0.0);
  s.varied_features = j.value("varied_features", std::vector<std::string>{});
  s.seed = j.value("seed", std::uint64_t{0});
  return s;
}

inline AgentConfig parse_agent(const nlohmann::json& j) {
  AgentConfig a;
  a.kind = j.at("kind").get<std::string>();
  if (a.kind == "dqn") {
    harness_detail::require_keys(
        j,
        {"kind", "learning_rate", "batch_size", "buffer_size", "learning_starts",
         "gamma", "target_update_interval", "train_freq", "gradient_steps",
         "exploration_fraction", "exploration_final_eps", "hidden"},
        "agent");
    auto& c = a.dqn;
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.buffer_size = j.value("buffer_size", c.buffer_size);
    c.learning_starts = j.value("learning_starts", c.learning_starts);
    c.gamma = j.value("gamma", c.gamma);
    c.target_update_interval =
        j.value("target_update_interval", c.target_update_interval);
    c.train_freq = j.value("train_freq", c.train_freq);
    c.gradient_steps = j.value("gradient_steps", c.gradient_steps);
    c.exploration_fraction =
        j.value("exploration_fraction", c.exploration_fraction);
    c.exploration_final_eps =
        j.value("exploration_final_eps", c.exploration_final_eps);
    c.hidden = j.value("hidden", c.hidden);
  } else if (a.kind == "ddpg") {
    harness_detail::require_keys(
        j,
        {"kind", "actor_lr", "critic_lr", "batch_size", "buffer_size",
         "learning_starts", "gamma", "tau", "noise_sigma", "train_freq",
         "hidden"},
        "agent");
    auto& c = a.ddpg;
    c.actor_lr = j.value("actor_lr", c.actor_lr);
    c.critic_lr = j.value("critic_lr", c.critic_lr);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.buffer_size = j.value("buffer_size", c.buffer_size);
    c.learning_starts = j.value("learning_starts", c.learning_starts);
    c.gamma = j.value("gamma", c.gamma);
    c.tau = j.value("tau", c.tau);
    c.noise_sigma = j.value("noise_sigma", c.noise_sigma);
    c.train_freq = j.value("train_freq", c.train_freq);
    c.hidden = j.value("hidden", c.hidden);
  } else {
    throw std::invalid_argument("config: unknown agent kind '" + a.kind + "'");
  }
  return a;
}

inline ExperimentConfig parse_experiment_config(const nlohmann::json& j) {
  harness_detail::require_keys(
      j,
      {"experiment_id", "env", "sampler", "n_instances", "visibility", "agent",
       "total_steps", "eval_interval", "eval_instances",
       "eval_episodes_per_instance", "seeds", "output_dir", "gamma"},
      "experiment");
  ExperimentConfig c;
  c.experiment_id = j.at("experiment_id").get<std::string>();
  c.env = j.at("env").get<std::string>();
  c.sampler = parse_sampler(j.at("sampler"));
  c.n_instances = j.value("n_instances", c.n_instances);
  if (j.contains("visibility")) c.visibility = parse_visibility(j.at("visibility"));
  c.agent = parse_agent(j.at("agent"));
  c.total_steps = j.value("total_steps", c.total_steps);
  c.eval_interval = j.value("eval_interval", c.eval_interval);
  c.eval_instances = j.value("eval_instances", c.eval_instances);
  c.eval_episodes_per_instance =
      j.value("eval_episodes_per_instance", c.eval_episodes_per_instance);
  if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  c.output_dir = j.value("output_dir", c.output_dir);
  c.gamma = j.value("gamma", c.gamma);
  c.check();
  return c;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config '" + path + "'");
  return parse_experiment_config(nlohmann::json::parse(is));
}

inline nlohmann::json experiment_config_to_json(const ExperimentConfig& c) {
  nlohmann::json agent;
  if (c.agent.kind == "dqn") {
    const auto& d = c.agent.dqn;
    agent = {{"kind", "dqn"},
             {"learning_rate", d.learning_rate},
             {"batch_size", d.batch_size},
             {"buffer_size", d.buffer_size},
             {"learning_starts", d.learning_starts},
             {"gamma", d.gamma},
             {"target_update_interval", d.target_update_interval},
             {"train_freq", d.train_freq},
             {"gradient_steps", d.gradient_steps},
             {"exploration_fraction", d.exploration_fraction},
             {"exploration_final_eps", d.exploration_final_eps},
             {"hidden", d.hidden}};
  } else {
    const auto& d = c.agent.ddpg;
    agent = {{"kind", "ddpg"},        {"actor_lr", d.actor_lr},
             {"critic_lr", d.critic_lr}, {"batch_size", d.batch_size},
             {"buffer_size", d.buffer_size}, {"learning_starts", d.learning_starts},
             {"gamma", d.gamma},      {"tau", d.tau},
             {"noise_sigma", d.noise_sigma}, {"train_freq", d.train_freq},
             {"hidden", d.hidden}};
  }
  return {{"experiment_id", c.experiment_id},
          {"env", c.env},
          {"sampler",
           {{"mode", to_string(c.sampler.mode)},
            {"sigma_rel", c.sampler.sigma_rel},
            {"mu", c.sampler.mu},
            {"sigma", c.sampler.sigma},
            {"varied_features", c.sampler.varied_features},
            {"seed", c.sampler.seed}}},
          {"n_instances", c.n_instances},
          {"visibility", visibility_to_json(c.visibility)},
          {"agent", agent},
          {"total_steps", c.total_steps},
          {"eval_interval", c.eval_interval},
          {"eval_instances", c.eval_instances},
          {"eval_episodes_per_instance", c.eval_episodes_per_instance},
          {"seeds", c.seeds},
          {"output_dir", c.output_dir},
          {"gamma", c.gamma}};
}

inline std::string config_hash(const ExperimentConfig& c) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(harness_detail::fnv1a(
                    experiment_config_to_json(c).dump())));
  return buf;
}

// CRL_OUTPUT_ROOT overrides the configured output directory.
inline std::string resolve_output_dir(const ExperimentConfig& c) {
  if (const char* root = std::getenv("CRL_OUTPUT_ROOT"))
    return std::string(root) + "/" + c.experiment_id;
  return c.output_dir + "/" + c.experiment_id;
}

// --- evaluation records ---------------------------------------------------

struct EvalRecord {
  std::string experiment_id;
  std::string env;
  std::string varied_features;  // ';'-joined
  double sigma_rel = 0.0;
  double mu = 0.0, sigma = 0.0;
  std::string visibility;
  std::uint64_t seed = 0;
  std::int64_t step = 0;
  double mean_return = 0.0;
  double std_return = 0.0;
  int n_episodes = 0;
  int crash_count = 0;
};

inline const char* eval_record_csv_header() {
  return "experiment_id,env,varied_features,sigma_rel,mu,sigma,visibility,"
         "seed,step,mean_return,std_return,n_episodes,crash_count";
}

inline void write_eval_records_csv(const std::vector<EvalRecord>& records,
                                   const std::string& path) {
  using harness_detail::fmt_double;
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "'");
  os << eval_record_csv_header() << "\n";
  for (const auto& r : records) {
    os << r.experiment_id << "," << r.env << "," << r.varied_features << ","
       << fmt_double(r.sigma_rel) << "," << fmt_double(r.mu) << ","
       << fmt_double(r.sigma) << "," << r.visibility << "," << r.seed << ","
       << r.step << "," << fmt_double(r.mean_return) << ","
       << fmt_double(r.std_return) << "," << r.n_episodes << ","
       << r.crash_count << "\n";
  }
}

inline std::vector<EvalRecord> read_eval_records_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(is, line) || line != eval_record_csv_header())
    throw std::runtime_error("bad CSV header in '" + path + "'");
  std::vector<EvalRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string f;
    EvalRecord r;
    std::getline(ss, r.experiment_id, ',');
    std::getline(ss, r.env, ',');
    std::getline(ss, r.varied_features, ',');
    std::getline(ss, f, ','); r.sigma_rel = std::stod(f);
    std::getline(ss, f, ','); r.mu = std::stod(f);
    std::getline(ss, f, ','); r.sigma = std::stod(f);
    std::getline(ss, r.visibility, ',');
    std::getline(ss, f, ','); r.seed = std::stoull(f);
    std::getline(ss, f, ','); r.step = std::stoll(f);
    std::getline(ss, f, ','); r.mean_return = std::stod(f);
    std::getline(ss, f, ','); r.std_return = std::stod(f);
    std::getline(ss, f, ','); r.n_episodes = std::stoi(f);
    std::getline(ss, f, ','); r.crash_count = std::stoi(f);
    out.push_back(std::move(r));
  }
  return out;
}

// --- training -------------------------------------------------------------

struct SeedRunResult {
  std::uint64_t seed = 0;
  std::vector<EvalRecord> records;
  std::string checkpoint_path;
  std::string csv_path;
  bool failed = false;
  std::string error;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<SeedRunResult> seed_runs;
  std::string output_dir;
  InstanceSet instances;
};

namespace harness_detail {

// Population std (n denominator).
inline std::pair<double, double> mean_std(const std::vector<double>& v) {
  double mean = 0;
  for (double x : v) mean += x;
  mean /= v.size();
  double var = 0;
  for (double x : v) var += (x - mean) * (x - mean);
  return {mean, std::sqrt(var / v.size())};
}

inline CmdpWrapper make_wrapper(const ExperimentConfig& cfg,
                                const InstanceSet& set,
                                InstanceSchedule::Policy policy,
                                std::uint64_t schedule_seed) {
  InstanceSchedule sched;
  sched.policy = policy;
  sched.seed = schedule_seed;
  return CmdpWrapper(make_env(cfg.env), set, sched, cfg.visibility);
}

}  // namespace harness_detail

// Trains one seed and writes records.csv plus checkpoint.bin into
// out_dir/seed_<seed>/. All randomness derives from (seed) substreams; the
// instance set itself is fixed by the sampler seed in the config.
inline SeedRunResult run_single_seed(const ExperimentConfig& cfg,
                                     std::uint64_t seed,
                                     const InstanceSet& instances,
                                     const std::string& out_dir) {
  namespace fs = std::filesystem;
  SeedRunResult result;
  result.seed = seed;
  const std::string seed_dir = out_dir + "/seed_" + std::to_string(seed);
  fs::create_directories(seed_dir);

  try {
    auto train_wrapper = harness_detail::make_wrapper(
        cfg, instances, InstanceSchedule::Policy::kUniformRandom,
        Rng::substream(seed, 101).next_u64());
    auto eval_wrapper = harness_detail::make_wrapper(
        cfg, instances, InstanceSchedule::Policy::kRoundRobin, 0);
    const int obs_dim = train_wrapper.observation_dim();
    const EnvDescriptor desc = train_wrapper.base().descriptor();

    std::optional<DqnAgent> dqn;
    std::optional<DdpgAgent> ddpg;
    if (cfg.agent.kind == "dqn") {
      if (desc.action_kind != EnvDescriptor::ActionKind::kDiscrete)
        throw std::invalid_argument("dqn needs a discrete-action environment");
      dqn.emplace(obs_dim, desc.n_actions, cfg.agent.dqn, seed, cfg.total_steps);
    } else {
      if (desc.action_kind != EnvDescriptor::ActionKind::kContinuous)
        throw std::invalid_argument("ddpg needs a continuous-action environment");
      ddpg.emplace(obs_dim, desc.action_dim, desc.action_low, desc.action_high,
                   cfg.agent.ddpg, seed);
    }

    auto explore_act = [&](const std::vector<double>& obs) -> Action {
      if (dqn) return dqn->act(obs, true);
      return ddpg->act(obs, true);
    };
    Policy greedy = [&](const std::vector<double>& obs) -> Action {
      if (dqn) return Action(dqn->greedy(obs));
      return Action(ddpg->greedy(obs));
    };
    auto record_transition = [&](Transition t) {
      if (dqn) dqn->observe(std::move(t));
      else ddpg->observe(std::move(t));
    };

    const int n_eval = cfg.eval_instances > 0
                           ? std::min<int>(cfg.eval_instances, instances.size())
                           : static_cast<int>(instances.size());

    auto evaluate = [&](std::int64_t step) {
      std::vector<double> per_instance;
      int crashes = 0, episodes = 0;
      for (int i = 0; i < n_eval; ++i) {
        double total = 0;
        for (int ep = 0; ep < cfg.eval_episodes_per_instance; ++ep) {
          Rng rng = Rng::substream(Rng::substream(seed, 300).next_u64(),
                                   static_cast<std::uint64_t>(step) * 1000003u +
                                       static_cast<std::uint64_t>(i) * 101u + ep);
          std::vector<double> obs = eval_wrapper.reset_on(i, rng);
          double ret = 0, discount = 1.0;
          for (;;) {
            StepResult r = eval_wrapper.step(greedy(obs));
            ret += discount * r.reward;
            discount *= cfg.gamma;
            if (r.info.count("crashed") && r.info.at("crashed") != 0.0) ++crashes;
            if (r.done()) break;
            obs = std::move(r.observation);
          }
          total += ret;
          ++episodes;
        }
        per_instance.push_back(total / cfg.eval_episodes_per_instance);
      }
      auto [mean, sd] = harness_detail::mean_std(per_instance);
      EvalRecord rec;
      rec.experiment_id = cfg.experiment_id;
      rec.env = cfg.env;
      rec.varied_features = harness_detail::join(cfg.sampler.varied_features);
      rec.sigma_rel = cfg.sampler.mode == SamplerMode::kRelativeNormal
                          ? cfg.sampler.sigma_rel : 0.0;
      rec.mu = cfg.sampler.mode == SamplerMode::kAbsoluteNormal ? cfg.sampler.mu : 0.0;
      rec.sigma = cfg.sampler.mode == SamplerMode::kAbsoluteNormal ? cfg.sampler.sigma : 0.0;
      rec.visibility = visibility_label(cfg.visibility);
      rec.seed = seed;
      rec.step = step;
      rec.mean_return = mean;
      rec.std_return = sd;
      rec.n_episodes = episodes;
      rec.crash_count = crashes;
      result.records.push_back(std::move(rec));
    };

    Rng env_rng = Rng::substream(seed, 400);
    std::vector<double> obs = train_wrapper.reset(env_rng);
    std::int64_t step = 0;
    while (step < cfg.total_steps) {
      Action a = explore_act(obs);
      StepResult r = train_wrapper.step(a);
      Transition t;
      t.obs = obs;
      if (const int* ai = std::get_if<int>(&a))
        t.action = {static_cast<double>(*ai)};
      else
        t.action = std::get<std::vector<double>>(a);
      t.reward = r.reward;
      t.next_obs = r.observation;
      t.terminated = r.terminated;  // bootstrap through truncation
      record_transition(std::move(t));
      ++step;
      if (step % cfg.eval_interval == 0) evaluate(step);
      if (r.done())
        obs = train_wrapper.reset(env_rng);
      else
        obs = std::move(r.observation);
    }

    const std::string hash = config_hash(cfg);
    Checkpoint ck = dqn ? dqn->checkpoint(seed, hash) : ddpg->checkpoint(seed, hash);
    ck.header["env"] = cfg.env;
    ck.header["visibility"] = visibility_to_json(cfg.visibility);
    result.checkpoint_path = seed_dir + "/checkpoint.bin";
    ck.save(result.checkpoint_path);

    result.csv_path = seed_dir + "/records.csv";
    write_eval_records_csv(result.records, result.csv_path);

    nlohmann::json meta = {{"timestamp", static_cast<std::int64_t>(std::time(nullptr))}};
    std::ofstream(seed_dir + "/meta.json") << meta.dump(2) << "\n";
  } catch (const std::exception& e) {
    result.failed = true;
    result.error = e.what();
    std::ofstream(seed_dir + "/FAILED") << e.what() << "\n";
  }
  return result;
}

inline ExperimentResult run_training(const ExperimentConfig& cfg) {
  cfg.check();
  ExperimentResult res;
  res.config = cfg;
  res.output_dir = resolve_output_dir(cfg);
  std::filesystem::create_directories(res.output_dir);

  const ContextSpace& space = make_env(cfg.env)->context_space();
  res.instances = build_instance_set(space, cfg.sampler, cfg.n_instances);
  save_instance_set(res.instances, space, cfg.sampler,
                    res.output_dir + "/instances.jsonl");
  std::ofstream(res.output_dir + "/config.json")
      << experiment_config_to_json(cfg).dump(2) << "\n";

  std::vector<EvalRecord> all;
  for (std::uint64_t seed : cfg.seeds) {
    SeedRunResult r = run_single_seed(cfg, seed, res.instances, res.output_dir);
    if (!r.failed)
      all.insert(all.end(), r.records.begin(), r.records.end());
    res.seed_runs.push_back(std::move(r));
  }
  write_eval_records_csv(all, res.output_dir + "/records.csv");
  return res;
}

// Mean over seeds at each eval step, population std band.
struct LearningCurve {
  std::vector<double> steps;
  std::vector<double> mean;
  std::vector<double> std;
};

inline LearningCurve aggregate_curve(const std::vector<EvalRecord>& records) {
  std::map<std::int64_t, std::vector<double>> by_step;
  for (const auto& r : records) by_step[r.step].push_back(r.mean_return);
  LearningCurve c;
  for (const auto& [step, vals] : by_step) {
    auto [m, s] = harness_detail::mean_std(vals);
    c.steps.push_back(static_cast<double>(step));
    c.mean.push_back(m);
    c.std.push_back(s);
  }
  return c;
}

// Mean over the last k eval points of the seed-aggregated curve.
inline double final_performance(const std::vector<EvalRecord>& records, int k = 5) {
  LearningCurve c = aggregate_curve(records);
  if (c.mean.empty()) throw std::invalid_argument("final_performance: no records");
  const int n = static_cast<int>(c.mean.size());
  const int start = std::max(0, n - k);
  double sum = 0;
  for (int i = start; i < n; ++i) sum += c.mean[i];
  return sum / (n - start);
}

// --- Q1: context-variation sweep ------------------------------------------

struct SweepResult {
  std::vector<ExperimentResult> runs;  // per (feature, sigma), then baseline
  std::string output_dir;
};

inline SweepResult run_q1_sweep(const ExperimentConfig& base,
                                const std::vector<std::string>& features,
                                const std::vector<double>& sigmas = {0.1, 0.25, 0.5}) {
  if (base.visibility.kind != VisibilityMode::Kind::kHidden)
    throw std::invalid_argument("q1 sweep requires hidden visibility");
  SweepResult out;
  out.output_dir = resolve_output_dir(base);
  std::filesystem::create_directories(out.output_dir);

  std::vector<EvalRecord> all;
  auto run_one = [&](ExperimentConfig cfg) {
    ExperimentResult r = run_training(cfg);
    for (const auto& sr : r.seed_runs)
      all.insert(all.end(), sr.records.begin(), sr.records.end());
    out.runs.push_back(std::move(r));
  };

  for (const auto& feature : features) {
    for (double sigma : sigmas) {
      ExperimentConfig cfg = base;
      cfg.sampler.mode = SamplerMode::kRelativeNormal;
      cfg.sampler.varied_features = {feature};
      cfg.sampler.sigma_rel = sigma;
      char sbuf[32];
      std::snprintf(sbuf, sizeof(sbuf), "%g", sigma);
      cfg.experiment_id = base.experiment_id + "_" + feature + "_s" + sbuf;
      run_one(cfg);
    }
  }
  // default-context baseline: a single instance at defaults
  {
    ExperimentConfig cfg = base;
    cfg.sampler.mode = SamplerMode::kRelativeNormal;
    cfg.sampler.varied_features = {features.front()};
    cfg.sampler.sigma_rel = 0.0;
    cfg.n_instances = 1;
    cfg.experiment_id = base.experiment_id + "_baseline";
    run_one(cfg);
  }

  write_eval_records_csv(all, out.output_dir + "/sweep_records.csv");

  // one chart per feature, sigma curves plus the baseline
  for (const auto& feature : features) {
    std::vector<SvgSeries> series;
    for (double sigma : sigmas) {
      std::vector<EvalRecord> sel;
      for (const auto& r : all)
        if (r.varied_features == feature && r.sigma_rel == sigma &&
            r.experiment_id != base.experiment_id + "_baseline")
          sel.push_back(r);
      LearningCurve c = aggregate_curve(sel);
      char sbuf[32];
      std::snprintf(sbuf, sizeof(sbuf), "sigma_rel=%g", sigma);
      series.push_back({sbuf, c.steps, c.mean, c.std, ""});
    }
    std::vector<EvalRecord> baseline;
    for (const auto& r : all)
      if (r.experiment_id == base.experiment_id + "_baseline") baseline.push_back(r);
    LearningCurve c = aggregate_curve(baseline);
    series.push_back({"default context", c.steps, c.mean, c.std, "#000000"});
    write_line_chart(series, base.env + ": varying " + feature, "env steps",
                     "mean eval return",
                     out.output_dir + "/q1_" + feature + ".svg");
  }
  return out;
}

// --- Q2: visibility pairing -----------------------------------------------

struct PairResult {
  ExperimentResult hidden;
  ExperimentResult visible;
  double hidden_final = 0.0;
  double visible_final = 0.0;
  std::string output_dir;
};

inline PairResult run_q2_pair(const ExperimentConfig& base,
                              const std::string& feature,
                              double sigma_rel = 0.5) {
  ExperimentConfig cfg = base;
  cfg.sampler.mode = SamplerMode::kRelativeNormal;
  cfg.sampler.varied_features = {feature};
  cfg.sampler.sigma_rel = sigma_rel;

  ExperimentConfig hidden_cfg = cfg;
  hidden_cfg.visibility = VisibilityMode::hidden();
  hidden_cfg.experiment_id = base.experiment_id + "_" + feature + "_hidden";
  ExperimentConfig visible_cfg = cfg;
  visible_cfg.visibility = VisibilityMode::visible_all(base.visibility.normalize);
  visible_cfg.experiment_id = base.experiment_id + "_" + feature + "_visible";

  PairResult out;
  out.output_dir = resolve_output_dir(base);
  std::filesystem::create_directories(out.output_dir);
  out.hidden = run_training(hidden_cfg);
  out.visible = run_training(visible_cfg);

  // the arms must share one instance set (same sampler spec and seed)
  {
    const ContextSpace& space = make_env(base.env)->context_space();
    std::ostringstream a, b;
    save_instance_set(out.hidden.instances, space, hidden_cfg.sampler, a);
    save_instance_set(out.visible.instances, space, visible_cfg.sampler, b);
    if (a.str() != b.str())
      throw std::logic_error("q2 pair: instance sets differ between arms");
  }

  std::vector<EvalRecord> hidden_recs, visible_recs, all;
  for (const auto& sr : out.hidden.seed_runs)
    hidden_recs.insert(hidden_recs.end(), sr.records.begin(), sr.records.end());
  for (const auto& sr : out.visible.seed_runs)
    visible_recs.insert(visible_recs.end(), sr.records.begin(), sr.records.end());
  out.hidden_final = final_performance(hidden_recs);
  out.visible_final = final_performance(visible_recs);
  all = hidden_recs;
  all.insert(all.end(), visible_recs.begin(), visible_recs.end());
  write_eval_records_csv(all, out.output_dir + "/pair_records.csv");

  LearningCurve hc = aggregate_curve(hidden_recs);
  LearningCurve vc = aggregate_curve(visible_recs);
  write_line_chart({{"hidden", hc.steps, hc.mean, hc.std, ""},
                    {"visible", vc.steps, vc.mean, vc.std, ""}},
                   base.env + ": " + feature + " hidden vs visible", "env steps",
                   "mean eval return",
                   out.output_dir + "/q2_" + feature + ".svg");
  return out;
}

// --- Q3: gravity transfer -------------------------------------------------

struct TransferConfig {
  std::string checkpoint;
  struct Target {
    std::string label;
    double gravity = 0.0;  // magnitude, mapped to GRAVITY_Y = -gravity
  };
  std::vector<Target> targets;
  int episodes_per_target = 100;
  double game_over_penalty = 10000.0;
  double train_mu = 3.7;
  double train_sigma = 1.45;
  std::string output_dir = "runs/transfer";
  std::uint64_t eval_seed = 0;

  std::pair<double, double> in_distribution_interval() const {
    return {train_mu - 1.96 * train_sigma, train_mu + 1.96 * train_sigma};
  }
};

inline TransferConfig load_transfer_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config '" + path + "'");
  nlohmann::json j = nlohmann::json::parse(is);
  harness_detail::require_keys(
      j,
      {"checkpoint", "targets", "episodes_per_target", "game_over_penalty",
       "train_mu", "train_sigma", "output_dir", "eval_seed"},
      "transfer");
  TransferConfig c;
  c.checkpoint = j.value("checkpoint", std::string{});
  for (const auto& t : j.at("targets")) {
    harness_detail::require_keys(t, {"label", "gravity"}, "transfer target");
    c.targets.push_back({t.at("label").get<std::string>(),
                         t.at("gravity").get<double>()});
  }
  c.episodes_per_target = j.value("episodes_per_target", c.episodes_per_target);
  c.game_over_penalty = j.value("game_over_penalty", c.game_over_penalty);
  c.train_mu = j.value("train_mu", c.train_mu);
  c.train_sigma = j.value("train_sigma", c.train_sigma);
  c.output_dir = j.value("output_dir", c.output_dir);
  c.eval_seed = j.value("eval_seed", std::uint64_t{0});
  if (c.episodes_per_target < 1)
    throw std::invalid_argument("transfer: episodes_per_target >= 1");
  for (const auto& t : c.targets)
    if (-t.gravity < -20.0 || -t.gravity > -0.01)
      throw std::invalid_argument("transfer: gravity " + t.label +
                                  " outside lander GRAVITY_Y bounds");
  return c;
}

struct TransferTargetResult {
  std::string label;
  double gravity = 0.0;
  bool in_distribution = false;
  std::vector<double> returns;
  std::vector<bool> crashed;
  int crashes = 0;
  double mean_return = 0.0;
};

struct TransferResult {
  std::vector<TransferTargetResult> targets;
  std::string output_dir;
};

inline TransferResult run_transfer(const TransferConfig& cfg) {
  Checkpoint ck = Checkpoint::load(cfg.checkpoint);
  if (ck.header.at("agent") != "dqn")
    throw std::runtime_error("transfer expects a DQN lander checkpoint");
  if (ck.header.value("env", std::string{}) != "lander")
    throw std::runtime_error("transfer expects a lander checkpoint");
  VisibilityMode vis = parse_visibility(ck.header.at("visibility"));

  const auto sizes = ck.header.at("sizes").get<std::vector<int>>();
  DqnConfig dqn_cfg;
  dqn_cfg.hidden.assign(sizes.begin() + 1, sizes.end() - 1);
  DqnAgent agent(sizes.front(), sizes.back(), dqn_cfg, 0, 1);
  agent.restore(ck);

  TransferResult out;
  out.output_dir = cfg.output_dir;
  if (const char* root = std::getenv("CRL_OUTPUT_ROOT"))
    out.output_dir = std::string(root) + "/transfer";
  std::filesystem::create_directories(out.output_dir);

  const auto [lo, hi] = cfg.in_distribution_interval();
  const ContextSpace& space = LanderEnv::space();

  for (std::size_t ti = 0; ti < cfg.targets.size(); ++ti) {
    const auto& target = cfg.targets[ti];
    TransferTargetResult tr;
    tr.label = target.label;
    tr.gravity = target.gravity;
    tr.in_distribution = target.gravity >= lo && target.gravity <= hi;

    Context ctx = space.default_context();
    ctx.set("GRAVITY_Y", -target.gravity);
    InstanceSet set;
    set.instances.push_back({0, ctx});
    set.weights = {1.0};

    auto env = std::make_unique<LanderEnv>();
    env->set_game_over_penalty(cfg.game_over_penalty);
    LanderEnv* lander = env.get();
    CmdpWrapper wrapper(std::move(env), set, {}, vis);

    if (wrapper.observation_dim() != agent.obs_dim())
      throw std::runtime_error("transfer: checkpoint/visibility dim mismatch");

    for (int ep = 0; ep < cfg.episodes_per_target; ++ep) {
      Rng rng = Rng::substream(cfg.eval_seed, ti * 1000003u + ep);
      std::vector<double> obs = wrapper.reset_on(0, rng);
      double ret = 0;
      for (;;) {
        StepResult r = wrapper.step(Action(agent.greedy(obs)));
        ret += r.reward;
        if (r.done()) break;
        obs = std::move(r.observation);
      }
      const bool ep_crashed = lander->outcome() == LanderOutcome::kCrashed;
      if (ep_crashed) ++tr.crashes;
      tr.crashed.push_back(ep_crashed);
      tr.returns.push_back(ret);
    }
    auto [mean, sd] = harness_detail::mean_std(tr.returns);
    (void)sd;
    tr.mean_return = mean;
    out.targets.push_back(std::move(tr));
  }

  // per-episode CSV
  {
    using harness_detail::fmt_double;
    std::ofstream os(out.output_dir + "/transfer.csv", std::ios::binary);
    os << "label,gravity,in_distribution,episode,return,crashed\n";
    for (const auto& t : out.targets)
      for (std::size_t ep = 0; ep < t.returns.size(); ++ep)
        os << t.label << "," << fmt_double(t.gravity) << ","
           << (t.in_distribution ? 1 : 0) << "," << ep << ","
           << fmt_double(t.returns[ep]) << "," << (t.crashed[ep] ? 1 : 0)
           << "\n";
  }
  // summary CSV
  {
    using harness_detail::fmt_double;
    std::ofstream os(out.output_dir + "/transfer_summary.csv", std::ios::binary);
    os << "label,gravity,in_distribution,n_episodes,mean_return,crashes\n";
    for (const auto& t : out.targets)
      os << t.label << "," << fmt_double(t.gravity) << ","
         << (t.in_distribution ? 1 : 0) << "," << t.returns.size() << ","
         << fmt_double(t.mean_return) << "," << t.crashes << "\n";
  }
  std::vector<SvgDistribution> dists;
  for (const auto& t : out.targets)
    dists.push_back({t.label, t.returns, t.in_distribution});
  write_distribution_chart(dists, "Landing returns per target gravity",
                           "episode return",
                           out.output_dir + "/transfer.svg");
  return out;
}

}  // namespace crl
