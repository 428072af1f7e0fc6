// Command-line front end for the contextual-RL benchmark: training runs,
// the Q1/Q2 protocols, gravity transfer, context sampling, environment
// descriptions and plotting from result CSVs.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crl/harness.hpp"

namespace {

int cmd_train(const std::string& config_path, std::int64_t seed_override,
              std::int64_t steps_override) {
  crl::ExperimentConfig cfg = crl::load_experiment_config(config_path);
  if (seed_override >= 0)
    cfg.seeds = {static_cast<std::uint64_t>(seed_override)};
  if (steps_override > 0) cfg.total_steps = steps_override;
  cfg.check();
  crl::ExperimentResult res = crl::run_training(cfg);
  bool any_failed = false;
  for (const auto& sr : res.seed_runs) {
    if (sr.failed) {
      std::cerr << "seed " << sr.seed << " FAILED: " << sr.error << "\n";
      any_failed = true;
    } else {
      std::cout << "seed " << sr.seed << ": " << sr.records.size()
                << " eval records, checkpoint " << sr.checkpoint_path << "\n";
    }
  }
  std::cout << "results in " << res.output_dir << "\n";
  return any_failed ? 1 : 0;
}

int cmd_transfer(const std::string& config_path, const std::string& checkpoint) {
  crl::TransferConfig cfg = crl::load_transfer_config(config_path);
  if (!checkpoint.empty()) cfg.checkpoint = checkpoint;
  if (cfg.checkpoint.empty())
    throw std::runtime_error("transfer: no checkpoint given");
  crl::TransferResult res = crl::run_transfer(cfg);
  const auto [lo, hi] = cfg.in_distribution_interval();
  std::printf("train distribution 95%% interval: [%.3f, %.3f]\n", lo, hi);
  for (const auto& t : res.targets)
    std::printf("%-10s g=%6.2f  %-6s mean return %10.2f  crashes %d/%zu\n",
                t.label.c_str(), t.gravity, t.in_distribution ? "in" : "out",
                t.mean_return, t.crashes, t.returns.size());
  std::cout << "results in " << res.output_dir << "\n";
  return 0;
}

int cmd_sweep_q1(const std::string& config_path) {
  crl::ExperimentConfig cfg = crl::load_experiment_config(config_path);
  std::vector<std::string> features = cfg.sampler.varied_features;
  crl::SweepResult res = crl::run_q1_sweep(cfg, features);
  std::cout << res.runs.size() << " runs, results in " << res.output_dir << "\n";
  return 0;
}

int cmd_pair_q2(const std::string& config_path, const std::string& feature) {
  crl::ExperimentConfig cfg = crl::load_experiment_config(config_path);
  crl::PairResult res = crl::run_q2_pair(cfg, feature, cfg.sampler.sigma_rel > 0
                                                           ? cfg.sampler.sigma_rel
                                                           : 0.5);
  std::printf("final performance: hidden %.2f, visible %.2f\n",
              res.hidden_final, res.visible_final);
  std::cout << "results in " << res.output_dir << "\n";
  return 0;
}

int cmd_sample_contexts(const std::string& config_path, const std::string& out) {
  crl::ExperimentConfig cfg = crl::load_experiment_config(config_path);
  const crl::ContextSpace& space = crl::make_env(cfg.env)->context_space();
  crl::InstanceSet set =
      crl::build_instance_set(space, cfg.sampler, cfg.n_instances);
  crl::save_instance_set(set, space, cfg.sampler, out);
  std::cout << set.size() << " instances written to " << out << "\n";
  return 0;
}

int cmd_describe(const std::string& env_name) {
  crl::EnvDescriptor d = crl::describe(env_name);
  std::cout << "env: " << env_name << "\n";
  if (d.action_kind == crl::EnvDescriptor::ActionKind::kDiscrete)
    std::cout << "action: discrete(" << d.n_actions << ")\n";
  else
    std::printf("action: continuous(dim=%d, [%g, %g])\n", d.action_dim,
                d.action_low, d.action_high);
  std::cout << "state_dim: " << d.state_dim << "\n"
            << "n_cf: " << d.n_cf << "\n"
            << "n_cf_reward: " << d.n_cf_reward << "\n"
            << "n_cf_dynamics: " << d.n_cf_dynamics << "\n";
  const crl::ContextSpace& space = crl::make_env(env_name)->context_space();
  std::cout << "context features (name default lower upper):\n";
  for (const auto& f : space.features())
    std::printf("  %-20s %10g %10g %10g%s\n", f.name.c_str(), f.default_value,
                f.lower, f.upper, space.is_inert(f.name) ? "  (inert)" : "");
  return 0;
}

int cmd_plot(const std::string& input, const std::string& out) {
  auto records = crl::read_eval_records_csv(input);
  if (records.empty()) throw std::runtime_error("plot: no records in " + input);
  // one curve per (experiment_id, visibility)
  std::map<std::string, std::vector<crl::EvalRecord>> groups;
  for (const auto& r : records)
    groups[r.experiment_id + " [" + r.visibility + "]"].push_back(r);
  std::vector<crl::SvgSeries> series;
  for (const auto& [label, recs] : groups) {
    crl::LearningCurve c = crl::aggregate_curve(recs);
    series.push_back({label, c.steps, c.mean, c.std, ""});
  }
  crl::write_line_chart(series, "Learning curves", "env steps",
                        "mean eval return", out);
  std::cout << "wrote " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contextual-RL benchmark runner"};
  app.require_subcommand(1);

  std::string config_path, checkpoint, feature, env_name, input, out;
  std::int64_t seed_override = -1, steps_override = 0;

  auto* train = app.add_subcommand("train", "Train per an experiment config");
  train->add_option("--config", config_path, "experiment config JSON")->required();
  train->add_option("--seed", seed_override, "run only this seed");
  train->add_option("--steps", steps_override, "override total_steps");

  auto* transfer = app.add_subcommand("transfer", "Gravity-transfer evaluation");
  transfer->add_option("--config", config_path, "transfer config JSON")->required();
  transfer->add_option("--checkpoint", checkpoint, "lander DQN checkpoint");

  auto* sweep = app.add_subcommand("sweep-q1", "Context-variation sweep");
  sweep->add_option("--config", config_path, "base experiment config")->required();

  auto* pair = app.add_subcommand("pair-q2", "Hidden/visible paired runs");
  pair->add_option("--config", config_path, "base experiment config")->required();
  pair->add_option("--feature", feature, "varied context feature")->required();

  auto* sample = app.add_subcommand("sample-contexts", "Materialize an instance set");
  sample->add_option("--config", config_path, "experiment config")->required();
  sample->add_option("--out", out, "output instance-set file")->required();

  auto* describe = app.add_subcommand("describe", "Describe an environment");
  describe->add_option("--env", env_name, "environment name")->required();

  auto* plot = app.add_subcommand("plot", "Plot learning curves from a CSV");
  plot->add_option("--input", input, "records CSV")->required();
  plot->add_option("--out", out, "output SVG")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return cmd_train(config_path, seed_override, steps_override);
    if (transfer->parsed()) return cmd_transfer(config_path, checkpoint);
    if (sweep->parsed()) return cmd_sweep_q1(config_path);
    if (pair->parsed()) return cmd_pair_q2(config_path, feature);
    if (sample->parsed()) return cmd_sample_contexts(config_path, out);
    if (describe->parsed()) return cmd_describe(env_name);
    if (plot->parsed()) return cmd_plot(input, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
