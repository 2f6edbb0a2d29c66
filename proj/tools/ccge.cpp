#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ccge/common/errors.hpp"
#include "ccge/envs/environment.hpp"
#include "ccge/harness/aggregate.hpp"
#include "ccge/harness/config.hpp"
#include "ccge/harness/run.hpp"
#include "ccge/nn/checkpoint.hpp"
#include "ccge/sac/agent.hpp"

namespace fs = std::filesystem;
using namespace ccge;

namespace {

void apply_overrides(harness::RunConfig& config, const std::vector<std::string>& sets) {
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    harness::apply_setting(config, s.substr(0, eq), s.substr(eq + 1));
  }
  config.validate();
}

void print_summary(const std::vector<harness::RunResult>& results) {
  for (const auto& r : results) {
    std::cout << r.dir.string();
    if (!r.records.empty()) {
      const auto& last = r.records.back();
      std::cout << "  step " << last.step << "  eval_return " << last.eval_return << "  eval_success "
                << last.eval_success;
    }
    std::cout << (r.reused ? "  (reused)" : "") << "\n";
  }
}

int eval_checkpoint(const std::string& path, const std::string& env_id, int episodes, std::uint64_t seed) {
  const nn::Checkpoint ckpt = nn::checkpoint_load(path);
  auto env = envs::make_env(env_id);
  std::function<std::vector<double>(std::span<const double>)> policy;
  if (auto it = ckpt.networks.find("actor"); it != ckpt.networks.end()) {
    const sac::GaussianActor<float> actor(it->second, it->second.output_size() / 2);
    policy = [actor](std::span<const double> obs) {
      const MatrixF a = actor.mean_action(sac::to_row(obs));
      return std::vector<double>(a.data(), a.data() + a.size());
    };
  } else if (auto q = ckpt.networks.find("q"); q != ckpt.networks.end()) {
    const nn::Mlp<float> net = q->second;
    const int count = net.output_size() / 2;
    policy = [net, count](std::span<const double> obs) {
      const MatrixF out = net.forward(sac::to_row(obs));
      Eigen::Index best = 0;
      out.row(0).leftCols(count).maxCoeff(&best);
      return std::vector<double>{static_cast<double>(best)};
    };
  } else {
    throw CheckpointFormatError("checkpoint holds neither an 'actor' nor a 'q' network");
  }
  Rng rng = make_rng(seed, Stream::kEval);
  const auto result = harness::evaluate(*env, policy, episodes, rng);
  std::cout << "episodes " << episodes << "\nmean_return " << harness::format_number(result.mean_return)
            << "\niqm_return " << harness::format_number(result.iqm_return) << "\nmean_success "
            << harness::format_number(result.mean_success) << "\n";
  return 0;
}

std::vector<double> parse_lambdas(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    harness::RunConfig scratch;
    harness::apply_setting(scratch, "lambda", item);
    out.push_back(scratch.lambda);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Soft actor-critic with critic-confidence guided exploration"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "runs";
  std::vector<std::string> sets;
  std::int64_t seed = -1;
  int jobs = 1;
  bool reuse = false;

  auto* train = app.add_subcommand("train", "Train every seed of a config");
  train->add_option("--config", config_path, "key=value config file")->required()->check(CLI::ExistingFile);
  train->add_option("--seed", seed, "Run only this seed");
  train->add_option("--jobs", jobs, "Seeds trained in parallel")->check(CLI::PositiveNumber);
  train->add_option("--out", out_dir, "Output root directory");
  train->add_option("--set", sets, "Override a config key (key=value), repeatable");
  train->add_flag("--reuse", reuse, "Skip seeds whose completed output already matches the config");

  std::string checkpoint;
  std::string env_id;
  int episodes = 10;
  std::int64_t eval_seed = 0;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint with its deterministic policy");
  eval->add_option("--checkpoint", checkpoint)->required()->check(CLI::ExistingFile);
  eval->add_option("--env", env_id)->required();
  eval->add_option("--episodes", episodes)->check(CLI::PositiveNumber);
  eval->add_option("--seed", eval_seed);

  std::string lambdas_text;
  auto* sweep = app.add_subcommand("sweep-lambda", "Train a config over a grid of lambda values");
  sweep->add_option("--config", config_path)->required()->check(CLI::ExistingFile);
  sweep->add_option("--lambdas", lambdas_text, "Comma-separated lambda grid")->required();
  sweep->add_option("--jobs", jobs)->check(CLI::PositiveNumber);
  sweep->add_option("--out", out_dir);
  sweep->add_option("--set", sets);
  sweep->add_flag("--reuse", reuse);

  std::string study_env = "cartpole";
  auto* study = app.add_subcommand("study-dqn", "DQN with a logged explicit-uncertainty head");
  study->add_option("--env", study_env)->check(CLI::IsMember({"cartpole", "mountaincar"}));
  study->add_option("--config", config_path)->check(CLI::ExistingFile);
  study->add_option("--jobs", jobs)->check(CLI::PositiveNumber);
  study->add_option("--out", out_dir);
  study->add_option("--set", sets);
  study->add_flag("--reuse", reuse);

  std::vector<std::string> run_dirs;
  std::string summary_out = "summary.csv";
  auto* agg = app.add_subcommand("aggregate", "IQM and bootstrap CIs across seed directories");
  agg->add_option("dirs", run_dirs, "Seed directories containing metrics.csv")->required();
  agg->add_option("--out", summary_out);

  CLI11_PARSE(app, argc, argv);

  try {
    harness::RunOptions options;
    options.jobs = jobs;
    options.reuse_completed = reuse;
    options.quiet = false;
    if (train->parsed()) {
      harness::RunConfig config = harness::load_config(config_path);
      apply_overrides(config, sets);
      if (seed >= 0) config.seeds = {static_cast<std::uint64_t>(seed)};
      print_summary(harness::run(config, out_dir, options));
    } else if (eval->parsed()) {
      return eval_checkpoint(checkpoint, env_id, episodes, static_cast<std::uint64_t>(eval_seed));
    } else if (sweep->parsed()) {
      harness::RunConfig config = harness::load_config(config_path);
      apply_overrides(config, sets);
      const auto rows = harness::sweep_lambda(config, parse_lambdas(lambdas_text), out_dir, options);
      std::cout << "wrote " << (fs::path(out_dir) / "sweep.csv").string() << " (" << rows.size() << " rows)\n";
    } else if (study->parsed()) {
      harness::RunConfig config = config_path.empty()
                                      ? harness::default_config(harness::Algorithm::kDqnStudy, study_env)
                                      : harness::load_config(config_path);
      if (config.algorithm != harness::Algorithm::kDqnStudy) throw ConfigError("study-dqn needs algorithm = dqn-study");
      config.env = config_path.empty() ? study_env : config.env;
      apply_overrides(config, sets);
      print_summary(harness::run(config, out_dir, options));
    } else if (agg->parsed()) {
      std::vector<fs::path> dirs(run_dirs.begin(), run_dirs.end());
      harness::write_summary(harness::aggregate(dirs), summary_out);
      std::cout << "wrote " << summary_out << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
