#include "ccge/harness/run.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <deque>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "ccge/ccge/ccge.hpp"
#include "ccge/common/errors.hpp"
#include "ccge/dqn/dqn.hpp"
#include "ccge/harness/aggregate.hpp"
#include "ccge/harness/stats.hpp"
#include "ccge/nn/checkpoint.hpp"
#include "ccge/oracle/oracle.hpp"
#include "ccge/replay/replay_buffer.hpp"
#include "ccge/sac/agent.hpp"
#include "ccge/uncertainty/estimate.hpp"

#ifndef CCGE_CODE_VERSION
#define CCGE_CODE_VERSION "unknown"
#endif

namespace ccge::harness {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kDiagnosticSteps = 50;

struct StepDiag {
  std::int64_t step = 0;
  double reward = 0.0;
  bool guided = false;
  double k = kNaN;
  double epsilon = kNaN;
  double critic_loss = kNaN;
  double actor_loss = kNaN;
  double alpha = kNaN;
};

json diag_to_json(const StepDiag& d) {
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(format_number(v)); };
  return {{"step", d.step},           {"reward", num(d.reward)},         {"guided", d.guided},
          {"k", num(d.k)},            {"epsilon", num(d.epsilon)},       {"critic_loss", num(d.critic_loss)},
          {"actor_loss", num(d.actor_loss)}, {"alpha", num(d.alpha)}};
}

void write_text(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
  }
  fs::rename(tmp, path);
}

// Running means over the interval between two evaluations.
struct IntervalStats {
  std::size_t steps = 0;
  std::size_t guided = 0;
  double k_sum = 0.0;
  std::size_t k_count = 0;
  double eps_sum = 0.0;
  std::size_t eps_count = 0;
  std::size_t updates = 0;
  double critic = 0.0;
  double uncertainty = 0.0;
  double actor = 0.0;
  double alpha_loss = 0.0;
  double episode_eps_sum = 0.0;
  std::size_t episodes = 0;

  static double mean(double sum, std::size_t n) { return n ? sum / static_cast<double>(n) : kNaN; }
};

class DiagnosticLog {
 public:
  void push(const StepDiag& d) {
    if (ring_.size() == kDiagnosticSteps) ring_.pop_front();
    ring_.push_back(d);
  }
  StepDiag& back() { return ring_.back(); }
  void dump(const fs::path& dir, const std::string& what) const {
    json doc{{"error", what}, {"last_steps", json::array()}};
    for (const auto& d : ring_) doc["last_steps"].push_back(diag_to_json(d));
    write_text(dir / "diagnostics.json", doc.dump(2) + "\n");
  }

 private:
  std::deque<StepDiag> ring_;
};

std::string manifest_text(const RunConfig& config, std::uint64_t seed, const std::string& run_id, bool complete) {
  json doc{{"run_id", run_id},
           {"config_hash", config.hash_hex()},
           {"config", config.to_text(false)},
           {"seed", seed},
           {"rng_algorithm", std::string(kRngAlgorithm)},
           {"code_version", CCGE_CODE_VERSION},
           {"complete", complete}};
  return doc.dump(2) + "\n";
}

std::vector<float> to_float(std::span<const double> v) { return {v.begin(), v.end()}; }

class Writer {
 public:
  Writer(const fs::path& dir, bool log_steps) : dir_(dir) {
    metrics_.open(dir / "metrics.csv.tmp", std::ios::binary | std::ios::trunc);
    metrics_ << metrics_header() << "\n";
    timing_.open(dir / "timing.csv", std::ios::binary | std::ios::trunc);
    timing_ << "step,wall_seconds\n";
    if (log_steps) {
      steps_.open(dir / "steps.csv.tmp", std::ios::binary | std::ios::trunc);
      steps_ << "step,episode,reward,guided,k,epsilon\n";
    }
    start_ = std::chrono::steady_clock::now();
  }

  void record(const MetricRecord& r) {
    metrics_ << format_record(r) << "\n";
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    timing_ << r.step << "," << format_number(secs) << "\n";
    timing_.flush();
  }

  void step(std::int64_t step, std::int64_t episode, double reward, bool guided, double k, double eps) {
    if (!steps_.is_open()) return;
    steps_ << step << "," << episode << "," << format_number(reward) << "," << (guided ? 1 : 0) << ","
           << format_number(k) << "," << format_number(eps) << "\n";
  }

  void finish() {
    metrics_.close();
    fs::rename(dir_ / "metrics.csv.tmp", dir_ / "metrics.csv");
    if (steps_.is_open()) {
      steps_.close();
      fs::rename(dir_ / "steps.csv.tmp", dir_ / "steps.csv");
    }
  }

  void abort() {
    metrics_.close();
    if (steps_.is_open()) steps_.close();
    std::error_code ec;
    fs::rename(dir_ / "metrics.csv.tmp", dir_ / "metrics.csv", ec);
    fs::rename(dir_ / "steps.csv.tmp", dir_ / "steps.csv", ec);
  }

 private:
  fs::path dir_;
  std::ofstream metrics_;
  std::ofstream timing_;
  std::ofstream steps_;
  std::chrono::steady_clock::time_point start_;
};

sac::SacConfig sac_config(const RunConfig& c, bool explicit_head) {
  sac::SacConfig s;
  s.hidden = c.hidden;
  s.optimizer.learning_rate = c.learning_rate;
  s.optimizer.weight_decay = c.weight_decay;
  s.gamma = c.gamma;
  s.tau = c.tau;
  s.batch_size = c.batch_size;
  s.ensemble_size = c.ensemble_size;
  s.explicit_uncertainty = explicit_head;
  s.max_grad_norm = c.max_grad_norm;
  s.initial_log_alpha = c.initial_log_alpha;
  if (c.target_entropy != "auto") s.target_entropy = std::stod(c.target_entropy);
  return s;
}

void fill_interval(MetricRecord& r, const IntervalStats& s) {
  r.guided_ratio = s.steps ? static_cast<double>(s.guided) / static_cast<double>(s.steps) : kNaN;
  r.mean_k = IntervalStats::mean(s.k_sum, s.k_count);
  r.mean_uncertainty = IntervalStats::mean(s.eps_sum, s.eps_count);
  r.critic_loss = IntervalStats::mean(s.critic, s.updates);
  r.uncertainty_loss = IntervalStats::mean(s.uncertainty, s.updates);
  r.actor_loss = IntervalStats::mean(s.actor, s.updates);
  r.alpha_loss = IntervalStats::mean(s.alpha_loss, s.updates);
  r.episodic_mean_uncertainty = IntervalStats::mean(s.episode_eps_sum, s.episodes);
}

std::vector<MetricRecord> train_continuous(const RunConfig& config, std::uint64_t seed, const std::string& run_id,
                                           const fs::path& dir, Writer& writer, DiagnosticLog& diag) {
  auto env = envs::make_env(config.env);
  auto eval_env = envs::make_env(config.env);
  const envs::EnvSpec spec = env->spec();
  const bool is_ccge = config.algorithm == Algorithm::kCcge;
  const bool is_jsrl = config.algorithm == Algorithm::kJsrl;
  const bool explicit_head = config.uncertainty_mode == uncertainty::Mode::kExplicit;
  sac::SacAgent agent(spec.obs_dim, spec.action_dim, sac_config(config, explicit_head), seed);

  std::optional<oracle::OraclePolicy> oracle;
  if (config.oracle != "none") oracle = oracle::make_oracle(config.oracle, config.env);
  const int oracle_dim = oracle ? spec.action_dim : 0;
  replay::ReplayBuffer buffer(config.buffer_capacity, config.buffer_mode, spec.obs_dim, spec.action_dim, oracle_dim,
                              make_rng(seed, Stream::kReservoir)());

  core::CCGEConfig ccge_config{config.lambda, config.guidance_enabled, config.supervision_enabled,
                               config.denominator_epsilon};
  const bool guidance = is_ccge && ccge_config.guidance_enabled;
  sac::ActorObjective objective = [&](const sac::GaussianActor<float>& actor, const sac::CriticEnsemble<float>& critics,
                                      const replay::Batch& batch, const MatrixF& noise, float alpha) {
    return core::ccge_actor_loss<float>(actor, critics, config.uncertainty_mode, batch.states, &batch.oracle_actions,
                                        noise, alpha, ccge_config);
  };
  const sac::ActorObjective* objective_ptr = (is_ccge && ccge_config.active()) ? &objective : nullptr;

  Rng env_rng = make_rng(seed, Stream::kEnv);
  Rng actor_rng = make_rng(seed, Stream::kActor);
  Rng update_rng = make_rng(seed, Stream::kUpdate);
  Rng buffer_rng = make_rng(seed, Stream::kBuffer);
  Rng warmup_rng = make_rng(seed, Stream::kWarmup);
  Rng rollin_rng = make_rng(seed, Stream::kRollIn);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);

  auto learner_policy = [&](std::span<const double> obs) { return agent.act_deterministic(obs); };
  std::optional<double> oracle_eval;

  std::vector<MetricRecord> records;
  IntervalStats interval;
  std::vector<double> obs = env->reset(env_rng()).observation;
  std::int64_t episode = 0;
  std::int64_t episode_step = 0;
  int rollin = is_jsrl ? oracle::jsrl_rollin_horizon(rollin_rng, config.jsrl_max_horizon) : 0;
  const bool track_uncertainty = explicit_head || config.ensemble_size >= 2;

  for (std::int64_t t = 0; t < config.total_steps; ++t) {
    StepDiag d;
    d.step = t;
    std::vector<double> learner = t < config.warmup_steps ? std::vector<double>(spec.action_dim)
                                                          : agent.act(obs, actor_rng);
    if (t < config.warmup_steps) {
      for (double& a : learner) a = uniform(warmup_rng);
    }
    std::vector<double> oracle_action = oracle ? oracle->act(obs) : std::vector<double>{};
    std::vector<double> action = learner;
    bool guided = false;
    double k = kNaN;
    double eps = kNaN;
    if (track_uncertainty) {
      const MatrixF s = sac::to_row(obs);
      const auto est_l = uncertainty::estimate_batch(config.uncertainty_mode, agent.critics(), s, sac::to_row(learner));
      eps = est_l.eps(0);
      interval.eps_sum += eps;
      ++interval.eps_count;
      if (is_ccge) {
        const auto est_o =
            uncertainty::estimate_batch(config.uncertainty_mode, agent.critics(), s, sac::to_row(oracle_action));
        const double ub_l = core::q_upper_bound({est_l.q(0), est_l.eps(0), config.uncertainty_mode});
        const double ub_o = core::q_upper_bound({est_o.q(0), est_o.eps(0), config.uncertainty_mode});
        k = core::confidence_k(core::potential_improvement(ub_o, ub_l), est_l.q(0), config.denominator_epsilon);
        interval.k_sum += k;
        ++interval.k_count;
        const auto choice = core::select_rollout_action(learner, oracle_action, k, config.lambda, true, guidance);
        action = choice.action;
        guided = choice.guided;
      }
    }
    if (is_jsrl && episode_step < rollin) {
      action = oracle_action;
      guided = true;
    }
    const envs::StepResult step = env->step(action);
    if (!std::isfinite(step.reward)) throw NonFiniteError("non-finite reward");
    buffer.push({to_float(obs), to_float(action), static_cast<float>(step.reward), to_float(step.observation),
                 step.terminated, to_float(oracle_action)});
    ++interval.steps;
    interval.guided += guided ? 1 : 0;
    d.reward = step.reward;
    d.guided = guided;
    d.k = k;
    d.epsilon = eps;
    diag.push(d);
    writer.step(t, episode, step.reward, guided, k, eps);

    obs = step.observation;
    ++episode_step;
    if (step.terminated || step.truncated) {
      obs = env->reset(env_rng()).observation;
      ++episode;
      episode_step = 0;
      if (is_jsrl) rollin = oracle::jsrl_rollin_horizon(rollin_rng, config.jsrl_max_horizon);
    }

    if (t >= config.warmup_steps && (t + 1) % config.train_frequency == 0) {
      const replay::Batch batch = buffer.sample(config.batch_size, buffer_rng);
      const auto critic_stats = agent.update_critic(batch, update_rng);
      diag.back().critic_loss = critic_stats.bellman_loss;
      const auto actor_stats = agent.update_actor(batch, update_rng, objective_ptr);
      diag.back().actor_loss = actor_stats.actor_loss;
      diag.back().alpha = actor_stats.alpha;
      ++interval.updates;
      interval.critic += critic_stats.bellman_loss;
      interval.uncertainty += critic_stats.uncertainty_loss;
      interval.actor += actor_stats.actor_loss;
      interval.alpha_loss += actor_stats.alpha_loss;
    }

    if ((t + 1) % config.eval_frequency == 0) {
      Rng eval_rng = make_rng(seed, Stream::kEval);
      const EvalResult eval = evaluate(*eval_env, learner_policy, config.eval_episodes, eval_rng);
      MetricRecord r;
      r.run_id = run_id;
      r.seed = seed;
      r.step = t + 1;
      r.eval_return = eval.mean_return;
      r.eval_return_iqm = eval.iqm_return;
      r.eval_success = eval.mean_success;
      fill_interval(r, interval);
      r.alpha = agent.alpha();
      r.oracle_score = kNaN;
      if (oracle && oracle->bootstrappable()) {
        if (!oracle_eval) {
          Rng oracle_rng = make_rng(seed, Stream::kEval);
          auto oracle_policy = [&](std::span<const double> o) { return oracle->act(o); };
          oracle_eval = evaluate(*eval_env, oracle_policy, config.eval_episodes, oracle_rng).mean_return;
          oracle->set_score(*oracle_eval);
        }
        if (oracle::maybe_bootstrap(*oracle, agent.actor(), eval.mean_return, *oracle_eval)) {
          oracle_eval = eval.mean_return;
        }
        r.oracle_score = *oracle_eval;
      }
      records.push_back(r);
      writer.record(r);
      interval = IntervalStats{};
    }
  }
  nn::Checkpoint ckpt = agent.checkpoint();
  ckpt.metadata["config_hash"] = config.hash_hex();
  ckpt.metadata["seed"] = seed;
  ckpt.metadata["env"] = config.env;
  ckpt.metadata["uncertainty_mode"] = std::string(uncertainty::to_string(config.uncertainty_mode));
  nn::checkpoint_save(ckpt, dir / "checkpoint.json");
  return records;
}

std::vector<MetricRecord> train_dqn(const RunConfig& config, std::uint64_t seed, const std::string& run_id,
                                    const fs::path& dir, Writer& writer, DiagnosticLog& diag) {
  auto env = envs::make_env(config.env);
  auto eval_env = envs::make_env(config.env);
  const envs::EnvSpec spec = env->spec();
  dqn::DqnConfig dc;
  dc.hidden = config.hidden;
  dc.optimizer.learning_rate = config.learning_rate;
  dc.optimizer.weight_decay = config.weight_decay;
  dc.gamma = config.gamma;
  dc.batch_size = config.batch_size;
  dc.target_update_interval = config.target_update_interval;
  dc.explore = config.explore;
  dc.max_grad_norm = config.max_grad_norm;
  dqn::DqnAgent agent(spec.obs_dim, spec.action_count, dc, seed);
  replay::ReplayBuffer buffer(config.buffer_capacity, config.buffer_mode, spec.obs_dim, 1, 0,
                              make_rng(seed, Stream::kReservoir)());

  Rng env_rng = make_rng(seed, Stream::kEnv);
  Rng explore_rng = make_rng(seed, Stream::kExplore);
  Rng buffer_rng = make_rng(seed, Stream::kBuffer);
  auto greedy = [&](std::span<const double> o) {
    return std::vector<double>{static_cast<double>(agent.act_greedy(o))};
  };

  std::vector<MetricRecord> records;
  IntervalStats interval;
  std::vector<double> obs = env->reset(env_rng()).observation;
  std::int64_t episode = 0;
  std::vector<double> episode_eps;
  for (std::int64_t t = 0; t < config.total_steps; ++t) {
    StepDiag d;
    d.step = t;
    const int a = t < config.warmup_steps ? agent.act(obs, explore_rng, 1.0) : agent.act(obs, explore_rng);
    const double eps = agent.uncertainty(obs, a);
    episode_eps.push_back(eps);
    interval.eps_sum += eps;
    ++interval.eps_count;
    const envs::StepResult step = env->step_discrete(a);
    if (!std::isfinite(step.reward)) throw NonFiniteError("non-finite reward");
    buffer.push({to_float(obs), {static_cast<float>(a)}, static_cast<float>(step.reward), to_float(step.observation),
                 step.terminated, {}});
    ++interval.steps;
    d.reward = step.reward;
    d.epsilon = eps;
    diag.push(d);
    writer.step(t, episode, step.reward, false, kNaN, eps);
    obs = step.observation;
    if (step.terminated || step.truncated) {
      interval.episode_eps_sum += dqn::episodic_mean_uncertainty(episode_eps);
      ++interval.episodes;
      episode_eps.clear();
      obs = env->reset(env_rng()).observation;
      ++episode;
    }
    if (t >= config.warmup_steps && (t + 1) % config.train_frequency == 0) {
      const auto stats = agent.update(buffer.sample(config.batch_size, buffer_rng));
      diag.back().critic_loss = stats.bellman_loss;
      ++interval.updates;
      interval.critic += stats.bellman_loss;
      interval.uncertainty += stats.uncertainty_loss;
    }
    if ((t + 1) % config.eval_frequency == 0) {
      Rng eval_rng = make_rng(seed, Stream::kEval);
      const EvalResult eval = evaluate(*eval_env, greedy, config.eval_episodes, eval_rng);
      MetricRecord r;
      r.run_id = run_id;
      r.seed = seed;
      r.step = t + 1;
      r.eval_return = eval.mean_return;
      r.eval_return_iqm = eval.iqm_return;
      r.eval_success = eval.mean_success;
      fill_interval(r, interval);
      r.guided_ratio = kNaN;
      r.actor_loss = kNaN;
      r.alpha_loss = kNaN;
      r.alpha = kNaN;
      r.oracle_score = kNaN;
      records.push_back(r);
      writer.record(r);
      interval = IntervalStats{};
    }
  }
  nn::Checkpoint ckpt;
  ckpt.networks.emplace("q", agent.online());
  ckpt.networks.emplace("q_target", agent.target());
  ckpt.metadata["config_hash"] = config.hash_hex();
  ckpt.metadata["seed"] = seed;
  ckpt.metadata["env"] = config.env;
  nn::checkpoint_save(ckpt, dir / "checkpoint.json");
  return records;
}

}  // namespace

const std::vector<std::string>& metric_columns() {
  static const std::vector<std::string> cols = {
      "run_id",      "seed",          "step",        "eval_return",     "eval_return_iqm",
      "eval_success", "guided_ratio", "mean_k",      "mean_uncertainty", "critic_loss",
      "uncertainty_loss", "actor_loss", "alpha_loss", "alpha",         "oracle_score",
      "episodic_mean_uncertainty"};
  return cols;
}

std::string metrics_header() {
  std::string out;
  for (const auto& c : metric_columns()) out += (out.empty() ? "" : ",") + c;
  return out;
}

std::string format_record(const MetricRecord& r) {
  std::ostringstream os;
  os << r.run_id << "," << r.seed << "," << r.step;
  for (double v : {r.eval_return, r.eval_return_iqm, r.eval_success, r.guided_ratio, r.mean_k, r.mean_uncertainty,
                   r.critic_loss, r.uncertainty_loss, r.actor_loss, r.alpha_loss, r.alpha, r.oracle_score,
                   r.episodic_mean_uncertainty}) {
    os << "," << format_number(v);
  }
  return os.str();
}

std::vector<MetricRecord> read_metrics(const fs::path& csv) {
  const auto rows = read_csv(csv);
  if (rows.empty()) throw std::runtime_error("empty metrics file " + csv.string());
  if (rows.front().size() != metric_columns().size()) {
    throw std::runtime_error("unexpected metrics header in " + csv.string());
  }
  std::vector<MetricRecord> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i];
    if (f.size() != metric_columns().size()) throw std::runtime_error("malformed metrics row in " + csv.string());
    MetricRecord r;
    r.run_id = f[0];
    r.seed = std::stoull(f[1]);
    r.step = std::stoll(f[2]);
    double* dst[] = {&r.eval_return, &r.eval_return_iqm, &r.eval_success, &r.guided_ratio, &r.mean_k,
                     &r.mean_uncertainty, &r.critic_loss, &r.uncertainty_loss, &r.actor_loss, &r.alpha_loss,
                     &r.alpha, &r.oracle_score, &r.episodic_mean_uncertainty};
    for (std::size_t c = 0; c < std::size(dst); ++c) *dst[c] = std::strtod(f[3 + c].c_str(), nullptr);
    out.push_back(r);
  }
  return out;
}

EvalResult evaluate(envs::Environment& env, const std::function<std::vector<double>(std::span<const double>)>& policy,
                    int episodes, Rng& seed_rng) {
  EvalResult out;
  double success = 0.0;
  for (int e = 0; e < episodes; ++e) {
    std::vector<double> obs = env.reset(seed_rng()).observation;
    double total = 0.0;
    while (true) {
      const auto step = env.step(policy(obs));
      total += step.reward;
      obs = step.observation;
      if (step.terminated || step.truncated) break;
    }
    out.returns.push_back(total);
    success += env.success();
  }
  double sum = 0.0;
  for (double r : out.returns) sum += r;
  out.mean_return = sum / episodes;
  out.iqm_return = iqm(out.returns);
  out.mean_success = success / episodes;
  return out;
}

RunResult run_seed(const RunConfig& config, std::uint64_t seed, const fs::path& dir) {
  config.validate();
  fs::create_directories(dir);
  const std::string run_id = run_label(config) + "_s" + std::to_string(seed);
  write_text(dir / "manifest.json", manifest_text(config, seed, run_id, false));
  Writer writer(dir, config.log_steps);
  DiagnosticLog diag;
  RunResult result;
  result.dir = dir;
  result.seed = seed;
  try {
    result.records = config.algorithm == Algorithm::kDqnStudy ? train_dqn(config, seed, run_id, dir, writer, diag)
                                                              : train_continuous(config, seed, run_id, dir, writer, diag);
  } catch (const NonFiniteError& e) {
    writer.abort();
    diag.dump(dir, e.what());
    throw;
  }
  writer.finish();
  write_text(dir / "manifest.json", manifest_text(config, seed, run_id, true));
  return result;
}

std::string run_label(const RunConfig& config) {
  if (!config.run_name.empty()) return config.run_name;
  return std::string(to_string(config.algorithm)) + "_" + config.env + "_" + config.hash_hex().substr(0, 8);
}

std::optional<RunResult> load_completed(const RunConfig& config, std::uint64_t seed, const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) return std::nullopt;
  json doc;
  try {
    in >> doc;
  } catch (const json::exception&) {
    return std::nullopt;
  }
  if (!doc.value("complete", false) || doc.value("config_hash", std::string()) != config.hash_hex() ||
      doc.value("seed", std::uint64_t{0}) != seed || doc.value("code_version", std::string()) != CCGE_CODE_VERSION ||
      !fs::exists(dir / "metrics.csv")) {
    return std::nullopt;
  }
  RunResult r;
  r.dir = dir;
  r.seed = seed;
  r.records = read_metrics(dir / "metrics.csv");
  r.reused = true;
  return r;
}

std::vector<RunResult> run(const RunConfig& config, const fs::path& out_root, const RunOptions& options) {
  config.validate();
  const fs::path root = out_root / run_label(config);
  fs::create_directories(root);
  std::vector<RunResult> results(config.seeds.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= config.seeds.size()) return;
      const std::uint64_t seed = config.seeds[i];
      const fs::path dir = root / ("seed_" + std::to_string(seed));
      try {
        std::optional<RunResult> cached;
        if (options.reuse_completed) cached = load_completed(config, seed, dir);
        results[i] = cached ? *cached : run_seed(config, seed, dir);
        if (!options.quiet) {
          std::lock_guard lock(error_mutex);
          std::cerr << (results[i].reused ? "reused " : "finished ") << dir.string() << "\n";
        }
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(options.jobs, static_cast<int>(config.seeds.size())));
  std::vector<std::thread> threads;
  for (int j = 1; j < jobs; ++j) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);

  std::vector<fs::path> dirs;
  for (const auto& r : results) dirs.push_back(r.dir);
  if (config.total_steps >= config.eval_frequency) write_summary(aggregate(dirs), root / "summary.csv");
  return results;
}

}  // namespace ccge::harness
