#include "ccge/harness/snapshot.hpp"

#include "ccge/ccge/ccge.hpp"
#include "ccge/common/errors.hpp"
#include "ccge/envs/environment.hpp"
#include "ccge/nn/checkpoint.hpp"
#include "ccge/oracle/oracle.hpp"
#include "ccge/sac/critic.hpp"
#include "ccge/sac/gaussian_actor.hpp"

namespace ccge::harness {

SnapshotGuidance frozen_guidance(const RunConfig& config, const std::filesystem::path& checkpoint,
                                 const std::vector<double>& lambdas, std::size_t steps, std::uint64_t seed) {
  const nn::Checkpoint ckpt = nn::checkpoint_load(checkpoint);
  auto env = envs::make_env(config.env);
  const envs::EnvSpec spec = env->spec();
  if (spec.discrete()) throw ConfigError("frozen_guidance: needs a continuous-action environment");
  auto actor_it = ckpt.networks.find("actor");
  if (actor_it == ckpt.networks.end()) throw CheckpointFormatError("checkpoint has no actor network");
  const sac::GaussianActor<float> actor(actor_it->second, spec.action_dim);

  std::vector<nn::Mlp<float>> members;
  for (int m = 0;; ++m) {
    auto it = ckpt.networks.find("critic" + std::to_string(m));
    if (it == ckpt.networks.end()) break;
    members.push_back(it->second);
  }
  if (members.empty()) throw CheckpointFormatError("checkpoint has no critic networks");
  const bool explicit_head = members.front().output_size() == 2;
  const sac::CriticEnsemble<float> critics(std::move(members), spec.obs_dim, spec.action_dim, explicit_head);
  const oracle::OraclePolicy oracle = oracle::make_oracle(config.oracle, config.env);

  MatrixF states(static_cast<Eigen::Index>(steps), spec.obs_dim);
  MatrixF learner(static_cast<Eigen::Index>(steps), spec.action_dim);
  MatrixF suggested(static_cast<Eigen::Index>(steps), spec.action_dim);
  Rng env_rng = make_rng(seed, Stream::kEnv);
  Rng actor_rng = make_rng(seed, Stream::kActor);
  std::vector<double> obs = env->reset(env_rng()).observation;
  for (std::size_t t = 0; t < steps; ++t) {
    const auto row = static_cast<Eigen::Index>(t);
    for (int j = 0; j < spec.obs_dim; ++j) states(row, j) = static_cast<float>(obs[static_cast<std::size_t>(j)]);
    const MatrixF s = states.row(row);
    const auto sample = actor.sample(s, actor.draw_noise(1, actor_rng));
    learner.row(row) = sample.actions.row(0);
    const std::vector<double> o = oracle.act(obs);
    std::vector<double> a(static_cast<std::size_t>(spec.action_dim));
    for (int j = 0; j < spec.action_dim; ++j) {
      suggested(row, j) = static_cast<float>(o[static_cast<std::size_t>(j)]);
      a[static_cast<std::size_t>(j)] = static_cast<double>(sample.actions(0, j));
    }
    const envs::StepResult step = env->step(a);
    obs = (step.terminated || step.truncated) ? env->reset(env_rng()).observation : step.observation;
  }

  const VectorF k =
      core::confidence_batch(config.uncertainty_mode, critics, states, learner, suggested, config.denominator_epsilon);
  SnapshotGuidance out;
  out.lambdas = lambdas;
  for (double lambda : lambdas) out.guided.push_back(core::guided_count(k, lambda));
  out.k.assign(k.data(), k.data() + k.size());
  return out;
}

}  // namespace ccge::harness
