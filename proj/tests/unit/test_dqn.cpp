#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"

#include "ccge/dqn/dqn.hpp"
#include "gradient_suite.hpp"

using namespace ccge;
using namespace ccge::dqn;

namespace {

replay::Batch cartpole_like_batch(int rows, std::uint64_t seed) {
  replay::ReplayBuffer buf(static_cast<std::size_t>(rows), replay::BufferMode::kFifo, 4, 1, 0);
  Rng rng = make_rng(seed, 23u);
  std::normal_distribution<float> normal(0.0f, 0.5f);
  for (int i = 0; i < rows; ++i) {
    replay::Transition t;
    t.state = {normal(rng), normal(rng), normal(rng), normal(rng)};
    t.action = {static_cast<float>(i % 2)};
    t.reward = 1.0f;
    t.next_state = {normal(rng), normal(rng), normal(rng), normal(rng)};
    t.terminal = i % 11 == 0;
    buf.push(t);
  }
  Rng sampler = make_rng(seed, Stream::kBuffer);
  return buf.sample(static_cast<std::size_t>(rows), sampler);
}

}  // namespace

TEST_CASE("greedy action and tie-break") {
  Rng rng = make_rng(1, Stream::kExplore);
  CHECK(dqn_act(std::vector<double>{1.0, 5.0}, rng, 0.0) == 1);
  CHECK(dqn_act(std::vector<double>{2.0, 2.0, 1.0}, rng, 0.0) == 0);
  CHECK(dqn_act(std::vector<double>{0.0, 3.0, 3.0}, rng, 0.0) == 1);
}

TEST_CASE("explore = 1 picks actions uniformly") {
  Rng rng = make_rng(2, Stream::kExplore);
  const std::vector<double> q{0.0, 10.0, -3.0};
  const int draws = 30000;
  std::vector<double> counts(3, 0.0);
  for (int i = 0; i < draws; ++i) counts[static_cast<std::size_t>(dqn_act(q, rng, 1.0))] += 1.0;
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - draws / 3.0) * (c - draws / 3.0) / (draws / 3.0);
  CHECK(chi2 < 9.210);  // chi-square, 2 dof, p = 0.01
}

TEST_CASE("dqn loss: exact Bellman fit gives zero Bellman loss") {
  // Zero weights, bias c on every Q output: Q = c everywhere. With gamma = 0
  // and reward c the Bellman residual is zero.
  nn::Mlp<double> online({4, 4});
  online.layers()[0].bias << 0.7, 0.7, -1.0, -1.0;
  const nn::Mlp<double> target = online;
  MatrixD s = MatrixD::Ones(3, 4);
  const std::vector<int> actions{0, 1, 0};
  const VectorD r = VectorD::Constant(3, 0.7);
  const auto loss = dqn_loss<double>(online, target, s, actions, r, s, VectorD::Zero(3), 0.0);
  CHECK(loss.bellman == 0.0);
  // gamma = 0: the target is the reward regardless of the next state.
  const VectorD r2 = VectorD::Constant(3, 2.7);
  CHECK(std::abs(dqn_loss<double>(online, target, s, actions, r2, s, VectorD::Zero(3), 0.0).bellman - 4.0) < 1e-12);
  CHECK_THROWS_AS(dqn_loss<double>(online, target, s, std::vector<int>{0, 2, 0}, r, s, VectorD::Zero(3), 0.0),
                  ShapeError);
}

TEST_CASE("dqn loss gradient matches finite differences") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CAPTURE(seed);
    const auto r = testing::check_dqn(seed);
    CHECK_MESSAGE(r.ok(), r.worst);
  }
}

TEST_CASE("episodic mean uncertainty") {
  CHECK(episodic_mean_uncertainty(std::vector<double>{0.5, 0.5, 0.5}) == 0.5);
  CHECK(episodic_mean_uncertainty(std::vector<double>{0.0, 1.0}) == 0.5);
  CHECK(episodic_mean_uncertainty(std::vector<double>{0.125}) == 0.125);
  CHECK_THROWS(episodic_mean_uncertainty(std::vector<double>{}));
}

TEST_CASE("uncertainty outputs never influence action selection") {
  DqnConfig cfg;
  cfg.hidden = {16};
  DqnAgent agent(4, 2, cfg, 5);
  Rng rng = make_rng(5, 23u);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::vector<double>> states(200, std::vector<double>(4));
  for (auto& s : states) {
    for (double& v : s) v = normal(rng);
  }
  std::vector<int> before;
  for (const auto& s : states) before.push_back(agent.act_greedy(s));
  // Scramble the uncertainty rows of the output layer.
  auto& last = agent.online().layers().back();
  for (Eigen::Index r = 2; r < 4; ++r) {
    last.weight.row(r).setConstant(50.0f);
    last.bias(r) = -30.0f;
  }
  for (std::size_t i = 0; i < states.size(); ++i) CHECK(agent.act_greedy(states[i]) == before[i]);
}

TEST_CASE("target network is hard-copied every N gradient steps") {
  DqnConfig cfg;
  cfg.hidden = {16};
  cfg.batch_size = 32;
  cfg.target_update_interval = 3;
  DqnAgent agent(4, 2, cfg, 6);
  const auto batch = cartpole_like_batch(32, 6);
  for (int step = 1; step <= 7; ++step) {
    const auto stats = agent.update(batch);
    CHECK(std::isfinite(stats.bellman_loss));
    CHECK(stats.target_synced == (step % 3 == 0));
    const bool equal = agent.target().layers()[0].weight == agent.online().layers()[0].weight;
    CHECK(equal == (step % 3 == 0));
  }
  CHECK(agent.gradient_steps() == 7);
}

TEST_CASE("uncertainty query is non-negative and checked") {
  DqnConfig cfg;
  cfg.hidden = {8};
  DqnAgent agent(4, 2, cfg, 7);
  const std::vector<double> s{0.1, 0.2, -0.1, 0.0};
  CHECK(agent.uncertainty(s, 0) >= 0.0);
  CHECK(agent.q_values(s).size() == 2);
  CHECK_THROWS(agent.uncertainty(s, 2));
}
