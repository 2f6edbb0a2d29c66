#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"

#include "ccge/sac/agent.hpp"
#include "gradient_suite.hpp"

using namespace ccge;
using namespace ccge::sac;

namespace {

// Actor whose log-std outputs are pinned by zero weights and a fixed bias.
GaussianActor<double> pinned_actor(int obs, int act, double log_std_bias, Rng& rng) {
  auto net = nn::Mlp<double>::uniform_fan_in({obs, 16, 2 * act}, rng);
  auto& last = net.layers().back();
  for (int j = act; j < 2 * act; ++j) {
    last.weight.row(j).setZero();
    last.bias(j) = log_std_bias;
  }
  return GaussianActor<double>(std::move(net), act);
}

MatrixD random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  MatrixD m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

}  // namespace

TEST_CASE("actor: actions lie strictly inside (-1, 1)") {
  Rng rng = make_rng(1, 5u);
  auto actor = GaussianActor<double>::create(4, 3, {16, 16}, rng);
  const MatrixD states = random_matrix(500, 4, rng, 3.0);
  const auto sample = actor.sample(states, random_matrix(500, 3, rng, 2.0));
  CHECK((sample.actions.array().abs() < 1.0).all());
  CHECK(sample.log_probs.allFinite());
}

TEST_CASE("actor: sigma at the clamp minimum gives tanh(mean)") {
  Rng rng = make_rng(2, 5u);
  const auto actor = pinned_actor(3, 2, -50.0, rng);
  const MatrixD states = random_matrix(20, 3, rng);
  const auto sample = actor.sample(states, random_matrix(20, 2, rng));
  CHECK((sample.log_std.array() == kLogStdMin).all());
  CHECK((sample.actions - actor.mean_action(states)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("actor: log_prob agrees with the closed-form squashed density") {
  Rng rng = make_rng(3, 5u);
  const auto actor = pinned_actor(2, 2, -0.3, rng);
  const MatrixD states = random_matrix(8, 2, rng);
  const auto sample = actor.sample(states, random_matrix(8, 2, rng));
  for (Eigen::Index i = 0; i < 8; ++i) {
    const double lp = squashed_log_prob<double>(sample.mean.row(i).transpose(), sample.log_std.row(i).transpose(),
                                                sample.actions.row(i).transpose());
    CHECK(std::abs(lp - sample.log_probs(i)) < 1e-8);
  }
}

// sigma <= 1 keeps the density bounded near +-1, where a uniform grid in
// action space would otherwise under-resolve the boundary spike.
TEST_CASE("actor: 1-d density integrates to one") {
  for (double mean : {0.0, 0.7, -1.5}) {
    for (double log_std : {-1.0, -0.3, 0.0}) {
      VectorD mu(1), ls(1), a(1);
      mu << mean;
      ls << log_std;
      const int n = 10000;
      const double h = 2.0 / n;
      double total = 0.0;  // density vanishes at both endpoints
      for (int i = 1; i < n; ++i) {
        a << -1.0 + i * h;
        total += std::exp(squashed_log_prob(mu, ls, a)) * h;
      }
      CAPTURE(mean);
      CAPTURE(log_std);
      CHECK(std::abs(total - 1.0) < 1e-3);
    }
  }
}

TEST_CASE("critic target examples") {
  CHECK(critic_target(0.5, true, 10.0, -3.0, 0.2, 0.99) == 0.5);
  CHECK(critic_target(0.5, false, 10.0, -3.0, 0.2, 0.0) == 0.5);
  // Two critics at 1.0 and 2.0: the minimum is used.
  VectorD q(2);
  q << 1.0, 2.0;
  CHECK(std::abs(critic_target(0.5, false, q.minCoeff(), 0.0, 0.0, 0.9) - 1.4) < 1e-12);
  VectorD r(3), d(3), m(3), lp(3);
  r << 1, 2, 3;
  d << 0, 1, 0;
  m << 4, 5, 6;
  lp << -1, -1, -2;
  const VectorD y = critic_targets<double>(r, d, m, lp, 0.5, 0.9);
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(y(i) - critic_target(r(i), d(i) > 0.5, m(i), lp(i), 0.5, 0.9)) < 1e-12);
  }
}

TEST_CASE("critic minimum is invariant to member order") {
  Rng rng = make_rng(4, 5u);
  CriticEnsemble<double> ens(3, 2, {8}, 3, false, rng);
  const MatrixD s = random_matrix(10, 3, rng), a = random_matrix(10, 2, rng, 0.5);
  const VectorD before = ens.evaluate(s, a).min_q();
  std::swap(ens.online()[0], ens.online()[2]);
  std::swap(ens.online()[1], ens.online()[2]);
  CHECK(ens.evaluate(s, a).min_q() == before);
}

TEST_CASE("critic loss: exact fit gives zero loss and zero gradients") {
  nn::Mlp<double> critic({4, 1});
  critic.layers()[0].bias(0) = 1.25;
  Rng rng = make_rng(5, 5u);
  const MatrixD sa = random_matrix(6, 4, rng);
  const VectorD y = VectorD::Constant(6, 1.25);
  const auto loss = critic_loss(critic, sa, y);
  CHECK(loss.total == 0.0);
  CHECK(loss.grads.squared_norm() == 0.0);
  const auto off = critic_loss(critic, sa, VectorD(VectorD::Constant(6, -0.75)));
  CHECK(off.bellman == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("critic and actor gradients match finite differences") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CAPTURE(seed);
    const auto bellman = testing::check_bellman(seed);
    CHECK_MESSAGE(bellman.ok(), bellman.worst);
    const auto actor = testing::check_actor(seed);
    CHECK_MESSAGE(actor.ok(), actor.worst);
    CHECK(testing::check_alpha(seed) <= 1e-4);
  }
}

TEST_CASE("actor loss: critic constant in the action and alpha 0 gives no gradient") {
  Rng rng = make_rng(6, 5u);
  const int obs = 3, act = 2;
  auto actor = GaussianActor<double>::create(obs, act, {8}, rng);
  auto critic = nn::Mlp<double>::uniform_fan_in({obs + act, 8, 1}, rng);
  critic.layers()[0].weight.rightCols(act).setZero();
  const std::vector<nn::Mlp<double>> critics{critic, critic};
  const MatrixD states = random_matrix(7, obs, rng);
  const auto loss = actor_loss(actor, critics, states, random_matrix(7, act, rng), 0.0);
  CHECK(loss.grads.squared_norm() == 0.0);
}

TEST_CASE("actor converges on a quadratic critic") {
  // Q(s, a) = -||a - a*||^2 with a* inside the action box; alpha = 0, so the
  // optimum of E[-Q] is 0. The critic is applied analytically.
  Rng rng = make_rng(7, 5u);
  const int obs = 2, act = 2;
  auto actor = GaussianActor<double>::create(obs, act, {16}, rng);
  const MatrixD states = random_matrix(32, obs, rng);
  Eigen::RowVectorXd target(act);
  target << 0.4, -0.3;
  nn::AdamWConfig cfg;
  cfg.learning_rate = 0.05;
  cfg.weight_decay = 0.0;
  auto objective = [&](const PolicySample<double>& s) {
    return (s.actions.rowwise() - target).rowwise().squaredNorm().mean();
  };
  double first = 0.0, last = 0.0;
  for (int it = 0; it < 50; ++it) {
    const auto sample = actor.sample(states, random_matrix(32, act, rng));
    const double loss = objective(sample);
    if (it == 0) first = loss;
    last = loss;
    const MatrixD grad_actions = 2.0 * (sample.actions.rowwise() - target) / 32.0;
    auto grads = actor.network().zero_gradients();
    actor.backward(sample, grad_actions, VectorD::Zero(32), grads);
    nn::adamw_step(actor.network(), grads, cfg);
  }
  CHECK(last < first);
  CHECK(last < 0.05);
}

TEST_CASE("alpha update direction") {
  SacConfig cfg;
  cfg.hidden = {8};
  {
    SacAgent agent(3, 2, cfg, 1);
    const double before = agent.log_alpha();
    agent.update_alpha(VectorF::Constant(16, static_cast<float>(-agent.target_entropy())));
    CHECK(agent.log_alpha() == before);
  }
  {
    SacAgent agent(3, 2, cfg, 1);
    const double before = agent.log_alpha();
    agent.update_alpha(VectorF::Constant(16, 5.0f));  // too deterministic
    CHECK(agent.log_alpha() > before);
  }
  {
    SacAgent agent(3, 2, cfg, 1);
    const double before = agent.log_alpha();
    agent.update_alpha(VectorF::Constant(16, -5.0f));  // too stochastic
    CHECK(agent.log_alpha() < before);
  }
  const auto loss = alpha_loss<double>(0.3, VectorD::Constant(4, 2.0), -2.0);
  CHECK(loss.loss == 0.0);
  CHECK(loss.grad == 0.0);
}

TEST_CASE("agent: sampled and deterministic actions stay in range") {
  SacConfig cfg;
  cfg.hidden = {16, 16};
  SacAgent agent(3, 1, cfg, 11);
  Rng rng = make_rng(11, Stream::kActor);
  for (int i = 0; i < 100; ++i) {
    const std::vector<double> obs{std::cos(i * 0.1), std::sin(i * 0.1), 0.1 * i};
    for (double a : agent.act(obs, rng)) CHECK(std::abs(a) < 1.0);
    for (double a : agent.act_deterministic(obs)) CHECK(std::abs(a) < 1.0);
  }
}

TEST_CASE("agent: target networks trail the online critics by tau") {
  SacConfig cfg;
  cfg.hidden = {8};
  cfg.batch_size = 8;
  SacAgent agent(2, 1, cfg, 3);
  replay::ReplayBuffer buf(32, replay::BufferMode::kFifo, 2, 1, 0);
  for (int i = 0; i < 32; ++i) {
    buf.push({{0.1f * i, -0.1f * i}, {0.5f}, 1.0f, {0.1f * i + 0.1f, 0.0f}, i % 7 == 0, {}});
  }
  Rng rng = make_rng(3, Stream::kBuffer);
  const auto before_target = agent.critics().target();
  agent.update_critic(buf.sample(8, rng), rng);
  const auto& online = agent.critics().online();
  const auto& target = agent.critics().target();
  for (std::size_t m = 0; m < online.size(); ++m) {
    for (std::size_t l = 0; l < online[m].layers().size(); ++l) {
      const MatrixF want = 0.005f * online[m].layers()[l].weight + 0.995f * before_target[m].layers()[l].weight;
      CHECK((target[m].layers()[l].weight - want).cwiseAbs().maxCoeff() < 1e-6f);
    }
  }
}
