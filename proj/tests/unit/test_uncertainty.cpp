#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"

#include "ccge/uncertainty/estimate.hpp"
#include "gradient_suite.hpp"
#include "two_state.hpp"

using namespace ccge;
using namespace ccge::uncertainty;

TEST_CASE("implicit uncertainty examples") {
  const std::vector<double> same{2.0, 2.0};
  const auto a = implicit_uncertainty(same);
  CHECK(a.epsilon == 0.0);
  CHECK(a.q_value == 2.0);
  const std::vector<double> spread{1.0, 3.0};
  const auto b = implicit_uncertainty(spread);
  CHECK(std::abs(b.epsilon - 1.0) < 1e-12);
  CHECK(b.q_value == 1.0);
  const std::vector<double> one{1.0};
  CHECK_THROWS_AS(implicit_uncertainty(one), ConfigError);
}

TEST_CASE("implicit uncertainty is invariant to member order") {
  Rng rng = make_rng(1, 3u);
  std::normal_distribution<double> normal(0.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> q(5);
    for (double& v : q) v = normal(rng);
    const auto base = implicit_uncertainty(q);
    std::shuffle(q.begin(), q.end(), rng);
    const auto perm = implicit_uncertainty(q);
    CHECK(perm.q_value == base.q_value);
    CHECK(std::abs(perm.epsilon - base.epsilon) < 1e-12);
  }
}

TEST_CASE("delta examples") {
  CHECK(delta_t(0.5 + 0.9 * 2.0, 0.5, 0.9, 2.0, false) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(std::abs(delta_t(3.0, 1.0, 0.0, 7.0, false) - 4.0) < 1e-12);
  CHECK(delta_t(1.5, 1.5, 0.99, 100.0, true) == 0.0);
}

TEST_CASE("explicit target examples") {
  CHECK(explicit_target(0.0, 0.9, 0.0, false) == 0.0);
  CHECK(std::abs(explicit_target(0.1, 0.9, 1.0, false) - 1.0) < 1e-12);
  CHECK(std::abs(explicit_target(4.0, 0.9, 3.0, true) - 2.0) < 1e-12);
}

TEST_CASE("explicit target is monotone in delta and eps_next") {
  Rng rng = make_rng(2, 3u);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const double d = u(rng), e = u(rng), bump = u(rng);
    CHECK(explicit_target(d + bump, 0.95, e, false) >= explicit_target(d, 0.95, e, false));
    CHECK(explicit_target(d, 0.95, e + bump, false) >= explicit_target(d, 0.95, e, false));
  }
}

TEST_CASE("batched targets agree with the scalar form") {
  VectorD delta(3), eps(3), term(3);
  delta << 0.1, 4.0, 0.0;
  eps << 1.0, 3.0, 0.5;
  term << 0, 1, 0;
  const VectorD t = explicit_target_batch<double>(delta, 0.9, eps, term);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(t(i) - explicit_target(delta(i), 0.9, eps(i), term(i) > 0.5)) < 1e-12);
}

TEST_CASE("explicit head: exact fit gives zero head loss, and losses add") {
  Rng rng = make_rng(3, 3u);
  auto critic = nn::Mlp<double>::uniform_fan_in({4, 8, 2}, rng);
  MatrixD sa(5, 4);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index i = 0; i < sa.size(); ++i) sa.data()[i] = normal(rng);
  const MatrixD out = critic.forward(sa);
  const VectorD head = out.col(1).unaryExpr([](double x) { return sac::softplus(x); });
  const VectorD y = VectorD::Constant(5, 0.3);
  sac::ExplicitTargets<double> fit{&head};
  const auto zero = sac::critic_loss(critic, sa, y, &fit);
  CHECK(zero.uncertainty == doctest::Approx(0.0).epsilon(1e-15));

  const VectorD other = head.array() + 0.25;
  sac::ExplicitTargets<double> off{&other};
  const auto combined = sac::critic_loss(critic, sa, y, &off);
  const auto bellman_only = sac::critic_loss(critic, sa, y);
  double head_only = 0.0;
  for (int i = 0; i < 5; ++i) head_only += 0.0625;
  head_only /= 5.0;
  CHECK(combined.bellman == bellman_only.bellman);
  CHECK(std::abs(combined.uncertainty - head_only) < 1e-12);
  CHECK(combined.total == combined.bellman + combined.uncertainty);
}

TEST_CASE("explicit and combined losses match finite differences") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CAPTURE(seed);
    const auto head = testing::check_explicit_head(seed);
    CHECK_MESSAGE(head.ok(), head.worst);
    const auto combined = testing::check_combined(seed);
    CHECK_MESSAGE(combined.ok(), combined.worst);
  }
}

TEST_CASE("estimate: identical members give zero implicit uncertainty") {
  Rng rng = make_rng(4, 3u);
  sac::CriticEnsemble<double> ens(3, 2, {8}, 2, false, rng);
  ens.online()[1] = ens.online()[0];
  VectorD s(3), a(2);
  s << 0.1, -0.2, 0.3;
  a << 0.5, -0.5;
  const auto est = estimate(Mode::kImplicit, ens, s, a);
  CHECK(est.epsilon == 0.0);
  CHECK(est.mode == Mode::kImplicit);
}

TEST_CASE("estimate: explicit uses the mean of the heads") {
  // Zero-weight heads whose softplus outputs are exactly 0.4 and 0.6.
  std::vector<nn::Mlp<double>> members;
  for (double target : {0.4, 0.6}) {
    nn::Mlp<double> net({3, 2});
    net.layers()[0].bias(0) = 1.0;
    net.layers()[0].bias(1) = std::log(std::expm1(target));
    members.push_back(net);
  }
  sac::CriticEnsemble<double> ens(members, 2, 1, true);
  VectorD s(2), a(1);
  s << 1.0, 2.0;
  a << 0.0;
  const auto est = estimate(Mode::kExplicit, ens, s, a);
  CHECK(std::abs(est.epsilon - 0.5) < 1e-12);
  CHECK(est.q_value == 1.0);
}

TEST_CASE("estimate: epsilon is non-negative on random inputs") {
  Rng rng = make_rng(5, 3u);
  sac::CriticEnsemble<double> ex(3, 2, {16}, 2, true, rng);
  sac::CriticEnsemble<double> im(3, 2, {16}, 2, false, rng);
  std::normal_distribution<double> normal(0.0, 3.0);
  MatrixD s(10000, 3), a(10000, 2);
  for (Eigen::Index i = 0; i < s.size(); ++i) s.data()[i] = normal(rng);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = std::tanh(normal(rng));
  CHECK((estimate_batch(Mode::kExplicit, ex, s, a).eps.array() >= 0.0).all());
  CHECK((estimate_batch(Mode::kImplicit, im, s, a).eps.array() >= 0.0).all());
}

TEST_CASE("mode names round-trip") {
  CHECK(parse_mode("implicit") == Mode::kImplicit);
  CHECK(parse_mode("Ex") == Mode::kExplicit);
  CHECK(parse_mode(to_string(Mode::kExplicit)) == Mode::kExplicit);
  CHECK_THROWS_AS(parse_mode("bayesian"), ConfigError);
}

TEST_CASE("uncertainty vanishes on a two-state deterministic MDP") {
  const double gamma = 0.9;
  const auto r = testing::run_two_state(5000, gamma, 1);
  CHECK(r.max_delta <= 1e-3);
  CHECK(r.max_explicit <= std::sqrt(1e-3 / (1.0 - gamma)));
  CHECK(r.max_variance <= 1e-3);
}

TEST_CASE("converged predictor's total uncertainty equals the target variance") {
  // Y | x ~ N(2x - 1, 0.5^2). A linear predictor fitted by AdamW converges to
  // the conditional mean, so its expected squared error is the aleatoric
  // variance 0.25.
  Rng rng = make_rng(6, 3u);
  std::uniform_real_distribution<double> ux(-1.0, 1.0);
  std::normal_distribution<double> noise(0.0, 0.5);
  auto draw = [&](int n, MatrixD& x, MatrixD& y) {
    x.resize(n, 1);
    y.resize(n, 1);
    for (int i = 0; i < n; ++i) {
      x(i, 0) = ux(rng);
      y(i, 0) = 2.0 * x(i, 0) - 1.0 + noise(rng);
    }
  };
  nn::Mlp<double> net({1, 1});
  nn::AdamWConfig cfg;
  cfg.learning_rate = 0.01;
  cfg.weight_decay = 0.0;
  MatrixD x, y;
  for (int it = 0; it < 3000; ++it) {
    draw(256, x, y);
    const MatrixD residual = net.forward(x) - y;
    nn::adamw_step(net, nn::backward(net, x, MatrixD(2.0 * residual)), cfg);
  }
  draw(50000, x, y);
  const double total = (net.forward(x) - y).squaredNorm() / 50000.0;
  CHECK(std::abs(total - 0.25) / 0.25 < 0.05);
}
