#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"

#include "ccge/common/rng.hpp"
#include "ccge/nn/checkpoint.hpp"
#include "ccge/nn/mlp.hpp"
#include "ccge/nn/optim.hpp"
#include "fd_check.hpp"

using namespace ccge;
namespace fs = std::filesystem;

namespace {

// Independent forward pass: explicit loops, no Eigen products.
std::vector<double> naive_forward(const nn::Mlp<double>& net, std::vector<double> x) {
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    const auto& layer = net.layers()[l];
    std::vector<double> y(static_cast<std::size_t>(layer.weight.rows()));
    for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) {
      double acc = layer.bias(i);
      for (Eigen::Index j = 0; j < layer.weight.cols(); ++j) acc += layer.weight(i, j) * x[static_cast<std::size_t>(j)];
      y[static_cast<std::size_t>(i)] = (l + 1 < net.layers().size()) ? std::max(acc, 0.0) : acc;
    }
    x = std::move(y);
  }
  return x;
}

fs::path temp_path(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "ccge_unit";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("forward: zero weights return the bias") {
  nn::Mlp<double> net({3, 2});
  net.layers()[0].bias << 0.5, -1.5;
  const VectorD out = nn::forward(net, VectorD::Constant(3, 7.0));
  CHECK(out(0) == 0.5);
  CHECK(out(1) == -1.5);
}

TEST_CASE("forward: identity layer") {
  nn::Mlp<double> net({3, 3});
  net.layers()[0].weight = MatrixD::Identity(3, 3);
  VectorD x(3);
  x << 1.0, -2.0, 3.5;
  CHECK(nn::forward(net, x) == x);
}

TEST_CASE("forward: matches a loop-based oracle") {
  Rng rng = make_rng(3, 1u);
  const auto net = nn::Mlp<double>::uniform_fan_in({5, 7, 4}, rng);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(5);
    for (auto& v : x) v = normal(rng);
    const VectorD got = nn::forward(net, VectorD(Eigen::Map<VectorD>(x.data(), 5)));
    const auto want = naive_forward(net, x);
    for (std::size_t i = 0; i < want.size(); ++i) {
      CHECK(std::abs(got(static_cast<Eigen::Index>(i)) - want[i]) <= 1e-6 * std::max(1.0, std::abs(want[i])));
    }
  }
}

TEST_CASE("forward: wrong input width is a shape error") {
  nn::Mlp<double> net({3, 2});
  CHECK_THROWS_AS(nn::forward(net, VectorD::Zero(4)), ShapeError);
}

TEST_CASE("backward: zero output gradient gives zero gradients") {
  Rng rng = make_rng(1, 1u);
  const auto net = nn::Mlp<double>::uniform_fan_in({3, 5, 2}, rng);
  const auto grads = nn::backward(net, MatrixD::Random(4, 3), MatrixD::Zero(4, 2));
  CHECK(grads.squared_norm() == 0.0);
}

TEST_CASE("backward: linear net with squared loss has the closed form") {
  Rng rng = make_rng(2, 1u);
  auto net = nn::Mlp<double>::uniform_fan_in({3, 2}, rng);
  const MatrixD x = MatrixD::Random(5, 3);
  const MatrixD target = MatrixD::Random(5, 2);
  const MatrixD residual = net.forward(x) - target;
  // loss_i = 0.5 * |residual_i|^2  ->  d loss_i / d output_i = residual_i
  const auto grads = nn::backward(net, x, residual);
  const MatrixD expected_w = residual.transpose() * x / 5.0;
  const VectorD expected_b = residual.colwise().sum().transpose() / 5.0;
  CHECK((grads.layers[0].weight - expected_w).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((grads.layers[0].bias - expected_b).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("backward: non-finite upstream gradient is rejected") {
  nn::Mlp<double> net({2, 1});
  MatrixD g(1, 1);
  g(0, 0) = std::nan("");
  CHECK_THROWS_AS(nn::backward(net, MatrixD::Zero(1, 2), g), NonFiniteError);
}

TEST_CASE("backward: matches central finite differences") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng = make_rng(seed, 2u);
    auto net = nn::Mlp<double>::uniform_fan_in({4, 6, 6, 3}, rng);
    const MatrixD x = MatrixD::Random(7, 4);
    const MatrixD target = MatrixD::Random(7, 3);
    auto loss = [&] { return 0.5 * (net.forward(x) - target).rowwise().squaredNorm().mean(); };
    auto grads = nn::backward(net, x, MatrixD(net.forward(x) - target));
    const auto report = testing::fd_check({{&net, &grads, "net"}}, loss, [&] { return testing::relu_pattern(net, x); });
    INFO(report.worst);
    CHECK(report.ok());
  }
}

TEST_CASE("adamw: zero gradient and zero decay leave parameters unchanged") {
  Rng rng = make_rng(4, 1u);
  auto net = nn::Mlp<double>::uniform_fan_in({3, 4, 2}, rng);
  const auto before = net;
  nn::AdamWConfig cfg;
  cfg.weight_decay = 0.0;
  nn::adamw_step(net, net.zero_gradients(), cfg);
  CHECK(net.layers()[0].weight == before.layers()[0].weight);
  CHECK(net.layers()[1].bias == before.layers()[1].bias);
  CHECK(net.optimizer_state().step == 1);
}

TEST_CASE("adamw: zero gradient applies decoupled decay only") {
  Rng rng = make_rng(5, 1u);
  auto net = nn::Mlp<double>::uniform_fan_in({3, 2}, rng);
  const auto before = net;
  nn::AdamWConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.weight_decay = 0.2;
  nn::adamw_step(net, net.zero_gradients(), cfg);
  const MatrixD expected = before.layers()[0].weight * (1.0 - 0.1 * 0.2);
  CHECK((net.layers()[0].weight - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("adamw: one step matches a hand-coded reference on three parameters") {
  nn::Mlp<double> net({2, 1});
  net.layers()[0].weight << 0.3, -0.7;
  net.layers()[0].bias << 0.1;
  auto grads = net.zero_gradients();
  grads.layers[0].weight << 0.5, -2.0;
  grads.layers[0].bias << 1e-3;
  nn::AdamWConfig cfg{1e-2, 0.9, 0.999, 1e-8, 0.05};
  const double theta[3] = {0.3, -0.7, 0.1};
  const double g[3] = {0.5, -2.0, 1e-3};
  double want[3];
  for (int i = 0; i < 3; ++i) {
    const double decayed = theta[i] * (1.0 - 1e-2 * 0.05);
    const double m = 0.1 * g[i], v = 0.001 * g[i] * g[i];
    const double m_hat = m / (1.0 - 0.9), v_hat = v / (1.0 - 0.999);
    want[i] = decayed - 1e-2 * m_hat / (std::sqrt(v_hat) + 1e-8);
  }
  nn::adamw_step(net, grads, cfg);
  CHECK(std::abs(net.layers()[0].weight(0, 0) - want[0]) < 1e-8);
  CHECK(std::abs(net.layers()[0].weight(0, 1) - want[1]) < 1e-8);
  CHECK(std::abs(net.layers()[0].bias(0) - want[2]) < 1e-8);
}

TEST_CASE("adamw: bitwise deterministic without decay") {
  auto run = [] {
    Rng rng = make_rng(9, 1u);
    auto net = nn::Mlp<float>::uniform_fan_in({3, 8, 2}, rng);
    nn::AdamWConfig cfg;
    cfg.weight_decay = 0.0;
    std::uniform_real_distribution<float> u(-1.0f, 1.0f);
    MatrixF x(4, 3);
    for (Eigen::Index k = 0; k < x.size(); ++k) x(k) = u(rng);
    for (int i = 0; i < 10; ++i) nn::adamw_step(net, nn::backward(net, x, MatrixF(net.forward(x))), cfg);
    return net;
  };
  const auto a = run(), b = run();
  for (std::size_t l = 0; l < a.layers().size(); ++l) {
    CHECK(a.layers()[l].weight == b.layers()[l].weight);
    CHECK(a.layers()[l].bias == b.layers()[l].bias);
  }
}

TEST_CASE("adamw: invalid betas are rejected") {
  nn::Mlp<double> net({1, 1});
  nn::AdamWConfig cfg;
  cfg.beta1 = 1.0;
  CHECK_THROWS_AS(nn::adamw_step(net, net.zero_gradients(), cfg), ConfigError);
}

TEST_CASE("clip_grad_norm examples") {
  nn::Mlp<double> net({1, 2});
  auto g = net.zero_gradients();
  g.layers[0].weight << 3.0, 4.0;
  const double before = nn::clip_grad_norm(g, 1.0);
  CHECK(before == doctest::Approx(5.0));
  CHECK(g.layers[0].weight(0, 0) == doctest::Approx(0.6));
  CHECK(g.layers[0].weight(1, 0) == doctest::Approx(0.8));
  // Idempotent and bounded.
  auto again = g;
  nn::clip_grad_norm(again, 1.0);
  CHECK(again.layers[0].weight == g.layers[0].weight);
  CHECK(std::sqrt(again.squared_norm()) <= 1.0 + 1e-12);

  auto small = net.zero_gradients();
  small.layers[0].weight << 0.1, 0.2;
  const auto copy = small;
  nn::clip_grad_norm(small, 1.0);
  CHECK(small.layers[0].weight == copy.layers[0].weight);

  auto zero = net.zero_gradients();
  nn::clip_grad_norm(zero, 1.0);
  CHECK(zero.squared_norm() == 0.0);
  CHECK_THROWS_AS(nn::clip_grad_norm(zero, 0.0), ConfigError);
}

TEST_CASE("clip_grad_norm bounds random gradients") {
  Rng rng = make_rng(11, 1u);
  const auto net = nn::Mlp<double>::uniform_fan_in({4, 5, 3}, rng);
  for (int trial = 0; trial < 50; ++trial) {
    auto g = nn::backward(net, MatrixD::Random(3, 4), MatrixD(MatrixD::Random(3, 3) * (trial + 1)));
    nn::clip_grad_norm(g, 0.5);
    CHECK(std::sqrt(g.squared_norm()) <= 0.5 * (1 + 1e-12));
  }
}

TEST_CASE("polyak_update examples") {
  nn::Mlp<double> target({1, 1}), online({1, 1});
  target.layers()[0].weight(0, 0) = 2.0;
  online.layers()[0].weight(0, 0) = 4.0;
  auto half = target;
  nn::polyak_update(half, online, 0.5);
  CHECK(half.layers()[0].weight(0, 0) == 3.0);
  auto none = target;
  nn::polyak_update(none, online, 0.0);
  CHECK(none.layers()[0].weight(0, 0) == 2.0);

  Rng rng = make_rng(12, 1u);
  auto a = nn::Mlp<double>::uniform_fan_in({3, 6, 2}, rng);
  auto b = nn::Mlp<double>::uniform_fan_in({3, 6, 2}, rng);
  nn::polyak_update(a, b, 1.0);
  const MatrixD x = MatrixD::Random(10, 3);
  CHECK(a.forward(x) == b.forward(x));

  nn::Mlp<double> other({3, 5, 2});
  CHECK_THROWS_AS(nn::polyak_update(a, other, 0.5), ShapeError);
}

TEST_CASE("checkpoint: round trip is bit-identical") {
  Rng rng = make_rng(13, 1u);
  nn::Checkpoint ckpt;
  ckpt.networks.emplace("actor", nn::Mlp<float>::uniform_fan_in({4, 16, 16, 4}, rng));
  ckpt.networks.emplace("critic0", nn::Mlp<float>::uniform_fan_in({6, 16, 1}, rng));
  ckpt.metadata["note"] = "x";
  const fs::path path = temp_path("roundtrip.json");
  nn::checkpoint_save(ckpt, path);
  const auto loaded = nn::checkpoint_load(path);
  REQUIRE(loaded.networks.size() == 2);
  const MatrixF x = MatrixF::Random(100, 4);
  CHECK(loaded.networks.at("actor").forward(x) == ckpt.networks.at("actor").forward(x));
  for (std::size_t l = 0; l < 3; ++l) {
    CHECK(loaded.networks.at("actor").layers()[l].weight == ckpt.networks.at("actor").layers()[l].weight);
  }
  CHECK(loaded.metadata["note"] == "x");
}

TEST_CASE("checkpoint: truncated file fails without partial state") {
  Rng rng = make_rng(14, 1u);
  nn::Checkpoint ckpt;
  ckpt.networks.emplace("actor", nn::Mlp<float>::uniform_fan_in({4, 8, 2}, rng));
  const fs::path path = temp_path("truncated.json");
  nn::checkpoint_save(ckpt, path);
  const auto size = fs::file_size(path);
  fs::resize_file(path, size / 2);
  CHECK_THROWS_AS(nn::checkpoint_load(path), CheckpointFormatError);
  CHECK_THROWS_AS(nn::checkpoint_load(temp_path("missing.json")), CheckpointFormatError);
}

TEST_CASE("checkpoint: version mismatch and wrong architecture are distinct errors") {
  Rng rng = make_rng(15, 1u);
  nn::Checkpoint ckpt;
  ckpt.networks.emplace("actor", nn::Mlp<float>::uniform_fan_in({4, 8, 2}, rng));
  const fs::path path = temp_path("version.json");
  nn::checkpoint_save(ckpt, path);
  {
    std::ifstream in(path);
    nlohmann::json doc;
    in >> doc;
    doc["version"] = 99;
    std::ofstream(path) << doc.dump();
  }
  CHECK_THROWS_AS(nn::checkpoint_load(path), CheckpointVersionError);

  nn::checkpoint_save(ckpt, path);
  const auto loaded = nn::checkpoint_load(path);
  nn::Mlp<float> wrong({4, 9, 2});
  try {
    nn::load_network_into(loaded, "actor", wrong);
    FAIL("expected a shape error");
  } catch (const CheckpointShapeError& e) {
    CHECK(std::string(e.what()).find("actor.layer0.weight") != std::string::npos);
  }
  nn::Mlp<float> right({4, 8, 2});
  nn::load_network_into(loaded, "actor", right);
  CHECK(right.layers()[0].weight == ckpt.networks.at("actor").layers()[0].weight);
}
