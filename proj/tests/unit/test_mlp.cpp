#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "cthp/mlp.hpp"
#include "doctest.h"

using namespace cthp;

namespace {

std::size_t combinatorial_count(const std::vector<int>& sizes) {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l)
    n += static_cast<std::size_t>(sizes[l + 1]) * sizes[l] + sizes[l + 1];
  return n;
}

Mlp random_net(const std::vector<int>& sizes, std::uint64_t seed) {
  // Glorot init plus non-zero biases, so bias gradients are exercised too.
  Mlp net = init_weights(sizes, seed);
  std::mt19937_64 rng(seed ^ 0xabcdef);
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  for (auto& b : net.biases)
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = u(rng);
  return net;
}

}  // namespace

TEST_CASE("parameter counts match the layer map") {
  CHECK(init_weights({1, 60, 60, 60, 3}, 0).parameter_count() == 7623);
  CHECK(init_weights({1, 60, 60, 60, 9}, 0).parameter_count() == 7989);
  CHECK(init_weights({1, 60, 60, 60, 7}, 0).parameter_count() == 7867);

  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> width(1, 40);
  std::uniform_int_distribution<int> depth(2, 6);
  for (int rep = 0; rep < 25; ++rep) {
    std::vector<int> sizes;
    const int d = depth(rng);
    for (int l = 0; l < d; ++l) sizes.push_back(width(rng));
    const Mlp net = init_weights(sizes, rep);
    CHECK(net.parameter_count() == combinatorial_count(sizes));
    CHECK(net.to_flat().size() ==
          static_cast<Eigen::Index>(combinatorial_count(sizes)));
  }
}

TEST_CASE("init_weights is deterministic in the seed") {
  const Mlp a = init_weights({1, 60, 60, 60, 3}, 42);
  const Mlp b = init_weights({1, 60, 60, 60, 3}, 42);
  const Mlp c = init_weights({1, 60, 60, 60, 3}, 43);
  CHECK(a.to_flat() == b.to_flat());
  CHECK(a.to_flat() != c.to_flat());
  for (const auto& bias : a.biases) CHECK(bias.isZero(0.0));

  // Glorot bound for the first layer.
  const double limit = std::sqrt(6.0 / (1 + 60));
  CHECK(a.weights[0].cwiseAbs().maxCoeff() <= limit);
}

TEST_CASE("forward evaluation") {
  SUBCASE("all-zero network returns zero") {
    Mlp net = init_weights({1, 8, 8, 3}, 0);
    for (auto& w : net.weights) w.setZero();
    CHECK(forward(net, 0.37).isZero(0.0));
  }
  SUBCASE("pure affine [1,1] network") {
    Mlp net = init_weights({1, 1}, 0);
    net.weights[0](0, 0) = 2.0;
    net.biases[0][0] = 3.0;
    for (double t : {-1.0, 0.0, 0.5, 2.0})
      CHECK(forward(net, t)[0] == doctest::Approx(2.0 * t + 3.0).epsilon(1e-15));
  }
  SUBCASE("odd-symmetry cancellation in [1,2,1]") {
    Mlp net = init_weights({1, 2, 1}, 0);
    net.weights[0] << 1.0, -1.0;
    net.biases[0].setZero();
    net.weights[1] << 1.0, 1.0;
    net.biases[1].setZero();
    CHECK(forward(net, 0.5)[0] == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
  }
  SUBCASE("construction-time dimension checks") {
    CHECK_THROWS_AS(init_weights({1}, 0), std::invalid_argument);
    CHECK_THROWS_AS(init_weights({1, 0, 3}, 0), std::invalid_argument);
  }
}

TEST_CASE("input derivative propagation") {
  SUBCASE("affine network has constant derivative") {
    Mlp net = init_weights({1, 1}, 0);
    net.weights[0](0, 0) = 2.0;
    net.biases[0][0] = 3.0;
    const DualOutput out = forward_with_input_derivative(net, 0.7);
    CHECK(out.dvalue_dt(0, 0) == doctest::Approx(2.0).epsilon(1e-15));
  }
  SUBCASE("all-zero network has zero derivative") {
    Mlp net = init_weights({1, 8, 3}, 0);
    for (auto& w : net.weights) w.setZero();
    CHECK(forward_with_input_derivative(net, 0.3).dvalue_dt.isZero(0.0));
  }
  SUBCASE("matches central finite differences over random nets") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> ut(-1.0, 1.0);
    for (int rep = 0; rep < 100; ++rep) {
      const std::vector<int> sizes =
          rep % 3 == 0 ? std::vector<int>{1, 60, 60, 60, 3}
                       : std::vector<int>{1, 20, 15, 2};
      const Mlp net = random_net(sizes, 100 + rep);
      const double t = rep == 0 ? 0.37 : ut(rng);
      const DualOutput out = forward_with_input_derivative(net, t);
      const double h = 1e-5;
      const Eigen::VectorXd fd =
          (forward(net, t + h) - forward(net, t - h)) / (2.0 * h);
      for (Eigen::Index i = 0; i < fd.size(); ++i) {
        CHECK(out.dvalue_dt(i, 0) ==
              doctest::Approx(fd[i]).epsilon(1e-6).scale(1e-8));
      }
    }
  }
}

TEST_CASE("reverse-mode gradients") {
  SUBCASE("zero network, quadratic loss: all gradients vanish") {
    Mlp net = init_weights({1, 6, 4, 2}, 0);
    for (auto& w : net.weights) w.setZero();
    Eigen::RowVectorXd ts(3);
    ts << -0.3, 0.1, 0.8;
    ForwardTape tape;
    const DualOutput out = forward_with_input_derivative(net, ts, &tape);
    // d(1/2 |value|^2)/d value = value = 0.
    const MlpGrad grad = backward(net, tape, out.value, Eigen::MatrixXd::Zero(2, 3));
    CHECK(grad.to_flat().isZero(0.0));
  }
  SUBCASE("single affine layer, sum-of-outputs loss") {
    Mlp net = init_weights({1, 1}, 1);
    net.weights[0](0, 0) = -0.7;
    net.biases[0][0] = 0.2;
    Eigen::RowVectorXd ts(1);
    ts << 0.6;
    ForwardTape tape;
    forward_with_input_derivative(net, ts, &tape);
    const MlpGrad grad = backward(net, tape, Eigen::MatrixXd::Ones(1, 1),
                                  Eigen::MatrixXd::Zero(1, 1));
    CHECK(grad.weights[0](0, 0) == doctest::Approx(0.6));  // the input
    CHECK(grad.biases[0][0] == doctest::Approx(1.0));
  }
  SUBCASE("matches finite differences for losses using value and dvalue") {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int rep = 0; rep < 8; ++rep) {
      const Mlp net0 = random_net({1, 9, 7, 3}, 500 + rep);
      const Eigen::Index n_batch = 5;
      Eigen::RowVectorXd ts(n_batch);
      for (Eigen::Index j = 0; j < n_batch; ++j) ts[j] = u(rng);
      Eigen::MatrixXd cv(3, n_batch), cd(3, n_batch);
      for (Eigen::Index r = 0; r < 3; ++r)
        for (Eigen::Index j = 0; j < n_batch; ++j) {
          cv(r, j) = u(rng);
          cd(r, j) = u(rng);
        }
      // loss = sum cv.*value + 1/2 sum (value^2) + sum cd.*dvalue + 1/2 sum (dvalue^2)
      auto loss_of = [&](const Mlp& net) {
        const DualOutput out = forward_with_input_derivative(net, ts, nullptr);
        return (cv.array() * out.value.array()).sum() +
               0.5 * out.value.array().square().sum() +
               (cd.array() * out.dvalue_dt.array()).sum() +
               0.5 * out.dvalue_dt.array().square().sum();
      };

      ForwardTape tape;
      const DualOutput out = forward_with_input_derivative(net0, ts, &tape);
      const MlpGrad grad =
          backward(net0, tape, cv + out.value, cd + out.dvalue_dt);
      const Eigen::VectorXd gflat = grad.to_flat();

      Eigen::VectorXd theta = net0.to_flat();
      Mlp net = net0;
      for (Eigen::Index k = 0; k < theta.size(); ++k) {
        const double h = 1e-6 * std::max(1.0, std::abs(theta[k]));
        Eigen::VectorXd tp = theta, tm = theta;
        tp[k] += h;
        tm[k] -= h;
        net.from_flat(tp);
        const double lp = loss_of(net);
        net.from_flat(tm);
        const double lm = loss_of(net);
        const double fd = (lp - lm) / (2.0 * h);
        CHECK(gflat[k] == doctest::Approx(fd).epsilon(1e-4).scale(1e-6));
      }
    }
  }
}

TEST_CASE("checkpoint round trip") {
  namespace fs = std::filesystem;
  const fs::path dir =
      fs::temp_directory_path() / ("cthp_ckpt_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const Mlp net = random_net({1, 12, 9, 5}, 77);
  const std::string path = (dir / "net.json").string();
  save_checkpoint(net, path, 77, 1234);
  const Checkpoint ck = load_checkpoint(path);
  CHECK(ck.seed == 77);
  CHECK(ck.iteration == 1234);
  CHECK(ck.net.layer_sizes == net.layer_sizes);
  CHECK(ck.net.to_flat() == net.to_flat());
  fs::remove_all(dir);
}
