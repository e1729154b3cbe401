#include "cthp/mlp.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include "json.hpp"

namespace cthp {

namespace {

void check_sizes(const std::vector<int>& layer_sizes) {
  if (layer_sizes.size() < 2)
    throw std::invalid_argument("Mlp needs at least input and output layers");
  for (int n : layer_sizes)
    if (n < 1) throw std::invalid_argument("Mlp layer sizes must be positive");
}

}  // namespace

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l)
    n += static_cast<std::size_t>(layer_sizes[l + 1]) *
             static_cast<std::size_t>(layer_sizes[l]) +
         static_cast<std::size_t>(layer_sizes[l + 1]);
  return n;
}

Eigen::VectorXd Mlp::to_flat() const {
  Eigen::VectorXd flat(static_cast<Eigen::Index>(parameter_count()));
  Eigen::Index k = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    for (Eigen::Index r = 0; r < weights[l].rows(); ++r)
      for (Eigen::Index c = 0; c < weights[l].cols(); ++c)
        flat[k++] = weights[l](r, c);
    for (Eigen::Index r = 0; r < biases[l].size(); ++r)
      flat[k++] = biases[l][r];
  }
  return flat;
}

void Mlp::from_flat(const Eigen::VectorXd& flat) {
  if (flat.size() != static_cast<Eigen::Index>(parameter_count()))
    throw std::invalid_argument("from_flat: size mismatch");
  Eigen::Index k = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    for (Eigen::Index r = 0; r < weights[l].rows(); ++r)
      for (Eigen::Index c = 0; c < weights[l].cols(); ++c)
        weights[l](r, c) = flat[k++];
    for (Eigen::Index r = 0; r < biases[l].size(); ++r)
      biases[l][r] = flat[k++];
  }
}

Eigen::VectorXd MlpGrad::to_flat() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l)
    n += static_cast<std::size_t>(weights[l].size() + biases[l].size());
  Eigen::VectorXd flat(static_cast<Eigen::Index>(n));
  Eigen::Index k = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    for (Eigen::Index r = 0; r < weights[l].rows(); ++r)
      for (Eigen::Index c = 0; c < weights[l].cols(); ++c)
        flat[k++] = weights[l](r, c);
    for (Eigen::Index r = 0; r < biases[l].size(); ++r)
      flat[k++] = biases[l][r];
  }
  return flat;
}

Mlp init_weights(const std::vector<int>& layer_sizes, std::uint64_t seed) {
  check_sizes(layer_sizes);
  Mlp net;
  net.layer_sizes = layer_sizes;
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const int fan_in = layer_sizes[l];
    const int fan_out = layer_sizes[l + 1];
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Eigen::MatrixXd w(fan_out, fan_in);
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = dist(rng);
    net.weights.push_back(std::move(w));
    net.biases.push_back(Eigen::VectorXd::Zero(fan_out));
  }
  return net;
}

Eigen::MatrixXd forward(const Mlp& net, const Eigen::RowVectorXd& ts) {
  if (net.layer_sizes.front() != 1)
    throw std::invalid_argument("forward: expects a scalar-input network");
  const std::size_t n_layers = net.weights.size();
  Eigen::MatrixXd x = ts;
  for (std::size_t l = 0; l < n_layers; ++l) {
    Eigen::MatrixXd z = net.weights[l] * x;
    z.colwise() += net.biases[l];
    if (l + 1 < n_layers)
      x = z.array().tanh();
    else
      x = std::move(z);
  }
  return x;
}

Eigen::VectorXd forward(const Mlp& net, double t) {
  Eigen::RowVectorXd ts(1);
  ts[0] = t;
  return forward(net, ts).col(0);
}

DualOutput forward_with_input_derivative(const Mlp& net,
                                         const Eigen::RowVectorXd& ts,
                                         ForwardTape* tape) {
  if (net.layer_sizes.front() != 1)
    throw std::invalid_argument("forward: expects a scalar-input network");
  const std::size_t n_layers = net.weights.size();
  const Eigen::Index n = ts.size();

  Eigen::MatrixXd x = ts;
  Eigen::MatrixXd xdot = Eigen::MatrixXd::Ones(1, n);
  if (tape) {
    tape->x.assign(1, x);
    tape->xdot.assign(1, xdot);
    tape->zdot.clear();
  }
  for (std::size_t l = 0; l < n_layers; ++l) {
    Eigen::MatrixXd z = net.weights[l] * x;
    z.colwise() += net.biases[l];
    Eigen::MatrixXd zdot = net.weights[l] * xdot;
    if (l + 1 < n_layers) {
      x = z.array().tanh();
      // d tanh(z)/dt = (1 - tanh(z)^2) * zdot
      xdot = (1.0 - x.array().square()) * zdot.array();
      if (tape) tape->zdot.push_back(std::move(zdot));
    } else {
      x = std::move(z);
      xdot = std::move(zdot);
    }
    if (tape) {
      tape->x.push_back(x);
      tape->xdot.push_back(xdot);
    }
  }
  return DualOutput{std::move(x), std::move(xdot)};
}

DualOutput forward_with_input_derivative(const Mlp& net, double t) {
  Eigen::RowVectorXd ts(1);
  ts[0] = t;
  return forward_with_input_derivative(net, ts, nullptr);
}

MlpGrad backward(const Mlp& net, const ForwardTape& tape,
                 const Eigen::MatrixXd& grad_value,
                 const Eigen::MatrixXd& grad_dvalue) {
  const std::size_t n_layers = net.weights.size();
  if (tape.x.size() != n_layers + 1)
    throw std::logic_error("backward: tape does not match a forward pass");

  MlpGrad grad;
  grad.weights.resize(n_layers);
  grad.biases.resize(n_layers);

  // Output layer is affine: value = W x + b, dvalue = W xdot.
  grad.weights[n_layers - 1] =
      grad_value * tape.x[n_layers - 1].transpose() +
      grad_dvalue * tape.xdot[n_layers - 1].transpose();
  grad.biases[n_layers - 1] = grad_value.rowwise().sum();
  Eigen::MatrixXd gx = net.weights[n_layers - 1].transpose() * grad_value;
  Eigen::MatrixXd gxdot = net.weights[n_layers - 1].transpose() * grad_dvalue;

  for (std::size_t l = n_layers - 1; l-- > 0;) {
    // Hidden layer l: x_{l+1} = tanh(z), xdot_{l+1} = (1 - x_{l+1}^2) * zdot.
    const Eigen::MatrixXd& x_out = tape.x[l + 1];
    const Eigen::MatrixXd& zdot = tape.zdot[l];
    const Eigen::ArrayXXd sech2 = 1.0 - x_out.array().square();

    Eigen::MatrixXd gzdot = (sech2 * gxdot.array()).matrix();
    // Second-order path: xdot depends on x through the sech^2 factor.
    gx.array() += -2.0 * x_out.array() * zdot.array() * gxdot.array();
    Eigen::MatrixXd gz = (sech2 * gx.array()).matrix();

    grad.weights[l] = gz * tape.x[l].transpose() +
                      gzdot * tape.xdot[l].transpose();
    grad.biases[l] = gz.rowwise().sum();
    if (l > 0) {
      gx = net.weights[l].transpose() * gz;
      gxdot = net.weights[l].transpose() * gzdot;
    }
  }
  return grad;
}

void save_checkpoint(const Mlp& net, const std::string& path,
                     std::uint64_t seed, std::int64_t iteration) {
  nlohmann::json j;
  j["layer_sizes"] = net.layer_sizes;
  j["seed"] = seed;
  j["iteration"] = iteration;
  auto& jw = j["weights"] = nlohmann::json::array();
  auto& jb = j["biases"] = nlohmann::json::array();
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(net.weights[l].size()));
    for (Eigen::Index r = 0; r < net.weights[l].rows(); ++r)
      for (Eigen::Index c = 0; c < net.weights[l].cols(); ++c)
        w.push_back(net.weights[l](r, c));
    jw.push_back(w);
    jb.push_back(std::vector<double>(net.biases[l].data(),
                                     net.biases[l].data() + net.biases[l].size()));
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << j.dump(2) << "\n";
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path);
  nlohmann::json j;
  is >> j;
  Checkpoint ck;
  ck.net.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
  check_sizes(ck.net.layer_sizes);
  ck.seed = j.value("seed", 0ull);
  ck.iteration = j.value("iteration", 0ll);
  const auto& jw = j.at("weights");
  const auto& jb = j.at("biases");
  for (std::size_t l = 0; l + 1 < ck.net.layer_sizes.size(); ++l) {
    const int rows = ck.net.layer_sizes[l + 1];
    const int cols = ck.net.layer_sizes[l];
    const auto w = jw.at(l).get<std::vector<double>>();
    const auto b = jb.at(l).get<std::vector<double>>();
    if (w.size() != static_cast<std::size_t>(rows) * cols ||
        b.size() != static_cast<std::size_t>(rows))
      throw std::runtime_error("checkpoint layer shape mismatch");
    Eigen::MatrixXd wm(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c)
        wm(r, c) = w[static_cast<std::size_t>(r) * cols + c];
    ck.net.weights.push_back(std::move(wm));
    ck.net.biases.push_back(
        Eigen::Map<const Eigen::VectorXd>(b.data(), rows));
  }
  return ck;
}

}  // namespace cthp
