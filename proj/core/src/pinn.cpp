#include "cthp/pinn.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include "cthp/adam.hpp"
#include "json.hpp"

namespace cthp {

double softplus(double x) {
  // Floored at a tiny positive value so extreme negative raw parameters can
  // never map to an (invalid) exact zero.
  if (x > 30.0) return x;
  return std::max(std::log1p(std::exp(x)), 1e-300);
}

double softplus_inverse(double y) {
  if (!(y > 0.0))
    throw std::invalid_argument("softplus_inverse: argument must be positive");
  return y > 30.0 ? y : std::log(std::expm1(y));
}

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

using RowArr = Eigen::Array<double, 1, Eigen::Dynamic>;

RowArr map_row(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::RowVectorXd>(v.data(),
                                              static_cast<Eigen::Index>(v.size()))
      .array();
}

}  // namespace

LearnableParams LearnableParams::init(int vehicles, bool shared,
                                      const CthpParams& start) {
  if (vehicles < 1)
    throw std::invalid_argument("LearnableParams: vehicles >= 1");
  LearnableParams lp;
  lp.shared = shared;
  lp.vehicles = vehicles;
  const int triples = shared ? 1 : vehicles;
  lp.raw.resize(3 * triples);
  for (int i = 0; i < triples; ++i) {
    lp.raw[3 * i + 0] = softplus_inverse(start.alpha);
    lp.raw[3 * i + 1] = softplus_inverse(start.beta);
    lp.raw[3 * i + 2] = softplus_inverse(start.tau);
  }
  return lp;
}

CthpParams LearnableParams::params_for(int vehicle) const {
  const int base = shared ? 0 : 3 * vehicle;
  return CthpParams{softplus(raw[base]), softplus(raw[base + 1]),
                    softplus(raw[base + 2])};
}

std::vector<CthpParams> LearnableParams::all_params() const {
  std::vector<CthpParams> out;
  out.reserve(static_cast<std::size_t>(vehicles));
  for (int i = 0; i < vehicles; ++i) out.push_back(params_for(i));
  return out;
}

PinnProblem PinnProblem::make(PlatoonTrajectory data, LearnMode mode,
                              const TrainingOptions& options,
                              const LossWeights& weights,
                              const Normalization& norm) {
  const int m = static_cast<int>(data.vehicle_count());
  if (m < 1) throw std::invalid_argument("PinnProblem: needs >= 1 follower");
  if (data.samples() < 2)
    throw std::invalid_argument("PinnProblem: needs >= 2 samples");
  if (mode == LearnMode::Single && m != 1)
    throw std::invalid_argument(
        "PinnProblem: Single mode expects exactly one follower");

  PinnProblem p;
  p.data = std::move(data);
  p.options = options;
  p.weights = weights;
  p.norm = norm;

  std::vector<int> layer_sizes;
  layer_sizes.push_back(1);
  for (int h : options.hidden) layer_sizes.push_back(h);
  layer_sizes.push_back(2 * m + 1);
  p.net = init_weights(layer_sizes, options.seed);
  p.learnable = LearnableParams::init(m, mode == LearnMode::Homogeneous);
  return p;
}

LossAndGrads build_loss(const PinnProblem& problem) {
  const auto& data = problem.data;
  const Eigen::Index n = static_cast<Eigen::Index>(data.samples());
  const int m = static_cast<int>(data.vehicle_count());
  const double t0 = problem.t_begin();
  const double te = problem.t_end();
  const double kappa = 2.0 / (te - t0);  // d t_norm / d t
  const double sv = problem.norm.velocity_scale;
  const double sp = problem.norm.gap_scale;
  const auto& w = problem.weights;
  const double nm = static_cast<double>(n) * m;

  Eigen::RowVectorXd tn(n);
  for (Eigen::Index j = 0; j < n; ++j)
    tn[j] = 2.0 * (data.t[static_cast<std::size_t>(j)] - t0) / (te - t0) - 1.0;

  ForwardTape tape;
  const DualOutput out = forward_with_input_derivative(problem.net, tn, &tape);
  const Eigen::Index k_out = out.value.rows();
  if (k_out != 2 * m + 1)
    throw std::invalid_argument("build_loss: network output width != 2M+1");

  Eigen::MatrixXd gv = Eigen::MatrixXd::Zero(k_out, n);
  Eigen::MatrixXd gd = Eigen::MatrixXd::Zero(k_out, n);
  Eigen::VectorXd grad_raw = Eigen::VectorXd::Zero(problem.learnable.raw.size());

  LossBreakdown loss;
  auto check_finite = [](double x, const std::string& channel) {
    if (!std::isfinite(x)) throw NonFiniteLoss(channel);
  };

  // Leader data term.
  RowArr vhat_prev = sv * out.value.row(0).array();
  {
    const RowArr e0 = vhat_prev - map_row(data.v0);
    const double d0 = w.s_leader * e0.square().sum() / static_cast<double>(n);
    check_finite(d0, "data v0");
    loss.data += d0;
    gv.row(0).array() += (2.0 * w.s_leader / static_cast<double>(n)) * e0 * sv;
  }

  for (int i = 1; i <= m; ++i) {
    const Eigen::Index rp = 2 * i - 1;
    const Eigen::Index rv = 2 * i;
    const CthpParams pr = problem.learnable.params_for(i - 1);

    const RowArr phat = sp * out.value.row(rp).array();
    const RowArr vhat = sv * out.value.row(rv).array();
    const RowArr dphat = (sp * kappa) * out.dvalue_dt.row(rp).array();
    const RowArr dvhat = (sv * kappa) * out.dvalue_dt.row(rv).array();

    const RowArr dv_rel = vhat_prev - vhat;
    const RowArr gap_err = phat - pr.tau * vhat;
    const RowArr r_gap = dphat - dv_rel;
    const RowArr r_vel = dvhat - pr.alpha * gap_err - pr.beta * dv_rel;

    const double f_gap = w.q_gap * r_gap.square().sum() / nm;
    const double f_vel = w.q_vel * r_vel.square().sum() / nm;
    check_finite(f_gap, "residual pdot vehicle " + std::to_string(i));
    check_finite(f_vel, "residual vdot vehicle " + std::to_string(i));
    loss.residual += f_gap + f_vel;

    const RowArr c_gap = (2.0 * w.q_gap / nm) * r_gap;
    const RowArr c_vel = (2.0 * w.q_vel / nm) * r_vel;

    gd.row(rp).array() += c_gap * (sp * kappa);
    gd.row(rv).array() += c_vel * (sv * kappa);
    gv.row(rp).array() += c_vel * (-pr.alpha * sp);
    gv.row(rv).array() +=
        c_gap * sv + c_vel * ((pr.alpha * pr.tau + pr.beta) * sv);
    const Eigen::Index leader_row = i == 1 ? 0 : 2 * (i - 1);
    gv.row(leader_row).array() -= (c_gap + pr.beta * c_vel) * sv;

    const double g_alpha = (c_vel * (-gap_err)).sum();
    const double g_beta = (c_vel * (-dv_rel)).sum();
    const double g_tau = (c_vel * (pr.alpha * vhat)).sum();
    const int base = problem.learnable.shared ? 0 : 3 * (i - 1);
    grad_raw[base + 0] += g_alpha * sigmoid(problem.learnable.raw[base + 0]);
    grad_raw[base + 1] += g_beta * sigmoid(problem.learnable.raw[base + 1]);
    grad_raw[base + 2] += g_tau * sigmoid(problem.learnable.raw[base + 2]);

    const RowArr e_gap = phat - map_row(data.followers[i - 1].p);
    const RowArr e_vel = vhat - map_row(data.followers[i - 1].v);
    const double d_gap = w.s_gap * e_gap.square().sum() / nm;
    const double d_vel = w.s_vel * e_vel.square().sum() / nm;
    check_finite(d_gap, "data p vehicle " + std::to_string(i));
    check_finite(d_vel, "data v vehicle " + std::to_string(i));
    loss.data += d_gap + d_vel;
    gv.row(rp).array() += (2.0 * w.s_gap / nm) * e_gap * sp;
    gv.row(rv).array() += (2.0 * w.s_vel / nm) * e_vel * sv;

    vhat_prev = vhat;
  }

  loss.total = loss.residual + loss.data;

  LossAndGrads lg;
  lg.loss = loss;
  lg.grad_theta = backward(problem.net, tape, gv, gd).to_flat();
  lg.grad_raw = std::move(grad_raw);
  return lg;
}

Prediction evaluate(const Mlp& net, const PinnProblem& problem,
                    const std::vector<double>& times) {
  const double t0 = problem.t_begin();
  const double te = problem.t_end();
  const int m = static_cast<int>(problem.data.vehicle_count());
  const Eigen::Index n = static_cast<Eigen::Index>(times.size());

  Eigen::RowVectorXd tn(n);
  for (Eigen::Index j = 0; j < n; ++j)
    tn[j] = 2.0 * (times[static_cast<std::size_t>(j)] - t0) / (te - t0) - 1.0;
  const Eigen::MatrixXd y = forward(net, tn);

  Prediction pred;
  pred.t = times;
  pred.v0.resize(times.size());
  pred.p.assign(static_cast<std::size_t>(m), std::vector<double>(times.size()));
  pred.v.assign(static_cast<std::size_t>(m), std::vector<double>(times.size()));
  pred.extrapolated.resize(times.size());
  for (std::size_t j = 0; j < times.size(); ++j) {
    pred.extrapolated[j] = times[j] < t0 - 1e-9 || times[j] > te + 1e-9;
    pred.v0[j] = problem.norm.velocity_scale * y(0, static_cast<Eigen::Index>(j));
    for (int i = 1; i <= m; ++i) {
      pred.p[static_cast<std::size_t>(i - 1)][j] =
          problem.norm.gap_scale * y(2 * i - 1, static_cast<Eigen::Index>(j));
      pred.v[static_cast<std::size_t>(i - 1)][j] =
          problem.norm.velocity_scale * y(2 * i, static_cast<Eigen::Index>(j));
    }
  }
  return pred;
}

namespace {

double mean_abs_error(const std::vector<double>& a, const std::vector<double>& b,
                      const std::vector<std::size_t>& idx) {
  if (idx.empty()) return std::numeric_limits<double>::quiet_NaN();
  double acc = 0.0;
  for (std::size_t k : idx) acc += std::abs(a[k] - b[k]);
  return acc / static_cast<double>(idx.size());
}

}  // namespace

SignalMae prediction_mae(const Prediction& pred, const PlatoonTrajectory& data,
                         const std::vector<std::size_t>& indices) {
  std::vector<std::size_t> idx = indices;
  if (idx.empty()) {
    idx.resize(pred.t.size());
    std::iota(idx.begin(), idx.end(), 0);
  }
  SignalMae mae;
  mae.v0 = mean_abs_error(pred.v0, data.v0, idx);
  for (std::size_t i = 0; i < data.vehicle_count(); ++i) {
    mae.p.push_back(mean_abs_error(pred.p[i], data.followers[i].p, idx));
    mae.v.push_back(mean_abs_error(pred.v[i], data.followers[i].v, idx));
  }
  return mae;
}

TrainingReport train(PinnProblem& problem) {
  const auto t_start = std::chrono::steady_clock::now();
  const auto& opts = problem.options;
  const Eigen::Index theta_size =
      static_cast<Eigen::Index>(problem.net.parameter_count());
  const Eigen::Index raw_size = problem.learnable.raw.size();

  Eigen::VectorXd full(theta_size + raw_size);
  full.head(theta_size) = problem.net.to_flat();
  full.tail(raw_size) = problem.learnable.raw;

  AdamState adam(full.size(), opts.lr);
  TrainingReport report;
  report.shared = problem.learnable.shared;

  auto unpack = [&](const Eigen::VectorXd& x) {
    const Eigen::VectorXd head = x.head(theta_size);
    problem.net.from_flat(head);
    problem.learnable.raw = x.tail(raw_size);
  };
  auto log_point = [&](std::int64_t iter, const LossBreakdown& loss) {
    report.loss_history.push_back({iter, loss.total, loss.residual, loss.data});
    auto params = problem.learnable.all_params();
    for (const auto& pr : params) {
      if (!validate_rational(pr).ok)
        throw std::logic_error(
            "train: softplus-mapped parameters violated rational constraints");
    }
    report.param_history.push_back({iter, std::move(params)});
  };

  double initial_total = 0.0;
  int diverged_streak = 0;
  std::int64_t iters_done = 0;
  for (std::int64_t k = 0; k < opts.max_iters; ++k) {
    unpack(full);
    const LossAndGrads lg = build_loss(problem);
    if (k == 0) initial_total = lg.loss.total;
    if (k % opts.log_interval == 0) {
      log_point(k, lg.loss);
      if (lg.loss.total > opts.divergence_factor * initial_total) {
        if (++diverged_streak >= opts.divergence_patience) {
          report.diverged = true;
          break;
        }
      } else {
        diverged_streak = 0;
      }
    }
    Eigen::VectorXd grad(full.size());
    grad.head(theta_size) = lg.grad_theta;
    grad.tail(raw_size) = lg.grad_raw;
    adam_step(adam, full, grad);
    iters_done = k + 1;
  }
  report.iterations_run = iters_done;

  unpack(full);
  if (!report.diverged) {
    const LossAndGrads lg = build_loss(problem);
    log_point(iters_done, lg.loss);
  }
  report.learned = problem.learnable.all_params();

  // Reporting split (uniform-random by sample index, seed-controlled).
  const std::size_t n = problem.data.samples();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(opts.seed * 0x9E3779B97F4A7C15ull + 0x7F4A7C15ull);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = static_cast<std::size_t>(
      std::llround(opts.split_fraction * static_cast<double>(n)));
  report.train_indices.assign(order.begin(), order.begin() + std::min(n_train, n));
  report.test_indices.assign(order.begin() + std::min(n_train, n), order.end());
  std::sort(report.train_indices.begin(), report.train_indices.end());
  std::sort(report.test_indices.begin(), report.test_indices.end());

  const Prediction pred = evaluate(problem.net, problem, problem.data.t);
  auto bucket_mae = [&](const std::vector<std::size_t>& idx) {
    if (!idx.empty()) return prediction_mae(pred, problem.data, idx);
    SignalMae empty;
    empty.v0 = std::numeric_limits<double>::quiet_NaN();
    empty.p.assign(problem.data.vehicle_count(), empty.v0);
    empty.v.assign(problem.data.vehicle_count(), empty.v0);
    return empty;
  };
  report.mae_train = bucket_mae(report.train_indices);
  report.mae_test = bucket_mae(report.test_indices);
  report.mae_full = prediction_mae(pred, problem.data);

  // Iteration after which each learnable stays within 1% of its final value.
  const int triples = problem.learnable.shared ? 1 : problem.learnable.vehicles;
  for (int p = 0; p < 3 * triples; ++p) {
    const int vehicle = problem.learnable.shared ? 0 : p / 3;
    auto component = [&](const TrainingReport::ParamPoint& pt) {
      const CthpParams& c = pt.params[static_cast<std::size_t>(vehicle)];
      const int which = p % 3;
      return which == 0 ? c.alpha : which == 1 ? c.beta : c.tau;
    };
    const double final_value = component(report.param_history.back());
    const double tol = 0.01 * std::max(std::abs(final_value), 1e-12);
    std::int64_t converged_at = report.param_history.back().iteration;
    for (auto it = report.param_history.rbegin();
         it != report.param_history.rend(); ++it) {
      if (std::abs(component(*it) - final_value) > tol) break;
      converged_at = it->iteration;
    }
    report.convergence_iteration.push_back(converged_at);
  }

  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return report;
}

namespace {

nlohmann::json json_number(double x) {
  if (std::isfinite(x)) return x;
  return nullptr;
}

nlohmann::json mae_to_json(const SignalMae& mae) {
  nlohmann::json j;
  j["v0"] = json_number(mae.v0);
  j["p"] = nlohmann::json::array();
  j["v"] = nlohmann::json::array();
  for (double x : mae.p) j["p"].push_back(json_number(x));
  for (double x : mae.v) j["v"].push_back(json_number(x));
  return j;
}

}  // namespace

void write_report_json(const TrainingReport& report, const PinnProblem& problem,
                       const std::string& path) {
  nlohmann::json j;
  j["learned"] = nlohmann::json::array();
  for (std::size_t i = 0; i < report.learned.size(); ++i) {
    j["learned"].push_back({{"vehicle", i + 1},
                            {"alpha", report.learned[i].alpha},
                            {"beta", report.learned[i].beta},
                            {"tau", report.learned[i].tau}});
  }
  j["shared_parameters"] = report.shared;
  j["iterations_run"] = report.iterations_run;
  j["diverged"] = report.diverged;
  j["wall_clock_seconds"] = report.wall_clock_seconds;
  j["convergence_iteration"] = report.convergence_iteration;
  if (!report.loss_history.empty()) {
    const auto& last = report.loss_history.back();
    j["final_loss"] = {{"total", last.total},
                       {"residual", last.residual},
                       {"data", last.data}};
  }
  j["mae"] = {{"train", mae_to_json(report.mae_train)},
              {"test", mae_to_json(report.mae_test)},
              {"full", mae_to_json(report.mae_full)}};
  j["config"] = {{"layer_sizes", problem.net.layer_sizes},
                 {"parameter_count", problem.net.parameter_count()},
                 {"lr", problem.options.lr},
                 {"max_iters", problem.options.max_iters},
                 {"seed", problem.options.seed},
                 {"log_interval", problem.options.log_interval},
                 {"split_fraction", problem.options.split_fraction},
                 {"loss_weights",
                  {{"q_gap", problem.weights.q_gap},
                   {"q_vel", problem.weights.q_vel},
                   {"s_gap", problem.weights.s_gap},
                   {"s_vel", problem.weights.s_vel},
                   {"s_leader", problem.weights.s_leader}}},
                 {"normalization",
                  {{"velocity_scale", problem.norm.velocity_scale},
                   {"gap_scale", problem.norm.gap_scale}}}};
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << j.dump(2) << "\n";
}

void write_loss_history_csv(const TrainingReport& report,
                            const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os.precision(15);
  os << "iteration,total,residual,data\n";
  for (const auto& pt : report.loss_history)
    os << pt.iteration << "," << pt.total << "," << pt.residual << ","
       << pt.data << "\n";
}

void write_param_trajectory_csv(const TrainingReport& report,
                                const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os.precision(15);
  os << "iteration";
  const std::size_t m =
      report.param_history.empty() ? 0 : report.param_history[0].params.size();
  for (std::size_t i = 1; i <= m; ++i)
    os << ",alpha_" << i << ",beta_" << i << ",tau_" << i;
  os << "\n";
  for (const auto& pt : report.param_history) {
    os << pt.iteration;
    for (const auto& pr : pt.params)
      os << "," << pr.alpha << "," << pr.beta << "," << pr.tau;
    os << "\n";
  }
}

void write_predictions_csv(const TrainingReport& report,
                           const PinnProblem& problem,
                           const std::string& path) {
  const Prediction pred = evaluate(problem.net, problem, problem.data.t);
  std::vector<char> split(problem.data.samples(), 'n');
  for (std::size_t k : report.train_indices) split[k] = 't';
  for (std::size_t k : report.test_indices) split[k] = 'e';

  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os.precision(15);
  os << "t,split,v0,v0_hat";
  for (std::size_t i = 1; i <= problem.data.vehicle_count(); ++i)
    os << ",p" << i << ",p" << i << "_hat,v" << i << ",v" << i << "_hat";
  os << "\n";
  for (std::size_t k = 0; k < problem.data.samples(); ++k) {
    os << problem.data.t[k] << ","
       << (split[k] == 't' ? "train" : split[k] == 'e' ? "test" : "none") << ","
       << problem.data.v0[k] << "," << pred.v0[k];
    for (std::size_t i = 0; i < problem.data.vehicle_count(); ++i)
      os << "," << problem.data.followers[i].p[k] << "," << pred.p[i][k] << ","
         << problem.data.followers[i].v[k] << "," << pred.v[i][k];
    os << "\n";
  }
}

}  // namespace cthp
