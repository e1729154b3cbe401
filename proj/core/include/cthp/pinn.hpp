#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cthp/mlp.hpp"
#include "cthp/model.hpp"
#include "cthp/simulate.hpp"

namespace cthp {

/// Channel weights of the composite loss (the Q/R/S penalty roles). The
/// boundary term is folded into the residual and data terms, since the
/// residual grid covers the whole sampled domain.
struct LossWeights {
  double q_gap = 1.0;     // residual of pdot = v_{i-1} - v_i
  double q_vel = 1.0;     // residual of vdot = alpha(p - tau v) + beta dv
  double s_gap = 1.0;     // data misfit of p_i
  double s_vel = 1.0;     // data misfit of v_i
  double s_leader = 1.0;  // data misfit of v_0
};

/// Fixed scales that map physical signals into tanh-friendly ranges. Time is
/// affinely mapped onto [-1, 1] over the data window; the residual applies
/// the chain rule through that mapping, so the learned parameters keep
/// physical units.
struct Normalization {
  double velocity_scale = 30.0;  // m/s
  double gap_scale = 50.0;       // m
};

enum class LearnMode { Single, Homogeneous, PerVehicle };

/// Learnable CTHP parameters stored as unconstrained reals and mapped
/// through softplus, so every reported triple satisfies the rational
/// driving constraints by construction.
struct LearnableParams {
  Eigen::VectorXd raw;  // 3 entries when shared, else 3*vehicles
  bool shared = false;
  int vehicles = 1;

  static LearnableParams init(int vehicles, bool shared,
                              const CthpParams& start = {0.05, 0.10, 1.2});
  CthpParams params_for(int vehicle) const;
  std::vector<CthpParams> all_params() const;
};

double softplus(double x);
double softplus_inverse(double y);

struct TrainingOptions {
  std::vector<int> hidden = {60, 60, 60};
  double lr = 1e-3;
  std::int64_t max_iters = 60000;
  std::uint64_t seed = 0;
  std::int64_t log_interval = 100;
  double split_fraction = 0.8;  // train share of the MAE reporting split
  double divergence_factor = 1e6;
  int divergence_patience = 100;  // consecutive offending log points
};

/// Everything one training run needs: the measured trajectory, the surrogate
/// network (output width 2M+1: leader velocity plus (p_i, v_i) per
/// follower), the learnable parameters and the loss configuration.
struct PinnProblem {
  PlatoonTrajectory data;
  Mlp net;
  LearnableParams learnable;
  LossWeights weights;
  Normalization norm;
  TrainingOptions options;

  static PinnProblem make(PlatoonTrajectory data, LearnMode mode,
                          const TrainingOptions& options = {},
                          const LossWeights& weights = {},
                          const Normalization& norm = {});

  double t_begin() const { return data.t.front(); }
  double t_end() const { return data.t.back(); }
};

class NonFiniteLoss : public std::runtime_error {
 public:
  explicit NonFiniteLoss(const std::string& channel)
      : std::runtime_error("non-finite loss in channel: " + channel),
        channel(channel) {}
  std::string channel;
};

struct LossBreakdown {
  double total = 0.0;
  double residual = 0.0;  // Psi_F
  double data = 0.0;      // Psi_D
};

struct LossAndGrads {
  LossBreakdown loss;
  Eigen::VectorXd grad_theta;  // matches Mlp::to_flat packing
  Eigen::VectorXd grad_raw;    // matches LearnableParams::raw
};

/// Composite full-batch loss over the whole sample grid (collocation set ==
/// measurement grid) with exact gradients for the network parameters and the
/// raw learnable parameters.
LossAndGrads build_loss(const PinnProblem& problem);

/// De-normalized surrogate predictions at arbitrary times.
struct Prediction {
  std::vector<double> t;
  std::vector<double> v0;
  std::vector<std::vector<double>> p;  // per follower
  std::vector<std::vector<double>> v;
  std::vector<bool> extrapolated;  // time outside the training window
};
Prediction evaluate(const Mlp& net, const PinnProblem& problem,
                    const std::vector<double>& times);

struct SignalMae {
  double v0 = 0.0;
  std::vector<double> p;  // per follower
  std::vector<double> v;
};

/// Mean absolute error of a prediction against the measured trajectory,
/// per signal, over the given sample indices (empty = all samples).
SignalMae prediction_mae(const Prediction& pred, const PlatoonTrajectory& data,
                         const std::vector<std::size_t>& indices = {});

struct TrainingReport {
  struct LossPoint {
    std::int64_t iteration;
    double total, residual, data;
  };
  struct ParamPoint {
    std::int64_t iteration;
    std::vector<CthpParams> params;
  };

  std::vector<CthpParams> learned;  // per vehicle (repeated when shared)
  bool shared = false;
  std::vector<LossPoint> loss_history;
  std::vector<ParamPoint> param_history;
  SignalMae mae_train, mae_test, mae_full;
  std::vector<std::size_t> train_indices, test_indices;
  double wall_clock_seconds = 0.0;
  std::int64_t iterations_run = 0;
  bool diverged = false;
  /// Per learnable scalar (alpha_1, beta_1, tau_1, alpha_2, ...): first
  /// logged iteration after which the trace stays within 1% of its final
  /// value.
  std::vector<std::int64_t> convergence_iteration;
};

/// Full-batch Adam over the joint vector (network weights, raw CTHP
/// parameters). Mutates problem.net and problem.learnable. Deterministic for
/// a fixed seed and configuration. A run whose loss exceeds
/// divergence_factor times the initial loss for divergence_patience
/// consecutive log points is aborted and returned with diverged = true.
TrainingReport train(PinnProblem& problem);

void write_report_json(const TrainingReport& report, const PinnProblem& problem,
                       const std::string& path);
void write_loss_history_csv(const TrainingReport& report,
                            const std::string& path);
void write_param_trajectory_csv(const TrainingReport& report,
                                const std::string& path);
void write_predictions_csv(const TrainingReport& report,
                           const PinnProblem& problem, const std::string& path);

}  // namespace cthp
