#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace cthp {

/// Thrown when a gradient fed to adam_step contains non-finite entries.
class NonFiniteGradient : public std::runtime_error {
 public:
  NonFiniteGradient(Eigen::Index first_index, Eigen::Index count,
                    std::int64_t step)
      : std::runtime_error("non-finite gradient: " + std::to_string(count) +
                           " bad component(s), first at index " +
                           std::to_string(first_index) + ", step " +
                           std::to_string(step)),
        first_index(first_index),
        count(count),
        step(step) {}
  Eigen::Index first_index;
  Eigen::Index count;
  std::int64_t step;
};

/// Adam optimizer state over one flat parameter vector.
struct AdamState {
  explicit AdamState(Eigen::Index size, double lr = 1e-3)
      : lr(lr),
        m(Eigen::VectorXd::Zero(size)),
        v(Eigen::VectorXd::Zero(size)) {}

  std::int64_t step = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  Eigen::VectorXd m;  // first-moment accumulator
  Eigen::VectorXd v;  // second-moment accumulator
};

/// One bias-corrected Adam update, in place.
void adam_step(AdamState& state, Eigen::VectorXd& params,
               const Eigen::VectorXd& grad);

}  // namespace cthp
