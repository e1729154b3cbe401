#include "cthp/adam.hpp"

#include <cmath>

namespace cthp {

void adam_step(AdamState& state, Eigen::VectorXd& params,
               const Eigen::VectorXd& grad) {
  if (params.size() != grad.size() || params.size() != state.m.size())
    throw std::invalid_argument("adam_step: shape mismatch");

  if (!grad.allFinite()) {
    Eigen::Index first = -1, count = 0;
    for (Eigen::Index i = 0; i < grad.size(); ++i) {
      if (!std::isfinite(grad[i])) {
        if (first < 0) first = i;
        ++count;
      }
    }
    throw NonFiniteGradient(first, count, state.step);
  }

  ++state.step;
  state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad;
  state.v = state.beta2 * state.v.array().matrix() +
            (1.0 - state.beta2) * grad.array().square().matrix();
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  params.array() -= state.lr * (state.m.array() / bc1) /
                    ((state.v.array() / bc2).sqrt() + state.eps);
}

}  // namespace cthp
