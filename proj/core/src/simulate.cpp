#include "cthp/simulate.hpp"

#include <cmath>
#include <stdexcept>

namespace cthp {

namespace {

// Right-hand side of the coupled platoon ODE. State layout: [p1 v1 p2 v2 ...].
void platoon_rhs(const PlatoonConfig& config, double t,
                 const std::vector<double>& x, std::vector<double>& dx) {
  const std::size_t m = config.followers.size();
  double v_prev = config.leader(t);
  for (std::size_t i = 0; i < m; ++i) {
    const double p = x[2 * i];
    const double v = x[2 * i + 1];
    const CthpParams& params = config.followers[i];
    dx[2 * i] = v_prev - v;
    dx[2 * i + 1] = cthp_acceleration(params, VehicleState{p, v}, v_prev);
    v_prev = v;
  }
}

}  // namespace

PlatoonTrajectory simulate_platoon(const PlatoonConfig& config, double horizon,
                                   double dt_internal, double dt_output) {
  const std::size_t m = config.followers.size();
  if (m == 0) throw std::invalid_argument("simulate_platoon: empty platoon");
  if (config.initial_states.size() != m)
    throw std::invalid_argument(
        "simulate_platoon: followers/initial_states length mismatch");
  if (!(horizon > 0.0))
    throw std::invalid_argument("simulate_platoon: horizon must be positive");
  if (!(dt_internal > 0.0) || !(dt_output > 0.0))
    throw std::invalid_argument("simulate_platoon: non-positive step");
  if (dt_internal > dt_output)
    throw std::invalid_argument("simulate_platoon: dt_internal > dt_output");
  const double ratio = dt_output / dt_internal;
  const auto substeps = static_cast<std::size_t>(std::llround(ratio));
  if (substeps == 0 || std::abs(ratio - static_cast<double>(substeps)) > 1e-9)
    throw std::invalid_argument(
        "simulate_platoon: dt_output must be an integer multiple of dt_internal");

  const auto n_out = static_cast<std::size_t>(std::floor(horizon / dt_output + 1e-9));

  PlatoonTrajectory traj;
  traj.dt = dt_output;
  traj.t.reserve(n_out + 1);
  traj.v0.reserve(n_out + 1);
  traj.followers.resize(m);
  for (auto& f : traj.followers) {
    f.p.reserve(n_out + 1);
    f.v.reserve(n_out + 1);
  }

  std::vector<double> x(2 * m), k1(2 * m), k2(2 * m), k3(2 * m), k4(2 * m),
      xt(2 * m);
  for (std::size_t i = 0; i < m; ++i) {
    x[2 * i] = config.initial_states[i].p;
    x[2 * i + 1] = config.initial_states[i].v;
  }

  std::vector<bool> collided(m, false);
  auto record = [&](double t) {
    traj.t.push_back(t);
    traj.v0.push_back(config.leader(t));
    for (std::size_t i = 0; i < m; ++i) {
      traj.followers[i].p.push_back(x[2 * i]);
      traj.followers[i].v.push_back(x[2 * i + 1]);
    }
  };
  auto flag_collisions = [&](double t) {
    for (std::size_t i = 0; i < m; ++i) {
      if (!collided[i] && x[2 * i] <= 0.0) {
        collided[i] = true;
        traj.collisions.push_back({i + 1, t});
      }
    }
  };

  record(0.0);
  flag_collisions(0.0);
  const double h = dt_internal;
  for (std::size_t step = 0; step < n_out; ++step) {
    const double t_block = static_cast<double>(step) * dt_output;
    for (std::size_t sub = 0; sub < substeps; ++sub) {
      const double t = t_block + static_cast<double>(sub) * h;
      platoon_rhs(config, t, x, k1);
      for (std::size_t j = 0; j < x.size(); ++j) xt[j] = x[j] + 0.5 * h * k1[j];
      platoon_rhs(config, t + 0.5 * h, xt, k2);
      for (std::size_t j = 0; j < x.size(); ++j) xt[j] = x[j] + 0.5 * h * k2[j];
      platoon_rhs(config, t + 0.5 * h, xt, k3);
      for (std::size_t j = 0; j < x.size(); ++j) xt[j] = x[j] + h * k3[j];
      platoon_rhs(config, t + h, xt, k4);
      for (std::size_t j = 0; j < x.size(); ++j)
        x[j] += (h / 6.0) * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
      flag_collisions(t + h);
    }
    record(static_cast<double>(step + 1) * dt_output);
  }
  return traj;
}

}  // namespace cthp
