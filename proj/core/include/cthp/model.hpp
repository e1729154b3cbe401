#pragma once

#include <string>
#include <vector>

namespace cthp {

/// Constant time-headway control gains for one ACC vehicle.
///
/// The follower accelerates with
///   vdot = alpha * (p - tau * v) + beta * (v_leader - v)
/// where p is the bumper-to-bumper space-gap and v the ego velocity.
struct CthpParams {
  double alpha = 0.0;  // gap-error gain, 1/s^2
  double beta = 0.0;   // relative-velocity gain, 1/s
  double tau = 1.0;    // desired time headway, s
};

/// Longitudinal state of a follower: space-gap to its leader and own velocity.
struct VehicleState {
  double p = 0.0;  // space-gap, m
  double v = 0.0;  // velocity, m/s
};

/// Result of checking the rational driving constraints
/// (alpha >= 0, beta >= 0, alpha*tau >= 0 with tau > 0).
struct RationalCheck {
  bool ok = false;
  std::vector<std::string> violations;  // names of violated constraints, empty when ok
};

/// CTHP acceleration law: alpha*(p - tau*v) + beta*(v_leader - v).
double cthp_acceleration(const CthpParams& params, const VehicleState& state,
                         double v_leader);

/// Equilibrium state at cruise velocity v: p = tau*v, zero relative velocity.
/// cthp_acceleration at this state with v_leader == v is exactly zero.
VehicleState equilibrium_state(const CthpParams& params, double v);

RationalCheck validate_rational(const CthpParams& params);

/// Exact solution of the single-vehicle CTHP ODE under a constant leader
/// velocity, via eigen-decomposition of the 2x2 system matrix. The repeated
/// eigenvalue case (critically damped, (alpha*tau+beta)^2 == 4*alpha) is
/// evaluated with the limiting formula. Requires alpha > 0 and t >= 0.
VehicleState analytic_linear_response(const CthpParams& params,
                                      const VehicleState& state0,
                                      double v_leader, double t);

}  // namespace cthp
