#include "cthp/model.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace cthp {

double cthp_acceleration(const CthpParams& params, const VehicleState& state,
                         double v_leader) {
  return params.alpha * (state.p - params.tau * state.v) +
         params.beta * (v_leader - state.v);
}

VehicleState equilibrium_state(const CthpParams& params, double v) {
  return VehicleState{params.tau * v, v};
}

RationalCheck validate_rational(const CthpParams& params) {
  RationalCheck check;
  if (!(params.tau > 0.0)) check.violations.push_back("tau > 0");
  if (!(params.alpha >= 0.0)) check.violations.push_back("alpha >= 0");
  if (!(params.beta >= 0.0)) check.violations.push_back("beta >= 0");
  if (!(params.alpha * params.tau >= 0.0))
    check.violations.push_back("alpha*tau >= 0");
  check.ok = check.violations.empty();
  return check;
}

VehicleState analytic_linear_response(const CthpParams& params,
                                      const VehicleState& state0,
                                      double v_leader, double t) {
  if (t < 0.0) throw std::invalid_argument("analytic_linear_response: t < 0");
  if (!(params.alpha > 0.0))
    throw std::invalid_argument("analytic_linear_response: requires alpha > 0");

  // x = [p v], xdot = A x + b u:  A = [[0,-1],[alpha, -(alpha*tau+beta)]],
  // equilibrium x* = [tau*u, u], deviation y = x - x* obeys ydot = A y.
  const double a = params.alpha;
  const double c = params.alpha * params.tau + params.beta;
  const double y0p = state0.p - params.tau * v_leader;
  const double y0v = state0.v - v_leader;

  // Characteristic polynomial: lambda^2 + c*lambda + a = 0.
  const double disc = c * c - 4.0 * a;
  double e11, e12, e21, e22;  // exp(A t)
  constexpr double kRepeatedTol = 1e-12;
  if (std::abs(disc) < kRepeatedTol * std::max(1.0, c * c)) {
    // Repeated root lambda = -c/2: exp(At) = e^{lt} (I + t (A - l I)).
    const double l = -0.5 * c;
    const double el = std::exp(l * t);
    e11 = el * (1.0 - t * l);
    e12 = el * (-t);
    e21 = el * (t * a);
    e22 = el * (1.0 + t * (-c - l));
  } else {
    // exp(At) = (e^{l1 t}(A - l2 I) - e^{l2 t}(A - l1 I)) / (l1 - l2),
    // evaluated in complex arithmetic so underdamped parameters need no
    // separate branch; the result is real.
    const std::complex<double> root = std::sqrt(std::complex<double>(disc));
    const std::complex<double> l1 = 0.5 * (-c + root);
    const std::complex<double> l2 = 0.5 * (-c - root);
    const std::complex<double> g1 = std::exp(l1 * t);
    const std::complex<double> g2 = std::exp(l2 * t);
    const std::complex<double> dl = l1 - l2;
    e11 = ((g1 * (0.0 - l2) - g2 * (0.0 - l1)) / dl).real();
    e12 = ((g1 - g2) * (-1.0) / dl).real();
    e21 = ((g1 - g2) * a / dl).real();
    e22 = ((g1 * (-c - l2) - g2 * (-c - l1)) / dl).real();
  }

  VehicleState out;
  out.p = params.tau * v_leader + e11 * y0p + e12 * y0v;
  out.v = v_leader + e21 * y0p + e22 * y0v;
  return out;
}

}  // namespace cthp
