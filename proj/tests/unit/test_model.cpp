#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "cthp/model.hpp"
#include "doctest.h"

using namespace cthp;

namespace {

// Independent fixed-step RK4 for the single-vehicle ODE, used as the oracle
// for the closed-form solution.
VehicleState rk4_reference(const CthpParams& params, VehicleState x,
                           double v_leader, double t_end, double h) {
  auto f = [&](const VehicleState& s) {
    return VehicleState{v_leader - s.v, cthp_acceleration(params, s, v_leader)};
  };
  const auto steps = static_cast<long>(std::llround(t_end / h));
  for (long i = 0; i < steps; ++i) {
    const VehicleState k1 = f(x);
    const VehicleState k2 = f({x.p + 0.5 * h * k1.p, x.v + 0.5 * h * k1.v});
    const VehicleState k3 = f({x.p + 0.5 * h * k2.p, x.v + 0.5 * h * k2.v});
    const VehicleState k4 = f({x.p + h * k3.p, x.v + h * k3.v});
    x.p += h / 6.0 * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p);
    x.v += h / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
  }
  return x;
}

}  // namespace

TEST_CASE("cthp_acceleration") {
  SUBCASE("equilibrium gives zero acceleration") {
    const CthpParams params{0.08, 0.12, 1.5};
    CHECK(cthp_acceleration(params, {30.0, 20.0}, 20.0) == 0.0);
  }
  SUBCASE("synthetic initial condition") {
    const CthpParams params{0.08, 0.12, 1.5};
    CHECK(cthp_acceleration(params, {20.3, 21.3}, 21.3) ==
          doctest::Approx(-0.932).epsilon(1e-12));
  }
  SUBCASE("beta = 0 isolates the spacing term") {
    CHECK(cthp_acceleration({1.0, 0.0, 1.0}, {2.0, 1.0}, 5.0) == 1.0);
  }
}

TEST_CASE("equilibrium_state") {
  CHECK(equilibrium_state({0.08, 0.12, 1.5}, 20.0).p == doctest::Approx(30.0));
  CHECK(equilibrium_state({0.0409, 0.445, 1.16}, 20.0).p ==
        doctest::Approx(23.2).epsilon(1e-12));
  CHECK(equilibrium_state({0.1, 0.1, 1.0}, 0.0).p == 0.0);

  // Acceleration vanishes identically at the equilibrium point.
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.01, 2.0);
  for (int i = 0; i < 50; ++i) {
    const CthpParams params{u(rng), u(rng), u(rng)};
    const double v = 30.0 * u(rng);
    const VehicleState eq = equilibrium_state(params, v);
    CHECK(cthp_acceleration(params, eq, v) == 0.0);
  }
}

TEST_CASE("validate_rational") {
  CHECK(validate_rational({0.0104, 0.0718, 1.52}).ok);
  CHECK(validate_rational({0.0, 0.0, 1.0}).ok);

  const auto bad_alpha = validate_rational({-0.01, 0.1, 1.0});
  CHECK_FALSE(bad_alpha.ok);
  REQUIRE(bad_alpha.violations.size() == 2);  // alpha >= 0 and alpha*tau >= 0
  CHECK(std::find(bad_alpha.violations.begin(), bad_alpha.violations.end(),
                  "alpha >= 0") != bad_alpha.violations.end());

  CHECK_FALSE(validate_rational({0.1, -0.2, 1.0}).ok);
  CHECK_FALSE(validate_rational({0.1, 0.2, 0.0}).ok);
  CHECK_FALSE(validate_rational({0.1, 0.2, -1.0}).ok);
}

TEST_CASE("analytic_linear_response basics") {
  const CthpParams params{0.08, 0.12, 1.5};
  const VehicleState x0{20.3, 21.3};

  SUBCASE("t = 0 returns the initial state") {
    const VehicleState s = analytic_linear_response(params, x0, 21.3, 0.0);
    CHECK(s.p == doctest::Approx(x0.p).epsilon(1e-14));
    CHECK(s.v == doctest::Approx(x0.v).epsilon(1e-14));
  }
  SUBCASE("equilibrium input stays constant") {
    const VehicleState eq = equilibrium_state(params, 20.0);
    for (double t : {0.5, 5.0, 50.0, 500.0}) {
      const VehicleState s = analytic_linear_response(params, eq, 20.0, t);
      CHECK(s.p == doctest::Approx(eq.p).epsilon(1e-12));
      CHECK(s.v == doctest::Approx(eq.v).epsilon(1e-12));
    }
  }
  SUBCASE("negative time rejected") {
    CHECK_THROWS_AS(analytic_linear_response(params, x0, 21.3, -1.0),
                    std::invalid_argument);
  }
  SUBCASE("alpha = 0 rejected") {
    CHECK_THROWS_AS(analytic_linear_response({0.0, 0.1, 1.0}, x0, 20.0, 1.0),
                    std::invalid_argument);
  }
}

TEST_CASE("analytic_linear_response agrees with a fine RK4 oracle") {
  struct Case {
    CthpParams params;
    VehicleState x0;
    double v_leader;
  };
  // Overdamped, underdamped and critically damped parameter sets:
  // (alpha*tau + beta)^2 - 4*alpha is > 0, < 0, and exactly 0.
  const Case cases[] = {
      {{0.0409, 0.4450, 1.16}, {20.3, 21.3}, 19.0},
      {{0.08, 0.12, 1.5}, {20.3, 21.3}, 21.3},
      {{0.5, 0.1, 0.5}, {8.0, 17.0}, 20.0},
      {{0.04, 0.36, 1.0}, {25.0, 18.0}, 20.0},  // (0.04+0.36)^2 == 4*0.04
  };
  for (const Case& c : cases) {
    for (double t : {1.0, 10.0}) {
      const VehicleState ref = rk4_reference(c.params, c.x0, c.v_leader, t, 1e-4);
      const VehicleState got =
          analytic_linear_response(c.params, c.x0, c.v_leader, t);
      CHECK(got.p == doctest::Approx(ref.p).epsilon(1e-6));
      CHECK(got.v == doctest::Approx(ref.v).epsilon(1e-6));
    }
  }
}

TEST_CASE("analytic response is continuous through the repeated-root case") {
  const VehicleState x0{25.0, 18.0};
  const VehicleState at =
      analytic_linear_response({0.04, 0.36, 1.0}, x0, 20.0, 7.0);
  const VehicleState near =
      analytic_linear_response({0.04, 0.36 + 1e-9, 1.0}, x0, 20.0, 7.0);
  CHECK(at.p == doctest::Approx(near.p).epsilon(1e-7));
  CHECK(at.v == doctest::Approx(near.v).epsilon(1e-7));
}
