#include <cmath>
#include <random>
#include <stdexcept>

#include "cthp/model.hpp"
#include "cthp/simulate.hpp"
#include "doctest.h"

using namespace cthp;

namespace {

PlatoonConfig single_vehicle(const CthpParams& params, const VehicleState& x0,
                             LeaderProfile leader) {
  PlatoonConfig cfg;
  cfg.followers = {params};
  cfg.initial_states = {x0};
  cfg.leader = std::move(leader);
  return cfg;
}

double max_error_vs_analytic(const CthpParams& params, const VehicleState& x0,
                             double v_leader, double horizon, double dt_internal) {
  const auto traj = simulate_platoon(single_vehicle(params, x0,
                                                    LeaderProfile::constant(v_leader)),
                                     horizon, dt_internal, 0.1);
  double err = 0.0;
  for (std::size_t k = 0; k < traj.samples(); ++k) {
    const VehicleState ref =
        analytic_linear_response(params, x0, v_leader, traj.t[k]);
    err = std::max(err, std::abs(traj.followers[0].p[k] - ref.p));
    err = std::max(err, std::abs(traj.followers[0].v[k] - ref.v));
  }
  return err;
}

}  // namespace

TEST_CASE("equilibrium platoon is a fixed point of the integrator") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.02, 0.5);
  std::uniform_real_distribution<double> ut(0.8, 2.0);
  for (int rep = 0; rep < 5; ++rep) {
    PlatoonConfig cfg;
    cfg.leader = LeaderProfile::constant(20.0);
    for (int i = 0; i < 3; ++i) {
      const CthpParams params{u(rng), u(rng), ut(rng)};
      cfg.followers.push_back(params);
      cfg.initial_states.push_back(equilibrium_state(params, 20.0));
    }
    const auto traj = simulate_platoon(cfg, 20.0, 0.01, 0.1);
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t k = 0; k < traj.samples(); ++k) {
        CHECK(std::abs(traj.followers[i].p[k] - cfg.initial_states[i].p) < 1e-9);
        CHECK(std::abs(traj.followers[i].v[k] - 20.0) < 1e-9);
      }
    }
  }
}

TEST_CASE("first sample equals initial states, uniform output grid") {
  const CthpParams params{0.08, 0.12, 1.5};
  const auto traj = simulate_platoon(
      single_vehicle(params, {20.3, 21.3}, LeaderProfile::constant(21.3)), 2.0);
  REQUIRE(traj.samples() == 21);
  CHECK(traj.followers[0].p[0] == 20.3);
  CHECK(traj.followers[0].v[0] == 21.3);
  for (std::size_t k = 0; k < traj.samples(); ++k)
    CHECK(traj.t[k] == doctest::Approx(0.1 * static_cast<double>(k)).epsilon(1e-12));
}

TEST_CASE("simulate_platoon rejects bad configuration") {
  const CthpParams params{0.08, 0.12, 1.5};
  PlatoonConfig cfg = single_vehicle(params, {30, 20}, LeaderProfile::constant(20));
  CHECK_THROWS_AS(simulate_platoon(cfg, 10.0, -0.01, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(simulate_platoon(cfg, 10.0, 0.01, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(simulate_platoon(cfg, 0.0, 0.01, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(simulate_platoon(cfg, 10.0, 0.03, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(simulate_platoon(cfg, 10.0, 0.2, 0.1), std::invalid_argument);

  cfg.initial_states.push_back({30, 20});
  CHECK_THROWS_AS(simulate_platoon(cfg, 10.0), std::invalid_argument);
  cfg.followers.clear();
  cfg.initial_states.clear();
  CHECK_THROWS_AS(simulate_platoon(cfg, 10.0), std::invalid_argument);
}

TEST_CASE("step input converges to the new equilibrium") {
  const CthpParams params{0.1, 0.5, 1.5};  // Linf strict string stable
  REQUIRE((params.alpha * params.tau + params.beta) *
              (params.alpha * params.tau + params.beta) >
          4.0 * params.alpha);
  const auto traj = simulate_platoon(
      single_vehicle(params, equilibrium_state(params, 20.0),
                     LeaderProfile::constant(22.0)),
      80.0);
  CHECK(std::abs(traj.followers[0].p.back() - 22.0 * params.tau) < 1e-3);
  CHECK(std::abs(traj.followers[0].v.back() - 22.0) < 1e-3);
}

TEST_CASE("RK4 matches the closed-form solution at dt = 0.01") {
  CHECK(max_error_vs_analytic({0.08, 0.12, 1.5}, {20.3, 21.3}, 21.3, 50.0, 0.01) <
        1e-6);
  CHECK(max_error_vs_analytic({0.5, 0.1, 0.5}, {8.0, 17.0}, 20.0, 50.0, 0.01) <
        1e-6);
}

TEST_CASE("integrator shows fourth-order convergence") {
  // Halving the step should shrink the error ~16x; slope on log2 axes.
  const CthpParams params{0.5, 0.3, 1.0};
  const VehicleState x0{5.0, 16.0};
  double prev = max_error_vs_analytic(params, x0, 20.0, 20.0, 0.1);
  for (double h : {0.05, 0.025}) {
    const double err = max_error_vs_analytic(params, x0, 20.0, 20.0, h);
    const double slope = std::log2(prev / err);
    CHECK(slope > 3.7);
    CHECK(slope < 4.3);
    prev = err;
  }
}

TEST_CASE("response to leader perturbations is linear") {
  const CthpParams params{0.08, 0.12, 1.5};
  const VehicleState eq = equilibrium_state(params, 20.0);
  auto perturbed = [&](double amp) {
    return simulate_platoon(
        single_vehicle(params, eq,
                       LeaderProfile::multi_sine(
                           20.0, {LeaderProfile::Sine{amp, 0.3, 0.0},
                                  LeaderProfile::Sine{0.5 * amp, 0.7, 1.0}})),
        60.0);
  };
  const auto one = perturbed(0.1);
  const auto two = perturbed(0.2);
  for (std::size_t k = 0; k < one.samples(); ++k) {
    const double dev1p = one.followers[0].p[k] - eq.p;
    const double dev2p = two.followers[0].p[k] - eq.p;
    const double dev1v = one.followers[0].v[k] - eq.v;
    const double dev2v = two.followers[0].v[k] - eq.v;
    CHECK(std::abs(dev2p - 2.0 * dev1p) < 1e-8);
    CHECK(std::abs(dev2v - 2.0 * dev1v) < 1e-8);
  }
}

TEST_CASE("chained followers see the simulated predecessor velocity") {
  // Two identical followers behind a step: the second vehicle's input is the
  // first one's response, so its trajectory must match a single-vehicle
  // simulation driven by the recorded v1.
  const CthpParams params{0.1, 0.3, 1.2};
  PlatoonConfig cfg;
  cfg.leader = LeaderProfile::step(20.0, 22.0, 5.0);
  cfg.followers = {params, params};
  cfg.initial_states = {equilibrium_state(params, 20.0),
                        equilibrium_state(params, 20.0)};
  const auto traj = simulate_platoon(cfg, 40.0, 0.001, 0.1);

  const auto follower2 = simulate_platoon(
      single_vehicle(params, equilibrium_state(params, 20.0),
                     LeaderProfile::sampled(traj.t, traj.followers[0].v)),
      40.0, 0.001, 0.1);
  for (std::size_t k = 0; k < traj.samples(); ++k) {
    CHECK(traj.followers[1].p[k] ==
          doctest::Approx(follower2.followers[0].p[k]).epsilon(1e-6));
    CHECK(traj.followers[1].v[k] ==
          doctest::Approx(follower2.followers[0].v[k]).epsilon(1e-6));
  }
}

TEST_CASE("gap closure is flagged but does not abort the run") {
  const CthpParams params{0.02, 0.05, 1.0};  // sluggish follower
  const auto traj = simulate_platoon(
      single_vehicle(params, equilibrium_state(params, 20.0),
                     LeaderProfile::step(20.0, 0.5, 1.0)),
      120.0);
  REQUIRE(traj.collided());
  CHECK(traj.collisions[0].vehicle == 1);
  CHECK(traj.collisions[0].time > 0.0);
  CHECK(traj.samples() == 1201);  // ran to completion
}
