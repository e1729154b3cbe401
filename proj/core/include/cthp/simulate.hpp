#pragma once

#include <cstddef>
#include <vector>

#include "cthp/leader_profile.hpp"
#include "cthp/model.hpp"

namespace cthp {

/// A platoon of M CTHP followers behind one lead vehicle. Vehicle i follows
/// vehicle i-1; the lead (index 0) follows the given velocity profile.
struct PlatoonConfig {
  std::vector<CthpParams> followers;
  LeaderProfile leader = LeaderProfile::constant(20.0);
  std::vector<VehicleState> initial_states;
};

/// Uniformly sampled platoon trajectory: leader velocity plus per-follower
/// (space-gap, velocity) series, all of identical length.
struct PlatoonTrajectory {
  struct Follower {
    std::vector<double> p;  // m
    std::vector<double> v;  // m/s
  };
  struct Collision {
    std::size_t vehicle = 0;  // 1-based follower index
    double time = 0.0;        // first time the gap became non-positive
  };

  double dt = 0.1;
  std::vector<double> t;
  std::vector<double> v0;
  std::vector<Follower> followers;
  // Gap closures are reported here instead of aborting the run, so that
  // string-unstable scenarios can still be simulated to completion.
  std::vector<Collision> collisions;

  std::size_t vehicle_count() const { return followers.size(); }
  std::size_t samples() const { return t.size(); }
  bool collided() const { return !collisions.empty(); }
};

/// Integrates the coupled 2M-dimensional CTHP ODE with classical fixed-step
/// RK4 at dt_internal and returns the solution subsampled at dt_output
/// (which must be an integer multiple of dt_internal). The first output
/// sample equals the initial states.
PlatoonTrajectory simulate_platoon(const PlatoonConfig& config, double horizon,
                                   double dt_internal = 0.01,
                                   double dt_output = 0.1);

}  // namespace cthp
