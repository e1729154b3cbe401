#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cthp/leader_profile.hpp"
#include "cthp/simulate.hpp"

namespace cthp {

enum class DeviationSignal;  // defined in stability.hpp

/// Canonical trajectory CSV: header "t,v0,p1,v1,...,pM,vM", units s, m/s, m,
/// uniform 0.1 s spacing, LF line endings.
enum class CsvError {
  FileNotFound,
  MalformedHeader,
  BadCell,          // unparseable or missing cell
  NanCell,          // cell parsed to a non-finite value
  NonUniformTime,   // timestamp jitter above 1e-6 s
  NonPositiveGap,
  NegativeVelocity,
};

class CsvFormatError : public std::runtime_error {
 public:
  CsvFormatError(CsvError code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  CsvError code() const { return code_; }

 private:
  CsvError code_;
};

/// Simulates one CTHP follower behind the given leader profile and samples
/// the result at 10 Hz (the canonical rate). A 300 s horizon yields 3001 rows.
PlatoonTrajectory generate_synthetic(const CthpParams& params,
                                     const VehicleState& initial,
                                     const LeaderProfile& leader,
                                     double horizon = 300.0);

void save_trajectory(const PlatoonTrajectory& traj, const std::string& path);
PlatoonTrajectory load_trajectory(const std::string& path);

/// Mean of p(t)/v(t) over samples with v above the low-speed threshold.
struct MeanTimeGap {
  double value = 0.0;     // s
  std::size_t used = 0;   // samples included
  std::size_t excluded = 0;
};
MeanTimeGap mean_time_gap(const std::vector<double>& p,
                          const std::vector<double>& v,
                          double min_speed = 0.5);

/// Equilibrium reference for deviation signals: common cruise velocity and
/// per-follower time headway (p_i = tau_i * v_ref at the reference point).
struct EquilibriumRef {
  double v_ref = 0.0;
  std::vector<double> tau;
};

/// Deviation signal chi_i(t) per vehicle. In Velocity mode chi_0 is the lead
/// vehicle's deviation and chi[i] follower i's (leader_included = true); in
/// Spacing mode chi[i-1] is follower i's gap deviation.
struct DeviationSeries {
  std::vector<std::vector<double>> chi;
  bool leader_included = false;
};

/// Infers the equilibrium reference from the first sample: all velocities
/// must agree within tol and tau_i = p_i(0)/v_ref. Throws when the
/// trajectory does not start at an equilibrium point.
EquilibriumRef infer_equilibrium(const PlatoonTrajectory& traj,
                                 double tol = 1e-3);

DeviationSeries deviation_signals(
    const PlatoonTrajectory& traj, DeviationSignal signal,
    const std::optional<EquilibriumRef>& reference = std::nullopt);

}  // namespace cthp
