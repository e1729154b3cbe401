#pragma once

#include <string>
#include <vector>

#include "cthp/model.hpp"
#include "cthp/simulate.hpp"

namespace cthp {

/// Sampled magnitude curve of the speed-to-speed transfer function
///   H(s) = (beta*s + alpha) / (s^2 + (alpha*tau + beta)*s + alpha)
/// evaluated along the imaginary axis.
struct FrequencyResponse {
  std::vector<double> omega;         // rad/s
  std::vector<double> magnitude;     // |H(j*omega)|, dimensionless
  std::vector<double> magnitude_db;  // 20*log10(magnitude)
};

struct StabilityResult {
  bool stable = false;
  double margin = 0.0;  // positive iff stable
};

/// Strict string stability classification of one parameter set.
/// l2_margin  = alpha^2*tau^2 + 2*alpha*beta*tau - 2*alpha
/// linf_margin = (alpha*tau + beta)^2 - 4*alpha
/// When beta^2 > 2*alpha (equivalence_regime), L2 stability implies Linf
/// stability (linf_margin == l2_margin + beta^2 - 2*alpha).
struct StabilityVerdict {
  bool l2_strict = false;
  bool linf_strict = false;
  double l2_margin = 0.0;
  double linf_margin = 0.0;
  bool equivalence_regime = false;
};

struct HinfResult {
  double value = 1.0;  // sup over omega >= 0 of |H(j*omega)|
  double omega = 0.0;  // where the supremum is attained
};

enum class DeviationSignal { Velocity, Spacing };

/// Per-vehicle signal norms for the strict string stability definition
/// ||chi_i|| <= ||chi_{i-1}||. In Velocity mode signal index 0 is the lead
/// vehicle and index i its i-th follower; in Spacing mode index i-1 is
/// follower i (the lead vehicle has no gap signal).
struct SignalNorms {
  DeviationSignal signal = DeviationSignal::Velocity;
  std::vector<double> l2;    // trapezoidal integral of chi^2, square-rooted
  std::vector<double> linf;  // max |chi|
  bool strict_l2 = false;    // every consecutive pair non-increasing
  bool strict_linf = false;
};

/// |H(j*omega)| from the closed-form magnitude expression. Throws
/// std::domain_error for the degenerate 0/0 case alpha == 0, omega == 0.
double transfer_magnitude(const CthpParams& params, double omega);

StabilityResult l2_strict_stable(const CthpParams& params);
StabilityResult linf_strict_stable(const CthpParams& params);
StabilityVerdict classify_stability(const CthpParams& params);

enum class SweepSpacing { Linear, Log };

/// Magnitude curve over [omega_min, omega_max] with `points` samples.
/// Log spacing requires omega_min > 0.
FrequencyResponse bode_sweep(const CthpParams& params, double omega_min,
                             double omega_max, std::size_t points,
                             SweepSpacing spacing = SweepSpacing::Log);

/// Peak of the frequency response over omega >= 0: coarse 1000-point log
/// sweep of [1e-4, 1e3] rad/s followed by golden-section refinement around
/// the best sample (relative tolerance 1e-8). The DC gain of 1 is always a
/// candidate, so the result is never below 1.
HinfResult hinf_norm(const CthpParams& params);

/// Writes "omega_rad_s,magnitude,magnitude_db" rows.
void write_csv(const FrequencyResponse& response, const std::string& path);

/// Evaluates Definition-style strict string stability on a simulated or
/// measured trajectory. Deviations are taken against the equilibrium implied
/// by the first sample, which must be an equilibrium point for every vehicle
/// (velocities equal within 1e-3); otherwise an exception is thrown.
SignalNorms string_stability_signal_check(const PlatoonTrajectory& traj,
                                          DeviationSignal signal);

}  // namespace cthp
