#pragma once

#include <string>
#include <vector>

namespace cthp {

/// Lead-vehicle velocity signal v0(t). Built-in analytic shapes plus a
/// sampled form (piecewise-linear interpolation between samples).
class LeaderProfile {
 public:
  struct Sine {
    double amplitude = 0.0;  // m/s
    double omega = 0.0;      // rad/s
    double phase = 0.0;      // rad
  };

  static LeaderProfile constant(double v);
  /// v_before until t_switch, v_after from then on.
  static LeaderProfile step(double v_before, double v_after, double t_switch);
  /// base for `hold` seconds, then base + amplitude*sin(omega*(t - hold)).
  static LeaderProfile sinusoid_after_hold(double base, double amplitude,
                                           double omega, double hold);
  /// base + sum of sine components, defined for all t.
  static LeaderProfile multi_sine(double base, std::vector<Sine> components);
  /// Piecewise-linear interpolation of samples; clamps outside [t.front, t.back].
  static LeaderProfile sampled(std::vector<double> t, std::vector<double> v);

  /// Default excitation used for synthetic experiments: 20 m/s base with
  /// three incommensurate sinusoids (persistently exciting, gentle enough
  /// that gaps stay positive for typical ACC parameters).
  static LeaderProfile default_excitation();

  double operator()(double t) const;

  /// Compact spec string, e.g. "constant:20" or "multisine:20,1.5:0.08:0".
  /// parse() accepts the same syntax (see tool help for the grammar).
  std::string describe() const;
  static LeaderProfile parse(const std::string& spec);

 private:
  enum class Kind { Constant, Step, SinusoidAfterHold, MultiSine, Sampled };
  Kind kind_ = Kind::Constant;
  double base_ = 0.0;
  double step_to_ = 0.0;
  double step_at_ = 0.0;
  double hold_ = 0.0;
  std::vector<Sine> components_;
  std::vector<double> sample_t_, sample_v_;
};

}  // namespace cthp
