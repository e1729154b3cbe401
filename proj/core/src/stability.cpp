#include "cthp/stability.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "cthp/trajectory_io.hpp"

namespace cthp {

double transfer_magnitude(const CthpParams& params, double omega) {
  if (omega < 0.0)
    throw std::invalid_argument("transfer_magnitude: omega must be >= 0");
  if (params.alpha == 0.0 && omega == 0.0)
    throw std::domain_error(
        "transfer_magnitude: degenerate parameters (alpha = 0 at omega = 0)");
  const double a = params.alpha;
  const double b = params.beta;
  const double c = params.alpha * params.tau + params.beta;
  const double w2 = omega * omega;
  const double num = a * a + b * b * w2;
  const double den = (a - w2) * (a - w2) + w2 * c * c;
  return std::sqrt(num / den);
}

StabilityResult l2_strict_stable(const CthpParams& params) {
  const double m = params.alpha * params.alpha * params.tau * params.tau +
                   2.0 * params.alpha * params.beta * params.tau -
                   2.0 * params.alpha;
  return {m > 0.0, m};
}

StabilityResult linf_strict_stable(const CthpParams& params) {
  const double c = params.alpha * params.tau + params.beta;
  const double m = c * c - 4.0 * params.alpha;
  return {m > 0.0, m};
}

StabilityVerdict classify_stability(const CthpParams& params) {
  StabilityVerdict v;
  const auto l2 = l2_strict_stable(params);
  const auto linf = linf_strict_stable(params);
  v.l2_strict = l2.stable;
  v.linf_strict = linf.stable;
  v.l2_margin = l2.margin;
  v.linf_margin = linf.margin;
  v.equivalence_regime = params.beta * params.beta > 2.0 * params.alpha;
  return v;
}

FrequencyResponse bode_sweep(const CthpParams& params, double omega_min,
                             double omega_max, std::size_t points,
                             SweepSpacing spacing) {
  if (!(omega_min >= 0.0) || !(omega_min < omega_max))
    throw std::invalid_argument("bode_sweep: need 0 <= omega_min < omega_max");
  if (points < 2) throw std::invalid_argument("bode_sweep: points >= 2");
  if (spacing == SweepSpacing::Log && omega_min <= 0.0)
    throw std::invalid_argument("bode_sweep: log spacing needs omega_min > 0");

  FrequencyResponse fr;
  fr.omega.resize(points);
  fr.magnitude.resize(points);
  fr.magnitude_db.resize(points);
  const double n1 = static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) {
    const double f = static_cast<double>(i) / n1;
    double w;
    if (spacing == SweepSpacing::Linear) {
      w = omega_min + f * (omega_max - omega_min);
    } else {
      w = omega_min * std::pow(omega_max / omega_min, f);
    }
    if (i + 1 == points) w = omega_max;
    fr.omega[i] = w;
    fr.magnitude[i] = transfer_magnitude(params, w);
    fr.magnitude_db[i] = 20.0 * std::log10(fr.magnitude[i]);
  }
  return fr;
}

HinfResult hinf_norm(const CthpParams& params) {
  HinfResult best{1.0, 0.0};  // DC gain
  constexpr double kLo = 1e-4, kHi = 1e3;
  constexpr std::size_t kPoints = 1000;

  std::vector<double> w(kPoints), mag(kPoints);
  for (std::size_t i = 0; i < kPoints; ++i) {
    w[i] = kLo * std::pow(kHi / kLo, static_cast<double>(i) /
                                         static_cast<double>(kPoints - 1));
    mag[i] = transfer_magnitude(params, w[i]);
  }
  const std::size_t i_best = static_cast<std::size_t>(
      std::max_element(mag.begin(), mag.end()) - mag.begin());

  double lo = i_best == 0 ? 0.0 : w[i_best - 1];
  double hi = i_best + 1 == kPoints ? w[kPoints - 1] : w[i_best + 1];

  // Golden-section maximization on the bracket.
  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double f1 = transfer_magnitude(params, x1);
  double f2 = transfer_magnitude(params, x2);
  while (hi - lo > 1e-8 * std::max(hi, 1e-30)) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = transfer_magnitude(params, x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = transfer_magnitude(params, x1);
    }
  }
  const double x_ref = f1 > f2 ? x1 : x2;
  const double f_ref = std::max(f1, f2);
  if (f_ref > best.value) best = {f_ref, x_ref};
  if (mag[i_best] > best.value) best = {mag[i_best], w[i_best]};
  return best;
}

void write_csv(const FrequencyResponse& response, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << "omega_rad_s,magnitude,magnitude_db\n";
  os.precision(15);
  for (std::size_t i = 0; i < response.omega.size(); ++i)
    os << response.omega[i] << "," << response.magnitude[i] << ","
       << response.magnitude_db[i] << "\n";
}

namespace {

double trapezoid_l2(const std::vector<double>& chi, double dt) {
  double acc = 0.0;
  for (std::size_t i = 1; i < chi.size(); ++i)
    acc += 0.5 * (chi[i - 1] * chi[i - 1] + chi[i] * chi[i]) * dt;
  return std::sqrt(acc);
}

double max_abs(const std::vector<double>& chi) {
  double m = 0.0;
  for (double x : chi) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

SignalNorms string_stability_signal_check(const PlatoonTrajectory& traj,
                                          DeviationSignal signal) {
  if (traj.vehicle_count() < 1)
    throw std::invalid_argument("signal check needs at least one follower");
  const DeviationSeries dev = deviation_signals(traj, signal);

  SignalNorms norms;
  norms.signal = signal;
  for (const auto& chi : dev.chi) {
    norms.l2.push_back(trapezoid_l2(chi, traj.dt));
    norms.linf.push_back(max_abs(chi));
  }
  auto chain_ok = [](const std::vector<double>& n) {
    for (std::size_t i = 1; i < n.size(); ++i)
      if (n[i] > n[i - 1]) return false;
    return true;
  };
  norms.strict_l2 = chain_ok(norms.l2);
  norms.strict_linf = chain_ok(norms.linf);
  return norms;
}

}  // namespace cthp
