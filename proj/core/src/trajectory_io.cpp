#include "cthp/trajectory_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cthp/stability.hpp"

namespace cthp {

PlatoonTrajectory generate_synthetic(const CthpParams& params,
                                     const VehicleState& initial,
                                     const LeaderProfile& leader,
                                     double horizon) {
  PlatoonConfig config;
  config.followers = {params};
  config.initial_states = {initial};
  config.leader = leader;
  return simulate_platoon(config, horizon, 0.01, 0.1);
}

void save_trajectory(const PlatoonTrajectory& traj, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << "t,v0";
  for (std::size_t i = 1; i <= traj.vehicle_count(); ++i)
    os << ",p" << i << ",v" << i;
  os << "\n";
  os.precision(15);
  for (std::size_t k = 0; k < traj.samples(); ++k) {
    os << traj.t[k] << "," << traj.v0[k];
    for (const auto& f : traj.followers) os << "," << f.p[k] << "," << f.v[k];
    os << "\n";
  }
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string tok;
  std::istringstream is(line);
  while (std::getline(is, tok, ',')) out.push_back(tok);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
  std::size_t pos = 0;
  double v;
  try {
    v = std::stod(cell, &pos);
  } catch (const std::exception&) {
    throw CsvFormatError(CsvError::BadCell,
                         "unparseable cell at row " + std::to_string(row) +
                             ", column " + std::to_string(col));
  }
  while (pos < cell.size() && (cell[pos] == ' ' || cell[pos] == '\r')) ++pos;
  if (pos != cell.size())
    throw CsvFormatError(CsvError::BadCell,
                         "trailing junk in cell at row " + std::to_string(row));
  if (!std::isfinite(v))
    throw CsvFormatError(CsvError::NanCell,
                         "non-finite value at row " + std::to_string(row) +
                             ", column " + std::to_string(col));
  return v;
}

std::string strip(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  std::size_t e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

}  // namespace

PlatoonTrajectory load_trajectory(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is)
    throw CsvFormatError(CsvError::FileNotFound, "cannot open: " + path);

  std::string line;
  if (!std::getline(is, line))
    throw CsvFormatError(CsvError::MalformedHeader, "empty file: " + path);
  const auto header = split_line(line);
  if (header.size() < 4 || header.size() % 2 != 0 ||
      strip(header[0]) != "t" || strip(header[1]) != "v0")
    throw CsvFormatError(CsvError::MalformedHeader,
                         "expected header t,v0,p1,v1,...: got '" + line + "'");
  const std::size_t m = header.size() / 2 - 1;
  for (std::size_t i = 1; i <= m; ++i) {
    if (strip(header[2 * i]) != "p" + std::to_string(i) ||
        strip(header[2 * i + 1]) != "v" + std::to_string(i))
      throw CsvFormatError(CsvError::MalformedHeader,
                           "bad column names for vehicle " + std::to_string(i));
  }

  PlatoonTrajectory traj;
  traj.followers.resize(m);
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (strip(line).empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != header.size())
      throw CsvFormatError(CsvError::BadCell,
                           "row " + std::to_string(row) + " has " +
                               std::to_string(cells.size()) + " cells, want " +
                               std::to_string(header.size()));
    traj.t.push_back(parse_cell(cells[0], row, 0));
    traj.v0.push_back(parse_cell(cells[1], row, 1));
    for (std::size_t i = 0; i < m; ++i) {
      traj.followers[i].p.push_back(parse_cell(cells[2 + 2 * i], row, 2 + 2 * i));
      traj.followers[i].v.push_back(parse_cell(cells[3 + 2 * i], row, 3 + 2 * i));
    }
  }
  if (traj.t.size() < 2)
    throw CsvFormatError(CsvError::MalformedHeader,
                         "trajectory needs at least two rows");

  traj.dt = traj.t[1] - traj.t[0];
  for (std::size_t k = 1; k < traj.t.size(); ++k) {
    const double step = traj.t[k] - traj.t[k - 1];
    if (std::abs(step - traj.dt) > 1e-6)
      throw CsvFormatError(CsvError::NonUniformTime,
                           "timestamp jitter at row " + std::to_string(k + 1));
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < traj.t.size(); ++k) {
      if (traj.followers[i].p[k] <= 0.0)
        throw CsvFormatError(CsvError::NonPositiveGap,
                             "p" + std::to_string(i + 1) + " <= 0 at t = " +
                                 std::to_string(traj.t[k]));
      if (traj.followers[i].v[k] < 0.0)
        throw CsvFormatError(CsvError::NegativeVelocity,
                             "v" + std::to_string(i + 1) + " < 0 at t = " +
                                 std::to_string(traj.t[k]));
    }
  }
  return traj;
}

MeanTimeGap mean_time_gap(const std::vector<double>& p,
                          const std::vector<double>& v, double min_speed) {
  if (p.size() != v.size())
    throw std::invalid_argument("mean_time_gap: length mismatch");
  MeanTimeGap out;
  double acc = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (v[k] > min_speed) {
      acc += p[k] / v[k];
      ++out.used;
    } else {
      ++out.excluded;
    }
  }
  if (out.used == 0)
    throw std::domain_error(
        "mean_time_gap: all samples below the low-speed threshold");
  out.value = acc / static_cast<double>(out.used);
  return out;
}

EquilibriumRef infer_equilibrium(const PlatoonTrajectory& traj, double tol) {
  if (traj.samples() == 0)
    throw std::invalid_argument("infer_equilibrium: empty trajectory");
  EquilibriumRef ref;
  ref.v_ref = traj.v0.front();
  if (!(ref.v_ref > 0.0))
    throw std::runtime_error(
        "infer_equilibrium: reference velocity must be positive");
  for (std::size_t i = 0; i < traj.vehicle_count(); ++i) {
    const double vi = traj.followers[i].v.front();
    if (std::abs(vi - ref.v_ref) > tol)
      throw std::runtime_error(
          "infer_equilibrium: first sample is not an equilibrium point "
          "(velocity mismatch for vehicle " +
          std::to_string(i + 1) + ")");
    ref.tau.push_back(traj.followers[i].p.front() / vi);
  }
  return ref;
}

DeviationSeries deviation_signals(const PlatoonTrajectory& traj,
                                  DeviationSignal signal,
                                  const std::optional<EquilibriumRef>& reference) {
  const EquilibriumRef ref =
      reference.has_value() ? *reference : infer_equilibrium(traj);
  if (ref.tau.size() != traj.vehicle_count())
    throw std::invalid_argument("deviation_signals: reference size mismatch");

  DeviationSeries out;
  const std::size_t n = traj.samples();
  if (signal == DeviationSignal::Velocity) {
    out.leader_included = true;
    std::vector<double> chi0(n);
    for (std::size_t k = 0; k < n; ++k) chi0[k] = traj.v0[k] - ref.v_ref;
    out.chi.push_back(std::move(chi0));
    for (const auto& f : traj.followers) {
      std::vector<double> chi(n);
      for (std::size_t k = 0; k < n; ++k) chi[k] = f.v[k] - ref.v_ref;
      out.chi.push_back(std::move(chi));
    }
  } else {
    out.leader_included = false;
    for (std::size_t i = 0; i < traj.vehicle_count(); ++i) {
      const double p_eq = ref.tau[i] * ref.v_ref;
      std::vector<double> chi(n);
      for (std::size_t k = 0; k < n; ++k)
        chi[k] = traj.followers[i].p[k] - p_eq;
      out.chi.push_back(std::move(chi));
    }
  }
  return out;
}

}  // namespace cthp
