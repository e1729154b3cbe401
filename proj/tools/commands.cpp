#include "commands.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "cthp/leader_profile.hpp"
#include "cthp/model.hpp"
#include "cthp/pinn.hpp"
#include "cthp/simulate.hpp"
#include "cthp/stability.hpp"
#include "cthp/trajectory_io.hpp"
#include "cthp/version.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace cthp::tool {
namespace {

std::vector<double> parse_csv_numbers(const std::string& text, std::size_t count,
                                      const std::string& what) {
  std::vector<double> out;
  std::istringstream is(text);
  std::string tok;
  while (std::getline(is, tok, ',')) {
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw ConfigError(what + ": bad number '" + tok + "'");
    }
  }
  if (out.size() != count)
    throw ConfigError(what + ": expected " + std::to_string(count) +
                      " comma-separated values, got " + std::to_string(out.size()));
  return out;
}

CthpParams parse_params(const std::string& text) {
  const auto v = parse_csv_numbers(text, 3, "--params");
  return CthpParams{v[0], v[1], v[2]};
}

LeaderProfile leader_from_csv(const std::string& path) {
  // Canonical trajectory files contribute their leader column; otherwise a
  // plain two-column "t,v" file is accepted.
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("leader csv not found: " + path);
  std::string header;
  std::getline(is, header);
  if (header.rfind("t,v0", 0) == 0) {
    const PlatoonTrajectory traj = load_trajectory(path);
    return LeaderProfile::sampled(traj.t, traj.v0);
  }
  std::vector<double> t, v;
  std::string line;
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string a, b;
    if (!std::getline(ls, a, ',') || !std::getline(ls, b, ','))
      throw ConfigError("leader csv row " + std::to_string(row) +
                        ": expected t,v");
    t.push_back(std::stod(a));
    v.push_back(std::stod(b));
  }
  return LeaderProfile::sampled(std::move(t), std::move(v));
}

LeaderProfile parse_leader(const std::string& spec) {
  if (spec.rfind("csv:", 0) == 0) return leader_from_csv(spec.substr(4));
  if (spec.size() > 4 && spec.substr(spec.size() - 4) == ".csv")
    return leader_from_csv(spec);
  return LeaderProfile::parse(spec);
}

void ensure_parent_dir(const fs::path& p) {
  const fs::path dir = p.parent_path();
  if (!dir.empty()) fs::create_directories(dir);
}

fs::path manifest_path_for(const fs::path& out, bool out_is_dir) {
  if (out_is_dir) return out / "manifest.json";
  fs::path p = out;
  p.replace_extension(".manifest.json");
  return p;
}

void write_manifest(const fs::path& out, bool out_is_dir,
                    const std::string& command,
                    const std::vector<std::string>& argv,
                    const std::string& config_path, std::uint64_t seed) {
  json j;
  j["command"] = command;
  j["argv"] = argv;
  j["config_path"] = config_path.empty() ? json(nullptr) : json(config_path);
  j["out"] = out.string();
  j["seed"] = seed;
  j["tool_version"] = kVersion;
  const fs::path path = manifest_path_for(out, out_is_dir);
  ensure_parent_dir(path);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write manifest: " + path.string());
  os << j.dump(2) << "\n";
}

struct LabeledParams {
  std::string label;
  CthpParams params;
  std::string error;  // non-empty when the row is unusable
};

std::vector<LabeledParams> load_param_sets(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("params file not found: " + path);
  json j;
  try {
    is >> j;
  } catch (const std::exception& e) {
    throw ConfigError("params file is not valid JSON: " + std::string(e.what()));
  }
  const json rows = j.is_array() ? j : j.value("sets", json::array());
  if (!rows.is_array() || rows.empty())
    throw ConfigError("params file needs an array of parameter sets");

  std::vector<LabeledParams> out;
  std::size_t index = 0;
  for (const auto& row : rows) {
    ++index;
    LabeledParams lp;
    lp.label = row.value("label", "set" + std::to_string(index));
    try {
      lp.params = CthpParams{row.at("alpha").get<double>(),
                             row.at("beta").get<double>(),
                             row.at("tau").get<double>()};
      const RationalCheck check = validate_rational(lp.params);
      if (!check.ok) {
        lp.error = "violates:";
        for (const auto& v : check.violations) lp.error += " " + v;
      }
    } catch (const std::exception& e) {
      lp.error = e.what();
    }
    out.push_back(std::move(lp));
  }
  return out;
}

std::string yes_no(bool b) { return b ? "YES" : "NO"; }

// ---- generate ----------------------------------------------------------

int cmd_generate(const std::vector<std::string>& argv,
                 const std::string& params_text, const std::string& init_text,
                 const std::string& leader_spec, double horizon,
                 const std::string& out) {
  if (!(horizon > 0.0)) throw ConfigError("--horizon must be positive");
  const CthpParams params = parse_params(params_text);
  if (!validate_rational(params).ok)
    throw ConfigError("--params violates the rational driving constraints");
  const auto init = parse_csv_numbers(init_text, 2, "--init");
  const LeaderProfile leader = parse_leader(leader_spec);

  const PlatoonTrajectory traj =
      generate_synthetic(params, {init[0], init[1]}, leader, horizon);
  if (traj.collided())
    throw NumericError("scenario closes the gap (p <= 0) at t = " +
                       std::to_string(traj.collisions.front().time) +
                       " s; not a valid canonical trajectory");
  ensure_parent_dir(out);
  save_trajectory(traj, out);
  write_manifest(out, false, "generate", argv, "", 0);
  std::cout << "wrote " << traj.samples() << " samples ("
            << traj.vehicle_count() << " follower) to " << out << "\n";
  return kExitOk;
}

// ---- learn -------------------------------------------------------------

LossWeights weights_from_json(const json& j) {
  LossWeights w;
  w.q_gap = j.value("q_gap", w.q_gap);
  w.q_vel = j.value("q_vel", w.q_vel);
  w.s_gap = j.value("s_gap", w.s_gap);
  w.s_vel = j.value("s_vel", w.s_vel);
  w.s_leader = j.value("s_leader", w.s_leader);
  return w;
}

int cmd_learn(const std::vector<std::string>& argv, const CLI::App* sub,
              std::string data_path, std::string mode_text,
              const std::string& config_path, const std::string& out_dir,
              std::uint64_t seed_flag, std::int64_t iters_flag) {
  json cfg = json::object();
  if (!config_path.empty()) {
    std::ifstream is(config_path, std::ios::binary);
    if (!is) throw ConfigError("config file not found: " + config_path);
    try {
      is >> cfg;
    } catch (const std::exception& e) {
      throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }
  }

  if (data_path.empty()) data_path = cfg.value("data_path", "");
  if (data_path.empty()) throw ConfigError("no data file (--data or data_path)");
  if (sub->count("--mode") == 0 && cfg.contains("mode"))
    mode_text = cfg["mode"].get<std::string>();

  LearnMode mode;
  if (mode_text == "single")
    mode = LearnMode::Single;
  else if (mode_text == "homogeneous")
    mode = LearnMode::Homogeneous;
  else if (mode_text == "per-vehicle")
    mode = LearnMode::PerVehicle;
  else
    throw ConfigError("--mode must be single|homogeneous|per-vehicle");

  const PlatoonTrajectory data = load_trajectory(data_path);
  if (cfg.contains("vehicles") &&
      cfg["vehicles"].get<std::size_t>() != data.vehicle_count())
    throw ConfigError("config 'vehicles' does not match the data file");

  TrainingOptions opts;
  opts.lr = cfg.value("lr", opts.lr);
  opts.max_iters = cfg.value("max_iters", opts.max_iters);
  opts.seed = cfg.value("seed", opts.seed);
  opts.log_interval = cfg.value("log_interval", opts.log_interval);
  opts.split_fraction = cfg.value("split_fraction", opts.split_fraction);
  if (sub->count("--seed") > 0) opts.seed = seed_flag;
  if (sub->count("--max-iters") > 0) opts.max_iters = iters_flag;
  if (cfg.contains("layer_sizes")) {
    const auto sizes = cfg["layer_sizes"].get<std::vector<int>>();
    if (sizes.size() < 2 || sizes.front() != 1 ||
        sizes.back() != 2 * static_cast<int>(data.vehicle_count()) + 1)
      throw ConfigError(
          "layer_sizes must run from 1 input to 2M+1 outputs for this data");
    opts.hidden.assign(sizes.begin() + 1, sizes.end() - 1);
  }
  if (opts.max_iters < 1) throw ConfigError("max_iters must be >= 1");
  if (!(opts.lr > 0.0)) throw ConfigError("lr must be positive");
  if (!(opts.split_fraction > 0.0 && opts.split_fraction <= 1.0))
    throw ConfigError("split_fraction must be in (0, 1]");

  Normalization norm;
  if (cfg.contains("normalization")) {
    norm.velocity_scale =
        cfg["normalization"].value("velocity_scale", norm.velocity_scale);
    norm.gap_scale = cfg["normalization"].value("gap_scale", norm.gap_scale);
  }
  const LossWeights weights = cfg.contains("loss_weights")
                                  ? weights_from_json(cfg["loss_weights"])
                                  : LossWeights{};

  PinnProblem problem = PinnProblem::make(data, mode, opts, weights, norm);
  std::cout << "training: " << data.vehicle_count() << " follower(s), "
            << data.samples() << " samples, "
            << problem.net.parameter_count() << " network parameters, "
            << opts.max_iters << " iterations\n";
  const TrainingReport report = train(problem);

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  write_report_json(report, problem, (dir / "report.json").string());
  write_loss_history_csv(report, (dir / "loss_history.csv").string());
  write_param_trajectory_csv(report, (dir / "param_trajectory.csv").string());
  write_predictions_csv(report, problem, (dir / "predictions.csv").string());
  save_checkpoint(problem.net, (dir / "checkpoint.json").string(), opts.seed,
                  report.iterations_run);
  write_manifest(dir, true, "learn", argv, config_path, opts.seed);

  for (std::size_t i = 0; i < report.learned.size(); ++i) {
    const CthpParams& pr = report.learned[i];
    std::cout << "vehicle " << i + 1 << ": alpha = " << pr.alpha
              << ", beta = " << pr.beta << ", tau = " << pr.tau << "\n";
  }
  if (!report.loss_history.empty())
    std::cout << "final loss " << report.loss_history.back().total << " after "
              << report.iterations_run << " iterations ("
              << report.wall_clock_seconds << " s)\n";
  if (report.diverged)
    throw DivergenceError("partial report written to " + out_dir);
  return kExitOk;
}

// ---- stability ---------------------------------------------------------

int cmd_stability(const std::vector<std::string>& argv,
                  const std::string& params_file, const std::string& out) {
  const auto sets = load_param_sets(params_file);
  ensure_parent_dir(out);
  std::ofstream os(out, std::ios::binary);
  if (!os) throw ConfigError("cannot write: " + out);
  os.precision(15);
  os << "label,alpha,beta,tau,l2_strict,l2_margin,linf_strict,linf_margin,error\n";
  std::size_t failures = 0;
  for (const auto& set : sets) {
    if (!set.error.empty()) {
      ++failures;
      os << set.label << ",,,,,,,," << '"' << set.error << '"' << "\n";
      std::cout << set.label << ": error (" << set.error << ")\n";
      continue;
    }
    const StabilityVerdict v = classify_stability(set.params);
    os << set.label << "," << set.params.alpha << "," << set.params.beta << ","
       << set.params.tau << "," << yes_no(v.l2_strict) << "," << v.l2_margin
       << "," << yes_no(v.linf_strict) << "," << v.linf_margin << ",\n";
    std::cout << set.label << ": L2 " << yes_no(v.l2_strict) << " (margin "
              << v.l2_margin << "), Linf " << yes_no(v.linf_strict)
              << " (margin " << v.linf_margin << ")\n";
  }
  write_manifest(out, false, "stability", argv, params_file, 0);
  if (failures == sets.size())
    throw ConfigError("all parameter sets were invalid");
  return kExitOk;
}

// ---- bode --------------------------------------------------------------

int cmd_bode(const std::vector<std::string>& argv, const std::string& params_file,
             double omega_min, double omega_max, std::size_t points,
             const std::string& spacing_text, const std::string& out) {
  const auto sets = load_param_sets(params_file);
  const SweepSpacing spacing = spacing_text == "linear" ? SweepSpacing::Linear
                              : spacing_text == "log"
                                  ? SweepSpacing::Log
                                  : throw ConfigError("--spacing: log|linear");
  for (const auto& set : sets)
    if (!set.error.empty())
      throw ConfigError("parameter set '" + set.label + "': " + set.error);

  ensure_parent_dir(out);
  for (const auto& set : sets) {
    const FrequencyResponse fr =
        bode_sweep(set.params, omega_min, omega_max, points, spacing);
    fs::path path(out);
    if (sets.size() > 1) {
      fs::path stem = path;
      stem.replace_extension();
      path = stem.string() + "_" + set.label + path.extension().string();
    }
    write_csv(fr, path.string());
    const auto peak =
        std::max_element(fr.magnitude_db.begin(), fr.magnitude_db.end());
    std::cout << set.label << ": peak "
              << *peak << " dB at omega = "
              << fr.omega[static_cast<std::size_t>(peak - fr.magnitude_db.begin())]
              << " rad/s -> " << path.string() << "\n";
  }
  write_manifest(out, false, "bode", argv, params_file, 0);
  return kExitOk;
}

// ---- platoon-sim -------------------------------------------------------

int cmd_platoon_sim(const std::vector<std::string>& argv,
                    const std::string& params_text, const std::string& lead_text,
                    int n_followers, double horizon,
                    const std::string& signal_text, const std::string& out) {
  if (n_followers < 1) throw ConfigError("--n-followers must be >= 1");
  if (!(horizon > 0.0)) throw ConfigError("--horizon must be positive");
  const CthpParams params = parse_params(params_text);
  if (!validate_rational(params).ok)
    throw ConfigError("--params violates the rational driving constraints");
  const auto lead = parse_csv_numbers(lead_text, 4, "--lead");
  const DeviationSignal signal =
      signal_text == "velocity" ? DeviationSignal::Velocity
      : signal_text == "spacing"
          ? DeviationSignal::Spacing
          : throw ConfigError("--signal: velocity|spacing");

  PlatoonConfig cfg;
  cfg.leader = LeaderProfile::sinusoid_after_hold(lead[0], lead[1], lead[2], lead[3]);
  for (int i = 0; i < n_followers; ++i) {
    cfg.followers.push_back(params);
    cfg.initial_states.push_back(equilibrium_state(params, lead[0]));
  }
  const PlatoonTrajectory traj = simulate_platoon(cfg, horizon);
  if (traj.collided())
    std::cerr << "warning: follower " << traj.collisions.front().vehicle
              << " closed its gap at t = " << traj.collisions.front().time
              << " s\n";
  const SignalNorms norms = string_stability_signal_check(traj, signal);

  ensure_parent_dir(out);
  {
    std::ofstream os(out, std::ios::binary);
    if (!os) throw ConfigError("cannot write: " + out);
    os.precision(15);
    os << "t,v0";
    for (int i = 1; i <= n_followers; ++i) os << ",v" << i;
    os << "\n";
    for (std::size_t k = 0; k < traj.samples(); ++k) {
      os << traj.t[k] << "," << traj.v0[k];
      for (const auto& f : traj.followers) os << "," << f.v[k];
      os << "\n";
    }
  }
  fs::path norms_path(out);
  norms_path.replace_extension();
  norms_path += "_norms.csv";
  {
    std::ofstream os(norms_path, std::ios::binary);
    os.precision(15);
    os << "signal_index,l2,linf\n";
    for (std::size_t i = 0; i < norms.l2.size(); ++i)
      os << i << "," << norms.l2[i] << "," << norms.linf[i] << "\n";
  }
  write_manifest(out, false, "platoon-sim", argv, "", 0);

  const char* tag = signal == DeviationSignal::Velocity ? "vehicle" : "follower";
  for (std::size_t i = 0; i < norms.linf.size(); ++i)
    std::cout << tag << " " << i << ": L2 = " << norms.l2[i]
              << ", Linf = " << norms.linf[i] << "\n";
  std::cout << "strict string stable: L2 " << yes_no(norms.strict_l2)
            << ", Linf " << yes_no(norms.strict_linf) << "\n";
  return kExitOk;
}

// ---- rerun -------------------------------------------------------------

int cmd_rerun(const std::string& manifest_path) {
  std::ifstream is(manifest_path, std::ios::binary);
  if (!is) throw ConfigError("manifest not found: " + manifest_path);
  json j;
  try {
    is >> j;
  } catch (const std::exception& e) {
    throw ConfigError("manifest is not valid JSON: " + std::string(e.what()));
  }
  const auto argv = j.value("argv", std::vector<std::string>{});
  if (argv.empty()) throw ConfigError("manifest has no argv to replay");
  if (argv.front() == "rerun") throw ConfigError("refusing to replay a rerun");
  return run(argv);
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Constant time-headway platoon toolkit: simulation, CTHP "
               "parameter learning, string stability analysis"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "simulate one ACC follower and "
                                             "write a canonical trajectory CSV");
  std::string gen_params = "0.08,0.12,1.5";
  std::string gen_init = "20.3,21.3";
  std::string gen_leader = "excite";
  double gen_horizon = 300.0;
  std::string gen_out;
  gen->add_option("--params", gen_params, "alpha,beta,tau")->capture_default_str();
  gen->add_option("--init", gen_init, "initial space-gap,velocity")
      ->capture_default_str();
  gen->add_option("--leader", gen_leader,
                  "constant:V | step:V0,V1,T | sinhold:BASE,AMP,OMEGA,HOLD | "
                  "multisine:BASE,A:W:PH,... | excite | <file.csv>")
      ->capture_default_str();
  gen->add_option("--horizon", gen_horizon, "duration, s")->capture_default_str();
  gen->add_option("--out", gen_out, "output CSV path")->required();

  // learn
  auto* learn = app.add_subcommand(
      "learn", "fit CTHP parameters to a trajectory with the physics-"
               "constrained network");
  std::string learn_data, learn_mode = "single", learn_config, learn_out;
  std::uint64_t learn_seed = 0;
  std::int64_t learn_iters = 60000;
  learn->add_option("--data", learn_data, "canonical trajectory CSV");
  learn->add_option("--mode", learn_mode, "single|homogeneous|per-vehicle")
      ->capture_default_str();
  learn->add_option("--config", learn_config, "training config JSON");
  learn->add_option("--seed", learn_seed, "overrides config seed");
  learn->add_option("--max-iters", learn_iters, "overrides config max_iters");
  learn->add_option("--out", learn_out, "output directory")->required();

  // stability
  auto* stab = app.add_subcommand(
      "stability", "classify parameter sets for L2/Linf strict string stability");
  std::string stab_params, stab_out;
  stab->add_option("--params-file", stab_params, "JSON parameter sets")->required();
  stab->add_option("--out", stab_out, "output CSV")->required();

  // bode
  auto* bode = app.add_subcommand("bode",
                                  "frequency response of parameter sets");
  std::string bode_params, bode_out, bode_spacing = "log";
  double bode_min = 0.01, bode_max = 10.0;
  std::size_t bode_points = 500;
  bode->add_option("--params-file", bode_params, "JSON parameter sets")->required();
  bode->add_option("--omega-min", bode_min, "rad/s")->capture_default_str();
  bode->add_option("--omega-max", bode_max, "rad/s")->capture_default_str();
  bode->add_option("--points", bode_points)->capture_default_str();
  bode->add_option("--spacing", bode_spacing, "log|linear")->capture_default_str();
  bode->add_option("--out", bode_out, "output CSV")->required();

  // platoon-sim
  auto* psim = app.add_subcommand(
      "platoon-sim", "simulate a homogeneous platoon behind a sinusoidal lead "
                     "vehicle and report signal-norm chains");
  std::string psim_params, psim_lead = "20,1,0.25,20", psim_signal = "velocity",
              psim_out;
  int psim_n = 8;
  double psim_horizon = 500.0;
  psim->add_option("--params", psim_params, "alpha,beta,tau")->required();
  psim->add_option("--lead", psim_lead, "base,amplitude,omega,hold")
      ->capture_default_str();
  psim->add_option("--n-followers", psim_n)->capture_default_str();
  psim->add_option("--horizon", psim_horizon, "duration, s")->capture_default_str();
  psim->add_option("--signal", psim_signal, "velocity|spacing")
      ->capture_default_str();
  psim->add_option("--out", psim_out, "velocity CSV path")->required();

  // rerun
  auto* rerun = app.add_subcommand("rerun", "replay a saved manifest");
  std::string rerun_manifest;
  rerun->add_option("manifest", rerun_manifest, "manifest.json path")->required();

  try {
    // CLI11's vector overload consumes a reversed copy.
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    throw ConfigError("invalid command line");
  }

  if (gen->parsed())
    return cmd_generate(args, gen_params, gen_init, gen_leader, gen_horizon,
                        gen_out);
  if (learn->parsed())
    return cmd_learn(args, learn, learn_data, learn_mode, learn_config,
                     learn_out, learn_seed, learn_iters);
  if (stab->parsed()) return cmd_stability(args, stab_params, stab_out);
  if (bode->parsed())
    return cmd_bode(args, bode_params, bode_min, bode_max, bode_points,
                    bode_spacing, bode_out);
  if (psim->parsed())
    return cmd_platoon_sim(args, psim_params, psim_lead, psim_n, psim_horizon,
                           psim_signal, psim_out);
  if (rerun->parsed()) return cmd_rerun(rerun_manifest);
  throw ConfigError("no subcommand");
}

}  // namespace cthp::tool
