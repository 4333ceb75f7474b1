// spdest: simulate, estimate and run Monte Carlo experiments from a flat config file.
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spdest/config.hpp"
#include "spdest/error.hpp"
#include "spdest/harness.hpp"
#include "spdest/simulator.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitFailed = 3;

struct Options {
  std::string config;
  std::string out;
  std::string data;
  std::vector<std::string> set;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 0;
  std::uint64_t replicate = 0;
};

spdest::ExperimentConfig load_config(const Options& opt, const char* force_kind = nullptr) {
  spdest::FlatConfig flat;
  if (!opt.config.empty()) flat = spdest::FlatConfig::load(opt.config);
  for (const auto& kv : opt.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw spdest::ConfigError("--set expects key=value, got '" + kv + "'");
    flat.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (force_kind) flat.set("experiment", force_kind);
  if (opt.seed_given) flat.set("run.seed", std::to_string(opt.seed));
  if (opt.threads > 0) flat.set("run.threads", std::to_string(opt.threads));
  if (!opt.out.empty()) flat.set("run.out", opt.out);
  return spdest::ExperimentConfig::from_flat(flat);
}

fs::path output_dir(const spdest::ExperimentConfig& cfg) {
  fs::path dir(cfg.run.out);
  fs::create_directories(dir);
  return dir;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  return f;
}

spdest::ObservationGrid simulate_one(const spdest::ExperimentConfig& cfg, std::uint64_t replicate) {
  const auto& m = cfg.model;
  const spdest::FieldSimulator sim(m.params, m.noise, m.initial_field(), m.epsilon,
                                   spdest::GridSpec{cfg.grid.n_obs, cfg.grid.m1, cfg.grid.m2},
                                   cfg.grid.truncation);
  return sim.simulate(cfg.run.seed, replicate);
}

int cmd_simulate(const Options& opt) {
  const auto cfg = load_config(opt, "spde");
  const auto obs = simulate_one(cfg, opt.replicate);
  const auto path = output_dir(cfg) / "surface.csv";
  auto f = open_out(path);
  spdest::write_surface_csv(f, obs);
  std::cout << "wrote " << path.string() << " (N=" << obs.n_time() << ", M1=" << obs.m1()
            << ", M2=" << obs.m2() << ", truncation=" << obs.truncation() << ")\n";
  return kExitOk;
}

int cmd_estimate(const Options& opt) {
  const auto cfg = load_config(opt, "spde");
  std::optional<spdest::ObservationGrid> obs;
  if (!opt.data.empty()) {
    std::ifstream in(opt.data);
    if (!in) throw spdest::ConfigError("cannot open data file '" + opt.data + "'");
    obs.emplace(spdest::read_surface_csv(in, cfg.model.epsilon));
  } else {
    obs.emplace(simulate_one(cfg, opt.replicate));
  }
  const auto report = spdest::estimate_dataset(*obs, cfg);
  const auto path = output_dir(cfg) / "estimate.json";
  auto f = open_out(path);
  spdest::write_estimation_json(f, report, cfg);
  std::cout << "wrote " << path.string() << '\n';
  return kExitOk;
}

int run_mc(const Options& opt, const char* kind) {
  const auto cfg = load_config(opt, kind);
  const auto result = spdest::run_replicates(cfg);
  const auto summary = spdest::summarize(result.records, result.theory);
  const auto dir = output_dir(cfg);
  {
    auto f = open_out(dir / "replicates.csv");
    spdest::write_replicates_csv(f, result.records);
  }
  {
    auto f = open_out(dir / "summary.json");
    spdest::write_summary_json(f, summary, result, cfg);
  }
  std::cout << result.n_success << "/" << result.records.size() << " replicates succeeded; wrote "
            << (dir / "replicates.csv").string() << " and " << (dir / "summary.json").string() << '\n';
  if (result.failed) {
    std::cerr << "experiment failed: more than 10% of replicates failed\n";
    return kExitFailed;
  }
  return kExitOk;
}

int nearest_index(double v, int m, const char* axis) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw spdest::ConfigError(std::string("paths.") + axis + " values must lie in [0, 1]");
  }
  return static_cast<int>(std::lround(v * m));
}

std::string section_name(char axis, double v) {
  std::ostringstream s;
  s << axis << '_' << v << ".csv";
  return s.str();
}

int cmd_paths(const Options& opt) {
  const auto cfg = load_config(opt, "spde");
  const auto obs = simulate_one(cfg, opt.replicate);
  const auto dir = output_dir(cfg);
  auto header = [](std::ostream& f) { f << "t,y,z,value\n" << std::setprecision(17); };
  auto row = [&obs](std::ostream& f, int i, int j1, int j2) {
    f << obs.t(i) << ',' << obs.y(j1) << ',' << obs.z(j2) << ',' << obs.at(i, j1, j2) << '\n';
  };
  for (double t : cfg.paths.t) {
    const int i = nearest_index(t, obs.n_time(), "t");
    auto f = open_out(dir / section_name('t', t));
    header(f);
    for (int j1 = 0; j1 <= obs.m1(); ++j1) {
      for (int j2 = 0; j2 <= obs.m2(); ++j2) row(f, i, j1, j2);
    }
  }
  for (double y : cfg.paths.y) {
    const int j1 = nearest_index(y, obs.m1(), "y");
    auto f = open_out(dir / section_name('y', y));
    header(f);
    for (int i = 0; i <= obs.n_time(); ++i) {
      for (int j2 = 0; j2 <= obs.m2(); ++j2) row(f, i, j1, j2);
    }
  }
  for (double z : cfg.paths.z) {
    const int j2 = nearest_index(z, obs.m2(), "z");
    auto f = open_out(dir / section_name('z', z));
    header(f);
    for (int i = 0; i <= obs.n_time(); ++i) {
      for (int j1 = 0; j1 <= obs.m1(); ++j1) row(f, i, j1, j2);
    }
  }
  std::cout << "wrote cross-sections to " << dir.string() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation and estimation for a 2-D linear parabolic SPDE with small noise"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&opt](CLI::App* sub) {
    sub->add_option("--config", opt.config, "flat key = value config file");
    sub->add_option("--out", opt.out, "output directory (overrides run.out)");
    sub->add_option("--seed", opt.seed, "master seed (overrides run.seed)");
    sub->add_option("--threads", opt.threads, "worker threads (overrides run.threads)");
    sub->add_option("--set", opt.set, "extra key=value overrides")->take_all();
  };
  auto* simulate = app.add_subcommand("simulate", "simulate one dataset and dump surface.csv");
  add_common(simulate);
  simulate->add_option("--replicate", opt.replicate, "replicate index of the substream");
  auto* estimate = app.add_subcommand("estimate", "estimate from one dataset, write estimate.json");
  add_common(estimate);
  estimate->add_option("--data", opt.data, "surface CSV (t,y,z,value); simulated if omitted");
  estimate->add_option("--replicate", opt.replicate, "replicate index when simulating");
  auto* mc = app.add_subcommand("mc", "SPDE Monte Carlo: replicates.csv and summary.json");
  add_common(mc);
  auto* ou_mc = app.add_subcommand("ou-mc", "Ornstein-Uhlenbeck Monte Carlo");
  add_common(ou_mc);
  auto* paths = app.add_subcommand("paths", "cross-sections of one sample path");
  add_common(paths);
  paths->add_option("--replicate", opt.replicate, "replicate index of the substream");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }
  for (auto* sub : {simulate, estimate, mc, ou_mc, paths}) {
    if (sub->parsed() && sub->count("--seed") > 0) opt.seed_given = true;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(opt);
    if (estimate->parsed()) return cmd_estimate(opt);
    if (mc->parsed()) return run_mc(opt, "spde");
    if (ou_mc->parsed()) return run_mc(opt, "ou");
    if (paths->parsed()) return cmd_paths(opt);
  } catch (const spdest::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const spdest::EstimationError& e) {
    std::cerr << "estimation failed (" << e.code() << "): " << e.what() << '\n';
    return kExitFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
