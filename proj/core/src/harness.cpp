#include "spdest/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "spdest/error.hpp"

namespace spdest {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kTwoPi2 = 2.0 * std::numbers::pi * std::numbers::pi;

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

std::string fmt_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += fmt(v[i]);
  }
  return out;
}

TruncationPolicy parse_truncation(const FlatConfig& f) {
  const std::string mode = f.get_string("grid.truncation", "complete");
  const double tol = f.get_double("grid.truncation_tol", 1e-8);
  const int max_k = f.get_int("grid.truncation_max", kDefaultMaxTruncation);
  if (mode == "complete") return TruncationPolicy::complete();
  if (mode == "adaptive") return TruncationPolicy::adaptive(tol, max_k);
  int k = 0;
  try {
    std::size_t used = 0;
    k = std::stoi(mode, &used);
    if (used != mode.size()) throw std::invalid_argument(mode);
  } catch (const std::exception&) {
    throw ConfigError("grid.truncation must be 'complete', 'adaptive' or an integer K, got '" + mode + "'");
  }
  return TruncationPolicy::fixed(k);
}

std::string truncation_string(const TruncationPolicy& p) {
  switch (p.mode()) {
    case TruncationPolicy::Mode::kComplete: return "complete";
    case TruncationPolicy::Mode::kAdaptive: return "adaptive";
    case TruncationPolicy::Mode::kFixed: break;
  }
  return std::to_string(p.k());
}

}  // namespace

InitialField SpdeModelConfig::initial_field() const {
  if (xi == "polynomial") return InitialField::polynomial();
  if (xi == "single_mode") return InitialField::single_mode(params, xi_amplitude);
  if (xi == "zero") return InitialField::zero();
  throw ConfigError("model.xi must be polynomial, single_mode or zero, got '" + xi + "'");
}

ExperimentConfig ExperimentConfig::from_flat(const FlatConfig& f) {
  ExperimentConfig c;
  const std::string kind = f.get_string("experiment", "spde");
  if (kind == "spde") {
    c.kind = ExperimentKind::Spde;
  } else if (kind == "ou") {
    c.kind = ExperimentKind::Ou;
  } else {
    throw ConfigError("experiment must be 'spde' or 'ou', got '" + kind + "'");
  }

  try {
    c.model.params = SpdeParams(f.get_double("model.theta0", 4.0), f.get_double("model.theta1", 0.3),
                                f.get_double("model.eta1", 0.3), f.get_double("model.theta2", 0.3));
    const double alpha = f.get_double("model.alpha", 0.5);
    const auto variant = noise_variant_from_string(f.get_string("model.noise", "Q1"));
    const double mu0 = f.get_double("model.mu0", 0.0);
    c.model.noise = variant == NoiseVariant::Q1 ? NoiseSpec::q1(alpha) : NoiseSpec::q2(alpha, mu0);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  c.model.xi = f.get_string("model.xi", "polynomial");
  c.model.xi_amplitude = f.get_double("model.xi_amplitude", 1.0);
  c.model.epsilon = f.get_double("model.epsilon", 0.01);

  const int ou_case = f.get_int("ou.case", 1);
  if (ou_case != 1 && ou_case != 2) throw ConfigError("ou.case must be 1 or 2");
  c.ou.kind = ou_case == 1 ? OuCase::Case1 : OuCase::Case2;
  c.ou.lambda = f.get_double("ou.lambda", 2.0);
  c.ou.mu = f.get_double("ou.mu", c.ou.lambda);
  c.ou.epsilon = f.get_double("ou.epsilon", 1e-3);
  c.ou.alpha = f.get_double("ou.alpha", 0.5);
  c.ou.x0 = f.get_double("ou.x0", 1.0);
  c.ou.n = f.get_int("ou.n", 1000);

  c.grid.n_obs = f.get_int("grid.N", 2000);
  c.grid.m1 = f.get_int("grid.M1", 50);
  c.grid.m2 = f.get_int("grid.M2", 50);
  c.grid.n = f.get_int("grid.n", 100);
  c.grid.mbar1 = f.get_int("grid.mbar1", 10);
  c.grid.mbar2 = f.get_int("grid.mbar2", 10);
  c.grid.delta = f.get_double("grid.delta", kDefaultDelta);
  c.grid.truncation = parse_truncation(f);

  auto& e = c.estimation;
  e.box.theta1 = {f.get_double("estimation.theta1_min", e.box.theta1.lo),
                  f.get_double("estimation.theta1_max", e.box.theta1.hi)};
  e.box.eta1 = {f.get_double("estimation.eta1_min", e.box.eta1.lo),
                f.get_double("estimation.eta1_max", e.box.eta1.hi)};
  e.box.theta2 = {f.get_double("estimation.theta2_min", e.box.theta2.lo),
                  f.get_double("estimation.theta2_max", e.box.theta2.hi)};
  e.spatial.kappa = {f.get_double("estimation.kappa_min", e.spatial.kappa.lo),
                     f.get_double("estimation.kappa_max", e.spatial.kappa.hi)};
  e.spatial.eta = {f.get_double("estimation.eta_min", e.spatial.eta.lo),
                   f.get_double("estimation.eta_max", e.spatial.eta.hi)};
  e.spatial.coarse_points = f.get_int("estimation.coarse_points", e.spatial.coarse_points);
  e.lambda_box = {f.get_double("estimation.lambda_min", e.lambda_box.lo),
                  f.get_double("estimation.lambda_max", e.lambda_box.hi)};
  e.mu_box = {f.get_double("estimation.mu_min", e.mu_box.lo),
              f.get_double("estimation.mu_max", e.mu_box.hi)};
  e.mu0_known = f.get_optional_double("estimation.mu0_known");
  e.ou_mu_known = f.get_bool("estimation.ou_mu_known", false);
  e.c = f.get_optional_double("estimation.c");

  c.run.replicates = f.get_int("run.replicates", 100);
  c.run.seed = f.get_u64("run.seed", 1);
  c.run.out = f.get_string("run.out", ".");
  c.run.threads = f.get_int("run.threads", 1);
  c.run.timing = f.get_bool("run.timing", false);

  c.paths.t = f.get_double_list("paths.t", c.paths.t);
  c.paths.y = f.get_double_list("paths.y", c.paths.y);
  c.paths.z = f.get_double_list("paths.z", c.paths.z);

  const auto unused = f.unused_keys();
  if (!unused.empty()) {
    std::string msg = "unknown config key(s):";
    for (const auto& k : unused) msg += " " + k;
    throw ConfigError(msg);
  }
  c.validate();
  return c;
}

void ExperimentConfig::validate() const {
  if (run.replicates < 1) throw ConfigError("run.replicates must be >= 1");
  if (run.threads < 1) throw ConfigError("run.threads must be >= 1");
  if (estimation.c && !(*estimation.c >= 0.0)) throw ConfigError("estimation.c must be >= 0");
  estimation.lambda_box.validate();
  estimation.mu_box.validate();

  if (kind == ExperimentKind::Ou) {
    ou.validate();
    return;
  }
  if (!(model.epsilon >= 0.0 && model.epsilon <= 1.0)) throw ConfigError("model.epsilon must lie in [0, 1]");
  if (grid.n_obs < 1) throw ConfigError("grid.N must be >= 1");
  if (grid.m1 < 2 || grid.m2 < 2) throw ConfigError("grid.M1 and grid.M2 must be >= 2");
  build_thinned_time_grid(grid.n_obs, grid.n);
  const auto space = build_thinned_space_grid(grid.m1, grid.m2, grid.mbar1, grid.mbar2, grid.delta);
  if (space.m1() < 2 || space.m2() < 2) {
    throw ConfigError("thinned space grid needs at least two points per axis");
  }
  estimation.box.validate();
  if (estimation.spatial.coarse_points < 2) throw ConfigError("estimation.coarse_points must be >= 2");
  if (!(estimation.spatial.kappa.lo < estimation.spatial.kappa.hi) ||
      !(estimation.spatial.eta.lo < estimation.spatial.eta.hi)) {
    throw ConfigError("estimation kappa/eta scan ranges must be non-degenerate");
  }
  if (estimation.mu0_known) {
    if (model.noise.variant() != NoiseVariant::Q2) throw ConfigError("estimation.mu0_known applies to Q2 only");
    if (!(*estimation.mu0_known + kTwoPi2 > 0.0)) throw ConfigError("estimation.mu0_known must exceed -2 pi^2");
  }
  try {
    const auto xi = model.initial_field();
    check_initial_condition(model.params, xi);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

std::map<std::string, std::string> ExperimentConfig::to_flat() const {
  std::map<std::string, std::string> m;
  m["experiment"] = kind == ExperimentKind::Spde ? "spde" : "ou";
  m["model.theta0"] = fmt(model.params.theta0());
  m["model.theta1"] = fmt(model.params.theta1());
  m["model.eta1"] = fmt(model.params.eta1());
  m["model.theta2"] = fmt(model.params.theta2());
  m["model.noise"] = to_string(model.noise.variant());
  m["model.alpha"] = fmt(model.noise.alpha());
  if (model.noise.variant() == NoiseVariant::Q2) m["model.mu0"] = fmt(model.noise.mu0());
  m["model.xi"] = model.xi;
  m["model.xi_amplitude"] = fmt(model.xi_amplitude);
  m["model.epsilon"] = fmt(model.epsilon);
  m["ou.case"] = ou.kind == OuCase::Case1 ? "1" : "2";
  m["ou.lambda"] = fmt(ou.lambda);
  m["ou.mu"] = fmt(ou.mu);
  m["ou.epsilon"] = fmt(ou.epsilon);
  m["ou.alpha"] = fmt(ou.alpha);
  m["ou.x0"] = fmt(ou.x0);
  m["ou.n"] = std::to_string(ou.n);
  m["grid.N"] = std::to_string(grid.n_obs);
  m["grid.M1"] = std::to_string(grid.m1);
  m["grid.M2"] = std::to_string(grid.m2);
  m["grid.n"] = std::to_string(grid.n);
  m["grid.mbar1"] = std::to_string(grid.mbar1);
  m["grid.mbar2"] = std::to_string(grid.mbar2);
  m["grid.delta"] = fmt(grid.delta);
  m["grid.truncation"] = truncation_string(grid.truncation);
  if (grid.truncation.mode() == TruncationPolicy::Mode::kAdaptive) {
    m["grid.truncation_tol"] = fmt(grid.truncation.tol());
    m["grid.truncation_max"] = std::to_string(grid.truncation.max_k());
  }
  const auto& e = estimation;
  m["estimation.theta1_min"] = fmt(e.box.theta1.lo);
  m["estimation.theta1_max"] = fmt(e.box.theta1.hi);
  m["estimation.eta1_min"] = fmt(e.box.eta1.lo);
  m["estimation.eta1_max"] = fmt(e.box.eta1.hi);
  m["estimation.theta2_min"] = fmt(e.box.theta2.lo);
  m["estimation.theta2_max"] = fmt(e.box.theta2.hi);
  m["estimation.kappa_min"] = fmt(e.spatial.kappa.lo);
  m["estimation.kappa_max"] = fmt(e.spatial.kappa.hi);
  m["estimation.eta_min"] = fmt(e.spatial.eta.lo);
  m["estimation.eta_max"] = fmt(e.spatial.eta.hi);
  m["estimation.coarse_points"] = std::to_string(e.spatial.coarse_points);
  m["estimation.lambda_min"] = fmt(e.lambda_box.lo);
  m["estimation.lambda_max"] = fmt(e.lambda_box.hi);
  m["estimation.mu_min"] = fmt(e.mu_box.lo);
  m["estimation.mu_max"] = fmt(e.mu_box.hi);
  if (e.mu0_known) m["estimation.mu0_known"] = fmt(*e.mu0_known);
  m["estimation.ou_mu_known"] = e.ou_mu_known ? "true" : "false";
  if (e.c) m["estimation.c"] = fmt(*e.c);
  m["run.replicates"] = std::to_string(run.replicates);
  m["run.seed"] = std::to_string(run.seed);
  m["run.out"] = run.out;
  m["run.threads"] = std::to_string(run.threads);
  m["run.timing"] = run.timing ? "true" : "false";
  m["paths.t"] = fmt_list(paths.t);
  m["paths.y"] = fmt_list(paths.y);
  m["paths.z"] = fmt_list(paths.z);
  return m;
}

double ExperimentConfig::n_eps2() const {
  if (kind == ExperimentKind::Ou) return ou.n * ou.epsilon * ou.epsilon;
  return grid.n * model.epsilon * model.epsilon;
}

double ExperimentConfig::c_value() const {
  if (estimation.c) return *estimation.c;
  const double ne2 = n_eps2();
  return ne2 > 0.0 ? 1.0 / ne2 : std::numeric_limits<double>::infinity();
}

EstimationReport estimate_dataset(const ObservationGrid& obs, const ExperimentConfig& cfg) {
  const auto& noise = cfg.model.noise;
  const double alpha = noise.alpha();
  const double eps = obs.epsilon();
  EstimationReport r;

  if (eps > 0.0) {
    const auto space = build_thinned_space_grid(obs.m1(), obs.m2(), cfg.grid.mbar1, cfg.grid.mbar2,
                                                cfg.grid.delta);
    const auto input = make_spatial_input(obs, space, alpha, noise.variant());
    r.spatial = minimize_contrast(input, cfg.estimation.box, cfg.estimation.spatial);
  } else {
    const auto& p = cfg.model.params;
    const SpatialParams truth{p.theta1(), p.eta1(), p.theta2()};
    r.spatial = SpatialFit{truth, to_shape(truth, alpha, noise.variant()), 0.0, false, 1, {0.0, 0.0}, 0};
  }

  const auto times = build_thinned_time_grid(obs.n_time(), cfg.grid.n);
  const auto path = approximate_coordinate(obs, times, r.spatial.estimate);
  r.n = times.n;
  r.dt = times.dt;
  r.path = path.values;

  if (eps == 0.0) {
    const auto& x = path.values;
    const double dt = path.dt;
    const auto fit = minimize_on_log_grid(
        [&x, dt](double l) {
          const double d = std::exp(-l * dt);
          double s = 0.0;
          for (std::size_t i = 1; i < x.size(); ++i) s += (x[i] - d * x[i - 1]) * (x[i] - d * x[i - 1]);
          return s;
        },
        cfg.estimation.lambda_box);
    r.lambda11 = fit.lambda;
    r.lambda_clamped = fit.clamped;
    if (noise.variant() == NoiseVariant::Q2) {
      if (!cfg.estimation.mu0_known) {
        throw EstimationError("mu_unidentifiable", "noiseless data carry no information on mu");
      }
      r.mu0 = *cfg.estimation.mu0_known;
      r.mu11 = *r.mu0 + kTwoPi2;
    }
  } else if (noise.variant() == NoiseVariant::Q1) {
    const auto fit = estimate_lambda_q1(path, eps, alpha, cfg.estimation.lambda_box);
    r.lambda11 = fit.lambda;
    r.lambda_clamped = fit.clamped;
  } else {
    std::optional<double> mu_known;
    if (cfg.estimation.mu0_known) mu_known = *cfg.estimation.mu0_known + kTwoPi2;
    const auto fit = estimate_lambda_mu_q2(path, eps, alpha, cfg.estimation.lambda_box,
                                           cfg.estimation.mu_box, mu_known);
    r.lambda11 = fit.lambda;
    r.lambda_clamped = fit.clamped;
    r.mu_clamped = fit.mu_clamped;
    r.mu11 = fit.mu;
    r.mu0 = recover_mu0(fit.mu);
  }
  r.theta0 = recover_theta0(r.lambda11, r.spatial.estimate);
  return r;
}

void write_estimation_json(std::ostream& out, const EstimationReport& r, const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  const auto& s = r.spatial;
  j["theta1_hat"] = s.estimate.theta1;
  j["eta1_hat"] = s.estimate.eta1;
  j["theta2_hat"] = s.estimate.theta2;
  j["lambda11_hat"] = r.lambda11;
  j["theta0_hat"] = r.theta0;
  j["mu11_hat"] = r.mu11 ? nlohmann::ordered_json(*r.mu11) : nlohmann::ordered_json(nullptr);
  j["mu0_hat"] = r.mu0 ? nlohmann::ordered_json(*r.mu0) : nlohmann::ordered_json(nullptr);
  j["spatial"] = {{"amplitude", s.shape.amplitude}, {"kappa", s.shape.kappa}, {"eta", s.shape.eta},
                  {"contrast_u", s.contrast},       {"clamped", s.clamped},   {"coarse_ties", s.coarse_ties},
                  {"seed_kappa", s.seed[0]},        {"seed_eta", s.seed[1]},  {"iterations", s.iterations}};
  j["lambda_clamped"] = r.lambda_clamped;
  j["mu_clamped"] = r.mu_clamped;
  j["n"] = r.n;
  j["dt"] = r.dt;
  j["epsilon"] = cfg.model.epsilon;
  j["n_eps2"] = cfg.n_eps2();
  if (cfg.model.epsilon > 0.0 && !r.path.empty() && r.path.front() != 0.0) {
    const auto v = asymptotic_variance(cfg.model.noise.variant(),
                                       AsymptoticRegime::b2(cfg.c_value()), r.lambda11, r.mu11,
                                       cfg.model.noise.alpha(), r.path.front());
    nlohmann::ordered_json var{{"g", v.g}, {"h", v.h}, {"se_lambda_eps", v.se_lambda_eps}};
    if (v.variant == NoiseVariant::Q1) {
      var["i"] = v.i;
      var["se_lambda_sqrtn"] = v.se_lambda_sqrtn;
    } else {
      var["se_mu_sqrtn"] = v.se_mu_sqrtn;
    }
    j["variance_at_estimate"] = var;
  }
  out << j.dump(2) << '\n';
}

ReplicateRecord::ReplicateRecord()
    : theta1_hat(kNaN),
      eta1_hat(kNaN),
      theta2_hat(kNaN),
      lambda11_hat(kNaN),
      theta0_hat(kNaN),
      mu0_hat(kNaN),
      stud_eps(kNaN),
      stud_sqrtn(kNaN) {}

TheoryReference theory_reference(const ExperimentConfig& cfg) {
  TheoryReference t;
  const double c = cfg.c_value();
  if (cfg.kind == ExperimentKind::Ou) {
    const auto& m = cfg.ou;
    t.lambda11 = m.lambda;
    t.x0 = m.x0;
    if (m.kind == OuCase::Case1) {
      t.variance = asymptotic_variance(NoiseVariant::Q1, AsymptoticRegime::b2(c), m.lambda,
                                       std::nullopt, m.alpha, m.x0);
      t.lambda_se = 1.0 / std::sqrt(m.n * t.variance.h + t.variance.g / (m.epsilon * m.epsilon));
    } else {
      t.mu11 = m.mu;
      t.mu0 = m.mu;  // the mu0_hat column carries mu-hat in OU experiments
      t.variance = asymptotic_variance(NoiseVariant::Q2, AsymptoticRegime::b2(c), m.lambda, m.mu,
                                       m.alpha, m.x0);
      t.lambda_se = m.epsilon * t.variance.se_lambda_eps;
      if (!cfg.estimation.ou_mu_known) t.mu_se = t.variance.se_mu_sqrtn / std::sqrt(m.n);
    }
    return t;
  }
  const auto& p = cfg.model.params;
  const auto& noise = cfg.model.noise;
  const double eps = cfg.model.epsilon;
  const int n = cfg.grid.n;
  t.lambda11 = eigenvalue(p, EigenIndex{1, 1});
  t.theta0 = p.theta0();
  t.x0 = initial_coefficient(p, cfg.model.initial_field(), EigenIndex{1, 1});
  if (!(eps > 0.0)) return t;
  if (noise.variant() == NoiseVariant::Q1) {
    t.variance = asymptotic_variance(NoiseVariant::Q1, AsymptoticRegime::b2(c), t.lambda11,
                                     std::nullopt, noise.alpha(), t.x0);
    t.lambda_se = 1.0 / std::sqrt(n * t.variance.h + t.variance.g / (eps * eps));
  } else {
    t.mu0 = noise.mu0();
    t.mu11 = noise.mu0() + kTwoPi2;
    t.variance = asymptotic_variance(NoiseVariant::Q2, AsymptoticRegime::b2(c), t.lambda11, t.mu11,
                                     noise.alpha(), t.x0);
    t.lambda_se = eps * t.variance.se_lambda_eps;
    if (!cfg.estimation.mu0_known) t.mu_se = t.variance.se_mu_sqrtn / std::sqrt(n);
  }
  return t;
}

namespace {

void studentize(ReplicateRecord& rec, const TheoryReference& t, NoiseVariant variant, double eps, int n,
                std::optional<double> mu_hat, bool mu_estimated) {
  if (!(eps > 0.0)) return;
  const double err = rec.lambda11_hat - t.lambda11;
  rec.stud_eps = err / eps / t.variance.se_lambda_eps;
  if (variant == NoiseVariant::Q1) {
    rec.stud_sqrtn = std::sqrt(static_cast<double>(n)) * err / t.variance.se_lambda_sqrtn;
  } else if (mu_estimated && mu_hat && t.mu11) {
    rec.stud_sqrtn = std::sqrt(static_cast<double>(n)) * (*mu_hat - *t.mu11) / t.variance.se_mu_sqrtn;
  }
}

}  // namespace

ReplicateRecord run_replicate(const ExperimentConfig& cfg, const FieldSimulator* sim,
                              const TheoryReference& theory, std::uint64_t rep) {
  ReplicateRecord rec;
  rec.rep = rep;
  const auto start = std::chrono::steady_clock::now();
  try {
    if (cfg.kind == ExperimentKind::Ou) {
      const auto& m = cfg.ou;
      const auto path = simulate_ou(m, cfg.run.seed, rep);
      if (m.kind == OuCase::Case1) {
        const auto est = estimate_case1(path, m.epsilon, m.alpha, cfg.estimation.lambda_box);
        rec.lambda11_hat = est.fit.lambda;
        rec.clamped = est.fit.clamped;
        studentize(rec, theory, NoiseVariant::Q1, m.epsilon, m.n, std::nullopt, false);
      } else {
        std::optional<double> mu_known;
        if (cfg.estimation.ou_mu_known) mu_known = m.mu;
        const auto est = estimate_case2(path, m.epsilon, m.alpha, cfg.estimation.lambda_box,
                                        cfg.estimation.mu_box, mu_known);
        rec.lambda11_hat = est.fit.lambda;
        rec.mu0_hat = est.fit.mu;
        rec.clamped = est.fit.clamped || est.fit.mu_clamped;
        studentize(rec, theory, NoiseVariant::Q2, m.epsilon, m.n, est.fit.mu, !mu_known);
      }
    } else {
      if (sim == nullptr) throw UsageError("run_replicate: SPDE experiments need a simulator");
      const auto obs = sim->simulate(cfg.run.seed, rep);
      const auto est = estimate_dataset(obs, cfg);
      rec.theta1_hat = est.spatial.estimate.theta1;
      rec.eta1_hat = est.spatial.estimate.eta1;
      rec.theta2_hat = est.spatial.estimate.theta2;
      rec.lambda11_hat = est.lambda11;
      rec.theta0_hat = est.theta0;
      if (est.mu0) rec.mu0_hat = *est.mu0;
      rec.clamped = est.spatial.clamped || est.lambda_clamped || est.mu_clamped;
      studentize(rec, theory, cfg.model.noise.variant(), cfg.model.epsilon, cfg.grid.n, est.mu11,
                 !cfg.estimation.mu0_known.has_value());
    }
  } catch (const EstimationError& e) {
    rec.fail_code = e.code();
  } catch (const DomainError&) {
    rec.fail_code = "domain_error";
  } catch (const NumericError&) {
    rec.fail_code = "numeric_error";
  }
  if (cfg.run.timing) {
    rec.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  }
  return rec;
}

ExperimentResult run_replicates(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult result;
  result.theory = theory_reference(cfg);
  std::optional<FieldSimulator> sim;
  if (cfg.kind == ExperimentKind::Spde) {
    sim.emplace(cfg.model.params, cfg.model.noise, cfg.model.initial_field(), cfg.model.epsilon,
                GridSpec{cfg.grid.n_obs, cfg.grid.m1, cfg.grid.m2}, cfg.grid.truncation);
    result.truncation = sim->truncation();
  }
  const auto r_total = static_cast<std::size_t>(cfg.run.replicates);
  result.records.resize(r_total);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r = next++; r < r_total; r = next++) {
      result.records[r] = run_replicate(cfg, sim ? &*sim : nullptr, result.theory, r);
    }
  };
  const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(cfg.run.threads), r_total);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& rec : result.records) result.n_success += rec.ok() ? 1 : 0;
  result.failed = exceeds_failure_budget(r_total, result.n_success);
  return result;
}

Summary summarize(const std::vector<ReplicateRecord>& records, const TheoryReference& theory) {
  Summary s;
  s.n_total = records.size();
  std::vector<const ReplicateRecord*> ok;
  for (const auto& r : records) {
    if (r.ok()) ok.push_back(&r);
  }
  s.n_success = ok.size();

  struct Column {
    const char* name;
    double ReplicateRecord::*field;
    std::optional<double> truth;
    std::optional<double> se;
  };
  std::optional<double> lambda_se;
  if (theory.lambda_se > 0.0) lambda_se = theory.lambda_se;
  const Column columns[] = {
      {"theta1_hat", &ReplicateRecord::theta1_hat, std::nullopt, std::nullopt},
      {"eta1_hat", &ReplicateRecord::eta1_hat, std::nullopt, std::nullopt},
      {"theta2_hat", &ReplicateRecord::theta2_hat, std::nullopt, std::nullopt},
      {"lambda11_hat", &ReplicateRecord::lambda11_hat, theory.lambda11, lambda_se},
      {"theta0_hat", &ReplicateRecord::theta0_hat, std::nullopt, std::nullopt},
      {"mu0_hat", &ReplicateRecord::mu0_hat, theory.mu0, theory.mu_se},
      {"stud_eps", &ReplicateRecord::stud_eps, 0.0, 1.0},
      {"stud_sqrtn", &ReplicateRecord::stud_sqrtn, 0.0, 1.0},
  };
  std::vector<double> lam;
  std::vector<double> mu;
  for (const auto& col : columns) {
    std::vector<double> v;
    for (const auto* r : ok) {
      const double x = r->*col.field;
      if (std::isfinite(x)) v.push_back(x);
    }
    if (v.size() < 2) continue;
    EstimatorSummary e;
    e.name = col.name;
    e.count = v.size();
    e.moments = moments(v);
    if (col.truth && col.se) {
      e.se_theoretical = *col.se;
      e.se_ratio = e.moments.sd / *col.se;
      if (e.moments.sd == 0.0) {
        e.ks_stat = 1.0;
      } else {
        std::vector<double> z(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) z[i] = (v[i] - *col.truth) / *col.se;
        e.ks_stat = ks_statistic_normal(z);
      }
    }
    s.estimators.push_back(e);
  }
  for (const auto* r : ok) {
    if (std::isfinite(r->lambda11_hat) && std::isfinite(r->mu0_hat)) {
      lam.push_back(r->lambda11_hat);
      mu.push_back(r->mu0_hat);
    }
  }
  if (lam.size() >= 2) s.lambda_mu_correlation = correlation(lam, mu);
  return s;
}

void write_replicates_csv(std::ostream& out, const std::vector<ReplicateRecord>& records) {
  out << kReplicatesHeader << '\n';
  auto cell = [&out](double v) {
    out << ',';
    if (std::isfinite(v)) out << fmt(v);
  };
  for (const auto& r : records) {
    out << r.rep;
    cell(r.theta1_hat);
    cell(r.eta1_hat);
    cell(r.theta2_hat);
    cell(r.lambda11_hat);
    cell(r.theta0_hat);
    cell(r.mu0_hat);
    cell(r.stud_eps);
    cell(r.stud_sqrtn);
    out << ',' << (r.clamped ? 1 : 0) << ',' << r.fail_code << ',' << fmt(r.wall_ms) << '\n';
  }
}

void write_summary_json(std::ostream& out, const Summary& summary, const ExperimentResult& result,
                        const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json echo = nlohmann::ordered_json::object();
  for (const auto& [k, v] : cfg.to_flat()) echo[k] = v;
  j["config_echo"] = echo;
  j["n_success"] = summary.n_success;
  j["n_replicates"] = summary.n_total;
  j["experiment_failed"] = result.failed;
  j["truncation"] = result.truncation;
  j["n_eps2"] = cfg.n_eps2();
  j["c"] = cfg.c_value();
  auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  for (const auto& e : summary.estimators) {
    j[e.name] = {{"mean", e.moments.mean},          {"sd", e.moments.sd},
                 {"skew", e.moments.skew},          {"kurt", e.moments.kurt},
                 {"ks_stat", opt(e.ks_stat)},       {"se_theoretical", opt(e.se_theoretical)},
                 {"se_ratio", opt(e.se_ratio)},     {"count", e.count}};
  }
  j["lambda_mu_correlation"] = opt(summary.lambda_mu_correlation);
  out << j.dump(2) << '\n';
}

}  // namespace spdest
