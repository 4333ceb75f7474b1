#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spdest/error.hpp"
#include "spdest/harness.hpp"

using namespace spdest;

namespace {

ExperimentConfig make(const std::string& text) {
  std::istringstream in(text);
  return ExperimentConfig::from_flat(FlatConfig::parse(in));
}

const char* kSmallSpde =
    "experiment = spde\n"
    "model.epsilon = 0.01\n"
    "grid.N = 200\n"
    "grid.M1 = 20\n"
    "grid.M2 = 20\n"
    "grid.n = 20\n"
    "grid.mbar1 = 10\n"
    "grid.mbar2 = 10\n"
    "run.replicates = 3\n"
    "run.seed = 11\n";

std::string csv(const ExperimentResult& r) {
  std::ostringstream s;
  write_replicates_csv(s, r.records);
  return s.str();
}

std::string summary_json(const ExperimentResult& r, const ExperimentConfig& cfg) {
  std::ostringstream s;
  write_summary_json(s, summarize(r.records, r.theory), r, cfg);
  return s.str();
}

}  // namespace

TEST_CASE("defaults and round trip of the resolved config") {
  const auto cfg = make("");
  CHECK(cfg.kind == ExperimentKind::Spde);
  CHECK(cfg.grid.n_obs == 2000);
  CHECK(cfg.grid.truncation.mode() == TruncationPolicy::Mode::kComplete);
  FlatConfig flat;
  for (const auto& [k, v] : cfg.to_flat()) flat.set(k, v);
  const auto again = ExperimentConfig::from_flat(flat);
  CHECK(again.to_flat() == cfg.to_flat());
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(make("model.typo = 1\n"), ConfigError);
  CHECK_THROWS_AS(make("experiment = heat\n"), ConfigError);
  CHECK_THROWS_AS(make("grid.delta = 0.6\n"), ConfigError);
  CHECK_THROWS_AS(make("grid.M1 = 5\ngrid.mbar1 = 2\ngrid.delta = 0.45\n"), ConfigError);
  CHECK_THROWS_AS(make("model.theta2 = -1\n"), ConfigError);
  CHECK_THROWS_AS(make("model.noise = Q1\nestimation.mu0_known = 1\n"), ConfigError);
  CHECK_THROWS_AS(make("model.xi = zero\n"), ConfigError);
  CHECK_THROWS_AS(make("run.replicates = 0\n"), ConfigError);
  CHECK_THROWS_AS(make("grid.truncation = sometimes\n"), ConfigError);
  CHECK_THROWS_AS(make("experiment = ou\nou.epsilon = 0\n"), ConfigError);
  CHECK_THROWS_AS(make("experiment = ou\nou.case = 3\n"), ConfigError);
}

TEST_CASE("regime bookkeeping") {
  const auto cfg = make("model.epsilon = 0.1\ngrid.n = 100\n");
  CHECK(cfg.n_eps2() == doctest::Approx(1.0));
  CHECK(cfg.c_value() == doctest::Approx(1.0));
  const auto fixed = make("model.epsilon = 0.1\nestimation.c = 0\n");
  CHECK(fixed.c_value() == 0.0);
  const auto ou = make("experiment = ou\nou.n = 100\nou.epsilon = 0.1\n");
  CHECK(ou.n_eps2() == doctest::Approx(1.0));
}

TEST_CASE("failure budget") {
  CHECK_FALSE(exceeds_failure_budget(100, 90));
  CHECK(exceeds_failure_budget(100, 89));
  CHECK_FALSE(exceeds_failure_budget(5, 5));
  CHECK(exceeds_failure_budget(5, 4));
}

TEST_CASE("noiseless pipeline recovers lambda and theta0 exactly") {
  auto cfg = make(std::string(kSmallSpde) + "model.xi = single_mode\nmodel.xi_amplitude = 1.5\n");
  cfg.model.epsilon = 0.0;
  cfg.run.replicates = 1;
  const auto res = run_replicates(cfg);
  REQUIRE(res.records.size() == 1u);
  const auto& r = res.records[0];
  CHECK(r.ok());
  CHECK(r.lambda11_hat == doctest::Approx(eigenvalue(cfg.model.params, {1, 1})).epsilon(1e-8));
  CHECK(r.theta0_hat == doctest::Approx(4.0).epsilon(1e-8));
  CHECK(r.theta1_hat == 0.3);
  CHECK(std::isnan(r.stud_eps));
}

TEST_CASE("byte-identical outputs for a fixed seed") {
  const auto cfg = make(kSmallSpde);
  const auto a = run_replicates(cfg);
  const auto b = run_replicates(cfg);
  CHECK(csv(a) == csv(b));
  CHECK(summary_json(a, cfg) == summary_json(b, cfg));
  auto threaded = cfg;
  threaded.run.threads = 3;
  CHECK(csv(run_replicates(threaded)) == csv(a));
}

TEST_CASE("replicate r depends only on (seed, r)") {
  auto cfg = make(kSmallSpde);
  cfg.run.replicates = 2;
  const auto two = run_replicates(cfg);
  cfg.run.replicates = 3;
  const auto three = run_replicates(cfg);
  CHECK(two.records[1].lambda11_hat == three.records[1].lambda11_hat);
  CHECK(two.records[1].theta2_hat == three.records[1].theta2_hat);
  CHECK(three.records[1].lambda11_hat != three.records[2].lambda11_hat);
  cfg.run.seed = 12;
  CHECK(run_replicates(cfg).records[1].lambda11_hat != three.records[1].lambda11_hat);
}

TEST_CASE("SPDE replicate records are complete") {
  const auto cfg = make(std::string(kSmallSpde) + "model.noise = Q2\nmodel.mu0 = 1\n");
  const auto res = run_replicates(cfg);
  CHECK(res.n_success == 3u);
  CHECK_FALSE(res.failed);
  for (const auto& r : res.records) {
    CHECK(r.ok());
    CHECK(std::isfinite(r.theta1_hat));
    CHECK(std::isfinite(r.theta0_hat));
    CHECK(std::isfinite(r.mu0_hat));
    CHECK(std::isfinite(r.stud_eps));
    CHECK(r.wall_ms == 0.0);
  }
  const auto known = run_replicates(make(std::string(kSmallSpde) + "model.noise = Q2\nmodel.mu0 = 1\nestimation.mu0_known = 1\n"));
  CHECK(known.records[0].mu0_hat == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("replicates CSV layout") {
  auto cfg = make(kSmallSpde);
  cfg.run.replicates = 2;
  const auto text = csv(run_replicates(cfg));
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  CHECK(line == kReplicatesHeader);
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 11);
    CHECK(line.find(",none,") != std::string::npos);
    CHECK(line.find(",,") != std::string::npos);  // Q1: mu0_hat is empty
  }
  CHECK(rows == 2);
}

TEST_CASE("OU experiment: studentized errors and summary") {
  const auto cfg = make("experiment = ou\nou.case = 1\nou.n = 1000\nou.epsilon = 0.001\nrun.replicates = 200\nrun.seed = 3\n");
  const auto res = run_replicates(cfg);
  CHECK(res.n_success == 200u);
  const auto s = summarize(res.records, res.theory);
  const EstimatorSummary* stud = nullptr;
  const EstimatorSummary* lam = nullptr;
  for (const auto& e : s.estimators) {
    if (e.name == "stud_eps") stud = &e;
    if (e.name == "lambda11_hat") lam = &e;
  }
  REQUIRE(stud != nullptr);
  REQUIRE(lam != nullptr);
  CHECK(std::abs(stud->moments.mean) < 4.0 / std::sqrt(200.0));
  REQUIRE(lam->se_ratio.has_value());
  CHECK(*lam->se_ratio == doctest::Approx(1.0).epsilon(0.25));
  REQUIRE(lam->ks_stat.has_value());
}

TEST_CASE("OU Case2 fills the mu column") {
  const auto cfg = make("experiment = ou\nou.case = 2\nou.mu = 3\nou.n = 500\nrun.replicates = 20\n");
  const auto res = run_replicates(cfg);
  const auto s = summarize(res.records, res.theory);
  CHECK(std::isfinite(res.records[0].mu0_hat));
  CHECK(s.lambda_mu_correlation.has_value());
}

TEST_CASE("a constant column reports ks_stat = 1") {
  std::vector<ReplicateRecord> recs(5);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    recs[i].rep = i;
    recs[i].lambda11_hat = 2.0;
    recs[i].stud_eps = 0.0;
  }
  TheoryReference t;
  t.lambda11 = 2.0;
  t.lambda_se = 0.1;
  const auto s = summarize(recs, t);
  for (const auto& e : s.estimators) {
    if (e.name == "lambda11_hat" || e.name == "stud_eps") {
      REQUIRE(e.ks_stat.has_value());
      CHECK(*e.ks_stat == 1.0);
    }
  }
}

TEST_CASE("failed replicates are excluded from summaries") {
  std::vector<ReplicateRecord> recs(4);
  for (std::size_t i = 0; i < recs.size(); ++i) recs[i].lambda11_hat = 1.0 + static_cast<double>(i);
  recs[3].fail_code = "no_convergence";
  TheoryReference t;
  const auto s = summarize(recs, t);
  CHECK(s.n_success == 3u);
  for (const auto& e : s.estimators) {
    if (e.name == "lambda11_hat") CHECK(e.moments.mean == doctest::Approx(2.0));
  }
}

TEST_CASE("estimation JSON of a single dataset") {
  const auto cfg = make(kSmallSpde);
  const auto obs = simulate_dataset(cfg.model.params, cfg.model.noise, cfg.model.initial_field(),
                                    cfg.model.epsilon, 200, 20, 20, TruncationPolicy::complete(), 1);
  const auto rep = estimate_dataset(obs, cfg);
  std::ostringstream s;
  write_estimation_json(s, rep, cfg);
  CHECK(s.str().find("\"theta0_hat\"") != std::string::npos);
  CHECK(rep.n == 20);
  CHECK(rep.path.size() == 21u);
}
