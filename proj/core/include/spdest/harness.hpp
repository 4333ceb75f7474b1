#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spdest/config.hpp"
#include "spdest/coordinate_ml.hpp"
#include "spdest/model.hpp"
#include "spdest/ou_lab.hpp"
#include "spdest/qv.hpp"
#include "spdest/simulator.hpp"
#include "spdest/spatial_contrast.hpp"
#include "spdest/stats.hpp"

namespace spdest {

enum class ExperimentKind { Spde, Ou };

struct SpdeModelConfig {
  SpdeParams params{4.0, 0.3, 0.3, 0.3};
  NoiseSpec noise = NoiseSpec::q1(0.5);
  std::string xi = "polynomial";  // polynomial | single_mode | zero
  double xi_amplitude = 1.0;      // single_mode only
  double epsilon = 0.01;

  InitialField initial_field() const;
};

struct GridConfig {
  int n_obs = 2000;  // N
  int m1 = 50;
  int m2 = 50;
  int n = 100;
  int mbar1 = 10;
  int mbar2 = 10;
  double delta = kDefaultDelta;
  TruncationPolicy truncation = TruncationPolicy::complete();
};

struct EstimationConfig {
  SearchBox box{};
  SpatialOptConfig spatial{};
  LambdaBox lambda_box{};
  LambdaBox mu_box{};
  /// SPDE Q2: known mu0 (then only lambda is estimated).
  std::optional<double> mu0_known;
  /// OU Case2: estimate lambda with mu fixed at its true value.
  bool ou_mu_known = false;
  /// Regime constant c; defaults to the realized (n eps^2)^{-1}.
  std::optional<double> c;
};

struct RunConfig {
  int replicates = 100;
  std::uint64_t seed = 1;
  std::string out = ".";
  int threads = 1;
  bool timing = false;  // wall_ms is 0 unless set, keeping outputs byte-reproducible
};

/// Cross-sections written by the `paths` command.
struct PathsConfig {
  std::vector<double> t{0.1, 0.5, 0.9};
  std::vector<double> y{0.5};
  std::vector<double> z{0.5};
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Spde;
  SpdeModelConfig model{};
  OuModel ou{};
  GridConfig grid{};
  EstimationConfig estimation{};
  RunConfig run{};
  PathsConfig paths{};

  /// Reads every known key, applies defaults, and validates. ConfigError on
  /// bad values or unknown keys.
  static ExperimentConfig from_flat(const FlatConfig& cfg);
  /// Throws ConfigError unless every module precondition holds.
  void validate() const;
  /// Resolved configuration, one `key = value` per entry.
  std::map<std::string, std::string> to_flat() const;

  /// n eps^2 of the estimation stage.
  double n_eps2() const;
  double c_value() const;
};

/// Single-dataset result of the SPDE pipeline.
struct EstimationReport {
  SpatialFit spatial;
  double lambda11 = 0.0;
  double theta0 = 0.0;
  std::optional<double> mu11;
  std::optional<double> mu0;
  bool lambda_clamped = false;
  bool mu_clamped = false;
  int n = 0;
  double dt = 0.0;
  std::vector<double> path;  // x-hat_{1,1} on the thinned times
};

/// Z_N -> spatial contrast -> x-hat -> coordinate ML -> recovery.
/// Noiseless data (eps = 0) skip the spatial stage, use the configured
/// (theta1, eta1, theta2) as plug-in and fit lambda by least squares.
EstimationReport estimate_dataset(const ObservationGrid& obs, const ExperimentConfig& cfg);

void write_estimation_json(std::ostream& out, const EstimationReport& report,
                           const ExperimentConfig& cfg);

struct ReplicateRecord {
  std::uint64_t rep = 0;
  double theta1_hat;
  double eta1_hat;
  double theta2_hat;
  double lambda11_hat;
  double theta0_hat;
  double mu0_hat;
  double stud_eps;
  double stud_sqrtn;
  bool clamped = false;
  std::string fail_code = "none";
  double wall_ms = 0.0;

  ReplicateRecord();
  bool ok() const noexcept { return fail_code == "none"; }
};

/// True values and theoretical standard errors used for studentization.
struct TheoryReference {
  double lambda11 = 0.0;
  std::optional<double> mu11;
  double x0 = 0.0;       // x_{1,1}(0)
  double theta0 = 0.0;
  std::optional<double> mu0;
  VarianceReport variance{};
  /// Standard error of lambda-hat itself; (n H + G / eps^2)^{-1/2} for Q1,
  /// eps G2^{-1/2} for Q2.
  double lambda_se = 0.0;
  /// Standard error of mu-hat (and of mu0-hat): (n H2)^{-1/2}.
  std::optional<double> mu_se;
};

TheoryReference theory_reference(const ExperimentConfig& cfg);

struct ExperimentResult {
  std::vector<ReplicateRecord> records;
  TheoryReference theory;
  int truncation = 0;
  std::size_t n_success = 0;
  bool failed = false;  // more than 10% of replicates failed
};

/// More than 10% of the replicates failed.
constexpr bool exceeds_failure_budget(std::size_t total, std::size_t succeeded) noexcept {
  return 10 * (total - succeeded) > total;
}

/// R independent replicates in a worker pool; replicate r depends only on
/// (seed, r). Per-replicate estimator failures become rows with a fail code.
ExperimentResult run_replicates(const ExperimentConfig& cfg);

/// One replicate, exposed for tests.
ReplicateRecord run_replicate(const ExperimentConfig& cfg, const FieldSimulator* sim,
                              const TheoryReference& theory, std::uint64_t rep);

struct EstimatorSummary {
  std::string name;
  std::size_t count = 0;
  Moments moments{};
  std::optional<double> ks_stat;
  std::optional<double> se_theoretical;
  std::optional<double> se_ratio;
};

struct Summary {
  std::size_t n_total = 0;
  std::size_t n_success = 0;
  std::vector<EstimatorSummary> estimators;
  std::optional<double> lambda_mu_correlation;
};

/// Column statistics over successful replicates. A column with zero spread
/// reports ks_stat = 1.
Summary summarize(const std::vector<ReplicateRecord>& records, const TheoryReference& theory);

inline constexpr const char* kReplicatesHeader =
    "rep,theta1_hat,eta1_hat,theta2_hat,lambda11_hat,theta0_hat,mu0_hat,stud_eps,stud_sqrtn,"
    "clamped,fail_code,wall_ms";

void write_replicates_csv(std::ostream& out, const std::vector<ReplicateRecord>& records);
void write_summary_json(std::ostream& out, const Summary& summary, const ExperimentResult& result,
                        const ExperimentConfig& cfg);

}  // namespace spdest
