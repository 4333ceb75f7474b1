#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "spdest/model.hpp"
#include "spdest/qv.hpp"
#include "spdest/simulator.hpp"
#include "spdest/spatial_contrast.hpp"

namespace spdest {

/// x-hat_{k,l} on the thinned times, computed with plug-in (theta1, eta1, theta2).
struct ApproxCoordinatePath {
  EigenIndex idx{1, 1};
  std::vector<double> times;
  std::vector<double> values;
  double dt = 0.0;
  SpatialParams plugin{0.0, 0.0, 1.0};
};

/// (2/M) sum_{j1=1..M1} sum_{j2=1..M2} X(t_i, y_j1, z_j2) sin(pi k y) sin(pi l z)
///   * exp(theta1 y / (2 theta2)) exp(eta1 z / (2 theta2)),  M = M1 M2.
/// The j = M terms are kept; they vanish because X is zero on the boundary.
ApproxCoordinatePath approximate_coordinate(const ObservationGrid& obs, const ThinnedTimeGrid& times,
                                            const SpatialParams& plugin,
                                            EigenIndex idx = EigenIndex{1, 1});

/// F_n(lambda) = lambda^alpha F(2 lambda dt).
double f_n_q1(double lambda, double dt, double alpha);

/// V1(lambda | x) = F_n / (eps^2 dt) sum_i M_i^2 - n log F_n, with
/// M_i = x_i - e^{-lambda dt} x_{i-1}.
double contrast_v1(double lambda, std::span<const double> x, double dt, double epsilon, double alpha);

/// d V1 / d lambda.
double contrast_v1_score(double lambda, std::span<const double> x, double dt, double epsilon,
                         double alpha);

/// V2(lambda, mu | x): as V1 with F_n = mu^alpha F(2 lambda dt).
double contrast_v2(double lambda, double mu, std::span<const double> x, double dt, double epsilon,
                   double alpha);

/// Minimizer of V2 in mu at fixed lambda:
/// mu^alpha = n eps^2 (1 - e^{-2 lambda dt}) / (2 lambda S), S = sum_i M_i^2.
/// EstimationError "mu_unidentifiable" when S = 0.
double profiled_mu(double lambda, std::span<const double> x, double dt, double epsilon, double alpha);

struct LambdaBox {
  double lo = 1e-3;
  double hi = 1e3;

  void validate() const;
  double clamp_value(double x) const noexcept { return x < lo ? lo : (x > hi ? hi : x); }
};

inline constexpr int kLambdaGridPoints = 128;
inline constexpr double kLambdaRelTol = 1e-10;

struct LambdaFit {
  double lambda;
  double contrast;
  bool clamped;
  int iterations;
};

/// 1-D minimization over a log grid then golden section, for any objective.
/// Ties on the grid go to the smallest lambda. EstimationError "nonfinite_contrast"
/// if the objective is nowhere finite on the grid.
LambdaFit minimize_on_log_grid(const std::function<double(double)>& objective, const LambdaBox& box);

LambdaFit estimate_lambda_q1(std::span<const double> x, double dt, double epsilon, double alpha,
                             const LambdaBox& box = {});
LambdaFit estimate_lambda_q1(const ApproxCoordinatePath& path, double epsilon, double alpha,
                             const LambdaBox& box = {});

struct Q2Fit {
  double lambda;
  double mu;
  double contrast;
  bool clamped;     // lambda at a box edge
  bool mu_clamped;  // profiled mu outside its box
  bool mu_known;
  int iterations;
};

/// With mu_known, minimizes V2(., mu_known). Otherwise mu is profiled out in
/// closed form (clamped to mu_box) and V2(lambda, mu*(lambda)) is minimized.
Q2Fit estimate_lambda_mu_q2(std::span<const double> x, double dt, double epsilon, double alpha,
                            const LambdaBox& lambda_box = {}, const LambdaBox& mu_box = {},
                            std::optional<double> mu_known = std::nullopt);
Q2Fit estimate_lambda_mu_q2(const ApproxCoordinatePath& path, double epsilon, double alpha,
                            const LambdaBox& lambda_box = {}, const LambdaBox& mu_box = {},
                            std::optional<double> mu_known = std::nullopt);

/// theta0 = -lambda + (theta1^2 + eta1^2) / (4 theta2) + 2 pi^2 theta2.
double recover_theta0(double lambda_hat, const SpatialParams& plugin);
/// mu0 = mu - 2 pi^2.
double recover_mu0(double mu_hat);

/// B1: n eps^2 -> 0. B2: (n eps^2)^{-1} -> c < infinity.
struct AsymptoticRegime {
  enum class Kind { B1, B2 };
  Kind kind = Kind::B1;
  double c = 0.0;

  static AsymptoticRegime b1() { return {Kind::B1, 0.0}; }
  static AsymptoticRegime b2(double c);
  /// B2 with c = (n eps^2)^{-1} of the actual run.
  static AsymptoticRegime realized(int n, double epsilon);
};

struct VarianceReport {
  NoiseVariant variant;
  AsymptoticRegime regime;
  double g;  // G1 or G2
  double h;  // H1 or H2
  double i;  // H1 + c G1 (Q1)
  /// Q1: standard error of eps^{-1}(lambda-hat - lambda) under B1, G^{-1/2}.
  /// Q2: of eps^{-1}(lambda-tilde - lambda), G2^{-1/2}.
  double se_lambda_eps;
  /// Q1 only: standard error of sqrt(n)(lambda-hat - lambda) under B2, I^{-1/2}.
  double se_lambda_sqrtn;
  /// Q2 only: standard error of sqrt(n)(mu-tilde - mu), H2^{-1/2}.
  double se_mu_sqrtn;
};

/// G1 = (1 - e^{-2 lambda}) x0^2 / (2 lambda^{1-alpha}), H1 = alpha^2 / (2 lambda^2),
/// G2 = (1 - e^{-2 lambda}) mu^alpha x0^2 / (2 lambda), H2 = alpha^2 / (2 mu^2).
/// DomainError if x0 = 0 while the regime needs G.
VarianceReport asymptotic_variance(NoiseVariant variant, const AsymptoticRegime& regime,
                                   double lambda, std::optional<double> mu, double alpha, double x0);

}  // namespace spdest
