#pragma once

#include <cstdint>
#include <optional>

#include "spdest/coordinate_ml.hpp"
#include "spdest/simulator.hpp"

namespace spdest {

enum class OuCase { Case1, Case2 };

/// dx = -lambda x dt + eps upsilon^{-alpha/2} dw on [0, 1], observed at t_i = i/n,
/// with upsilon = lambda (Case1) or mu (Case2).
struct OuModel {
  OuCase kind = OuCase::Case1;
  double lambda = 2.0;
  double mu = 2.0;
  double epsilon = 1e-3;
  double alpha = 0.5;
  double x0 = 1.0;
  int n = 1000;

  /// Throws ConfigError on out-of-range fields.
  void validate() const;
  double upsilon() const noexcept { return kind == OuCase::Case1 ? lambda : mu; }
  double dt() const noexcept { return 1.0 / n; }
};

/// Exact transitions; the stream is derived from (seed, replicate).
CoordinatePath simulate_ou(const OuModel& model, std::uint64_t seed, std::uint64_t replicate = 0);

struct Case1Estimate {
  LambdaFit fit;
  VarianceReport variance;  // at lambda-hat, regime B2 with c = (n eps^2)^{-1}
};

Case1Estimate estimate_case1(const CoordinatePath& path, double epsilon, double alpha,
                             const LambdaBox& box = {});

struct Case2Estimate {
  Q2Fit fit;
  VarianceReport variance;  // at the estimates
  /// Correlation implied by the inverse Hessian of V2 at the optimum
  /// (unknown mu only); near zero when the information is diagonal.
  std::optional<double> cross_correlation;
};

Case2Estimate estimate_case2(const CoordinatePath& path, double epsilon, double alpha,
                             const LambdaBox& lambda_box = {}, const LambdaBox& mu_box = {},
                             std::optional<double> mu_known = std::nullopt);

}  // namespace spdest
