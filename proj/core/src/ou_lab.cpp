#include "spdest/ou_lab.hpp"

#include <cmath>

#include "spdest/error.hpp"
#include "spdest/random.hpp"

namespace spdest {

void OuModel::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ConfigError("OuModel: lambda must be positive");
  if (kind == OuCase::Case2 && (!(mu > 0.0) || !std::isfinite(mu))) {
    throw ConfigError("OuModel: mu must be positive");
  }
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("OuModel: epsilon must lie in (0,1)");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("OuModel: alpha must lie in (0,1)");
  if (x0 == 0.0 || !std::isfinite(x0)) throw ConfigError("OuModel: x0 must be finite and nonzero");
  if (n < 1) throw ConfigError("OuModel: n must be >= 1");
}

CoordinatePath simulate_ou(const OuModel& model, std::uint64_t seed, std::uint64_t replicate) {
  model.validate();
  std::vector<double> times(static_cast<std::size_t>(model.n) + 1);
  for (int i = 0; i <= model.n; ++i) times[static_cast<std::size_t>(i)] = static_cast<double>(i) / model.n;
  SplitMix64 rng(derive_seed(seed, {replicate, static_cast<std::uint64_t>(StreamTag::kOuPath)}));
  const double damping = std::pow(model.upsilon(), -0.5 * model.alpha);
  return simulate_coordinate_path(model.lambda, damping, model.epsilon, model.x0, times, rng);
}

namespace {

double path_dt(const CoordinatePath& path) {
  if (path.times.size() < 2) throw DomainError("OU estimation: path needs at least two points");
  return path.times[1] - path.times[0];
}

}  // namespace

Case1Estimate estimate_case1(const CoordinatePath& path, double epsilon, double alpha,
                             const LambdaBox& box) {
  const double dt = path_dt(path);
  const auto fit = estimate_lambda_q1(path.values, dt, epsilon, alpha, box);
  const int n = static_cast<int>(path.values.size()) - 1;
  const auto var = asymptotic_variance(NoiseVariant::Q1, AsymptoticRegime::realized(n, epsilon),
                                       fit.lambda, std::nullopt, alpha, path.values.front());
  return {fit, var};
}

Case2Estimate estimate_case2(const CoordinatePath& path, double epsilon, double alpha,
                             const LambdaBox& lambda_box, const LambdaBox& mu_box,
                             std::optional<double> mu_known) {
  const double dt = path_dt(path);
  const auto fit = estimate_lambda_mu_q2(path.values, dt, epsilon, alpha, lambda_box, mu_box, mu_known);
  const int n = static_cast<int>(path.values.size()) - 1;
  Case2Estimate out{fit,
                    asymptotic_variance(NoiseVariant::Q2, AsymptoticRegime::realized(n, epsilon),
                                        fit.lambda, fit.mu, alpha, path.values.front()),
                    std::nullopt};
  if (!mu_known) {
    // Central differences of V2 in (log lambda, log mu); correlation is scale free.
    auto v = [&](double a, double b) {
      return contrast_v2(std::exp(a), std::exp(b), path.values, dt, epsilon, alpha);
    };
    const double a = std::log(fit.lambda);
    const double b = std::log(fit.mu);
    const double h = 1e-4;
    const double v0 = v(a, b);
    const double haa = (v(a + h, b) - 2.0 * v0 + v(a - h, b)) / (h * h);
    const double hbb = (v(a, b + h) - 2.0 * v0 + v(a, b - h)) / (h * h);
    const double hab =
        (v(a + h, b + h) - v(a + h, b - h) - v(a - h, b + h) + v(a - h, b - h)) / (4.0 * h * h);
    if (haa > 0.0 && hbb > 0.0) out.cross_correlation = -hab / std::sqrt(haa * hbb);
  }
  return out;
}

}  // namespace spdest
