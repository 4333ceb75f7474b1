#include "spdest/coordinate_ml.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "spdest/error.hpp"
#include "spdest/optimize.hpp"
#include "spdest/special.hpp"

namespace spdest {

namespace {

constexpr double kPi = std::numbers::pi;

void check_path(std::span<const double> x, double dt, double epsilon, const char* who) {
  if (x.size() < 2) throw DomainError(std::string(who) + ": path needs at least two points");
  if (!(dt > 0.0)) throw DomainError(std::string(who) + ": dt must be positive");
  if (!(epsilon > 0.0)) throw DomainError(std::string(who) + ": epsilon must be positive");
}

double residual_ss(double lambda, std::span<const double> x, double dt) {
  const double decay = std::exp(-lambda * dt);
  double s = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double m = x[i] - decay * x[i - 1];
    s += m * m;
  }
  return s;
}

// V = F_n S / (eps^2 dt) - n log F_n.
double contrast_from(double fn, double s, std::size_t n, double dt, double epsilon) {
  return fn * s / (epsilon * epsilon * dt) - static_cast<double>(n) * std::log(fn);
}

}  // namespace

ApproxCoordinatePath approximate_coordinate(const ObservationGrid& obs, const ThinnedTimeGrid& times,
                                            const SpatialParams& plugin, EigenIndex idx) {
  if (!(plugin.theta2 > 0.0)) throw DomainError("approximate_coordinate: plug-in theta2 must be positive");
  if (times.n_obs != obs.n_time()) {
    throw ConfigError("approximate_coordinate: thinned time grid does not match the observations");
  }
  const int m1 = obs.m1();
  const int m2 = obs.m2();
  std::vector<double> wy(static_cast<std::size_t>(m1) + 1, 0.0);
  std::vector<double> wz(static_cast<std::size_t>(m2) + 1, 0.0);
  for (int j = 1; j <= m1; ++j) {
    const double y = obs.y(j);
    wy[static_cast<std::size_t>(j)] =
        std::sin(kPi * idx.k * y) * std::exp(plugin.theta1 * y / (2.0 * plugin.theta2));
  }
  for (int j = 1; j <= m2; ++j) {
    const double z = obs.z(j);
    wz[static_cast<std::size_t>(j)] =
        std::sin(kPi * idx.l * z) * std::exp(plugin.eta1 * z / (2.0 * plugin.theta2));
  }
  const double scale = 2.0 / (static_cast<double>(m1) * m2);

  ApproxCoordinatePath path;
  path.idx = idx;
  path.times = times.times;
  path.dt = times.dt;
  path.plugin = plugin;
  path.values.resize(times.times.size());
  for (int i = 0; i <= times.n; ++i) {
    const int ti = times.index(i);
    double total = 0.0;
    for (int j1 = 1; j1 <= m1; ++j1) {
      double row = 0.0;
      for (int j2 = 1; j2 <= m2; ++j2) row += obs.at(ti, j1, j2) * wz[static_cast<std::size_t>(j2)];
      total += wy[static_cast<std::size_t>(j1)] * row;
    }
    path.values[static_cast<std::size_t>(i)] = scale * total;
  }
  return path;
}

double f_n_q1(double lambda, double dt, double alpha) {
  return std::pow(lambda, alpha) * f_ratio(2.0 * lambda * dt);
}

double contrast_v1(double lambda, std::span<const double> x, double dt, double epsilon, double alpha) {
  check_path(x, dt, epsilon, "contrast_v1");
  if (!(lambda > 0.0)) throw DomainError("contrast_v1: lambda must be positive");
  return contrast_from(f_n_q1(lambda, dt, alpha), residual_ss(lambda, x, dt), x.size() - 1, dt, epsilon);
}

double contrast_v1_score(double lambda, std::span<const double> x, double dt, double epsilon,
                         double alpha) {
  check_path(x, dt, epsilon, "contrast_v1_score");
  if (!(lambda > 0.0)) throw DomainError("contrast_v1_score: lambda must be positive");
  const double s2 = 2.0 * lambda * dt;
  const double la = std::pow(lambda, alpha);
  const double fn = la * f_ratio(s2);
  const double dfn = alpha * la / lambda * f_ratio(s2) + la * 2.0 * dt * f_ratio_derivative(s2);
  const double decay = std::exp(-lambda * dt);
  double s = 0.0;
  double ds = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double m = x[i] - decay * x[i - 1];
    s += m * m;
    ds += 2.0 * m * dt * decay * x[i - 1];
  }
  const double e2dt = epsilon * epsilon * dt;
  const auto n = static_cast<double>(x.size() - 1);
  return dfn * s / e2dt + fn * ds / e2dt - n * dfn / fn;
}

double contrast_v2(double lambda, double mu, std::span<const double> x, double dt, double epsilon,
                   double alpha) {
  check_path(x, dt, epsilon, "contrast_v2");
  if (!(lambda > 0.0) || !(mu > 0.0)) throw DomainError("contrast_v2: lambda and mu must be positive");
  const double fn = std::pow(mu, alpha) * f_ratio(2.0 * lambda * dt);
  return contrast_from(fn, residual_ss(lambda, x, dt), x.size() - 1, dt, epsilon);
}

double profiled_mu(double lambda, std::span<const double> x, double dt, double epsilon, double alpha) {
  check_path(x, dt, epsilon, "profiled_mu");
  if (!(lambda > 0.0)) throw DomainError("profiled_mu: lambda must be positive");
  const double s = residual_ss(lambda, x, dt);
  if (!(s > 0.0)) {
    throw EstimationError("mu_unidentifiable", "profiled_mu: zero residual sum, mu is not identifiable");
  }
  const auto n = static_cast<double>(x.size() - 1);
  const double mu_alpha =
      n * epsilon * epsilon * one_minus_exp_neg(2.0 * lambda * dt) / (2.0 * lambda * s);
  return std::pow(mu_alpha, 1.0 / alpha);
}

void LambdaBox::validate() const {
  if (!(lo > 0.0 && lo < hi) || !std::isfinite(hi)) {
    throw ConfigError("search interval must satisfy 0 < lo < hi < infinity");
  }
}

LambdaFit minimize_on_log_grid(const std::function<double(double)>& objective, const LambdaBox& box) {
  box.validate();
  constexpr int np = kLambdaGridPoints;
  const double ratio = std::log(box.hi / box.lo);
  auto node = [&](int j) {
    if (j == 0) return box.lo;
    if (j == np - 1) return box.hi;
    return box.lo * std::exp(ratio * j / (np - 1));
  };
  int best_j = -1;
  double best = std::numeric_limits<double>::infinity();
  for (int j = 0; j < np; ++j) {
    const double v = objective(node(j));
    if (std::isfinite(v) && v < best) {
      best = v;
      best_j = j;
    }
  }
  if (best_j < 0) throw EstimationError("nonfinite_contrast", "contrast is not finite anywhere on the search grid");

  const double a = node(std::max(best_j - 1, 0));
  const double b = node(std::min(best_j + 1, np - 1));
  auto guarded = [&objective](double l) {
    const double v = objective(l);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };
  const auto gs = golden_section(guarded, a, b, kLambdaRelTol);
  LambdaFit fit{gs.x, gs.fx, false, gs.iterations};
  if (best <= gs.fx) {
    fit.lambda = node(best_j);
    fit.contrast = best;
  }
  constexpr double kEdge = 1e-8;
  if (std::abs(fit.lambda - box.lo) <= kEdge * box.lo) {
    fit.lambda = box.lo;
    fit.clamped = true;
  } else if (std::abs(fit.lambda - box.hi) <= kEdge * box.hi) {
    fit.lambda = box.hi;
    fit.clamped = true;
  }
  return fit;
}

LambdaFit estimate_lambda_q1(std::span<const double> x, double dt, double epsilon, double alpha,
                             const LambdaBox& box) {
  check_path(x, dt, epsilon, "estimate_lambda_q1");
  return minimize_on_log_grid(
      [&](double l) { return contrast_v1(l, x, dt, epsilon, alpha); }, box);
}

LambdaFit estimate_lambda_q1(const ApproxCoordinatePath& path, double epsilon, double alpha,
                             const LambdaBox& box) {
  return estimate_lambda_q1(path.values, path.dt, epsilon, alpha, box);
}

Q2Fit estimate_lambda_mu_q2(std::span<const double> x, double dt, double epsilon, double alpha,
                            const LambdaBox& lambda_box, const LambdaBox& mu_box,
                            std::optional<double> mu_known) {
  check_path(x, dt, epsilon, "estimate_lambda_mu_q2");
  if (mu_known) {
    if (!(*mu_known > 0.0)) throw DomainError("estimate_lambda_mu_q2: known mu must be positive");
    const double mu = *mu_known;
    const auto fit = minimize_on_log_grid(
        [&](double l) { return contrast_v2(l, mu, x, dt, epsilon, alpha); }, lambda_box);
    return {fit.lambda, mu, fit.contrast, fit.clamped, false, true, fit.iterations};
  }
  mu_box.validate();
  auto mu_at = [&](double l) { return mu_box.clamp_value(profiled_mu(l, x, dt, epsilon, alpha)); };
  const auto fit = minimize_on_log_grid(
      [&](double l) { return contrast_v2(l, mu_at(l), x, dt, epsilon, alpha); }, lambda_box);
  const double raw_mu = profiled_mu(fit.lambda, x, dt, epsilon, alpha);
  const double mu = mu_box.clamp_value(raw_mu);
  return {fit.lambda, mu, fit.contrast, fit.clamped, mu != raw_mu, false, fit.iterations};
}

Q2Fit estimate_lambda_mu_q2(const ApproxCoordinatePath& path, double epsilon, double alpha,
                            const LambdaBox& lambda_box, const LambdaBox& mu_box,
                            std::optional<double> mu_known) {
  return estimate_lambda_mu_q2(path.values, path.dt, epsilon, alpha, lambda_box, mu_box, mu_known);
}

double recover_theta0(double lambda_hat, const SpatialParams& plugin) {
  return theta0_from_lambda(lambda_hat, plugin.theta1, plugin.eta1, plugin.theta2);
}

double recover_mu0(double mu_hat) { return mu_hat - 2.0 * kPi * kPi; }

AsymptoticRegime AsymptoticRegime::b2(double c) {
  if (!(c >= 0.0) || !std::isfinite(c)) throw DomainError("AsymptoticRegime: c must be finite and >= 0");
  return {Kind::B2, c};
}

AsymptoticRegime AsymptoticRegime::realized(int n, double epsilon) {
  if (n < 1 || !(epsilon > 0.0)) throw DomainError("AsymptoticRegime: need n >= 1 and epsilon > 0");
  return b2(1.0 / (static_cast<double>(n) * epsilon * epsilon));
}

VarianceReport asymptotic_variance(NoiseVariant variant, const AsymptoticRegime& regime,
                                   double lambda, std::optional<double> mu, double alpha, double x0) {
  if (!(lambda > 0.0)) throw DomainError("asymptotic_variance: lambda must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("asymptotic_variance: alpha must lie in (0,1)");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double inf = std::numeric_limits<double>::infinity();
  const double decay = one_minus_exp_neg(2.0 * lambda);
  VarianceReport r{variant, regime, 0.0, 0.0, nan, nan, nan, nan};
  if (variant == NoiseVariant::Q1) {
    const bool needs_g = regime.kind == AsymptoticRegime::Kind::B1 || regime.c > 0.0;
    if (needs_g && x0 == 0.0) throw DomainError("asymptotic_variance: x0 = 0 makes G degenerate");
    r.g = decay * x0 * x0 / (2.0 * std::pow(lambda, 1.0 - alpha));
    r.h = alpha * alpha / (2.0 * lambda * lambda);
    r.i = r.h + (regime.kind == AsymptoticRegime::Kind::B2 ? regime.c * r.g : 0.0);
    r.se_lambda_eps = r.g > 0.0 ? 1.0 / std::sqrt(r.g) : inf;
    r.se_lambda_sqrtn = 1.0 / std::sqrt(r.i);
    return r;
  }
  if (!mu || !(*mu > 0.0)) throw DomainError("asymptotic_variance: Q2 needs mu > 0");
  if (x0 == 0.0) throw DomainError("asymptotic_variance: x0 = 0 makes G degenerate");
  r.g = decay * std::pow(*mu, alpha) * x0 * x0 / (2.0 * lambda);
  r.h = alpha * alpha / (2.0 * *mu * *mu);
  r.se_lambda_eps = 1.0 / std::sqrt(r.g);
  r.se_mu_sqrtn = 1.0 / std::sqrt(r.h);
  return r;
}

}  // namespace spdest
