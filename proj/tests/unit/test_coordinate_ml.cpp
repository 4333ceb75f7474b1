#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "spdest/coordinate_ml.hpp"
#include "spdest/error.hpp"
#include "spdest/optimize.hpp"
#include "spdest/random.hpp"

using namespace spdest;

namespace {

double v1_oracle(double lambda, const std::vector<double>& x, double dt, double eps, double alpha) {
  const double s2 = 2 * lambda * dt;
  const double fn = std::pow(lambda, alpha) * s2 / (1 - std::exp(-s2));
  double s = 0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double m = x[i] - std::exp(-lambda * dt) * x[i - 1];
    s += m * m;
  }
  const double n = static_cast<double>(x.size() - 1);
  return fn / (eps * eps * dt) * s - n * std::log(fn);
}

std::vector<double> ou_path(double lambda, double ups, double eps, double alpha, int n, double x0,
                            std::uint64_t seed) {
  std::vector<double> t(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) t[i] = static_cast<double>(i) / n;
  SplitMix64 rng(seed);
  return simulate_coordinate_path(lambda, std::pow(ups, -alpha / 2), eps, x0, t, rng).values;
}

}  // namespace

TEST_CASE("V1 against a direct evaluation") {
  const std::vector<double> x{1.0, 0.97, 0.95, 0.9, 0.88};
  for (double lambda : {0.5, 2.0, 7.3}) {
    CHECK(contrast_v1(lambda, x, 0.25, 0.1, 0.5) == doctest::Approx(v1_oracle(lambda, x, 0.25, 0.1, 0.5)).epsilon(1e-13));
  }
  CHECK(f_n_q1(2.0, 0.01, 0.5) == doctest::Approx(std::sqrt(2.0) * 0.04 / (1 - std::exp(-0.04))).epsilon(1e-14));
}

TEST_CASE("V1 is stable for tiny lambda dt") {
  const std::vector<double> x{1.0, 1.0 - 1e-9, 1.0 - 2e-9};
  const double v = contrast_v1(1e-3, x, 1e-6, 1e-3, 0.5);
  CHECK(std::isfinite(v));
  CHECK(std::isfinite(contrast_v1_score(1e-3, x, 1e-6, 1e-3, 0.5)));
}

TEST_CASE("V1 with zero residuals") {
  const double lambda = 1.7;
  const double dt = 0.1;
  std::vector<double> x;
  for (int i = 0; i <= 10; ++i) x.push_back(2.0 * std::exp(-lambda * dt * i));
  CHECK(contrast_v1(lambda, x, dt, 0.01, 0.5) ==
        doctest::Approx(-10 * std::log(f_n_q1(lambda, dt, 0.5))).epsilon(1e-12));
}

TEST_CASE("score matches a central difference of V1") {
  const auto x = ou_path(2.0, 2.0, 0.05, 0.5, 200, 1.0, 4);
  for (double lambda : {0.5, 2.0, 5.0}) {
    const double h = 1e-6 * lambda;
    const double fd = (contrast_v1(lambda + h, x, 0.005, 0.05, 0.5) - contrast_v1(lambda - h, x, 0.005, 0.05, 0.5)) / (2 * h);
    CHECK(contrast_v1_score(lambda, x, 0.005, 0.05, 0.5) == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("score at the truth has mean zero") {
  const int reps = 400;
  std::vector<double> s(reps);
  for (int r = 0; r < reps; ++r) {
    const auto x = ou_path(2.0, 2.0, 0.05, 0.5, 100, 1.0, derive_seed(8, {static_cast<std::uint64_t>(r)}));
    s[r] = contrast_v1_score(2.0, x, 0.01, 0.05, 0.5);
  }
  double m = 0, v = 0;
  for (double x : s) m += x;
  m /= reps;
  for (double x : s) v += (x - m) * (x - m);
  v /= reps - 1;
  CHECK(std::abs(m) < 4 * std::sqrt(v / reps));
}

TEST_CASE("V2(lambda, lambda) equals V1(lambda)") {
  SplitMix64 rng(12);
  auto unif = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  for (int trial = 0; trial < 1000; ++trial) {
    const double lambda = 0.01 + 20 * unif();
    const double alpha = 0.05 + 0.9 * unif();
    std::vector<double> x{1.0};
    for (int i = 0; i < 20; ++i) x.push_back(x.back() * (0.9 + 0.2 * unif()));
    const double v1 = contrast_v1(lambda, x, 0.05, 0.1, alpha);
    CHECK(contrast_v2(lambda, lambda, x, 0.05, 0.1, alpha) == doctest::Approx(v1).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("profiled mu matches a numeric minimizer") {
  const auto x = ou_path(2.0, 3.0, 0.01, 0.5, 500, 1.0, 31);
  for (double lambda : {1.0, 2.0, 4.0}) {
    const double mu = profiled_mu(lambda, x, 0.002, 0.01, 0.5);
    const auto r = golden_section(
        [&](double u) { return contrast_v2(lambda, std::exp(u), x, 0.002, 0.01, 0.5); }, std::log(1e-3),
        std::log(1e3), 1e-13);
    CHECK(std::exp(r.x) == doctest::Approx(mu).epsilon(1e-6));
    CHECK(contrast_v2(lambda, mu, x, 0.002, 0.01, 0.5) <= r.fx + 1e-9);
  }
  const std::vector<double> exact{1.0, std::exp(-0.002 * 2.0)};
  try {
    profiled_mu(2.0, exact, 0.002, 0.01, 0.5);
    FAIL("expected mu_unidentifiable");
  } catch (const EstimationError& e) {
    CHECK(e.code() == "mu_unidentifiable");
  }
}

TEST_CASE("noiseless exponential decay recovers lambda") {
  std::vector<double> x;
  for (int i = 0; i <= 100; ++i) x.push_back(1.5 * std::exp(-2.5 * i * 0.01));
  const auto fit = estimate_lambda_q1(x, 0.01, 1e-6, 0.5);
  CHECK(fit.lambda == doctest::Approx(2.5).epsilon(1e-6));
  CHECK_FALSE(fit.clamped);
  const auto q2 = estimate_lambda_mu_q2(x, 0.01, 1e-6, 0.5, {}, {}, 3.0);
  CHECK(q2.lambda == doctest::Approx(2.5).epsilon(1e-6));
  CHECK(q2.mu_known);
}

TEST_CASE("a single step is enough") {
  const std::vector<double> x{1.0, std::exp(-0.5 * 2.0)};
  const auto fit = estimate_lambda_q1(x, 0.5, 1e-6, 0.5);
  CHECK(fit.lambda == doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("sign of the path does not matter") {
  auto x = ou_path(2.0, 2.0, 0.05, 0.5, 100, 1.0, 2);
  const auto a = estimate_lambda_q1(x, 0.01, 0.05, 0.5);
  for (double& v : x) v = -v;
  const auto b = estimate_lambda_q1(x, 0.01, 0.05, 0.5);
  CHECK(a.lambda == b.lambda);
}

TEST_CASE("lambda search box") {
  std::vector<double> x;
  for (int i = 0; i <= 50; ++i) x.push_back(std::exp(-2.0 * i * 0.02));
  const auto fit = estimate_lambda_q1(x, 0.02, 1e-4, 0.5, {5.0, 100.0});
  CHECK(fit.clamped);
  CHECK(fit.lambda == doctest::Approx(5.0).epsilon(1e-7));
  CHECK_THROWS_AS((LambdaBox{2.0, 1.0}.validate()), ConfigError);
  CHECK_THROWS_AS((LambdaBox{0.0, 1.0}.validate()), ConfigError);
  const auto tie = minimize_on_log_grid([](double) { return 1.0; }, {0.1, 10.0});
  CHECK(tie.lambda == doctest::Approx(0.1));
}

TEST_CASE("Q2 profiled fit recovers both parameters") {
  const auto x = ou_path(2.0, 3.0, 1e-3, 0.5, 1000, 1.0, 99);
  const auto fit = estimate_lambda_mu_q2(x, 0.001, 1e-3, 0.5);
  CHECK(fit.lambda == doctest::Approx(2.0).epsilon(0.01));
  CHECK(fit.mu == doctest::Approx(3.0).epsilon(0.3));
  CHECK_FALSE(fit.mu_known);
  // At the fitted lambda the profiled mu is the fitted mu.
  CHECK(profiled_mu(fit.lambda, x, 0.001, 1e-3, 0.5) == doctest::Approx(fit.mu).epsilon(1e-10));
}

TEST_CASE("approximate coordinate is exact for a single mode") {
  const SpdeParams p(4.0, 0.3, 0.3, 0.3);
  const auto obs = simulate_dataset(p, NoiseSpec::q1(0.5), InitialField::single_mode(p, 1.3), 0.0, 20, 10,
                                    12, TruncationPolicy::fixed(4), 1);
  const auto tg = build_thinned_time_grid(20, 10);
  const auto path = approximate_coordinate(obs, tg, {0.3, 0.3, 0.3});
  const double lam = eigenvalue(p, {1, 1});
  REQUIRE(path.values.size() == 11u);
  for (std::size_t i = 0; i < path.values.size(); ++i) {
    CHECK(path.values[i] == doctest::Approx(1.3 * std::exp(-lam * path.times[i])).epsilon(1e-12));
  }
  CHECK(path.dt == doctest::Approx(0.1));
}

TEST_CASE("approximate coordinate converges at order >= 1.5 in M") {
  const SpdeParams p(4.0, 0.3, 0.3, 0.3);
  const auto xi = InitialField::polynomial();
  const double truth = initial_coefficient(p, xi, {1, 1});
  std::vector<double> err;
  for (int m : {25, 50, 100}) {
    const auto obs = simulate_dataset(p, NoiseSpec::q1(0.5), xi, 0.0, 1, m, m, TruncationPolicy::fixed(4), 1);
    const auto path = approximate_coordinate(obs, build_thinned_time_grid(1, 1), {0.3, 0.3, 0.3});
    err.push_back(std::abs(path.values[0] - truth));
  }
  CHECK(err[0] / err[1] >= std::pow(2.0, 1.5));
  CHECK(err[1] / err[2] >= std::pow(2.0, 1.5));
}

TEST_CASE("approximate coordinate is linear and Lipschitz in the field") {
  const SpdeParams p(4.0, 0.3, 0.3, 0.3);
  const auto a = simulate_dataset(p, NoiseSpec::q1(0.5), InitialField::polynomial(), 0.01, 10, 10, 10,
                                  TruncationPolicy::complete(), 1);
  std::vector<double> bumped = a.values();
  for (double& v : bumped) v *= 1.0 + 1e-3;
  const ObservationGrid b(10, 10, 10, 0.01, bumped);
  const auto tg = build_thinned_time_grid(10, 5);
  const auto pa = approximate_coordinate(a, tg, {0.3, 0.3, 0.3});
  const auto pb = approximate_coordinate(b, tg, {0.3, 0.3, 0.3});
  for (std::size_t i = 0; i < pa.values.size(); ++i) {
    CHECK(pb.values[i] == doctest::Approx(pa.values[i] * (1.0 + 1e-3)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(approximate_coordinate(a, build_thinned_time_grid(20, 5), {0.3, 0.3, 0.3}), ConfigError);
}

TEST_CASE("theta0 and mu0 recovery") {
  const SpdeParams p(4.0, 0.3, 0.3, 0.3);
  CHECK(recover_theta0(eigenvalue(p, {1, 1}), {0.3, 0.3, 0.3}) == doctest::Approx(4.0).epsilon(1e-13));
  const auto q = NoiseSpec::q2(0.5, 1.5);
  CHECK(recover_mu0(mu_value(q, {1, 1})) == doctest::Approx(1.5).epsilon(1e-13));
}

TEST_CASE("asymptotic variances") {
  const auto b1 = asymptotic_variance(NoiseVariant::Q1, AsymptoticRegime::b1(), 2.0, std::nullopt, 0.5, 1.0);
  CHECK(b1.h == doctest::Approx(0.03125).epsilon(1e-14));
  CHECK(b1.g == doctest::Approx((1 - std::exp(-4.0)) / (2 * std::sqrt(2.0))).epsilon(1e-14));
  CHECK(b1.g == doctest::Approx(0.34707).epsilon(1e-4));
  CHECK(b1.se_lambda_eps == doctest::Approx(1 / std::sqrt(b1.g)));
  const auto c0 = asymptotic_variance(NoiseVariant::Q1, AsymptoticRegime::b2(0.0), 2.0, std::nullopt, 0.5, 1.0);
  CHECK(c0.i == doctest::Approx(c0.h).epsilon(1e-15));
  const auto c1 = asymptotic_variance(NoiseVariant::Q1, AsymptoticRegime::b2(1.0), 2.0, std::nullopt, 0.5, 1.0);
  CHECK(c1.i == doctest::Approx(0.03125 + b1.g).epsilon(1e-14));
  CHECK(c1.se_lambda_sqrtn == doctest::Approx(1 / std::sqrt(c1.i)));
  const auto q2 = asymptotic_variance(NoiseVariant::Q2, AsymptoticRegime::b1(), 2.0, 3.0, 0.5, 1.0);
  CHECK(q2.g == doctest::Approx((1 - std::exp(-4.0)) * std::sqrt(3.0) / 4.0).epsilon(1e-14));
  CHECK(q2.h == doctest::Approx(0.25 / 18.0).epsilon(1e-14));
  CHECK_THROWS_AS(asymptotic_variance(NoiseVariant::Q1, AsymptoticRegime::b1(), 2.0, std::nullopt, 0.5, 0.0), DomainError);
  CHECK_NOTHROW(asymptotic_variance(NoiseVariant::Q1, AsymptoticRegime::b2(0.0), 2.0, std::nullopt, 0.5, 0.0));
  CHECK_THROWS_AS(asymptotic_variance(NoiseVariant::Q2, AsymptoticRegime::b1(), 2.0, std::nullopt, 0.5, 1.0), DomainError);
  CHECK(AsymptoticRegime::realized(100, 0.1).c == doctest::Approx(1.0));
}
