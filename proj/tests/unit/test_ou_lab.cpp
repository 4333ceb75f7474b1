#include <doctest.h>

#include <cmath>
#include <vector>

#include "spdest/error.hpp"
#include "spdest/ou_lab.hpp"
#include "spdest/special.hpp"

using namespace spdest;

TEST_CASE("model validation") {
  OuModel m;
  CHECK_NOTHROW(m.validate());
  m.epsilon = 0.0;
  CHECK_THROWS_AS(m.validate(), ConfigError);
  m = OuModel{};
  m.x0 = 0.0;
  CHECK_THROWS_AS(m.validate(), ConfigError);
  m = OuModel{};
  m.kind = OuCase::Case2;
  m.mu = -1.0;
  CHECK_THROWS_AS(m.validate(), ConfigError);
  m = OuModel{};
  m.n = 0;
  CHECK_THROWS_AS(m.validate(), ConfigError);
}

TEST_CASE("paths are reproducible per (seed, replicate)") {
  OuModel m;
  m.n = 50;
  const auto a = simulate_ou(m, 3, 7);
  const auto b = simulate_ou(m, 3, 7);
  const auto c = simulate_ou(m, 3, 8);
  CHECK(a.values == b.values);
  CHECK(a.values != c.values);
  CHECK(a.values.front() == m.x0);
  CHECK(a.times.back() == doctest::Approx(1.0));
}

TEST_CASE("Case2 with mu = lambda reproduces Case1") {
  OuModel m1;
  m1.n = 200;
  m1.lambda = 2.0;
  OuModel m2 = m1;
  m2.kind = OuCase::Case2;
  m2.mu = 2.0;
  CHECK(simulate_ou(m1, 5, 1).values == simulate_ou(m2, 5, 1).values);
}

TEST_CASE("one-step residual variance is eps^2 dt / F_n") {
  OuModel m;
  m.n = 20000;
  m.epsilon = 0.01;
  m.lambda = 3.0;
  const auto p = simulate_ou(m, 1, 0);
  const double dt = m.dt();
  const double fn = std::pow(m.lambda, m.alpha) * f_ratio(2 * m.lambda * dt);
  const double v = m.epsilon * m.epsilon * dt / fn;
  double s2 = 0.0, s4 = 0.0;
  for (std::size_t i = 1; i < p.values.size(); ++i) {
    const double r = p.values[i] - std::exp(-m.lambda * dt) * p.values[i - 1];
    s2 += r * r;
    s4 += r * r * r * r;
  }
  const double n = m.n;
  CHECK(std::abs(s2 / n - v) < 4 * v * std::sqrt(2 / n));
  CHECK(std::abs(s4 / n - 3 * v * v) < 4 * v * v * std::sqrt(96 / n));
}

TEST_CASE("Case1 estimates center on the truth") {
  OuModel m;
  m.n = 1000;
  m.epsilon = 1e-3;
  const int reps = 200;
  double mean = 0.0;
  double se = 0.0;
  for (int r = 0; r < reps; ++r) {
    const auto est = estimate_case1(simulate_ou(m, 2, r), m.epsilon, m.alpha);
    mean += est.fit.lambda / reps;
    se = 1.0 / std::sqrt(m.n * est.variance.h + est.variance.g / (m.epsilon * m.epsilon));
  }
  CHECK(std::abs(mean - m.lambda) < 4 * se / std::sqrt(static_cast<double>(reps)));
}

TEST_CASE("Case2 estimates and cross-correlation") {
  OuModel m;
  m.kind = OuCase::Case2;
  m.mu = 3.0;
  m.n = 1000;
  m.epsilon = 1e-3;
  const auto est = estimate_case2(simulate_ou(m, 4, 0), m.epsilon, m.alpha);
  CHECK(est.fit.lambda == doctest::Approx(2.0).epsilon(0.01));
  REQUIRE(est.cross_correlation.has_value());
  CHECK(std::abs(*est.cross_correlation) < 0.2);
  const auto known = estimate_case2(simulate_ou(m, 4, 0), m.epsilon, m.alpha, {}, {}, 3.0);
  CHECK_FALSE(known.cross_correlation.has_value());
  CHECK(known.fit.mu == 3.0);
}
