#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "spdest/error.hpp"
#include "spdest/qv.hpp"
#include "spdest/special.hpp"

using namespace spdest;

TEST_CASE("z statistic") {
  const std::vector<double> x{0.0, 1.0, 3.0, 2.0};
  // N = 3, sum of squares 1 + 4 + 1 = 6.
  CHECK(z_statistic(x, 0.5) == doctest::Approx(std::pow(3.0, -0.5) * 6.0).epsilon(1e-15));
  const std::vector<double> one{1.0, 3.0};
  CHECK(z_statistic(one, 0.3) == doctest::Approx(4.0).epsilon(1e-15));
  const std::vector<double> single{1.0};
  CHECK_THROWS_AS(z_statistic(single, 0.5), DomainError);
}

TEST_CASE("z statistic invariances") {
  std::vector<double> x;
  for (int i = 0; i <= 40; ++i) x.push_back(std::sin(0.7 * i) + 0.01 * i * i);
  const double z = z_statistic(x, 0.5);
  std::vector<double> shifted = x;
  for (double& v : shifted) v += 3.25;
  CHECK(z_statistic(shifted, 0.5) == doctest::Approx(z).epsilon(1e-12));
  std::vector<double> scaled = x;
  for (double& v : scaled) v *= -2.0;
  CHECK(z_statistic(scaled, 0.5) == doctest::Approx(4.0 * z).epsilon(1e-14));
  std::vector<double> flat(17, 1.5);
  CHECK(z_statistic(flat, 0.5) == 0.0);
}

TEST_CASE("thinned space grid") {
  const auto g = build_thinned_space_grid(50, 50, 10, 10, 0.05);
  REQUIRE(g.m1() == 9);
  REQUIRE(g.m2() == 9);
  CHECK(g.size() == 81);
  for (int j = 0; j < 9; ++j) {
    CHECK(g.index1[j] == 5 * (j + 1));
    CHECK(g.y[j] == doctest::Approx(0.1 * (j + 1)).epsilon(1e-15));
  }
  // Uneven sizes: step floor(40/6) = 6.
  const auto h = build_thinned_space_grid(40, 20, 6, 4, 0.1);
  CHECK(h.index1 == std::vector<int>{6, 12, 18, 24, 30, 36});
  CHECK(h.index2 == std::vector<int>{5, 10, 15});
  // The boundary value delta itself is kept.
  const auto e = build_thinned_space_grid(20, 20, 20, 20, 0.25);
  CHECK(e.index1.front() == 5);
  CHECK(e.index1.back() == 15);
}

TEST_CASE("thinned space grid rejects bad settings") {
  CHECK_THROWS_AS(build_thinned_space_grid(5, 5, 2, 2, 0.45), ConfigError);  // no point survives
  CHECK_THROWS_AS(build_thinned_space_grid(50, 50, 10, 10, 0.6), ConfigError);
  CHECK_THROWS_AS(build_thinned_space_grid(50, 50, 10, 10, 0.0), ConfigError);
  CHECK_THROWS_AS(build_thinned_space_grid(50, 50, 0, 10), ConfigError);
  CHECK_THROWS_AS(build_thinned_space_grid(50, 50, 10, 51), ConfigError);
}

TEST_CASE("thinned time grid") {
  const auto g = build_thinned_time_grid(2000, 100);
  CHECK(g.stride == 20);
  CHECK(g.dt == doctest::Approx(0.01).epsilon(1e-15));
  REQUIRE(g.times.size() == 101u);
  CHECK(g.times.back() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(g.index(7) == 140);
  const auto u = build_thinned_time_grid(10, 3);  // stride 3: last time 0.9
  CHECK(u.stride == 3);
  CHECK(u.times.back() == doctest::Approx(0.9).epsilon(1e-15));
  CHECK_THROWS_AS(build_thinned_time_grid(10, 11), ConfigError);
  CHECK_THROWS_AS(build_thinned_time_grid(10, 0), ConfigError);
}

TEST_CASE("limit surface values") {
  const double sqrt_pi = std::sqrt(std::numbers::pi);
  CHECK(limit_amplitude(1.0, 0.5, NoiseVariant::Q1) == doctest::Approx(sqrt_pi / (2 * std::numbers::pi)).epsilon(1e-13));
  CHECK(limit_amplitude(1.0, 0.5, NoiseVariant::Q1) == doctest::Approx(0.28209).epsilon(1e-4));
  const SpatialParams p{0.3, 0.3, 0.3};
  CHECK(limit_surface(p, 0.5, NoiseVariant::Q1, 0.5, 0.5) ==
        doctest::Approx(sqrt_pi / (4 * std::numbers::pi * 0.5 * 0.3) * std::exp(-1.0)).epsilon(1e-13));
  CHECK(limit_surface(p, 0.5, NoiseVariant::Q1, 0.5, 0.5) == doctest::Approx(0.3459).epsilon(1e-3));
  CHECK(limit_surface(p, 0.5, NoiseVariant::Q2, 0.5, 0.5) ==
        doctest::Approx(sqrt_pi / (4 * std::numbers::pi * 0.5 * std::sqrt(0.3)) * std::exp(-1.0)).epsilon(1e-13));
  // Q1 and Q2 agree at theta2 = 1.
  const SpatialParams u{0.7, -0.2, 1.0};
  CHECK(limit_surface(u, 0.4, NoiseVariant::Q1, 0.3, 0.8) ==
        doctest::Approx(limit_surface(u, 0.4, NoiseVariant::Q2, 0.3, 0.8)).epsilon(1e-15));
}

TEST_CASE("log limit surface is linear in (y, z)") {
  const SpatialParams p{1.2, -0.7, 0.4};
  auto lg = [&](double y, double z) { return std::log(limit_surface(p, 0.3, NoiseVariant::Q1, y, z)); };
  CHECK(lg(0.6, 0.2) - lg(0.1, 0.2) == doctest::Approx(-3.0 * 0.5).epsilon(1e-13));
  CHECK(lg(0.4, 0.9) - lg(0.4, 0.3) == doctest::Approx(1.75 * 0.6).epsilon(1e-13));
  CHECK(lg(0.7, 0.7) + lg(0.1, 0.1) == doctest::Approx(lg(0.7, 0.1) + lg(0.1, 0.7)).epsilon(1e-13));
}

TEST_CASE("scaled Z values read the thinned points") {
  const int n = 4, m = 4;
  std::vector<double> field(static_cast<std::size_t>(n + 1) * (m + 1) * (m + 1), 0.0);
  // X(t_i, y_j1, z_j2) = i * j1 + j2 at interior points.
  for (int i = 0; i <= n; ++i)
    for (int a = 1; a < m; ++a)
      for (int b = 1; b < m; ++b) field[(static_cast<std::size_t>(i) * (m + 1) + a) * (m + 1) + b] = i * a + b;
  const ObservationGrid obs(n, m, m, 0.5, field);
  const auto g = build_thinned_space_grid(m, m, 4, 4, 0.2);
  const auto zv = scaled_z_values(obs, g, 0.5);
  REQUIRE(zv.size() == 9u);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      const double j1 = a + 1;
      // increments all equal j1: Z = N^{-1/2} N j1^2, scaled by 1/eps^2 = 4.
      CHECK(zv[a * 3 + b] == doctest::Approx(4.0 * std::sqrt(4.0) * j1 * j1).epsilon(1e-14));
    }
}

TEST_CASE("scaled Z approaches the limit surface as N grows") {
  // The initial-field drift contributes eps^{-2} N^{alpha-2} times a constant;
  // the gap to the limit must shrink with N.
  const SpdeParams p(4.0, 0.3, 0.3, 0.3);
  const auto q = NoiseSpec::q1(0.5);
  const int m = 20;
  const auto g = build_thinned_space_grid(m, m, 2, 2, 0.05);  // the centre point only
  const double limit = limit_surface({0.3, 0.3, 0.3}, 0.5, NoiseVariant::Q1, 0.5, 0.5);
  double prev_gap = 1e300;
  for (int n : {250, 1000, 4000}) {
    const FieldSimulator sim(p, q, InitialField::polynomial(), 0.01, {n, m, m}, TruncationPolicy::complete());
    double mean = 0.0;
    const int reps = 8;
    for (int r = 0; r < reps; ++r) {
      const auto obs = sim.simulate(21, r);
      const auto zv = scaled_z_values(obs, g, 0.5);
      mean += zv.at(0) / reps;
    }
    const double gap = std::abs(mean - limit);
    CAPTURE(n);
    CAPTURE(mean);
    CHECK(gap < prev_gap);
    prev_gap = gap;
  }
}
