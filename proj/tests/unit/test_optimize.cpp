#include <doctest.h>

#include <cmath>

#include "spdest/optimize.hpp"

using namespace spdest;

TEST_CASE("golden section on a quadratic") {
  const auto r = golden_section([](double x) { return (x - 1.234) * (x - 1.234) + 2.0; }, 0.0, 5.0);
  CHECK(r.converged);
  CHECK(r.x == doctest::Approx(1.234).epsilon(1e-8));
  CHECK(r.fx == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("golden section on a log-scale objective") {
  const auto r = golden_section([](double u) { return std::cosh(u - 0.3); }, -5.0, 5.0);
  CHECK(r.x == doctest::Approx(0.3).epsilon(1e-7));
}

TEST_CASE("golden section returns an endpoint for monotone objectives") {
  const auto r = golden_section([](double x) { return x; }, 2.0, 3.0);
  CHECK(r.x == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("Nelder-Mead on a quadratic bowl") {
  const auto r = nelder_mead(
      [](const std::array<double, 2>& x) {
        return 3 * (x[0] - 1) * (x[0] - 1) + (x[1] + 2) * (x[1] + 2) + (x[0] - 1) * (x[1] + 2);
      },
      {0.0, 0.0});
  CHECK(r.converged);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(r.x[1] == doctest::Approx(-2.0).epsilon(1e-7));
}

TEST_CASE("Nelder-Mead on Rosenbrock") {
  const auto r = nelder_mead(
      [](const std::array<double, 2>& x) {
        return 100 * (x[1] - x[0] * x[0]) * (x[1] - x[0] * x[0]) + (1 - x[0]) * (1 - x[0]);
      },
      {-1.2, 1.0});
  CHECK(r.converged);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("Nelder-Mead reports non-convergence") {
  NelderMeadOptions opt;
  opt.max_iter = 5;
  const auto r = nelder_mead(
      [](const std::array<double, 2>& x) { return x[0] * x[0] + x[1] * x[1]; }, {3.0, 4.0}, opt);
  CHECK_FALSE(r.converged);
}
