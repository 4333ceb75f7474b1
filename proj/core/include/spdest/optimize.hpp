#pragma once

#include <array>
#include <functional>

namespace spdest {

struct ScalarMinimum {
  double x;
  double fx;
  int iterations;
  bool converged;
};

/// Golden-section search on [a, b] until the bracket is below
/// rel_tol * max(|x|, tiny). f should be unimodal on the bracket.
ScalarMinimum golden_section(const std::function<double(double)>& f, double a, double b,
                             double rel_tol = 1e-10, int max_iter = 500);

struct PlanarMinimum {
  std::array<double, 2> x;
  double fx;
  int iterations;
  bool converged;
};

struct NelderMeadOptions {
  double initial_step = 0.5;
  double x_tol = 1e-10;   // simplex diameter
  double f_tol = 1e-15;   // relative spread of vertex values
  int max_iter = 5000;
};

/// Nelder-Mead in two dimensions (standard coefficients 1, 2, 1/2, 1/2).
PlanarMinimum nelder_mead(const std::function<double(const std::array<double, 2>&)>& f,
                          std::array<double, 2> start, const NelderMeadOptions& opt = {});

}  // namespace spdest
