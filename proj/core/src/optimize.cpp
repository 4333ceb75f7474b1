#include "spdest/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spdest/error.hpp"

namespace spdest {

ScalarMinimum golden_section(const std::function<double(double)>& f, double a, double b,
                             double rel_tol, int max_iter) {
  if (!(a < b)) throw DomainError("golden_section: need a < b");
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - r * (b - a);
  double d = a + r * (b - a);
  double fc = f(c);
  double fd = f(d);
  int it = 0;
  bool converged = false;
  for (; it < max_iter; ++it) {
    const double mid = 0.5 * (a + b);
    if (b - a <= rel_tol * std::max(std::abs(mid), std::numeric_limits<double>::min())) {
      converged = true;
      break;
    }
    // Ties keep the left part, so flat stretches resolve toward smaller x.
    if (!(fd < fc)) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  const double x = fc <= fd ? c : d;
  return {x, std::min(fc, fd), it, converged};
}

PlanarMinimum nelder_mead(const std::function<double(const std::array<double, 2>&)>& f,
                          std::array<double, 2> start, const NelderMeadOptions& opt) {
  using Point = std::array<double, 2>;
  std::array<Point, 3> p{start, start, start};
  p[1][0] += opt.initial_step;
  p[2][1] += opt.initial_step;
  std::array<double, 3> v{f(p[0]), f(p[1]), f(p[2])};

  auto order = [&] {
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2 - i; ++j) {
        if (v[static_cast<std::size_t>(j + 1)] < v[static_cast<std::size_t>(j)]) {
          std::swap(v[static_cast<std::size_t>(j)], v[static_cast<std::size_t>(j + 1)]);
          std::swap(p[static_cast<std::size_t>(j)], p[static_cast<std::size_t>(j + 1)]);
        }
      }
    }
  };
  auto along = [](const Point& c, const Point& w, double t) {
    return Point{c[0] + t * (w[0] - c[0]), c[1] + t * (w[1] - c[1])};
  };

  int it = 0;
  bool converged = false;
  for (; it < opt.max_iter; ++it) {
    order();
    double diam = 0.0;
    for (int i = 1; i < 3; ++i) {
      const auto& q = p[static_cast<std::size_t>(i)];
      diam = std::max({diam, std::abs(q[0] - p[0][0]), std::abs(q[1] - p[0][1])});
    }
    const double spread = v[2] - v[0];
    if (diam <= opt.x_tol || spread <= opt.f_tol * std::abs(v[0]) + std::numeric_limits<double>::min()) {
      converged = true;
      break;
    }
    const Point centroid{0.5 * (p[0][0] + p[1][0]), 0.5 * (p[0][1] + p[1][1])};
    const Point xr = along(centroid, p[2], -1.0);
    const double fr = f(xr);
    if (fr < v[0]) {
      const Point xe = along(centroid, p[2], -2.0);
      const double fe = f(xe);
      if (fe < fr) {
        p[2] = xe;
        v[2] = fe;
      } else {
        p[2] = xr;
        v[2] = fr;
      }
      continue;
    }
    if (fr < v[1]) {
      p[2] = xr;
      v[2] = fr;
      continue;
    }
    const bool outside = fr < v[2];
    const Point xc = outside ? along(centroid, p[2], -0.5) : along(centroid, p[2], 0.5);
    const double fcon = f(xc);
    if (fcon < (outside ? fr : v[2])) {
      p[2] = xc;
      v[2] = fcon;
      continue;
    }
    for (int i = 1; i < 3; ++i) {
      auto& q = p[static_cast<std::size_t>(i)];
      q = along(p[0], q, 0.5);
      v[static_cast<std::size_t>(i)] = f(q);
    }
  }
  order();
  return {p[0], v[0], it, converged};
}

}  // namespace spdest
