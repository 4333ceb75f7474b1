#pragma once

#include <span>
#include <vector>

#include "spdest/model.hpp"
#include "spdest/simulator.hpp"

namespace spdest {

inline constexpr double kDefaultDelta = 0.05;

/// Interior coarse sub-grid of the observation grid. Axis points are
/// ybar_j = floor(M/mbar) j / M restricted to [delta, 1 - delta]; the 2-D
/// grid is their Cartesian product.
struct ThinnedSpaceGrid {
  double delta = kDefaultDelta;
  std::vector<int> index1;  // observation-grid index j1 of each y point
  std::vector<int> index2;
  std::vector<double> y;    // y = index1 / M1
  std::vector<double> z;

  int m1() const noexcept { return static_cast<int>(y.size()); }
  int m2() const noexcept { return static_cast<int>(z.size()); }
  int size() const noexcept { return m1() * m2(); }
};

/// Throws ConfigError on 1 <= mbar <= M or 0 < delta < 1/2 violations, and
/// when an axis keeps no coarse point.
ThinnedSpaceGrid build_thinned_space_grid(int m1, int m2, int mbar1, int mbar2,
                                          double delta = kDefaultDelta);

/// t_i = floor(N/n) i / N for i = 0..n.
struct ThinnedTimeGrid {
  int n_obs = 1;   // N of the observation grid
  int n = 1;
  int stride = 1;  // floor(N/n)
  double dt = 1.0;
  std::vector<double> times;

  int index(int i) const noexcept { return i * stride; }
};

ThinnedTimeGrid build_thinned_time_grid(int n_obs, int n);

/// N^{alpha - 1} sum_i (x_i - x_{i-1})^2 for a series x_0..x_N.
double z_statistic(std::span<const double> series, double alpha);

/// eps^{-2} Z_N at every thinned point, row-major (m1 x m2).
std::vector<double> scaled_z_values(const ObservationGrid& obs, const ThinnedSpaceGrid& grid,
                                    double alpha);

/// (theta1, eta1, theta2): the part of the coefficient vector seen by the spatial contrast.
struct SpatialParams {
  double theta1;
  double eta1;
  double theta2;
};

/// Gamma(1-alpha) / (4 pi alpha theta2) for Q1, theta2^{1-alpha} in place of theta2 for Q2.
double limit_amplitude(double theta2, double alpha, NoiseVariant variant);

/// limit_amplitude * exp(-theta1 y / theta2) * exp(-eta1 z / theta2).
double limit_surface(const SpatialParams& p, double alpha, NoiseVariant variant, double y,
                     double z);

}  // namespace spdest
