#pragma once

#include <vector>

#include "spdest/model.hpp"
#include "spdest/optimize.hpp"
#include "spdest/qv.hpp"

namespace spdest {

struct Interval {
  double lo;
  double hi;

  bool contains(double x) const noexcept { return x >= lo && x <= hi; }
  double clamp(double x) const noexcept { return x < lo ? lo : (x > hi ? hi : x); }
};

/// Closed search box for (theta1, eta1, theta2); theta2.lo must be positive.
struct SearchBox {
  Interval theta1{-50.0, 50.0};
  Interval eta1{-50.0, 50.0};
  Interval theta2{1e-4, 1e3};

  void validate() const;
};

/// eps^{-2} Z_N on a thinned grid, row-major (m1 x m2).
class SpatialContrastInput {
 public:
  SpatialContrastInput(std::vector<double> zvals, ThinnedSpaceGrid grid, double alpha,
                       double epsilon, NoiseVariant variant);

  const std::vector<double>& zvals() const noexcept { return zvals_; }
  const ThinnedSpaceGrid& grid() const noexcept { return grid_; }
  double alpha() const noexcept { return alpha_; }
  double epsilon() const noexcept { return epsilon_; }
  NoiseVariant variant() const noexcept { return variant_; }

 private:
  std::vector<double> zvals_;
  ThinnedSpaceGrid grid_;
  double alpha_;
  double epsilon_;
  NoiseVariant variant_;
};

/// Builds the input from raw observations (computes scaled_z_values).
SpatialContrastInput make_spatial_input(const ObservationGrid& obs, const ThinnedSpaceGrid& grid,
                                        double alpha, NoiseVariant variant);

/// Sum over thinned points of (z - limit_surface)^2.
double contrast_u(const SpatialContrastInput& input, const SpatialParams& p);

/// a exp(-kappa y - eta z): amplitude and the two decay rates.
struct SurfaceShape {
  double amplitude;
  double kappa;
  double eta;
};

SurfaceShape to_shape(const SpatialParams& p, double alpha, NoiseVariant variant);
/// Inverse of to_shape; DomainError unless amplitude > 0.
SpatialParams from_shape(const SurfaceShape& s, double alpha, NoiseVariant variant);

/// Least-squares amplitude sum(z w) / sum(w^2) for fixed (kappa, eta).
double profiled_amplitude(const SpatialContrastInput& input, double kappa, double eta);
/// Contrast at the profiled amplitude.
double profiled_contrast(const SpatialContrastInput& input, double kappa, double eta);

struct SpatialOptConfig {
  int coarse_points = 21;
  Interval kappa{-10.0, 10.0};
  Interval eta{-10.0, 10.0};
  double tie_tol = 1e-12;
  NelderMeadOptions nelder_mead{};
};

struct SpatialFit {
  SpatialParams estimate;
  SurfaceShape shape;
  double contrast;
  bool clamped;
  int coarse_ties;   // coarse cells within tie_tol of the best one (1 = unique)
  std::array<double, 2> seed;
  int iterations;
};

/// Profiled minimum-contrast fit. Throws EstimationError with code
/// "nonpositive_amplitude" or "no_convergence".
SpatialFit minimize_contrast(const SpatialContrastInput& input, const SearchBox& box = {},
                             const SpatialOptConfig& config = {});

}  // namespace spdest
