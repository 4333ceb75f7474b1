#include "spdest/spatial_contrast.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "spdest/error.hpp"
#include "spdest/special.hpp"

namespace spdest {

void SearchBox::validate() const {
  for (const Interval* iv : {&theta1, &eta1, &theta2}) {
    if (!(iv->lo <= iv->hi)) throw ConfigError("SearchBox: lower bound exceeds upper bound");
  }
  if (!(theta2.lo > 0.0)) throw ConfigError("SearchBox: theta2 lower bound must be positive");
}

SpatialContrastInput::SpatialContrastInput(std::vector<double> zvals, ThinnedSpaceGrid grid,
                                           double alpha, double epsilon, NoiseVariant variant)
    : zvals_(std::move(zvals)), grid_(std::move(grid)), alpha_(alpha), epsilon_(epsilon), variant_(variant) {
  if (zvals_.size() != static_cast<std::size_t>(grid_.size())) {
    throw DomainError("SpatialContrastInput: zvals do not match the thinned grid");
  }
  for (double z : zvals_) {
    if (!(z >= 0.0) || !std::isfinite(z)) throw DomainError("SpatialContrastInput: zvals must be finite and >= 0");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("SpatialContrastInput: alpha must lie in (0,1)");
}

SpatialContrastInput make_spatial_input(const ObservationGrid& obs, const ThinnedSpaceGrid& grid,
                                        double alpha, NoiseVariant variant) {
  return SpatialContrastInput(scaled_z_values(obs, grid, alpha), grid, alpha, obs.epsilon(), variant);
}

double contrast_u(const SpatialContrastInput& input, const SpatialParams& p) {
  if (!(p.theta2 > 0.0)) throw DomainError("contrast_u: theta2 must be positive");
  const auto& g = input.grid();
  double sum = 0.0;
  std::size_t q = 0;
  for (double y : g.y) {
    for (double z : g.z) {
      const double r = input.zvals()[q++] - limit_surface(p, input.alpha(), input.variant(), y, z);
      sum += r * r;
    }
  }
  return sum;
}

SurfaceShape to_shape(const SpatialParams& p, double alpha, NoiseVariant variant) {
  return {limit_amplitude(p.theta2, alpha, variant), p.theta1 / p.theta2, p.eta1 / p.theta2};
}

SpatialParams from_shape(const SurfaceShape& s, double alpha, NoiseVariant variant) {
  if (!(s.amplitude > 0.0)) throw DomainError("from_shape: amplitude must be positive");
  const double base = gamma_lanczos(1.0 - alpha) / (4.0 * std::numbers::pi * alpha * s.amplitude);
  const double theta2 = variant == NoiseVariant::Q1 ? base : std::pow(base, 1.0 / (1.0 - alpha));
  return {s.kappa * theta2, s.eta * theta2, theta2};
}

namespace {

// Weights e^{-kappa y - eta z} in row-major order of the thinned grid.
void shape_weights(const ThinnedSpaceGrid& g, double kappa, double eta, std::vector<double>& w) {
  w.resize(static_cast<std::size_t>(g.size()));
  std::size_t q = 0;
  for (double y : g.y) {
    const double ey = std::exp(-kappa * y);
    for (double z : g.z) w[q++] = ey * std::exp(-eta * z);
  }
}

double amplitude_from(const std::vector<double>& zv, const std::vector<double>& w) {
  double zw = 0.0;
  double ww = 0.0;
  for (std::size_t q = 0; q < w.size(); ++q) {
    zw += zv[q] * w[q];
    ww += w[q] * w[q];
  }
  return ww > 0.0 ? zw / ww : 0.0;
}

double residual_sum(const std::vector<double>& zv, const std::vector<double>& w, double a) {
  double sum = 0.0;
  for (std::size_t q = 0; q < w.size(); ++q) {
    const double r = zv[q] - a * w[q];
    sum += r * r;
  }
  return sum;
}

}  // namespace

double profiled_amplitude(const SpatialContrastInput& input, double kappa, double eta) {
  std::vector<double> w;
  shape_weights(input.grid(), kappa, eta, w);
  return amplitude_from(input.zvals(), w);
}

double profiled_contrast(const SpatialContrastInput& input, double kappa, double eta) {
  std::vector<double> w;
  shape_weights(input.grid(), kappa, eta, w);
  const double v = residual_sum(input.zvals(), w, amplitude_from(input.zvals(), w));
  return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

SpatialFit minimize_contrast(const SpatialContrastInput& input, const SearchBox& box,
                             const SpatialOptConfig& config) {
  box.validate();
  const auto& g = input.grid();
  if (g.size() < 3 || g.m1() < 2 || g.m2() < 2) {
    throw ConfigError("minimize_contrast: need at least two thinned points on each axis");
  }
  if (config.coarse_points < 2) throw ConfigError("minimize_contrast: coarse grid needs >= 2 points");

  const int np = config.coarse_points;
  auto node = [np](const Interval& iv, int i) {
    return iv.lo + (iv.hi - iv.lo) * static_cast<double>(i) / (np - 1);
  };
  // Values first, then the tie rule: smallest (kappa, eta) within tie_tol of the minimum.
  std::vector<double> values(static_cast<std::size_t>(np) * np);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < np; ++i) {
    for (int j = 0; j < np; ++j) {
      const double v = profiled_contrast(input, node(config.kappa, i), node(config.eta, j));
      values[static_cast<std::size_t>(i) * np + j] = v;
      best = std::min(best, v);
    }
  }
  if (!std::isfinite(best)) throw EstimationError("no_convergence", "minimize_contrast: contrast is not finite on the coarse grid");
  int ties = 0;
  std::array<double, 2> seed{};
  for (int i = 0; i < np; ++i) {
    for (int j = 0; j < np; ++j) {
      if (values[static_cast<std::size_t>(i) * np + j] <= best + config.tie_tol) {
        if (ties == 0) seed = {node(config.kappa, i), node(config.eta, j)};
        ++ties;
      }
    }
  }

  const auto nm = nelder_mead(
      [&input](const std::array<double, 2>& x) { return profiled_contrast(input, x[0], x[1]); },
      seed, config.nelder_mead);
  if (!nm.converged) {
    std::ostringstream msg;
    msg << "minimize_contrast: Nelder-Mead did not converge in " << nm.iterations << " iterations";
    throw EstimationError("no_convergence", msg.str());
  }

  const double a = profiled_amplitude(input, nm.x[0], nm.x[1]);
  if (!(a > 0.0)) {
    throw EstimationError("nonpositive_amplitude",
                          "minimize_contrast: least-squares amplitude is not positive");
  }
  SpatialFit fit{};
  fit.shape = {a, nm.x[0], nm.x[1]};
  fit.contrast = nm.fx;
  fit.coarse_ties = ties;
  fit.seed = seed;
  fit.iterations = nm.iterations;

  const SpatialParams raw = from_shape(fit.shape, input.alpha(), input.variant());
  fit.estimate = {box.theta1.clamp(raw.theta1), box.eta1.clamp(raw.eta1), box.theta2.clamp(raw.theta2)};
  fit.clamped = fit.estimate.theta1 != raw.theta1 || fit.estimate.eta1 != raw.eta1 ||
                fit.estimate.theta2 != raw.theta2;
  return fit;
}

}  // namespace spdest
