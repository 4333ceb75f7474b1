#include "spdest/qv.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "spdest/error.hpp"
#include "spdest/special.hpp"

namespace spdest {

namespace {

void thin_axis(int m, int mbar, double delta, std::vector<int>& index, std::vector<double>& coord,
               const char* axis) {
  if (mbar < 1 || mbar > m) {
    std::ostringstream msg;
    msg << "thinned grid: need 1 <= mbar <= M on the " << axis << " axis (M = " << m
        << ", mbar = " << mbar << ")";
    throw ConfigError(msg.str());
  }
  const int step = m / mbar;
  constexpr double kSlack = 1e-12;
  for (int j = 0; j * step <= m; ++j) {
    const double c = static_cast<double>(j * step) / m;
    if (c >= delta - kSlack && c <= 1.0 - delta + kSlack) {
      index.push_back(j * step);
      coord.push_back(c);
    }
  }
  if (index.empty()) {
    std::ostringstream msg;
    msg << "thinned grid: no coarse " << axis << " point in [" << delta << ", " << 1.0 - delta
        << "] (step " << static_cast<double>(step) / m << ")";
    throw ConfigError(msg.str());
  }
}

}  // namespace

ThinnedSpaceGrid build_thinned_space_grid(int m1, int m2, int mbar1, int mbar2, double delta) {
  if (!(delta > 0.0 && delta < 0.5)) throw ConfigError("thinned grid: delta must lie in (0, 1/2)");
  ThinnedSpaceGrid g;
  g.delta = delta;
  thin_axis(m1, mbar1, delta, g.index1, g.y, "y");
  thin_axis(m2, mbar2, delta, g.index2, g.z, "z");
  return g;
}

ThinnedTimeGrid build_thinned_time_grid(int n_obs, int n) {
  if (n < 1 || n > n_obs) throw ConfigError("thinned time grid: need 1 <= n <= N");
  ThinnedTimeGrid g;
  g.n_obs = n_obs;
  g.n = n;
  g.stride = n_obs / n;
  g.dt = static_cast<double>(g.stride) / n_obs;
  g.times.resize(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) {
    g.times[static_cast<std::size_t>(i)] = static_cast<double>(i * g.stride) / n_obs;
  }
  return g;
}

double z_statistic(std::span<const double> series, double alpha) {
  if (series.size() < 2) throw DomainError("z_statistic: need at least two observations");
  const auto n = static_cast<double>(series.size() - 1);
  double sum = 0.0;
  for (std::size_t i = 1; i < series.size(); ++i) {
    const double d = series[i] - series[i - 1];
    sum += d * d;
  }
  return std::pow(n, alpha - 1.0) * sum;
}

std::vector<double> scaled_z_values(const ObservationGrid& obs, const ThinnedSpaceGrid& grid,
                                    double alpha) {
  if (!(obs.epsilon() > 0.0)) throw DomainError("scaled_z_values: epsilon must be positive");
  const double inv_eps2 = 1.0 / (obs.epsilon() * obs.epsilon());
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(grid.size()));
  for (int j1 : grid.index1) {
    for (int j2 : grid.index2) {
      const auto series = obs.time_series(j1, j2);
      out.push_back(inv_eps2 * z_statistic(series, alpha));
    }
  }
  return out;
}

double limit_amplitude(double theta2, double alpha, NoiseVariant variant) {
  if (!(theta2 > 0.0)) throw DomainError("limit_amplitude: theta2 must be positive");
  const double scale = variant == NoiseVariant::Q1 ? theta2 : std::pow(theta2, 1.0 - alpha);
  return gamma_lanczos(1.0 - alpha) / (4.0 * std::numbers::pi * alpha * scale);
}

double limit_surface(const SpatialParams& p, double alpha, NoiseVariant variant, double y,
                     double z) {
  return limit_amplitude(p.theta2, alpha, variant) * std::exp(-p.theta1 * y / p.theta2) *
         std::exp(-p.eta1 * z / p.theta2);
}

}  // namespace spdest
