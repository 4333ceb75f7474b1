#include "spdest/simulator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "spdest/error.hpp"
#include "spdest/quadrature.hpp"
#include "spdest/special.hpp"

namespace spdest {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPi2 = kPi * kPi;

// Folds wavenumber k onto the grid with M intervals: sin(pi k j / M) = sign * sin(pi r j / M).
// Returns r in [1, M-1], or 0 when the mode vanishes at every grid node.
int fold(int k, int m, double& sign) {
  const int period = 2 * m;
  const int r = k % period;
  if (r == 0 || r == m) return 0;
  if (r < m) {
    sign = 1.0;
    return r;
  }
  sign = -1.0;
  return period - r;
}

struct Kahan {
  static void add(double& sum, double& comp, double v) {
    const double y = v - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

}  // namespace

double transition_variance(double lambda, double damping, double epsilon, double dt) {
  if (!(lambda > 0.0)) throw DomainError("transition_variance: lambda must be positive");
  const double s = epsilon * damping;
  return s * s * one_minus_exp_neg(2.0 * lambda * dt) / (2.0 * lambda);
}

CoordinatePath simulate_coordinate_path(double lambda, double damping, double epsilon, double x0,
                                        std::span<const double> times, SplitMix64& rng,
                                        EigenIndex idx) {
  if (!(lambda > 0.0)) throw DomainError("simulate_coordinate_path: lambda must be positive");
  if (!(damping > 0.0)) throw DomainError("simulate_coordinate_path: damping must be positive");
  if (times.empty()) throw DomainError("simulate_coordinate_path: empty time grid");
  CoordinatePath path{idx, {times.begin(), times.end()}, {}};
  path.values.resize(times.size());
  path.values[0] = x0;
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double dt = times[i] - times[i - 1];
    if (!(dt > 0.0)) throw DomainError("simulate_coordinate_path: times must be ascending");
    const double mean = std::exp(-lambda * dt) * path.values[i - 1];
    const double sd = std::sqrt(transition_variance(lambda, damping, epsilon, dt));
    path.values[i] = mean + sd * standard_normal(rng);
  }
  return path;
}

TruncationPolicy TruncationPolicy::fixed(int k) {
  if (k < 1) throw ConfigError("TruncationPolicy: K must be >= 1");
  return TruncationPolicy(Mode::kFixed, k, 0.0, k);
}

TruncationPolicy TruncationPolicy::complete() {
  return TruncationPolicy(Mode::kComplete, 0, 0.0, 0);
}

TruncationPolicy TruncationPolicy::adaptive(double tol, int max_k) {
  if (!(tol > 0.0)) throw ConfigError("TruncationPolicy: tolerance must be positive");
  if (max_k < 1) throw ConfigError("TruncationPolicy: max_k must be >= 1");
  return TruncationPolicy(Mode::kAdaptive, 0, tol, max_k);
}

double truncation_tail_bound(const SpdeParams& params, const NoiseSpec& noise, double epsilon,
                             int k) {
  if (k < 0) throw DomainError("truncation_tail_bound: K must be >= 0");
  if (epsilon == 0.0) return 0.0;
  const double alpha = noise.alpha();
  const double theta2 = params.theta2();
  const double offset = params.eigen_offset();
  const bool q1 = noise.variant() == NoiseVariant::Q1;
  const double mu0 = q1 ? 0.0 : noise.mu0();

  // Beyond s_th, lambda(s,1) >= pi^2 theta2 s^2 / 2 (and mu(s,1) >= pi^2 s^2 / 2).
  double s_th = 1.0;
  const double need_lambda = 2.0 * (-offset / (kPi2 * theta2) - 1.0);
  if (need_lambda > 0.0) s_th = std::max(s_th, std::ceil(std::sqrt(need_lambda)));
  if (!q1) {
    const double need_mu = 2.0 * (-mu0 / kPi2 - 1.0);
    if (need_mu > 0.0) s_th = std::max(s_th, std::ceil(std::sqrt(need_mu)));
  }
  const long long upper = std::max(static_cast<long long>(s_th), 4LL * k + 64);

  const double eps2 = epsilon * epsilon;
  double sum = 0.0;
  for (long long s = upper; s > k; --s) {
    const double sd = static_cast<double>(s);
    const double lam = offset + kPi2 * theta2 * (sd * sd + 1.0);
    const double base = q1 ? lam : kPi2 * (sd * sd + 1.0) + mu0;
    sum += (2.0 * sd - 1.0) * eps2 * std::pow(base, -alpha) / (2.0 * lam);
  }
  const double cd = q1 ? 0.5 * kPi2 * theta2 : 0.5 * kPi2;
  const double coef = 2.0 * eps2 * std::pow(cd, -alpha) / (kPi2 * theta2);
  sum += coef * std::pow(static_cast<double>(upper), -2.0 * alpha) / (2.0 * alpha);
  return sum;
}

int choose_truncation(const TruncationPolicy& policy, const SpdeParams& params,
                      const NoiseSpec& noise, double epsilon) {
  if (policy.mode() == TruncationPolicy::Mode::kFixed) return policy.k();
  if (policy.mode() == TruncationPolicy::Mode::kComplete) return 0;
  if (truncation_tail_bound(params, noise, epsilon, 1) < policy.tol()) return 1;
  if (truncation_tail_bound(params, noise, epsilon, policy.max_k()) >= policy.tol()) {
    std::ostringstream msg;
    msg << "adaptive truncation cannot reach tolerance " << policy.tol() << " with K <= "
        << policy.max_k();
    throw ConfigError(msg.str());
  }
  // The bound is non-increasing in K: bisect for the first K below tol.
  int lo = 1;
  int hi = policy.max_k();
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    if (truncation_tail_bound(params, noise, epsilon, mid) < policy.tol()) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

double white_tail_variance(const SpdeParams& params, const NoiseSpec& noise, double epsilon,
                           int k) {
  if (k < 1) throw DomainError("white_tail_variance: K must be >= 1");
  if (epsilon == 0.0) return 0.0;
  const double alpha = noise.alpha();
  const double offset = params.eigen_offset();
  const double theta2 = params.theta2();
  const bool q1 = noise.variant() == NoiseVariant::Q1;
  const double mu0 = q1 ? 0.0 : noise.mu0();
  auto f = [&](double x, double y) {
    const double r2 = x * x + y * y;
    const double lam = offset + kPi2 * theta2 * r2;
    const double base = q1 ? lam : kPi2 * r2 + mu0;
    return std::pow(base, -alpha) / (2.0 * lam);
  };
  // sum_{k > K} g(k) ~ int_{K+1/2}^inf g; x = a / u maps the half line to (0, 1].
  const double a = k + 0.5;
  const auto& rule = gauss_legendre(48);
  std::vector<double> xs(rule.nodes.size());
  std::vector<double> ws(rule.nodes.size());
  for (std::size_t q = 0; q < xs.size(); ++q) {
    const double u = rule.nodes[q];
    xs[q] = a / u;
    ws[q] = rule.weights[q] * a / (u * u);
  }
  double strip = 0.0;
  for (int l = 1; l <= k; ++l) {
    double s = 0.0;
    for (std::size_t q = 0; q < xs.size(); ++q) s += ws[q] * f(xs[q], static_cast<double>(l));
    strip += s;
  }
  double corner = 0.0;
  for (std::size_t p = 0; p < xs.size(); ++p) {
    for (std::size_t q = 0; q < xs.size(); ++q) corner += ws[p] * ws[q] * f(xs[p], xs[q]);
  }
  return epsilon * epsilon * (2.0 * strip + corner);
}

ObservationGrid::ObservationGrid(int n_time, int m1, int m2, double epsilon,
                                 std::vector<double> field, int truncation, std::uint64_t seed,
                                 std::uint64_t replicate)
    : n_time_(n_time),
      m1_(m1),
      m2_(m2),
      epsilon_(epsilon),
      truncation_(truncation),
      seed_(seed),
      replicate_(replicate),
      field_(std::move(field)) {
  if (n_time < 1 || m1 < 1 || m2 < 1) throw ConfigError("ObservationGrid: sizes must be >= 1");
  const std::size_t expect =
      static_cast<std::size_t>(n_time + 1) * (m1 + 1) * static_cast<std::size_t>(m2 + 1);
  if (field_.size() != expect) throw ConfigError("ObservationGrid: field size mismatch");
}

std::vector<double> ObservationGrid::time_series(int j1, int j2) const {
  std::vector<double> out(static_cast<std::size_t>(n_time_) + 1);
  for (int i = 0; i <= n_time_; ++i) out[static_cast<std::size_t>(i)] = at(i, j1, j2);
  return out;
}

FieldSimulator::FieldSimulator(SpdeParams params, NoiseSpec noise, InitialField xi, double epsilon,
                               GridSpec grid, TruncationPolicy truncation)
    : params_(params), noise_(noise), xi_(std::move(xi)), epsilon_(epsilon), grid_(grid) {
  if (grid.n_time < 1 || grid.m1 < 2 || grid.m2 < 2) {
    throw ConfigError("FieldSimulator: need N >= 1 and M1, M2 >= 2");
  }
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("FieldSimulator: epsilon must lie in [0,1]");
  k_max_ = choose_truncation(truncation, params_, noise_, epsilon_);
  const bool complete = k_max_ == 0;

  const int m1 = grid.m1;
  const int m2 = grid.m2;
  const int bins_z = m2 - 1;
  const double dt = 1.0 / grid.n_time;
  const double theta2 = params_.theta2();
  const double offset = params_.eigen_offset();

  // Modes whose one-step decay is representable: lambda dt <= kWhiteDecay.
  const double norm2_limit = (kWhiteDecay / dt - offset) / (kPi2 * theta2);
  const int k_tracked = std::max(1, static_cast<int>(std::floor(std::sqrt(std::max(norm2_limit - 1.0, 1.0)))));

  k_exact_ = complete ? std::max({k_tracked + 1, 32 * std::max(m1, m2), 256}) : k_max_;

  const int quad_order = std::max(kDefaultQuadratureOrder, 2 * k_tracked + 32);
  const auto coef = initial_coefficients(params_, xi_, k_tracked, k_tracked, quad_order);

  for (int k = 1; k <= k_tracked; ++k) {
    for (int l = 1; l <= k_tracked; ++l) {
      const EigenIndex idx{k, l};
      const double lam = eigenvalue(params_, idx);
      if (lam * dt > kWhiteDecay) continue;
      double sk = 1.0;
      double sl = 1.0;
      const int r = fold(k, m1, sk);
      const int s = fold(l, m2, sl);
      if (r == 0 || s == 0) continue;
      Mode mode{};
      mode.k = k;
      mode.l = l;
      mode.bin = (r - 1) * bins_z + (s - 1);
      mode.sign = sk * sl;
      mode.decay = std::exp(-lam * dt);
      const bool noisy = epsilon_ > 0.0 && k <= k_exact_ && l <= k_exact_;
      mode.sd = noisy ? std::sqrt(transition_variance(lam, noise_damping(noise_, params_, idx),
                                                      epsilon_, dt))
                      : 0.0;
      mode.x0 = coef[static_cast<std::size_t>(k - 1) * k_tracked + (l - 1)];
      modes_.push_back(mode);
    }
  }
  std::sort(modes_.begin(), modes_.end(), [](const Mode& a, const Mode& b) {
    const int na = a.k * a.k + a.l * a.l;
    const int nb = b.k * b.k + b.l * b.l;
    return na != nb ? na < nb : a.k < b.k;
  });

  // Pooled variance of the white modes, folded per bin.
  const std::size_t n_bins = static_cast<std::size_t>(m1 - 1) * bins_z;
  pooled_sd_.assign(n_bins, 0.0);
  if (epsilon_ > 0.0) {
    const double eps2 = epsilon_ * epsilon_;
    const bool q1 = noise_.variant() == NoiseVariant::Q1;
    const double alpha = noise_.alpha();
    const double mu0 = q1 ? 0.0 : noise_.mu0();
    std::vector<double> comp(n_bins, 0.0);
    for (int k = 1; k <= k_exact_; ++k) {
      double sk = 1.0;
      const int r = fold(k, m1, sk);
      if (r == 0) continue;
      for (int l = 1; l <= k_exact_; ++l) {
        const double n2 = static_cast<double>(k) * k + static_cast<double>(l) * l;
        const double lam = offset + kPi2 * theta2 * n2;
        if (lam * dt <= kWhiteDecay) continue;
        double sl = 1.0;
        const int s = fold(l, m2, sl);
        if (s == 0) continue;
        const double base = q1 ? lam : kPi2 * n2 + mu0;
        // 1 - e^{-2 lambda dt} == 1 in double precision here.
        const double v = eps2 * std::pow(base, -alpha) / (2.0 * lam);
        const std::size_t b = static_cast<std::size_t>(r - 1) * bins_z + (s - 1);
        Kahan::add(pooled_sd_[b], comp[b], v);
      }
    }
    if (complete) {
      const double share = white_tail_variance(params_, noise_, epsilon_, k_exact_) / (static_cast<double>(m1) * m2);
      for (double& v : pooled_sd_) v += share;
    }
    for (double& v : pooled_sd_) v = std::sqrt(v);
  }

  sin_y_.resize(static_cast<std::size_t>(m1 - 1) * (m1 - 1));
  for (int j = 1; j < m1; ++j) {
    for (int r = 1; r < m1; ++r) {
      sin_y_[static_cast<std::size_t>(j - 1) * (m1 - 1) + (r - 1)] =
          std::sin(kPi * static_cast<double>(static_cast<long long>(r) * j % (2 * m1)) / m1);
    }
  }
  sin_z_.resize(static_cast<std::size_t>(m2 - 1) * (m2 - 1));
  for (int j = 1; j < m2; ++j) {
    for (int s = 1; s < m2; ++s) {
      sin_z_[static_cast<std::size_t>(j - 1) * (m2 - 1) + (s - 1)] =
          std::sin(kPi * static_cast<double>(static_cast<long long>(s) * j % (2 * m2)) / m2);
    }
  }
  weight_y_.resize(static_cast<std::size_t>(m1 - 1));
  for (int j = 1; j < m1; ++j) {
    weight_y_[static_cast<std::size_t>(j - 1)] = 2.0 * std::exp(-0.5 * params_.kappa() * j / m1);
  }
  weight_z_.resize(static_cast<std::size_t>(m2 - 1));
  for (int j = 1; j < m2; ++j) {
    weight_z_[static_cast<std::size_t>(j - 1)] = std::exp(-0.5 * params_.eta() * j / m2);
  }
}

ObservationGrid FieldSimulator::simulate(std::uint64_t seed, std::uint64_t replicate) const {
  const int n = grid_.n_time;
  const int m1 = grid_.m1;
  const int m2 = grid_.m2;
  const std::size_t by = static_cast<std::size_t>(m1 - 1);
  const std::size_t bz = static_cast<std::size_t>(m2 - 1);
  const std::size_t n_bins = by * bz;
  const std::size_t plane = static_cast<std::size_t>(m1 + 1) * (m2 + 1);
  std::vector<double> field(static_cast<std::size_t>(n + 1) * plane, 0.0);

  for (int j1 = 1; j1 < m1; ++j1) {
    for (int j2 = 1; j2 < m2; ++j2) {
      field[static_cast<std::size_t>(j1) * (m2 + 1) + j2] =
          xi_(static_cast<double>(j1) / m1, static_cast<double>(j2) / m2);
    }
  }

  std::vector<double> state(modes_.size());
  std::vector<SplitMix64> rngs;
  rngs.reserve(modes_.size());
  for (std::size_t q = 0; q < modes_.size(); ++q) {
    state[q] = modes_[q].x0;
    rngs.emplace_back(derive_seed(seed, {replicate, static_cast<std::uint64_t>(StreamTag::kMode),
                                         static_cast<std::uint64_t>(modes_[q].k),
                                         static_cast<std::uint64_t>(modes_[q].l)}));
  }
  std::vector<SplitMix64> pooled_rngs;
  pooled_rngs.reserve(n_bins);
  for (std::size_t b = 0; b < n_bins; ++b) {
    pooled_rngs.emplace_back(
        derive_seed(seed, {replicate, static_cast<std::uint64_t>(StreamTag::kAliasedTail),
                           static_cast<std::uint64_t>(b / bz + 1), static_cast<std::uint64_t>(b % bz + 1)}));
  }

  constexpr int kChunk = 64;
  std::vector<double> bins(n_bins * kChunk);
  std::vector<double> comp(n_bins * kChunk);
  std::vector<double> coeffs(n_bins);
  std::vector<double> partial(by * bz);

  for (int i0 = 1; i0 <= n; i0 += kChunk) {
    const int len = std::min(kChunk, n + 1 - i0);
    std::fill(bins.begin(), bins.end(), 0.0);
    std::fill(comp.begin(), comp.end(), 0.0);

    for (std::size_t q = 0; q < modes_.size(); ++q) {
      const Mode& mode = modes_[q];
      double x = state[q];
      SplitMix64& rng = rngs[q];
      double* sum = &bins[static_cast<std::size_t>(mode.bin) * kChunk];
      double* c = &comp[static_cast<std::size_t>(mode.bin) * kChunk];
      if (mode.sd > 0.0) {
        for (int u = 0; u < len; ++u) {
          x = mode.decay * x + mode.sd * standard_normal(rng);
          Kahan::add(sum[u], c[u], mode.sign * x);
        }
      } else {
        for (int u = 0; u < len; ++u) {
          x = mode.decay * x;
          Kahan::add(sum[u], c[u], mode.sign * x);
        }
      }
      state[q] = x;
    }
    for (std::size_t b = 0; b < n_bins; ++b) {
      const double sd = pooled_sd_[b];
      if (sd == 0.0) continue;
      double* sum = &bins[b * kChunk];
      double* c = &comp[b * kChunk];
      for (int u = 0; u < len; ++u) Kahan::add(sum[u], c[u], sd * standard_normal(pooled_rngs[b]));
    }

    // X(j1, j2) = w_y(j1) w_z(j2) sum_r sin_y(j1, r) sum_s coeff(r, s) sin_z(j2, s).
    for (int u = 0; u < len; ++u) {
      for (std::size_t b = 0; b < n_bins; ++b) coeffs[b] = bins[b * kChunk + u];
      for (std::size_t r = 0; r < by; ++r) {
        const double* cr = &coeffs[r * bz];
        double* out = &partial[r * bz];
        for (std::size_t j2 = 0; j2 < bz; ++j2) {
          const double* sz = &sin_z_[j2 * bz];
          double acc = 0.0;
          for (std::size_t s = 0; s < bz; ++s) acc += cr[s] * sz[s];
          out[j2] = acc;
        }
      }
      double* slice = &field[static_cast<std::size_t>(i0 + u) * plane];
      for (std::size_t j1 = 0; j1 < by; ++j1) {
        const double* sy = &sin_y_[j1 * by];
        double* row = &slice[(j1 + 1) * static_cast<std::size_t>(m2 + 1) + 1];
        for (std::size_t r = 0; r < by; ++r) {
          const double a = sy[r];
          const double* pr = &partial[r * bz];
          for (std::size_t j2 = 0; j2 < bz; ++j2) row[j2] += a * pr[j2];
        }
        const double wy = weight_y_[j1];
        for (std::size_t j2 = 0; j2 < bz; ++j2) row[j2] *= wy * weight_z_[j2];
      }
    }
  }
  return ObservationGrid(n, m1, m2, epsilon_, std::move(field), k_max_, seed, replicate);
}

ObservationGrid simulate_dataset(const SpdeParams& params, const NoiseSpec& noise,
                                 const InitialField& xi, double epsilon, int n_time, int m1, int m2,
                                 const TruncationPolicy& truncation, std::uint64_t seed,
                                 std::uint64_t replicate) {
  const FieldSimulator sim(params, noise, xi, epsilon, GridSpec{n_time, m1, m2}, truncation);
  return sim.simulate(seed, replicate);
}

void write_surface_csv(std::ostream& out, const ObservationGrid& grid) {
  out << "t,y,z,value\n";
  out << std::setprecision(17);
  for (int i = 0; i <= grid.n_time(); ++i) {
    for (int j1 = 0; j1 <= grid.m1(); ++j1) {
      for (int j2 = 0; j2 <= grid.m2(); ++j2) {
        out << grid.t(i) << ',' << grid.y(j1) << ',' << grid.z(j2) << ',' << grid.at(i, j1, j2)
            << '\n';
      }
    }
  }
}

ObservationGrid read_surface_csv(std::istream& in, double epsilon) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,y,z,value", 0) != 0) {
    throw ConfigError("surface CSV: missing 't,y,z,value' header");
  }
  std::vector<std::array<double, 4>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::array<double, 4> row{};
    std::istringstream ss(line);
    std::string cell;
    for (std::size_t c = 0; c < 4; ++c) {
      if (!std::getline(ss, cell, ',')) throw ConfigError("surface CSV: short row '" + line + "'");
      row[c] = std::stod(cell);
    }
    rows.push_back(row);
  }
  if (rows.empty()) throw ConfigError("surface CSV: no data rows");
  int m2 = 0;
  while (static_cast<std::size_t>(m2 + 1) < rows.size() && rows[static_cast<std::size_t>(m2 + 1)][2] > rows[static_cast<std::size_t>(m2)][2]) ++m2;
  const std::size_t per_y = static_cast<std::size_t>(m2 + 1);
  int m1 = 0;
  while ((static_cast<std::size_t>(m1) + 1) * per_y < rows.size() &&
         rows[(static_cast<std::size_t>(m1) + 1) * per_y][1] > rows[static_cast<std::size_t>(m1) * per_y][1]) {
    ++m1;
  }
  const std::size_t plane = per_y * static_cast<std::size_t>(m1 + 1);
  if (rows.size() % plane != 0 || rows.size() / plane < 2) {
    throw ConfigError("surface CSV: row count is not (N+1)(M1+1)(M2+1)");
  }
  const int n = static_cast<int>(rows.size() / plane) - 1;
  std::vector<double> field(rows.size());
  for (std::size_t q = 0; q < rows.size(); ++q) field[q] = rows[q][3];
  ObservationGrid grid(n, m1, m2, epsilon, std::move(field));
  for (std::size_t q = 0; q < rows.size(); q += 97) {
    const int i = static_cast<int>(q / plane);
    const int j1 = static_cast<int>((q % plane) / per_y);
    const int j2 = static_cast<int>(q % per_y);
    if (std::abs(rows[q][0] - grid.t(i)) > 1e-12 || std::abs(rows[q][1] - grid.y(j1)) > 1e-12 ||
        std::abs(rows[q][2] - grid.z(j2)) > 1e-12) {
      throw ConfigError("surface CSV: coordinates are not a regular row-major grid");
    }
  }
  return grid;
}

}  // namespace spdest
