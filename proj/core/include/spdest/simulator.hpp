#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "spdest/model.hpp"
#include "spdest/random.hpp"

namespace spdest {

/// One mode x_{k,l}(t) sampled on an ascending time grid starting at 0.
struct CoordinatePath {
  EigenIndex idx{1, 1};
  std::vector<double> times;
  std::vector<double> values;
};

/// Variance of x(t + dt) given x(t) for dx = -lambda x dt + epsilon * damping dw:
/// epsilon^2 damping^2 (1 - e^{-2 lambda dt}) / (2 lambda).
double transition_variance(double lambda, double damping, double epsilon, double dt);

/// Exact Gaussian-transition sample of the Ornstein-Uhlenbeck mode on `times`.
/// values[0] = x0. Throws DomainError for lambda <= 0 or non-ascending times.
CoordinatePath simulate_coordinate_path(double lambda, double damping, double epsilon, double x0,
                                        std::span<const double> times, SplitMix64& rng,
                                        EigenIndex idx = EigenIndex{1, 1});

inline constexpr int kDefaultMaxTruncation = 8192;

class TruncationPolicy {
 public:
  enum class Mode { kFixed, kAdaptive, kComplete };

  static TruncationPolicy fixed(int k);
  /// No truncation: modes beyond an exact cutoff enter through their summed
  /// stationary variance (white_tail_variance).
  static TruncationPolicy complete();
  /// Smallest K whose omitted-noise variance bound is below `tol`; fails
  /// with ConfigError if that needs more than `max_k` modes per axis.
  static TruncationPolicy adaptive(double tol, int max_k = kDefaultMaxTruncation);

  Mode mode() const noexcept { return mode_; }
  int k() const noexcept { return k_; }
  double tol() const noexcept { return tol_; }
  int max_k() const noexcept { return max_k_; }

 private:
  TruncationPolicy(Mode m, int k, double tol, int max_k) : mode_(m), k_(k), tol_(tol), max_k_(max_k) {}

  Mode mode_;
  int k_;
  double tol_;
  int max_k_;
};

/// Upper bound on sum_{max(k,l) > K} epsilon^2 damping_{k,l}^2 / (2 lambda_{k,l}),
/// the stationary variance carried by the modes a truncation at K drops.
/// Shells max(k,l) = s are bounded by their smallest eigenvalue; shells beyond
/// a power-law regime are summed in closed form.
double truncation_tail_bound(const SpdeParams& params, const NoiseSpec& noise, double epsilon,
                             int k);

/// K for fixed and adaptive policies; 0 for the complete policy.
int choose_truncation(const TruncationPolicy& policy, const SpdeParams& params,
                      const NoiseSpec& noise, double epsilon);

/// sum_{max(k,l) > K} epsilon^2 damping_{k,l}^2 / (2 lambda_{k,l}), evaluated
/// (not bounded): exact sums along the shorter axis, quadrature along the
/// unbounded one. Intended for K large enough that the summand is smooth.
double white_tail_variance(const SpdeParams& params, const NoiseSpec& noise, double epsilon, int k);

/// Field values X_{t_i}(y_{j1}, z_{j2}) on t_i = i/N, y_{j1} = j1/M1, z_{j2} = j2/M2.
/// truncation() is the noise cutoff K per axis, or 0 when untruncated.
class ObservationGrid {
 public:
  ObservationGrid(int n_time, int m1, int m2, double epsilon, std::vector<double> field,
                  int truncation = 0, std::uint64_t seed = 0, std::uint64_t replicate = 0);

  int n_time() const noexcept { return n_time_; }
  int m1() const noexcept { return m1_; }
  int m2() const noexcept { return m2_; }
  double epsilon() const noexcept { return epsilon_; }
  int truncation() const noexcept { return truncation_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t replicate() const noexcept { return replicate_; }

  double t(int i) const noexcept { return static_cast<double>(i) / n_time_; }
  double y(int j1) const noexcept { return static_cast<double>(j1) / m1_; }
  double z(int j2) const noexcept { return static_cast<double>(j2) / m2_; }

  double at(int i, int j1, int j2) const noexcept {
    return field_[(static_cast<std::size_t>(i) * (m1_ + 1) + j1) * (m2_ + 1) + j2];
  }
  /// Values at one time, row-major in (j1, j2).
  std::span<const double> slice(int i) const noexcept {
    const std::size_t plane = static_cast<std::size_t>(m1_ + 1) * (m2_ + 1);
    return {field_.data() + static_cast<std::size_t>(i) * plane, plane};
  }
  /// X_{t_i}(y_{j1}, z_{j2}) for i = 0..N.
  std::vector<double> time_series(int j1, int j2) const;

  const std::vector<double>& values() const noexcept { return field_; }

 private:
  int n_time_;
  int m1_;
  int m2_;
  double epsilon_;
  int truncation_;
  std::uint64_t seed_;
  std::uint64_t replicate_;
  std::vector<double> field_;
};

struct GridSpec {
  int n_time;
  int m1;
  int m2;
};

/// Exact sampler of the random field on a regular observation grid.
///
/// Every retained mode follows its exact Gaussian transition. On the grid
/// y_j = j/M, sin(pi k y_j) depends only on k mod 2M up to sign, so modes fold
/// onto (M1-1) x (M2-1) aliasing bins and the field is recovered by a 2-D sine
/// synthesis per time step. Modes with lambda/N > 37 decorrelate completely
/// within one step (e^{-lambda/N} is below double rounding), so their folded
/// sum is an independent Gaussian per bin and time; those modes are pooled
/// analytically and cost nothing per step. The driving noise is truncated at
/// K per axis (TruncationPolicy), or not at all: under the complete policy the
/// modes beyond a cutoff far above M and the white threshold are spread
/// evenly over the visible bins (each alias class holds 2 of every 2M
/// wavenumbers). The deterministic part e^{-tA} xi is exact:
/// X_0 = xi on the grid and every mode whose decay over one step is
/// representable carries its initial coefficient.
///
/// Mode (k,l) of replicate r draws from substream (seed, r, k, l), so the
/// draws of a mode do not depend on K. Accumulation runs in increasing
/// k^2 + l^2 with compensated summation.
class FieldSimulator {
 public:
  FieldSimulator(SpdeParams params, NoiseSpec noise, InitialField xi, double epsilon, GridSpec grid,
                 TruncationPolicy truncation);

  ObservationGrid simulate(std::uint64_t seed, std::uint64_t replicate = 0) const;

  /// Noise cutoff per axis; 0 under the complete policy.
  int truncation() const noexcept { return k_max_; }
  /// Largest wavenumber summed mode by mode.
  int exact_cutoff() const noexcept { return k_exact_; }
  std::size_t tracked_modes() const noexcept { return modes_.size(); }
  const SpdeParams& params() const noexcept { return params_; }
  const NoiseSpec& noise() const noexcept { return noise_; }
  double epsilon() const noexcept { return epsilon_; }
  const GridSpec& grid() const noexcept { return grid_; }

  /// Decay factor above which a one-step transition is treated as white.
  static constexpr double kWhiteDecay = 37.0;

 private:
  struct Mode {
    int k;
    int l;
    int bin;       // (r-1) * (M2-1) + (s-1)
    double sign;   // +-1 from folding
    double decay;  // e^{-lambda dt}
    double sd;     // transition standard deviation (0 beyond K)
    double x0;
  };

  SpdeParams params_;
  NoiseSpec noise_;
  InitialField xi_;
  double epsilon_;
  GridSpec grid_;
  int k_max_;
  int k_exact_;
  std::vector<Mode> modes_;
  std::vector<double> pooled_sd_;  // per bin
  std::vector<double> sin_y_;      // (M1-1) x (M1-1): sin(pi r j / M1)
  std::vector<double> sin_z_;
  std::vector<double> weight_y_;   // 2 e^{-kappa y_j / 2}
  std::vector<double> weight_z_;
};

ObservationGrid simulate_dataset(const SpdeParams& params, const NoiseSpec& noise,
                                 const InitialField& xi, double epsilon, int n_time, int m1, int m2,
                                 const TruncationPolicy& truncation, std::uint64_t seed,
                                 std::uint64_t replicate = 0);

/// CSV `t,y,z,value`, row-major in (i, j1, j2), 17 significant digits.
void write_surface_csv(std::ostream& out, const ObservationGrid& grid);

/// Inverse of write_surface_csv; grid sizes are inferred from the rows.
ObservationGrid read_surface_csv(std::istream& in, double epsilon);

}  // namespace spdest
