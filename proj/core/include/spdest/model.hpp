#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace spdest {

/// Coefficients of the operator
///   -A = theta2 (d_yy + d_zz) + theta1 d_y + eta1 d_z + theta0
/// on the unit square with Dirichlet boundary. Construction enforces
/// theta2 > 0 and a positive principal eigenvalue lambda(1,1).
class SpdeParams {
 public:
  SpdeParams(double theta0, double theta1, double eta1, double theta2);

  double theta0() const noexcept { return theta0_; }
  double theta1() const noexcept { return theta1_; }
  double eta1() const noexcept { return eta1_; }
  double theta2() const noexcept { return theta2_; }

  /// theta1 / theta2 and eta1 / theta2: the exponential tilts of the weight.
  double kappa() const noexcept { return theta1_ / theta2_; }
  double eta() const noexcept { return eta1_ / theta2_; }

  /// The mode-independent part of every eigenvalue:
  /// -theta0 + (theta1^2 + eta1^2) / (4 theta2).
  double eigen_offset() const noexcept;

 private:
  double theta0_;
  double theta1_;
  double eta1_;
  double theta2_;
};

enum class NoiseVariant { Q1, Q2 };

const char* to_string(NoiseVariant v) noexcept;
NoiseVariant noise_variant_from_string(const std::string& s);

/// Q1 damps mode (k,l) by lambda_{k,l}^{-alpha/2}; Q2 by mu_{k,l}^{-alpha/2}
/// with mu_{k,l} = pi^2 (k^2 + l^2) + mu0.
class NoiseSpec {
 public:
  static NoiseSpec q1(double alpha);
  static NoiseSpec q2(double alpha, double mu0);

  NoiseVariant variant() const noexcept { return variant_; }
  double alpha() const noexcept { return alpha_; }
  /// Throws UsageError on the Q1 variant.
  double mu0() const;

 private:
  NoiseSpec(NoiseVariant v, double alpha, double mu0) : variant_(v), alpha_(alpha), mu0_(mu0) {}

  NoiseVariant variant_;
  double alpha_;
  double mu0_;
};

struct EigenIndex {
  EigenIndex(int k_, int l_);

  int k;
  int l;

  int norm2() const noexcept { return k * k + l * l; }
  friend bool operator==(const EigenIndex&, const EigenIndex&) = default;
};

using ScalarField = std::function<double(double, double)>;

/// Deterministic initial value xi(y, z). Construction samples the boundary
/// and rejects fields that do not vanish there.
class InitialField {
 public:
  InitialField(ScalarField f, std::string tag);

  /// 30 y (1 - y) z (1 - z).
  static InitialField polynomial();
  /// amplitude * e_{1,1} for the given parameters, so that <xi, e_{1,1}> = amplitude.
  static InitialField single_mode(const SpdeParams& params, double amplitude = 1.0);
  /// The zero field.
  static InitialField zero();

  double operator()(double y, double z) const { return f_(y, z); }
  const std::string& tag() const noexcept { return tag_; }
  const ScalarField& function() const noexcept { return f_; }

 private:
  ScalarField f_;
  std::string tag_;
};

inline constexpr int kDefaultQuadratureOrder = 64;

/// lambda_{k,l} = -theta0 + (theta1^2 + eta1^2)/(4 theta2) + pi^2 (k^2 + l^2) theta2.
double eigenvalue(const SpdeParams& params, EigenIndex idx);

/// e_{k,l}(y,z) = 2 sin(pi k y) sin(pi l z) exp(-kappa y / 2) exp(-eta z / 2).
double eigenfunction_at(const SpdeParams& params, EigenIndex idx, double y, double z);

/// mu_{k,l} = pi^2 (k^2 + l^2) + mu0. UsageError on Q1.
double mu_value(const NoiseSpec& noise, EigenIndex idx);

/// lambda^{-alpha/2} (Q1) or mu^{-alpha/2} (Q2).
double noise_damping(const NoiseSpec& noise, const SpdeParams& params, EigenIndex idx);

/// Weighted inner product <f, g>_theta = int f g exp(kappa y + eta z) over [0,1]^2
/// by tensor Gauss-Legendre quadrature.
double inner_product(const SpdeParams& params, const ScalarField& f, const ScalarField& g,
                     int order = kDefaultQuadratureOrder);

/// x_{k,l}(0) = <xi, e_{k,l}>_theta.
double initial_coefficient(const SpdeParams& params, const InitialField& xi, EigenIndex idx,
                           int order = kDefaultQuadratureOrder);

/// All coefficients <xi, e_{k,l}>_theta for 1 <= k <= kmax, 1 <= l <= lmax in one
/// pass; row-major in (k, l). Uses the separable structure of e_{k,l}.
std::vector<double> initial_coefficients(const SpdeParams& params, const InitialField& xi,
                                         int kmax, int lmax, int order);

/// Throws DomainError if <xi, e_{1,1}>_theta vanishes (to the given tolerance).
void check_initial_condition(const SpdeParams& params, const InitialField& xi,
                             double tolerance = 1e-12);

/// Inverse of eigenvalue(., (1,1)) in theta0.
double theta0_from_lambda(double lambda11, double theta1, double eta1, double theta2);

}  // namespace spdest
