#include "spdest/model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "spdest/error.hpp"
#include "spdest/quadrature.hpp"

namespace spdest {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPi2 = kPi * kPi;

}  // namespace

SpdeParams::SpdeParams(double theta0, double theta1, double eta1, double theta2)
    : theta0_(theta0), theta1_(theta1), eta1_(eta1), theta2_(theta2) {
  if (!std::isfinite(theta0) || !std::isfinite(theta1) || !std::isfinite(eta1) ||
      !std::isfinite(theta2)) {
    throw DomainError("SpdeParams: non-finite coefficient");
  }
  if (theta2 <= 0.0) throw DomainError("SpdeParams: theta2 must be positive");
  const double lambda11 = eigen_offset() + 2.0 * kPi2 * theta2;
  if (!(lambda11 > 0.0)) {
    std::ostringstream msg;
    msg << "SpdeParams: lambda(1,1) = " << lambda11 << " is not positive";
    throw DomainError(msg.str());
  }
}

double SpdeParams::eigen_offset() const noexcept {
  return -theta0_ + (theta1_ * theta1_ + eta1_ * eta1_) / (4.0 * theta2_);
}

const char* to_string(NoiseVariant v) noexcept {
  return v == NoiseVariant::Q1 ? "Q1" : "Q2";
}

NoiseVariant noise_variant_from_string(const std::string& s) {
  if (s == "Q1" || s == "q1") return NoiseVariant::Q1;
  if (s == "Q2" || s == "q2") return NoiseVariant::Q2;
  throw ConfigError("unknown noise variant '" + s + "' (expected Q1 or Q2)");
}

NoiseSpec NoiseSpec::q1(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("NoiseSpec: alpha must lie in (0,1)");
  return NoiseSpec(NoiseVariant::Q1, alpha, 0.0);
}

NoiseSpec NoiseSpec::q2(double alpha, double mu0) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("NoiseSpec: alpha must lie in (0,1)");
  if (!(mu0 > -2.0 * kPi2) || !std::isfinite(mu0)) {
    throw DomainError("NoiseSpec: mu0 must exceed -2 pi^2");
  }
  return NoiseSpec(NoiseVariant::Q2, alpha, mu0);
}

double NoiseSpec::mu0() const {
  if (variant_ != NoiseVariant::Q2) throw UsageError("NoiseSpec: mu0 is defined only for Q2");
  return mu0_;
}

EigenIndex::EigenIndex(int k_, int l_) : k(k_), l(l_) {
  if (k < 1 || l < 1) throw DomainError("EigenIndex: indices must be >= 1");
}

InitialField::InitialField(ScalarField f, std::string tag) : f_(std::move(f)), tag_(std::move(tag)) {
  if (!f_) throw DomainError("InitialField: empty evaluator");
  constexpr int kSamples = 33;
  constexpr double kTol = 1e-9;
  for (int i = 0; i <= kSamples; ++i) {
    const double s = static_cast<double>(i) / kSamples;
    const double edge[4] = {f_(s, 0.0), f_(s, 1.0), f_(0.0, s), f_(1.0, s)};
    for (double v : edge) {
      if (!(std::abs(v) <= kTol)) {
        throw DomainError("InitialField '" + tag_ + "' does not vanish on the boundary");
      }
    }
  }
}

InitialField InitialField::polynomial() {
  return InitialField([](double y, double z) { return 30.0 * y * (1.0 - y) * z * (1.0 - z); },
                      "polynomial");
}

InitialField InitialField::single_mode(const SpdeParams& params, double amplitude) {
  const EigenIndex first{1, 1};
  return InitialField(
      [params, amplitude, first](double y, double z) {
        return amplitude * eigenfunction_at(params, first, y, z);
      },
      "single_mode");
}

InitialField InitialField::zero() {
  return InitialField([](double, double) { return 0.0; }, "zero");
}

double eigenvalue(const SpdeParams& params, EigenIndex idx) {
  return params.eigen_offset() + kPi2 * static_cast<double>(idx.norm2()) * params.theta2();
}

double eigenfunction_at(const SpdeParams& params, EigenIndex idx, double y, double z) {
  return 2.0 * std::sin(kPi * idx.k * y) * std::sin(kPi * idx.l * z) *
         std::exp(-0.5 * params.kappa() * y) * std::exp(-0.5 * params.eta() * z);
}

double mu_value(const NoiseSpec& noise, EigenIndex idx) {
  return kPi2 * static_cast<double>(idx.norm2()) + noise.mu0();
}

double noise_damping(const NoiseSpec& noise, const SpdeParams& params, EigenIndex idx) {
  const double base =
      noise.variant() == NoiseVariant::Q1 ? eigenvalue(params, idx) : mu_value(noise, idx);
  return std::pow(base, -0.5 * noise.alpha());
}

double inner_product(const SpdeParams& params, const ScalarField& f, const ScalarField& g,
                     int order) {
  const auto& rule = gauss_legendre(order);
  const double kappa = params.kappa();
  const double eta = params.eta();
  double total = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double y = rule.nodes[i];
    const double wy = rule.weights[i] * std::exp(kappa * y);
    double row = 0.0;
    for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
      const double z = rule.nodes[j];
      const double v = f(y, z) * g(y, z);
      if (!std::isfinite(v)) throw NumericError("inner_product: non-finite integrand");
      row += rule.weights[j] * std::exp(eta * z) * v;
    }
    total += wy * row;
  }
  return total;
}

double initial_coefficient(const SpdeParams& params, const InitialField& xi, EigenIndex idx,
                           int order) {
  return inner_product(
      params, xi.function(),
      [&params, idx](double y, double z) { return eigenfunction_at(params, idx, y, z); }, order);
}

std::vector<double> initial_coefficients(const SpdeParams& params, const InitialField& xi,
                                         int kmax, int lmax, int order) {
  if (kmax < 1 || lmax < 1) throw DomainError("initial_coefficients: kmax, lmax must be >= 1");
  const auto& rule = gauss_legendre(order);
  const std::size_t n = rule.nodes.size();
  const auto K = static_cast<std::size_t>(kmax);
  const auto L = static_cast<std::size_t>(lmax);

  // <xi, e_kl> = sum_ij [sqrt2 sin(pi k y_i) e^{kappa y_i/2} w_i] xi_ij [sqrt2 sin(pi l z_j) e^{eta z_j/2} w_j]
  std::vector<double> a(K * n), b(L * n), field(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    const double y = rule.nodes[i];
    const double wy = std::sqrt(2.0) * std::exp(0.5 * params.kappa() * y) * rule.weights[i];
    const double wz = std::sqrt(2.0) * std::exp(0.5 * params.eta() * y) * rule.weights[i];
    for (std::size_t k = 0; k < K; ++k) a[k * n + i] = std::sin(kPi * (k + 1.0) * y) * wy;
    for (std::size_t l = 0; l < L; ++l) b[l * n + i] = std::sin(kPi * (l + 1.0) * y) * wz;
    for (std::size_t j = 0; j < n; ++j) {
      const double v = xi(y, rule.nodes[j]);
      if (!std::isfinite(v)) throw NumericError("initial_coefficients: non-finite initial field");
      field[i * n + j] = v;
    }
  }
  std::vector<double> tmp(K * n, 0.0);  // a * field
  for (std::size_t k = 0; k < K; ++k) {
    double* out = &tmp[k * n];
    for (std::size_t i = 0; i < n; ++i) {
      const double aki = a[k * n + i];
      const double* row = &field[i * n];
      for (std::size_t j = 0; j < n; ++j) out[j] += aki * row[j];
    }
  }
  std::vector<double> coef(K * L, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    const double* t = &tmp[k * n];
    for (std::size_t l = 0; l < L; ++l) {
      const double* bl = &b[l * n];
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += t[j] * bl[j];
      coef[k * L + l] = s;
    }
  }
  return coef;
}

void check_initial_condition(const SpdeParams& params, const InitialField& xi, double tolerance) {
  const double c = initial_coefficient(params, xi, EigenIndex{1, 1});
  if (!(std::abs(c) > tolerance)) {
    throw DomainError("initial field '" + xi.tag() + "' has <xi, e_11> = 0");
  }
}

double theta0_from_lambda(double lambda11, double theta1, double eta1, double theta2) {
  if (!(theta2 > 0.0)) throw DomainError("theta0_from_lambda: theta2 must be positive");
  return -lambda11 + (theta1 * theta1 + eta1 * eta1) / (4.0 * theta2) + 2.0 * kPi2 * theta2;
}

}  // namespace spdest
