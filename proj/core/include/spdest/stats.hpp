#pragma once

#include <span>

namespace spdest {

struct Moments {
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;    // n - 1 denominator
  double skew = 0.0;  // m3 / m2^{3/2}; 0 when m2 = 0
  double kurt = 0.0;  // m4 / m2^2 - 3; 0 when m2 = 0
};

/// Two-pass central moments. DomainError on an empty sample.
Moments moments(std::span<const double> x);

double median(std::span<const double> x);

/// Pearson correlation; 0 if either sample is constant.
double correlation(std::span<const double> x, std::span<const double> y);

double normal_cdf(double x);

/// sup_x |F_n(x) - Phi(x)|.
double ks_statistic_normal(std::span<const double> x);

/// Asymptotic p-value P(D_n > d) from the Kolmogorov distribution with the
/// (sqrt(n) + 0.12 + 0.11 / sqrt(n)) small-sample correction.
double ks_pvalue(double d, std::size_t n);

}  // namespace spdest
