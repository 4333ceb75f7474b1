#pragma once

namespace spdest {

/// Gamma function by the Lanczos approximation (g = 671/128, 14 terms) with
/// reflection for x < 1/2. Accurate to roughly 14 significant digits on the
/// positive axis; poles at non-positive integers throw DomainError.
double gamma_lanczos(double x);

/// 1 - exp(-x) for x >= 0, using the two-term series x(1 - x/2) below 1e-8
/// and expm1 elsewhere.
double one_minus_exp_neg(double x);

/// F(s) = s / (1 - e^{-s}), extended by continuity with F(0) = 1.
double f_ratio(double s);

/// Derivative F'(s).
double f_ratio_derivative(double s);

}  // namespace spdest
