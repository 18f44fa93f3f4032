#pragma once

namespace gringotts {

/// Standard normal CDF Φ(z).
double standard_normal_cdf(double z);

/// Φ⁻¹(u) for u in (0,1); u = 0 or 1 (or outside) is a DomainError.
double standard_normal_inverse_cdf(double u);

/// Regularized incomplete beta I_x(a, b) for x in [0,1], a, b > 0.
double beta_cdf(double x, double a, double b);

/// Inverse of beta_cdf in x, accurate to 1e-12 absolute.
double beta_inverse_cdf(double u, double a, double b);

}  // namespace gringotts
