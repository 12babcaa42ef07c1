#pragma once

// Scalar special functions on the positive real axis.
//
// All three functions throw std::domain_error for x <= 0 (and NaN). They are
// finite for x in (1e-300, 1e300) with one exception: trigamma behaves like
// 1/x^2 near zero and overflows to +inf below roughly 1e-154.

namespace fvi::specfun {

/// ln Gamma(x) for x > 0.
double ln_gamma(double x);

/// Digamma psi_0(x) = d/dx ln Gamma(x), x > 0.
double digamma(double x);

/// Trigamma psi_1(x) = d/dx psi_0(x), x > 0.
double trigamma(double x);

}  // namespace fvi::specfun
