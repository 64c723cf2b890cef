#pragma once

namespace quakenum {

// log Gamma(x) for finite x > 0. Lanczos approximation (g = 7, 9 terms);
// absolute error on the log scale is a few 1e-15 plus rounding of the leading
// terms, comfortably inside 1e-13 * max(1, |log Gamma(x)|) over [1e-3, 1e7].
// Self-contained so that concurrent callers never touch the C library's
// signgam global. Throws std::domain_error for x <= 0 or non-finite x.
double log_gamma(double x);

// log Gamma(a + k) - log Gamma(a) for a > 0, k >= 0. Uses the direct
// difference for moderate a and switches to a differenced Stirling expansion
// for large a, where the naive subtraction cancels most significant digits.
double log_gamma_ratio(double a, double k);

// Standard normal CDF Phi(x) and survival function 1 - Phi(x), both computed
// through erfc so the far tails keep full relative precision.
double normal_cdf(double x);
double normal_sf(double x);

// Upper tail of the chi-square law with one degree of freedom:
// P(X > x) = 2 * (1 - Phi(sqrt(x))) = erfc(sqrt(x / 2)).
// Throws std::domain_error for x < 0 or non-finite x.
double chi2_tail_1dof(double x);

}  // namespace quakenum
