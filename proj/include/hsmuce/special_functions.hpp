#ifndef HSMUCE_SPECIAL_FUNCTIONS_HPP_
#define HSMUCE_SPECIAL_FUNCTIONS_HPP_

namespace hsmuce {

// Distribution functions backing the multiscale test. Only what the method
// needs: the central F distribution with (1, c) degrees of freedom drives the
// local tests, the gaussian and chi-squared CDFs back oracles and deviation
// bounds. All functions are pure and thread-safe.

// Regularized incomplete beta I_x(a, b), evaluated by the Lentz continued
// fraction with the usual symmetry switch. Relative accuracy ~1e-14.
double incomplete_beta_reg(double a, double b, double x);

// Regularized lower incomplete gamma P(a, x): series for x < a + 1, continued
// fraction otherwise.
double incomplete_gamma_reg(double a, double x);

// P(F(1, c) <= x). Throws std::domain_error for x < 0 or c < 1.
double f_cdf(double x, int c);

// Inverse of f_cdf in x: smallest q with f_cdf(q, c) = p. Bracket expansion,
// then Newton with bisection safeguard; absolute tolerance 1e-11 on p.
// Throws std::domain_error for p outside [0, 1).
double f_quantile(double p, int c);

// Standard gaussian CDF.
double gaussian_cdf(double x);

// P(chi^2_k <= x). Throws std::domain_error for x < 0 or k < 1.
double chi2_cdf(double x, int k);

}  // namespace hsmuce

#endif  // HSMUCE_SPECIAL_FUNCTIONS_HPP_
