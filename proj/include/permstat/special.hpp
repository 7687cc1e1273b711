#pragma once

// Distribution special functions, implemented in-repo so the oracle layer has
// no external numeric dependencies: regularized incomplete beta (Lentz
// continued fraction), Student-t / F CDFs built on it, and the inverse normal
// (rational approximation refined by one Newton step).

namespace permstat::special {

// Regularized incomplete beta I_x(a, b). `x` in [0, 1], a, b > 0.
double incomplete_beta(double a, double b, double x);

double norm_cdf(double z);
double norm_pdf(double z);

// Inverse standard normal CDF; p in (0, 1). Antisymmetric about p = 0.5.
double norm_inv(double p);

// Student-t CDF, df > 0. Absolute accuracy <= 1e-10 for |t| <= 40, df <= 1e6.
double t_cdf(double t, double df);

// F CDF, df1, df2 > 0, x >= 0.
double f_cdf(double x, double df1, double df2);

}  // namespace permstat::special
