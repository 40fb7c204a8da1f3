#pragma once

// Airy kernel: Ai, Ai', zeros, the orthogonality integrals of the shifted
// system {Ai(z + gamma_k)}, and the edge profile law built from the first
// zero.  Everything downstream (spectral densities, edge statistics) sits on
// these routines, so they are written for absolute accuracy ~1e-10 on
// [-20, 20] and honest relative accuracy in the decaying tail.

namespace bbmwave {

// Global bound max_x |Ai(x)| = Ai at its first stationary point, rounded up.
// Used by the spectral-series tail certificates.
inline constexpr double ai_max_abs = 0.5356566561;

double ai(double x);
double ai_prime(double x);

// log Ai(x) for x above the first zero (Ai > 0 there); evaluates the
// asymptotic form directly for large x so callers can stay in log domain
// where exp(.) would underflow.
double log_ai(double x);

// k-th zero gamma_k < 0 of Ai (k >= 1) and Ai'(gamma_k).  Cached, thread-safe.
double airy_zero(int k);
double airy_zero_prime(int k);

// int_0^inf Ai(z + gamma_j) Ai(z + gamma_k) dz; equals Ai'(gamma_j)^2 on the
// diagonal and 0 off it.
double airy_orth(int j, int k);

// Edge profile law: density h(y) = Ai(y + gamma_1) / edge_norm on y > 0.
double edge_norm();
double edge_density(double y);
double edge_cdf(double y);
double edge_quantile(double p);  // p in (0,1)

// exp(-r^3/3) * int_0^inf exp(r (gamma_1 + z)) Ai(gamma_1 + z) dz for
// r in (0, 8]; approaches 1 from above as r grows.  The integrand is
// evaluated in log domain past the Maclaurin range, so no overflow.
double laplace_growth(double r);

}  // namespace bbmwave
