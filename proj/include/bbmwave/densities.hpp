#pragma once

#include "bbmwave/model.hpp"

namespace bbmwave {

// Truncation control for the eigenfunction expansions. num_terms caps the
// series length; evaluation stops as soon as the rigorously bounded tail
// drops below abs_tol relative to the leading term, and throws regime_error
// if the cap is reached first (short times need more terms; far below the
// certified regime use the closed-form envelopes instead).
struct SpectralSeries {
    int num_terms = 64;
    double abs_tol = 1e-10;
};

// Mean particle density of the free process started from one particle at x:
// (2 pi t)^{-1/2} exp(rho x - rho y - (y-x)^2/2t - rho^2 t/2
//                     + beta(y+x)t/2 + beta^2 t^3/24).
double free_density(const ModelParams& params, double t, double x, double y);

// Its y-integral: exp(beta x t + beta^2 t^3/6 - beta rho t^2/2), the
// expected population size at time t.
double free_mass(const ModelParams& params, double t, double x);

// Transition density of driftless Brownian motion on (0, infinity) killed
// at 0 and additionally at rate beta * position (an eigenfunction series
// over the Airy zeros).
double killed_bm_density(const ModelParams& params, double t, double x,
                         double y, const SpectralSeries& series = {});

// Mean density of the branching process with particles absorbed at the
// level L_A, for x, y < L_A.
double killed_density(const ModelParams& params, double A, double t,
                      double x, double y, const SpectralSeries& series = {});

// Rate at which particles are absorbed at L_A at time t, starting from one
// particle at x < L_A. Term-by-term boundary derivative of the killed
// density series; tests validate it against a finite difference.
double hit_rate(const ModelParams& params, double A, double t, double x,
                const SpectralSeries& series = {});

// Expected number of absorptions at L_A during [u, v].
double expected_hits(const ModelParams& params, double A, double u, double v,
                     double x, const SpectralSeries& series = {});

// Closed-form upper envelopes for the killed density at a level ell, valid
// for every t > 0 (the series is not). The first bounds the branching rate
// by beta*ell and ignores the barrier otherwise; the second keeps the
// barrier via the reflection principle and is sharper near it.
double smalltime_bound(const ModelParams& params, double ell, double t,
                       double x, double y);
double reflection_bound(const ModelParams& params, double ell, double t,
                        double x, double y);

// Leading-order bulk shape of the free density near t = rho/beta,
// x = rho^2/2 beta: a Gaussian profile in y with variance rho/beta.
double bulk_gaussian_approx(const ModelParams& params, double t, double x,
                            double y);

// Magnitudes of the four exponent terms bulk_gaussian_approx drops; all
// should be well below 1 for the approximation to be meaningful.
struct BulkDiagnostics {
    double err_sy;         // s^2 beta^2 |y| / rho
    double err_sy2;        // s beta^2 y^2 / rho^2
    double err_wy;         // beta |w y| / rho
    double err_expansion;  // s^4 beta^3 / (8 rho): next dropped order
};
BulkDiagnostics bulk_gaussian_diagnostics(const ModelParams& params, double t,
                                          double x, double y);

}  // namespace bbmwave
