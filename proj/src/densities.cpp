#include "bbmwave/densities.hpp"

#include <cmath>
#include <string>

#include "bbmwave/airy.hpp"
#include "bbmwave/errors.hpp"
#include "bbmwave/quad.hpp"

namespace bbmwave {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

double require_beta(const ModelParams& params, const char* who) {
    if (!(params.beta > 0.0))
        throw config_error(std::string(who) + ": beta must be positive");
    return std::cbrt(2.0 * params.beta);
}

// Upper bound on sum_{k>K} exp(cp * (gamma_k - shift)), cp > 0, using the
// zero minorant -gamma_k >= (3 pi (4k-1)/8)^{2/3} (checked in the airy
// tests up to k = 200 and asymptotically exact): the k = K+1 term plus an
// integral comparison, with erfc(s) <= e^{-s^2}/(s sqrt(pi)) keeping the
// incomplete-gamma piece an upper bound. The shift is folded into the one
// exponential so extreme times underflow cleanly instead of forming
// 0 * infinity.
double tail_exp_sum(double cp, int K, double shift) {
    const double a = cp * std::pow(3.0 * kPi / 8.0, 2.0 / 3.0);
    const double z = a * std::pow(4.0 * K + 3.0, 2.0 / 3.0);
    const double head = 1.0 + 0.375 * std::pow(a, -1.5) *
                                  (std::sqrt(z) + 0.5 / std::sqrt(z));
    return std::exp(-cp * shift - z) * head;
}

// Shared evaluator for the Airy eigen-expansions. Terms are normalized by
// the k = 1 exponential so the running sum is O(1); weight(k) supplies the
// Airy factor of term k and weight_cap(j) a bound on |weight(k)| valid for
// all k >= j. Returns the normalized sum once the tail certificate clears
// abs_tol * |leading term|.
template <class Weight, class WeightCap>
double spectral_sum(double cp, double t, const SpectralSeries& series,
                    const char* who, Weight weight, WeightCap weight_cap) {
    if (series.num_terms < 1 || !(series.abs_tol > 0.0))
        throw config_error(std::string(who) +
                           ": series needs num_terms >= 1 and abs_tol > 0");
    if (!(cp > 0.0))
        throw regime_error(std::string(who) +
                               ": series undefined at t <= 0",
                           t, 0);
    const double g1 = airy_zero(1);
    double sum = 0.0;
    double target = 0.0;
    for (int k = 1; k <= series.num_terms; ++k) {
        const double term = std::exp(cp * (airy_zero(k) - g1)) * weight(k);
        sum += term;
        if (k == 1) target = series.abs_tol * std::fabs(term);
        const double tail =
            weight_cap(k + 1) * tail_exp_sum(cp, k, g1);
        if (tail <= target) return sum;
    }
    throw regime_error(
        std::string(who) + ": tail not certified within " +
            std::to_string(series.num_terms) +
            " terms; t is below the series regime (raise num_terms or use "
            "the closed-form envelopes)",
        t, series.num_terms);
}

double pair_weight(double ax, double ay, int k) {
    const double d = airy_zero_prime(k);
    return ai(ax + airy_zero(k)) * ai(ay + airy_zero(k)) / (d * d);
}

double pair_weight_cap(int j) {
    const double d = airy_zero_prime(j);
    return ai_max_abs * ai_max_abs / (d * d);
}

}  // namespace

double free_density(const ModelParams& params, double t, double x, double y) {
    if (!(t > 0.0))
        throw config_error("free_density: t must be positive");
    const double b = params.beta, r = params.rho;
    const double e = r * x - r * y - (y - x) * (y - x) / (2.0 * t) -
                     r * r * t / 2.0 + b * (y + x) * t / 2.0 +
                     b * b * t * t * t / 24.0;
    return std::exp(e) / std::sqrt(2.0 * kPi * t);
}

double free_mass(const ModelParams& params, double t, double x) {
    if (t < 0.0) throw config_error("free_mass: t must be nonnegative");
    const double b = params.beta, r = params.rho;
    return std::exp(b * x * t + b * b * t * t * t / 6.0 -
                    b * r * t * t / 2.0);
}

double killed_bm_density(const ModelParams& params, double t, double x,
                         double y, const SpectralSeries& series) {
    const double c = require_beta(params, "killed_bm_density");
    if (!(x >= 0.0 && y >= 0.0))
        throw config_error("killed_bm_density: x and y must be nonnegative");
    if (x == 0.0 || y == 0.0) return 0.0;  // absorbed boundary, by continuity
    const double cp = params.beta / c * t;  // beta (2 beta)^{-1/3} t
    const double ax = c * x, ay = c * y;
    const double sum = spectral_sum(
        cp, t, series, "killed_bm_density",
        [&](int k) { return pair_weight(ax, ay, k); }, pair_weight_cap);
    return c * std::exp(cp * airy_zero(1)) * sum;
}

double killed_density(const ModelParams& params, double A, double t, double x,
                      double y, const SpectralSeries& series) {
    const double c = require_beta(params, "killed_density");
    const double ell = level(params, A);
    if (!(x <= ell && y <= ell))
        throw config_error("killed_density: x and y must not exceed L_A");
    if (x == ell || y == ell) return 0.0;  // absorbed boundary, by continuity
    const double cp = params.beta / c * t;
    const double ax = c * (ell - x), ay = c * (ell - y);
    const double sum = spectral_sum(
        cp, t, series, "killed_density",
        [&](int k) { return pair_weight(ax, ay, k); }, pair_weight_cap);
    // all exponentials of the k = 1 term composed once, in the exponent
    const double e1 = (params.beta * (ell + airy_zero(1) / c) -
                       params.rho * params.rho / 2.0) *
                          t +
                      params.rho * (x - y);
    return c * std::exp(e1) * sum;
}

double hit_rate(const ModelParams& params, double A, double t, double x,
                const SpectralSeries& series) {
    const double c = require_beta(params, "hit_rate");
    const double ell = level(params, A);
    if (!(x < ell)) throw config_error("hit_rate: x must lie below L_A");
    const double cp = params.beta / c * t;
    const double ax = c * (ell - x);
    const double sum = spectral_sum(
        cp, t, series, "hit_rate",
        [&](int k) { return ai(ax + airy_zero(k)) / airy_zero_prime(k); },
        [](int j) { return ai_max_abs / std::fabs(airy_zero_prime(j)); });
    const double e1 = (params.beta * (ell + airy_zero(1) / c) -
                       params.rho * params.rho / 2.0) *
                          t +
                      params.rho * (x - ell);
    return 0.5 * c * c * std::exp(e1) * sum;
}

double expected_hits(const ModelParams& params, double A, double u, double v,
                     double x, const SpectralSeries& series) {
    if (!(u >= 0.0) || u > v)
        throw config_error("expected_hits: need 0 <= u <= v");
    if (u == v) return 0.0;
    auto rate = [&](double t) { return hit_rate(params, A, t, x, series); };
    // scale the tolerance to the integral's own size; the series noise
    // floor keeps the subdivision honest
    const double probe = std::fmax(
        std::fmax(rate(u), rate(v)), rate(0.5 * (u + v)));
    const double tol = std::fmax(1e-14, 1e-8 * probe * (v - u));
    return integrate(rate, u, v, tol, 20'000'000, 1e-9);
}

double smalltime_bound(const ModelParams& params, double ell, double t,
                       double x, double y) {
    if (!(t > 0.0))
        throw config_error("smalltime_bound: t must be positive");
    const double r = params.rho;
    const double e = r * x - r * y - (y - x) * (y - x) / (2.0 * t) -
                     r * r * t / 2.0 + params.beta * ell * t;
    return std::exp(e) / std::sqrt(2.0 * kPi * t);
}

double reflection_bound(const ModelParams& params, double ell, double t,
                        double x, double y) {
    if (!(t > 0.0))
        throw config_error("reflection_bound: t must be positive");
    const double r = params.rho;
    const double e = r * x - r * y - (y - x) * (y - x) / (2.0 * t) -
                     r * r * t / 2.0 + params.beta * ell * t;
    return std::sqrt(2.0 / kPi) * (ell - x) * (ell - y) /
           (t * std::sqrt(t)) * std::exp(e);
}

double bulk_gaussian_approx(const ModelParams& params, double t, double x,
                            double y) {
    require_beta(params, "bulk_gaussian_approx");
    const double b = params.beta, r = params.rho;
    const double s = r / b - t;
    const double w = r * r / (2.0 * b) - x;
    const double e = r * x - r * r * r / (3.0 * b) - b * y * y / (2.0 * r) -
                     b * b * s * s * s / 6.0 + b * w * s;
    return std::sqrt(b / (2.0 * kPi * r)) * std::exp(e);
}

BulkDiagnostics bulk_gaussian_diagnostics(const ModelParams& params, double t,
                                          double x, double y) {
    require_beta(params, "bulk_gaussian_diagnostics");
    const double b = params.beta, r = params.rho;
    const double s = r / b - t;
    const double w = r * r / (2.0 * b) - x;
    BulkDiagnostics d;
    d.err_sy = s * s * b * b * std::fabs(y) / r;
    d.err_sy2 = std::fabs(s) * b * b * y * y / (r * r);
    d.err_wy = b * std::fabs(w * y) / r;
    d.err_expansion = std::pow(s * b / r, 4.0) * r * r * r / (8.0 * b);
    return d;
}

}  // namespace bbmwave
