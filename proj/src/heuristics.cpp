#include "bbmwave/heuristics.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "bbmwave/airy.hpp"
#include "bbmwave/errors.hpp"

namespace bbmwave {

namespace {

double plateau_of(const ModelParams& params) {
    return params.rho * params.rho / (2.0 * params.beta);
}

void require_supercritical(const ModelParams& params, const char* who) {
    validate(params);
    if (!(params.beta > 0.0))
        throw config_error(std::string(who) + ": requires beta > 0");
}

// log N as a function of rho for fixed beta; kept in log domain because the
// population size spans hundreds of e-folds across the search interval.
double log_pop(double rho, double beta) {
    return std::log(beta) / 3.0 - 3.0 * std::log(rho) +
           rho * rho * rho / (6.0 * beta) -
           rho * airy_zero(1) / std::cbrt(2.0 * beta);
}

// d log N / d rho; negative for small rho, then positive: log_pop has a
// single interior minimum.
double log_pop_slope(double rho, double beta) {
    return -3.0 / rho + rho * rho / (2.0 * beta) -
           airy_zero(1) / std::cbrt(2.0 * beta);
}

}  // namespace

double TrajectoryCurve::value(double u) const {
    if (u <= t_z) return plateau;
    const double s = u - t_z;
    return plateau - 0.5 * beta * s * s;
}

std::vector<std::pair<double, double>> TrajectoryCurve::sample(
    std::size_t n) const {
    if (n == 0) throw config_error("TrajectoryCurve::sample: n must be >= 1");
    std::vector<std::pair<double, double>> out;
    out.reserve(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        const double u = horizon * (static_cast<double>(i) / n);
        out.emplace_back(u, value(u));
    }
    return out;
}

TrajectoryCurve ld_trajectory(const ModelParams& params, double horizon,
                              double z, bool extrapolate) {
    require_supercritical(params, "ld_trajectory");
    if (!(horizon >= 0.0) || !std::isfinite(horizon))
        throw config_error("ld_trajectory: horizon must be finite and >= 0");
    const double top = plateau_of(params);
    if (!std::isfinite(z) || z > top)
        throw config_error("ld_trajectory: target must not exceed the "
                           "plateau rho^2 / (2 beta)");
    TrajectoryCurve curve;
    curve.horizon = horizon;
    curve.plateau = top;
    curve.terminal = z;
    curve.beta = params.beta;
    curve.t_z = horizon - std::sqrt(2.0 * (top - z) / params.beta);
    curve.in_regime = curve.t_z >= 0.0;
    if (!curve.in_regime && !extrapolate)
        throw config_error("ld_trajectory: target is out of reach within "
                           "the horizon; pass extrapolate to build the "
                           "curve anyway");
    return curve;
}

double ld_exponent(const ModelParams& params, double z) {
    require_supercritical(params, "ld_exponent");
    const double top = plateau_of(params);
    if (!std::isfinite(z) || z > top)
        throw config_error("ld_exponent: target must not exceed the "
                           "plateau rho^2 / (2 beta)");
    const double rho = params.rho;
    const double beta = params.beta;
    return rho * rho * rho / (2.0 * beta) - rho * z -
           (2.0 * std::sqrt(2.0 * beta) / 3.0) * std::pow(top - z, 1.5);
}

double ld_exponent_gauss(const ModelParams& params, double z) {
    require_supercritical(params, "ld_exponent_gauss");
    if (!std::isfinite(z))
        throw config_error("ld_exponent_gauss: target must be finite");
    const double rho = params.rho;
    const double beta = params.beta;
    return rho * rho * rho / (6.0 * beta) - beta * z * z / (2.0 * rho);
}

DiscreteCorrespondence discrete_map(double N, double mu, double s) {
    if (!(N > 1.0) || !std::isfinite(N))
        throw config_error("discrete_map: N must be finite and > 1");
    if (!(mu > 0.0) || !std::isfinite(mu))
        throw config_error("discrete_map: mu must be finite and > 0");
    if (!(s > 0.0) || !std::isfinite(s))
        throw config_error("discrete_map: s must be finite and > 0");

    DiscreteCorrespondence out;
    out.beta = s * std::sqrt(mu);
    out.selection_index = N * N * N * mu * s * s;

    const double beta = out.beta;
    const double target = std::log(N);

    // stationary point of log_pop: the rising branch starts here
    double lo = 1e-8, hi = 1e3;
    if (log_pop_slope(lo, beta) >= 0.0 || log_pop_slope(hi, beta) <= 0.0)
        throw numeric_error("discrete_map: slope bracket failed; beta far "
                            "outside the supported range");
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (log_pop_slope(mid, beta) < 0.0 ? lo : hi) = mid;
    }
    const double rho_floor = 0.5 * (lo + hi);

    const double floor_val = log_pop(rho_floor, beta);
    if (target < floor_val) {
        char msg[160];
        std::snprintf(msg, sizeof msg,
                      "discrete_map: N = %.6g is below the branch minimum "
                      "%.6g attained at rho = %.6g",
                      N, std::exp(floor_val), rho_floor);
        throw numeric_error(msg);
    }
    if (log_pop(1e3, beta) < target)
        throw numeric_error("discrete_map: no root at or below rho = 1e3");

    // guard the monotonicity assumption: a second sign change of the
    // residual on the rising branch would mean the root is not unique
    int crossings = 0;
    double prev = floor_val - target;
    for (int i = 1; i <= 64; ++i) {
        const double r =
            rho_floor * std::pow(1e3 / rho_floor, i / 64.0);
        const double cur = log_pop(r, beta) - target;
        if ((prev < 0.0) != (cur < 0.0)) ++crossings;
        prev = cur;
    }
    if (crossings > 1)
        throw numeric_error("discrete_map: multiple roots detected on the "
                            "rising branch");

    lo = rho_floor;
    hi = 1e3;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (std::abs(log_pop(mid, beta) - target) <= 1e-12) {
            lo = hi = mid;
            break;
        }
        (log_pop(mid, beta) < target ? lo : hi) = mid;
    }
    out.rho = 0.5 * (lo + hi);
    return out;
}

}  // namespace bbmwave
