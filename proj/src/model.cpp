#include "bbmwave/model.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "bbmwave/airy.hpp"
#include "bbmwave/errors.hpp"

namespace bbmwave {

std::pair<double, double> rates(const ModelParams& params, double x) {
    if (params.profile.kind == RateProfile::Kind::custom)
        return {params.profile.birth(x), params.profile.death(x)};
    // default: unit death rate until the birth rate would go negative,
    // then all the slope moves into the death rate
    if (params.beta == 0.0 || x >= -1.0 / params.beta)
        return {1.0 + params.beta * x, 1.0};
    return {0.0, -params.beta * x};
}

void validate(const ModelParams& params) {
    if (!(params.rho > 0.0) || !std::isfinite(params.rho))
        throw config_error("model: rho must be positive and finite");
    if (!(params.beta >= 0.0) || !std::isfinite(params.beta))
        throw config_error("model: beta must be nonnegative and finite");
    if (!(params.delta > 0.0 && params.delta < 1.0))
        throw config_error("model: delta must lie in (0,1)");
    if (params.profile.kind == RateProfile::Kind::custom &&
        (!params.profile.birth || !params.profile.death))
        throw config_error("model: custom profile needs birth and death");

    const double span =
        params.beta > 0.0 ? 2.0 / params.beta : 100.0;
    const double bcap = 1.0 / params.delta;
    const double bcap_until =
        params.beta > 0.0 ? 1.0 / params.beta
                          : std::numeric_limits<double>::infinity();
    const int n = 1000;
    for (int i = 0; i <= n; ++i) {
        const double x = -span + 2.0 * span * i / n;
        const auto [b, d] = rates(params, x);
        if (!std::isfinite(b) || !std::isfinite(d) || b < 0.0 || d < 0.0)
            throw config_error("model: rates must be finite and nonnegative"
                               " (x = " + std::to_string(x) + ")");
        const double scale = std::fmax(1.0, std::fabs(b) + std::fabs(d));
        if (std::fabs(b - d - params.beta * x) > 1e-12 * scale)
            throw config_error("model: profile violates b - d = beta x"
                               " (x = " + std::to_string(x) + ")");
        if (d < params.delta)
            throw config_error("model: death rate below delta"
                               " (x = " + std::to_string(x) + ")");
        if (x <= bcap_until && b > bcap * (1.0 + 1e-12))
            throw config_error("model: birth rate above 1/delta"
                               " (x = " + std::to_string(x) + ")");
    }
}

namespace {

double require_edge(const ModelParams& params, const char* who) {
    if (!(params.beta > 0.0))
        throw config_error(std::string(who) +
                           ": beta must be positive for edge quantities");
    return std::cbrt(2.0 * params.beta);
}

}  // namespace

double level(const ModelParams& params, double A) {
    const double c = require_edge(params, "level");
    return params.rho * params.rho / (2.0 * params.beta) - airy_zero(1) / c -
           A / params.rho;
}

double barrier_level(const Barrier& barrier, const ModelParams& params,
                     double s) {
    if (s < 0.0)
        throw config_error("barrier_level: s must be nonnegative");
    switch (barrier.kind) {
        case Barrier::Kind::none:
            return std::numeric_limits<double>::infinity();
        case Barrier::Kind::fixed:
            return level(params, barrier.A);
        case Barrier::Kind::moving:
            return level(params, barrier.A) -
                   2.0 * barrier.A / params.rho *
                       std::expm1(2.0 * params.beta * s / params.rho);
    }
    throw config_error("barrier_level: unknown barrier kind");
}

Windows windows(const ModelParams& params, double A, double t) {
    if (t < 0.0)
        throw config_error("windows: t must be nonnegative");
    const double La = level(params, A);
    const double l = params.beta * t * t / 33.0;
    return {l, La - 0.5 * l, La - params.beta * t * t / 9.0};
}

double z_weight(const ModelParams& params, double A, double x) {
    const double c = require_edge(params, "z_weight");
    const double La = level(params, A);
    if (x >= La) return 0.0;
    return std::exp(params.rho * x) * ai(c * (La - x) + airy_zero(1));
}

double log_z_weight(const ModelParams& params, double A, double x) {
    const double c = require_edge(params, "log_z_weight");
    const double La = level(params, A);
    if (x >= La) return -std::numeric_limits<double>::infinity();
    const double arg = c * (La - x) + airy_zero(1);
    // log_ai's asymptotic branch avoids the underflow of ai itself far
    // left of the level; nearer in, plain log of the positive value
    if (arg >= 6.0) return params.rho * x + log_ai(arg);
    return params.rho * x + std::log(ai(arg));
}

AssumptionReport assumption_report(const ModelParams& params,
                                   const PopulationState& state) {
    const double c = require_edge(params, "assumption_report");
    const double L = level(params, 0.0);
    const double g1 = airy_zero(1);

    const double rho3 = params.rho * params.rho * params.rho;
    AssumptionReport rep;
    rep.rho3_over_beta = rho3 / params.beta;
    rep.rho = params.rho;
    rep.asymptotic_ok = rep.rho3_over_beta >= 10.0;
    rep.degenerate = state.empty();

    // sums are taken with the e^{-rho L} shift already applied so a cloud
    // near the level cannot overflow
    double zsum = 0.0, ysum = 0.0;
    for (const Particle& p : state.particles) {
        const double w = std::exp(params.rho * (p.x - L));
        ysum += w;
        if (p.x < L) zsum += w * ai(c * (L - p.x) + g1);
    }
    rep.z_statistic = rho3 / std::cbrt(params.beta) * zsum;
    rep.y_statistic = params.rho * params.rho * ysum;
    return rep;
}

}  // namespace bbmwave
