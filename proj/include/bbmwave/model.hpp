#pragma once

#include <functional>
#include <utility>

#include "bbmwave/population.hpp"

namespace bbmwave {

// Birth/death rates as functions of position. The default profile keeps
// d = 1 and b = 1 + beta*x wherever that b is nonnegative, and switches to
// b = 0, d = -beta*x below x = -1/beta, so b - d = beta*x holds everywhere.
struct RateProfile {
    enum class Kind { default_linear, custom };

    Kind kind = Kind::default_linear;
    std::function<double(double)> birth;  // custom only
    std::function<double(double)> death;  // custom only

    static RateProfile default_linear() { return {}; }
    static RateProfile custom(std::function<double(double)> b,
                              std::function<double(double)> d) {
        RateProfile p;
        p.kind = Kind::custom;
        p.birth = std::move(b);
        p.death = std::move(d);
        return p;
    }
};

// rho: drift magnitude (particles drift at -rho). beta: slope of the net
// rate b - d. delta: floor for death rates and cap parameter for birth
// rates (d >= delta everywhere, b <= 1/delta left of 1/beta).
//
// beta = 0 is admitted as a critical-case diagnostic; quantities that live
// on the Airy edge (level, windows, z_weight, ...) reject it.
struct ModelParams {
    double rho = 0.5;
    double beta = 0.01;
    double delta = 0.5;
    RateProfile profile = RateProfile::default_linear();
};

// Checks parameter ranges and, on a 10^3-point grid spanning
// [-2/beta, 2/beta], that the profile satisfies b - d = beta*x, b,d >= 0,
// d >= delta, and b <= 1/delta for x <= 1/beta. Throws config_error.
void validate(const ModelParams& params);

// (b(x), d(x))
std::pair<double, double> rates(const ModelParams& params, double x);

// L_A = rho^2/(2 beta) - (2 beta)^{-1/3} gamma_1 - A/rho
double level(const ModelParams& params, double A);

struct Barrier {
    enum class Kind { none, fixed, moving };

    Kind kind = Kind::none;
    double A = 0.0;

    static Barrier none() { return {}; }
    static Barrier fixed(double A) { return {Kind::fixed, A}; }
    static Barrier moving(double A) { return {Kind::moving, A}; }
};

// Absorbing level at elapsed time s: +infinity for none, L_A for fixed,
// and L_A - (2A/rho)(e^{2 beta s / rho} - 1) for moving. s < 0 is an error.
double barrier_level(const Barrier& barrier, const ModelParams& params,
                     double s);

// Spatial split points below L_A used by the front analysis:
// l = beta t^2/33, K = L_A - l/2, H = L_A - beta t^2/9, so H <= K <= L_A.
struct Windows {
    double l;
    double K;
    double H;
};
Windows windows(const ModelParams& params, double A, double t);

// e^{rho x} Ai((2 beta)^{1/3}(L_A - x) + gamma_1) for x < L_A, else 0.
// Positive on (-inf, L_A); the summed weight is the mean-one martingale the
// stats module tracks.
double z_weight(const ModelParams& params, double A, double x);

// log of z_weight; -infinity at and above L_A. Stays finite far to the
// left where z_weight itself underflows.
double log_z_weight(const ModelParams& params, double A, double x);

// Scaled diagnostics for how far the configuration sits into the regime
// where the edge description is quantitative. Advisory only.
struct AssumptionReport {
    double rho3_over_beta = 0.0;
    double rho = 0.0;
    double z_statistic = 0.0;  // rho^3 beta^{-1/3} e^{-rho L} Z(0)
    double y_statistic = 0.0;  // rho^2 e^{-rho L} Y(0)
    bool asymptotic_ok = false;  // rho^3/beta >= 10
    bool degenerate = false;     // empty population
};
AssumptionReport assumption_report(const ModelParams& params,
                                   const PopulationState& state);

}  // namespace bbmwave
