#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "bbmwave/model.hpp"

namespace bbmwave {

// Optimal trajectory of particles found near a target position at the
// horizon: flat at the plateau rho^2 / (2 beta) until t_z, then a downward
// parabola with curvature -beta reaching the target at the horizon.
struct TrajectoryCurve {
    double t_z = 0.0;
    double horizon = 0.0;
    double plateau = 0.0;
    double terminal = 0.0;
    double beta = 0.0;
    // false when t_z < 0: the target is too far out to be reached within
    // the horizon and the curve is an extrapolation
    bool in_regime = true;

    double value(double u) const;
    // n + 1 evenly spaced (u, value(u)) points on [0, horizon]
    std::vector<std::pair<double, double>> sample(std::size_t n) const;
};

// Builds the trajectory ending at z. Requires z at or below the plateau and
// beta > 0. A start past the horizon (t_z < 0) is an error unless the
// caller opts into extrapolation, in which case in_regime is false.
TrajectoryCurve ld_trajectory(const ModelParams& params, double horizon,
                              double z, bool extrapolate = false);

// Log of the expected number of particles near z at a late time:
// rho^3/(2 beta) - rho z - (2 sqrt(2 beta)/3) (rho^2/(2 beta) - z)^{3/2}.
// Equals the action integral of the trajectory ending at z.
double ld_exponent(const ModelParams& params, double z);

// Quadratic expansion of ld_exponent around its maximum at z = 0:
// rho^3/(6 beta) - beta z^2 / (2 rho). Even in z.
double ld_exponent_gauss(const ModelParams& params, double z);

// Diffusion parameters matched to a discrete population of size N with
// mutation rate mu and selection advantage s per mutation.
struct DiscreteCorrespondence {
    double beta = 0.0;             // s sqrt(mu)
    double rho = 0.0;              // root of the population-size relation
    double selection_index = 0.0;  // N^3 mu s^2
};

// Inverts N = (beta^{1/3} / rho^3) exp(rho^3/(6 beta) - rho (2 beta)^{-1/3}
// gamma_1) for rho. The right side falls and then rises in rho; the map is
// solved on the rising branch, where the strong-selection regime lives.
// N below the branch minimum has no solution and raises a numeric_error
// carrying the minimum; multiple sign changes on the branch would too.
DiscreteCorrespondence discrete_map(double N, double mu, double s);

}  // namespace bbmwave
