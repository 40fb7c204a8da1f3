#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "bbmwave/engine.hpp"
#include "bbmwave/model.hpp"
#include "bbmwave/population.hpp"

namespace bbmwave {

struct WeightedAtom {
    double location = 0.0;
    double weight = 0.0;
};

// Finite weighted point measure. Atoms carry raw (unnormalized) weights;
// total_weight is their sum, so weight / total_weight is the probability
// mass of an atom. An empty population is encoded as a unit atom at zero.
struct EmpiricalMeasure {
    std::vector<WeightedAtom> atoms;
    double total_weight = 0.0;
};

// Population summary at a fixed time: particle count, exponential weight
// y = sum e^{rho x_i}, and one front-weight z = sum_i z_weight(A, x_i) per
// requested barrier offset. Extremes are +/-infinity for an empty state.
struct SummarySnapshot {
    double time = 0.0;
    std::uint64_t n = 0;
    double y = 0.0;
    std::vector<double> z;
    double min_position = std::numeric_limits<double>::infinity();
    double max_position = -std::numeric_limits<double>::infinity();
};

SummarySnapshot summary(const PopulationState& state, const ModelParams& params,
                        const std::vector<double>& offsets);

// Bulk rescaling: unit atoms at x_i sqrt(beta / rho), total weight n.
// For large populations at late times this approaches a standard normal.
EmpiricalMeasure bulk_measure(const PopulationState& state,
                              const ModelParams& params);

// Front rescaling: atoms at (2 beta)^{1/3} (L - x_i) with weights e^{rho x_i},
// total weight y. For large populations this approaches the Airy edge law.
// Requires beta > 0.
EmpiricalMeasure edge_measure(const PopulationState& state,
                              const ModelParams& params);

enum class Reference { std_normal, airy_edge };
enum class Metric { ks, wasserstein1 };

// Distance between the normalized measure and a reference law. ks is the
// exact sup-distance of the step CDF to the reference CDF; wasserstein1 is
// the integral of |F_emp - F_ref| over the line. The measure must have at
// least one atom and positive total weight.
double distance(const EmpiricalMeasure& measure, Reference reference,
                Metric metric);

// Expected particle count of a population whose front weight at offset 0 is
// z0, namely z0 e^{-rho^3 / (3 beta)} / Ai'(gamma_1)^2. Linear in z0.
// Requires z0 >= 0 and beta > 0.
double predicted_population(double z0, const ModelParams& params);

// sum_i e^{rho x_i} phi(x_i) over particles strictly below L_A.
double weighted_functional(const PopulationState& state,
                           const ModelParams& params, double A,
                           const std::function<double(double)>& phi);

// One row per snapshot time: ensemble mean and standard error of the front
// weight z at offset A, the closed-form target e^{-A beta t / rho} z(A, x0),
// and the studentized deviation z_score = (mean - target) / se.
struct MartingaleRow {
    double time = 0.0;
    double mean = 0.0;
    double se = 0.0;
    double target = 0.0;
    double z_score = 0.0;
    double variance = 0.0;
};

// Checks the front-weight martingale on an ensemble produced by
// run_replicas(plan, ...). The plan must start from a point and use the
// fixed barrier at the same offset A; anything else is a usage error.
std::vector<MartingaleRow> martingale_test(
    const std::vector<ReplicaResult>& ensemble, const ReplicaPlan& plan,
    double A);

}  // namespace bbmwave
