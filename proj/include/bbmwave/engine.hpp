#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "bbmwave/errors.hpp"
#include "bbmwave/model.hpp"
#include "bbmwave/population.hpp"
#include "bbmwave/rng.hpp"

namespace bbmwave {

// capacity_error that carries the scene at the moment the budget tripped,
// so a caller can checkpoint or size a retry from the partial run.
struct capacity_abort : capacity_error {
    capacity_abort(const std::string& what, std::uint64_t budget,
                   PopulationState state_, EventLog log_)
        : capacity_error(what, budget, state_.size(), state_.time),
          state(std::move(state_)), log(std::move(log_)) {}
    PopulationState state;
    EventLog log;
};

// One particle at x, clock at zero.
PopulationState init_point(double x);

// ceil(e^{rho u} / (u rho^3)) particles at level(params, 0) - u: the count
// that makes the edge statistic of the cloud order one. The window
// 1/rho < u <= beta^{-1/3} keeps the cloud where the edge profile applies;
// it is advisory (assumption_report flags it), not enforced here.
PopulationState init_edge_cloud(
    const ModelParams& params, double u,
    std::uint64_t max_particles = StepPolicy{}.max_particles);

// Advances the population to the horizon with an adaptive Euler step.
// Per step: every particle moves by -rho*dt + sqrt(dt)*normal, is absorbed
// if the new position reaches the barrier, then branches or dies with
// probabilities b(x)*dt and d(x)*dt drawn from one uniform (dt keeps
// (b+d)*dt at or below step.event_cap for every particle, so the two
// events exclude each other by construction). Assumes params already
// validated; requires horizon > state.time.
std::pair<PopulationState, EventLog> evolve(PopulationState state,
                                            const ModelParams& params,
                                            const Barrier& barrier,
                                            double horizon,
                                            const StepPolicy& step, Rng& rng);

struct SurvivalEstimate {
    double p_hat = 0.0;
    double ci_low = 0.0;   // Wilson 95%
    double ci_high = 1.0;
    std::uint64_t replicas = 0;
};

// Fraction of replicas from init_point(x) still populated at the horizon,
// run barrier-free on substreams (master_seed, replica). x must be > 0.
SurvivalEstimate survival_probe(const ModelParams& params, double x,
                                double horizon, std::uint64_t replicas,
                                std::uint64_t master_seed,
                                const StepPolicy& step = {});

// Horizon at which the survival bound 2*beta*x/delta applies to the probe:
// ln(1/d)/d divided by beta*x. d is free below the critical branching
// tradeoff; 0.25 keeps the bound comfortably inside (0, 1).
double survival_horizon(const ModelParams& params, double x,
                        double d = 0.25);

struct ReplicaPlan {
    ModelParams params;
    enum class Init { point, edge_cloud } init = Init::point;
    double init_x = 0.0;  // starting position for Init::point
    double edge_u = 4.0;  // cloud depth below the level for Init::edge_cloud
    Barrier barrier = Barrier::none();
    double horizon = 1.0;
    std::vector<double> snapshot_times;  // nondecreasing, within [0, horizon]
    std::uint64_t replicas = 1;
    StepPolicy step;
};

struct ReplicaResult {
    std::uint64_t replica = 0;
    std::vector<PopulationState> snapshots;  // one per plan snapshot time
    EventLog log;                            // cumulative over the replica
};

// Runs the plan's replicas on substreams (master_seed, replica) and hands
// each result to sink in replica order, so aggregation is deterministic no
// matter how many worker threads BBMWAVE_THREADS grants. Errors from a
// replica are rethrown tagged with its id, lowest id first.
void run_replicas(const ReplicaPlan& plan, std::uint64_t master_seed,
                  const std::function<void(ReplicaResult&&)>& sink);

// Convenience collector for small ensembles.
std::vector<ReplicaResult> run_replicas(const ReplicaPlan& plan,
                                        std::uint64_t master_seed);

}  // namespace bbmwave
