#include "bbmwave/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace bbmwave {

namespace {

void merge_logs(EventLog& into, EventLog&& part) {
    into.absorptions.insert(into.absorptions.end(),
                            part.absorptions.begin(), part.absorptions.end());
    into.births += part.births;
    into.deaths += part.deaths;
    into.max_position_seen =
        std::max(into.max_position_seen, part.max_position_seen);
}

}  // namespace

PopulationState init_point(double x) {
    if (!std::isfinite(x)) throw config_error("init_point: x must be finite");
    PopulationState s;
    s.particles.push_back({x, 0, kNoParent});
    s.next_id = 1;
    return s;
}

PopulationState init_edge_cloud(const ModelParams& params, double u,
                                std::uint64_t max_particles) {
    validate(params);
    if (!(u > 0.0) || !std::isfinite(u))
        throw config_error("init_edge_cloud: u must be positive");
    const double ell = level(params, 0.0);
    const double count_real =
        std::ceil(std::exp(params.rho * u) / (u * params.rho * params.rho *
                                              params.rho));
    if (!(count_real >= 1.0))
        throw config_error("init_edge_cloud: degenerate particle count");
    if (count_real > static_cast<double>(max_particles)) {
        char need[32];
        std::snprintf(need, sizeof need, "%.0f", count_real);
        PopulationState empty;
        throw capacity_abort("init_edge_cloud: cloud needs " +
                                 std::string(need) + " particles, budget is " +
                                 std::to_string(max_particles),
                             max_particles, std::move(empty), EventLog{});
    }
    const auto count = static_cast<std::uint64_t>(count_real);
    PopulationState s;
    s.particles.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i)
        s.particles.push_back({ell - u, i, kNoParent});
    s.next_id = count;
    return s;
}

std::pair<PopulationState, EventLog> evolve(PopulationState state,
                                            const ModelParams& params,
                                            const Barrier& barrier,
                                            double horizon,
                                            const StepPolicy& step,
                                            Rng& rng) {
    if (!(horizon > state.time))
        throw config_error("evolve: horizon must exceed state.time");
    if (!(step.dt_max > 0.0) || !(step.event_cap > 0.0) ||
        !(step.event_cap < 1.0))
        throw config_error("evolve: step policy out of range");
    if (step.max_particles == 0)
        throw config_error("evolve: zero particle budget");

    PopulationState cur = std::move(state);
    EventLog log;
    for (const Particle& q : cur.particles)
        log.max_position_seen = std::max(log.max_position_seen, q.x);
    if (cur.particles.size() > step.max_particles)
        throw capacity_abort("evolve: initial population " +
                                 std::to_string(cur.particles.size()) +
                                 " exceeds the particle budget " +
                                 std::to_string(step.max_particles),
                             step.max_particles, std::move(cur),
                             std::move(log));

    std::vector<Particle> next;
    while (cur.time < horizon) {
        if (cur.particles.empty()) {
            // extinction is absorbing, so the clock can jump
            cur.time = horizon;
            break;
        }

        // the step keeps every particle's event probability (b+d)*dt at or
        // below the cap, so branch and death exclude each other per step
        double rate_max = 0.0;
        for (const Particle& q : cur.particles) {
            const auto [b, d] = rates(params, q.x);
            rate_max = std::max(rate_max, b + d);
        }
        double dt = step.dt_max;
        if (rate_max > 0.0) dt = std::min(dt, step.event_cap / rate_max);
        double t_new = cur.time + dt;
        const double remain = horizon - cur.time;
        if (dt >= remain) {
            dt = remain;
            t_new = horizon;
        }
        const double wall = barrier_level(barrier, params, t_new);
        const double root_dt = std::sqrt(dt);

        next.clear();
        next.reserve(cur.particles.size() + 8);
        for (const Particle& q : cur.particles) {
            const double x = q.x - params.rho * dt + root_dt * rng.normal();
            if (!std::isfinite(x))
                throw numeric_error("evolve: non-finite particle position");
            log.max_position_seen = std::max(log.max_position_seen, x);
            if (x >= wall) {
                log.absorptions.push_back({t_new, x, q.id});
                continue;
            }
            const auto [b, d] = rates(params, x);
            const double event = rng.uniform();
            if (event < b * dt) {
                // binary fission; both offspring inherit the position
                next.push_back({x, q.id, q.parent});
                next.push_back({x, cur.next_id++, q.id});
                ++log.births;
            } else if (event < (b + d) * dt) {
                ++log.deaths;
            } else {
                next.push_back({x, q.id, q.parent});
            }
            if (next.size() > step.max_particles) {
                PopulationState part;
                part.time = t_new;
                part.particles = std::move(next);
                part.next_id = cur.next_id;
                throw capacity_abort(
                    "evolve: population exceeds the particle budget " +
                        std::to_string(step.max_particles) + " at time " +
                        std::to_string(t_new),
                    step.max_particles, std::move(part), std::move(log));
            }
        }
        cur.particles.swap(next);
        cur.time = t_new;
    }
    return {std::move(cur), std::move(log)};
}

namespace {

SurvivalEstimate wilson95(std::uint64_t hits, std::uint64_t n) {
    const double z = 1.959963984540054;  // two-sided 95% normal quantile
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(hits) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (p + z2 / (2.0 * nn)) / denom;
    const double half =
        z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    SurvivalEstimate est;
    est.p_hat = p;
    est.ci_low = std::max(0.0, center - half);
    est.ci_high = std::min(1.0, center + half);
    est.replicas = n;
    return est;
}

}  // namespace

SurvivalEstimate survival_probe(const ModelParams& params, double x,
                                double horizon, std::uint64_t replicas,
                                std::uint64_t master_seed,
                                const StepPolicy& step) {
    validate(params);
    if (!(x > 0.0) || !std::isfinite(x))
        throw config_error("survival_probe: x must be positive");
    if (!(horizon >= 0.0) || !std::isfinite(horizon))
        throw config_error("survival_probe: horizon must be nonnegative");
    if (replicas == 0)
        throw config_error("survival_probe: needs at least one replica");

    const Barrier none = Barrier::none();
    std::uint64_t alive = 0;
    for (std::uint64_t r = 0; r < replicas; ++r) {
        Rng rng(master_seed, r);
        PopulationState state = init_point(x);
        if (horizon > 0.0)
            state = evolve(std::move(state), params, none, horizon, step, rng)
                        .first;
        if (!state.empty()) ++alive;
    }
    return wilson95(alive, replicas);
}

double survival_horizon(const ModelParams& params, double x, double d) {
    if (!(params.beta > 0.0))
        throw config_error("survival_horizon: needs beta > 0");
    if (!(x > 0.0)) throw config_error("survival_horizon: x must be positive");
    if (!(d > 0.0) || !(d < 1.0))
        throw config_error("survival_horizon: d must lie in (0, 1)");
    return std::log(1.0 / d) / d / (params.beta * x);
}

namespace {

int thread_count() {
    if (const char* env = std::getenv("BBMWAVE_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1) return static_cast<int>(std::min(v, 256L));
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

ReplicaResult one_replica(const ReplicaPlan& plan, std::uint64_t master_seed,
                          std::uint64_t r) {
    Rng rng(master_seed, r);
    PopulationState cur =
        plan.init == ReplicaPlan::Init::point
            ? init_point(plan.init_x)
            : init_edge_cloud(plan.params, plan.edge_u,
                              plan.step.max_particles);
    ReplicaResult out;
    out.replica = r;
    out.snapshots.reserve(plan.snapshot_times.size());
    for (const double s : plan.snapshot_times) {
        if (s > cur.time) {
            auto [state, log] = evolve(std::move(cur), plan.params,
                                       plan.barrier, s, plan.step, rng);
            cur = std::move(state);
            merge_logs(out.log, std::move(log));
        }
        out.snapshots.push_back(cur);
    }
    if (plan.horizon > cur.time) {
        auto [state, log] = evolve(std::move(cur), plan.params, plan.barrier,
                                   plan.horizon, plan.step, rng);
        cur = std::move(state);
        merge_logs(out.log, std::move(log));
    }
    return out;
}

// rethrown errors keep their type so callers can still catch the payload
std::exception_ptr tag_replica_error(std::uint64_t r) {
    const std::string tag = "replica " + std::to_string(r) + ": ";
    try {
        throw;
    } catch (const capacity_abort& e) {
        return std::make_exception_ptr(
            capacity_abort(tag + e.what(), e.budget, e.state, e.log));
    } catch (const config_error& e) {
        return std::make_exception_ptr(config_error(tag + e.what()));
    } catch (const numeric_error& e) {
        return std::make_exception_ptr(numeric_error(tag + e.what()));
    } catch (...) {
        return std::current_exception();
    }
}

}  // namespace

void run_replicas(const ReplicaPlan& plan, std::uint64_t master_seed,
                  const std::function<void(ReplicaResult&&)>& sink) {
    validate(plan.params);
    if (!(plan.horizon >= 0.0) || !std::isfinite(plan.horizon))
        throw config_error("run_replicas: horizon must be nonnegative");
    double prev = 0.0;
    for (const double s : plan.snapshot_times) {
        if (!(s >= prev) || !(s <= plan.horizon))
            throw config_error(
                "run_replicas: snapshot times must be nondecreasing and "
                "within [0, horizon]");
        prev = s;
    }
    if (plan.replicas == 0) return;

    const std::uint64_t n = plan.replicas;
    const int threads =
        static_cast<int>(std::min<std::uint64_t>(thread_count(), n));

    // replicas are processed in fixed-size blocks: workers fill slots by
    // id, the drain below hands them to sink in id order, so the output is
    // the same for any thread count
    const std::uint64_t block = static_cast<std::uint64_t>(threads) * 8;
    std::vector<ReplicaResult> results;
    std::vector<std::exception_ptr> errors;
    for (std::uint64_t base = 0; base < n; base += block) {
        const std::uint64_t m = std::min(block, n - base);
        results.assign(m, ReplicaResult{});
        errors.assign(m, nullptr);
        std::atomic<std::uint64_t> cursor{0};
        auto work = [&]() {
            for (;;) {
                const std::uint64_t i =
                    cursor.fetch_add(1, std::memory_order_relaxed);
                if (i >= m) break;
                try {
                    results[i] = one_replica(plan, master_seed, base + i);
                } catch (...) {
                    errors[i] = tag_replica_error(base + i);
                }
            }
        };
        if (threads <= 1) {
            work();
        } else {
            std::vector<std::thread> pool;
            pool.reserve(threads - 1);
            for (int t = 1; t < threads; ++t) pool.emplace_back(work);
            work();
            for (std::thread& t : pool) t.join();
        }
        for (std::uint64_t i = 0; i < m; ++i) {
            if (errors[i]) std::rethrow_exception(errors[i]);
            sink(std::move(results[i]));
        }
    }
}

std::vector<ReplicaResult> run_replicas(const ReplicaPlan& plan,
                                        std::uint64_t master_seed) {
    std::vector<ReplicaResult> out;
    out.reserve(plan.replicas);
    run_replicas(plan, master_seed,
                 [&](ReplicaResult&& r) { out.push_back(std::move(r)); });
    return out;
}

}  // namespace bbmwave
