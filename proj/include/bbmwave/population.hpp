#pragma once

#include <cstdint>
#include <limits>
#include <vector>

namespace bbmwave {

inline constexpr std::uint64_t kNoParent =
    std::numeric_limits<std::uint64_t>::max();

struct Particle {
    double x = 0.0;
    std::uint64_t id = 0;
    std::uint64_t parent = kNoParent;
};

// Snapshot of a branching population. ids are unique within a replica and
// never reused; time only moves forward under evolve.
struct PopulationState {
    double time = 0.0;
    std::vector<Particle> particles;
    std::uint64_t next_id = 0;

    std::size_t size() const { return particles.size(); }
    bool empty() const { return particles.empty(); }
};

struct AbsorptionEvent {
    double time = 0.0;
    double position = 0.0;
    std::uint64_t id = 0;
};

struct EventLog {
    std::vector<AbsorptionEvent> absorptions;
    std::uint64_t births = 0;
    std::uint64_t deaths = 0;
    double max_position_seen = -std::numeric_limits<double>::infinity();
};

struct StepPolicy {
    double dt_max = 0.02;
    // per-step total event probability (b+d)*dt is kept at or below this
    double event_cap = 0.05;
    std::uint64_t max_particles = 10'000'000;
};

}  // namespace bbmwave
