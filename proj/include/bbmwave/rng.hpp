#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace bbmwave {

// splitmix64 finalizer. Bijective on 64-bit words, so the golden-ratio
// spacing below never maps two (seed, stream) pairs to the same state.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

// One replica's random stream. mt19937_64 is fully specified by the
// standard and the conversions below use fixed bit arithmetic, so a given
// (master_seed, stream) replays bit-identically on any build; nothing here
// depends on library distribution internals.
class Rng {
  public:
    explicit Rng(std::uint64_t master_seed, std::uint64_t stream = 0)
        : gen_(mix64(master_seed + 0x9E3779B97F4A7C15ull * (stream + 1))) {}

    // uniform on [0, 1) from the top 53 bits
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1p-53; }

    // standard normal, Box-Muller; the sine coordinate is cached so draws
    // consume one generator pair per two normals
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // radial uniform shifted into (0, 1] to keep the log finite
        const double u =
            (static_cast<double>(gen_() >> 11) + 1.0) * 0x1p-53;
        const double v = static_cast<double>(gen_() >> 11) * 0x1p-53;
        const double r = std::sqrt(-2.0 * std::log(u));
        const double a = 6.283185307179586476925286766559 * v;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

  private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace bbmwave
