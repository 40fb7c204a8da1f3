#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace bbmwave {

// Bad configuration or argument values: caller mistakes, CLI exit code 2.
struct config_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Numeric failures (overflow in a non-log path, quadrature breakdown,
// root finder not converging): CLI exit code 3.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A spectral series whose truncation cannot be certified below tolerance at
// the requested time.  Callers should either raise num_terms or use the
// closed-form small-time envelopes instead of the series.
struct regime_error : numeric_error {
    regime_error(const std::string& what, double t, int terms_used)
        : numeric_error(what), t(t), terms_used(terms_used) {}
    double t;
    int terms_used;
};

// Particle budget exhausted mid-run.  Carries enough context to size a retry.
struct capacity_error : std::runtime_error {
    capacity_error(const std::string& what, std::uint64_t budget,
                   std::uint64_t population, double time)
        : std::runtime_error(what), budget(budget), population(population),
          time(time) {}
    std::uint64_t budget;
    std::uint64_t population;  // population when the budget tripped
    double time;               // simulation time when the budget tripped
};

}  // namespace bbmwave
