#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "csma/rational.hpp"

namespace csma {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One job category: s_m packets per job, worst-case delay D_m, arrival and
// drop caps, and the persistence constant for the delay virtual queue.
struct JobTypeSpec {
    int type_id = 0;
    std::int64_t size_s = 1;       // packets per job
    std::int64_t deadline_D = 1;   // slots
    std::int64_t arrival_max = 0;  // jobs per slot
    std::int64_t drop_max = 0;     // jobs per slot
    Rational epsilon{0};

    void validate() const {
        if (size_s < 1) throw ConfigError("job type " + std::to_string(type_id) + ": size must be >= 1");
        if (deadline_D < 1)
            throw ConfigError("job type " + std::to_string(type_id) + ": deadline must be >= 1");
        if (arrival_max < 0)
            throw ConfigError("job type " + std::to_string(type_id) + ": arrival_max must be >= 0");
        if (!(epsilon > Rational(0)))
            throw ConfigError("job type " + std::to_string(type_id) + ": epsilon must be > 0");
        // Lemma-style precondition for the queue bounds: d_max >= max{A_max, eps/s}.
        Rational need = rational_max(Rational(arrival_max), epsilon / Rational(size_s));
        if (Rational(drop_max) < need)
            throw ConfigError("job type " + std::to_string(type_id) +
                              ": drop_max must be >= max(arrival_max, epsilon/size) = " + need.str());
    }
};

}  // namespace csma
