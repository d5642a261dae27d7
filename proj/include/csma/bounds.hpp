#pragma once

#include "csma/job_types.hpp"
#include "csma/rational.hpp"

namespace csma {

// Deterministic worst-case caps for the three queues of one (link, type)
// pair. All three are invariants of the control loop:
//   Y_max = V*U'(0) + A_max*s   (admission token queue)
//   Q_max = V*U'(0) + 2*A_max*s (packet queue)
//   Z_max = V*beta + eps        (persistence queue)
// The Z cap follows from the drop rule: Z only grows (by at most eps) while
// Q > 0, and once Q + Z > V*beta the drop decision removes d_max*s >= eps
// per slot, so Z can never pass V*beta + eps.
struct QueueBounds {
    Rational Q_max{0};
    Rational Y_max{0};
    Rational Z_max{0};
};

QueueBounds derive_bounds(const Rational& V, const Rational& uprime0, const Rational& beta,
                          std::int64_t arrival_max, std::int64_t size_s, const Rational& epsilon);

// Smallest persistence constant that forces every admitted job to depart
// (served or dropped) within deadline_D slots. It is the unique positive
// fixed point of eps * D = Q_max + Z_max(eps), which with Z_max = V*beta +
// eps collapses to eps = (Q_max + V*beta) / (D - 1).
Rational derive_epsilon(const Rational& V, const Rational& uprime0, const Rational& beta,
                        std::int64_t arrival_max, std::int64_t size_s, std::int64_t deadline_D);

}  // namespace csma
