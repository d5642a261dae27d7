#include "csma/bounds.hpp"

namespace csma {

QueueBounds derive_bounds(const Rational& V, const Rational& uprime0, const Rational& beta,
                          std::int64_t arrival_max, std::int64_t size_s, const Rational& epsilon) {
    QueueBounds b;
    Rational as(arrival_max * size_s);
    Rational vu = V * uprime0;
    b.Y_max = vu + as;
    b.Q_max = vu + as + as;
    b.Z_max = V * beta + epsilon;
    return b;
}

Rational derive_epsilon(const Rational& V, const Rational& uprime0, const Rational& beta,
                        std::int64_t arrival_max, std::int64_t size_s, std::int64_t deadline_D) {
    if (deadline_D <= 1)
        throw ConfigError("derive_epsilon: deadline must be >= 2 (fixed point undefined at D <= 1)");
    Rational q_max = V * uprime0 + Rational(2 * arrival_max * size_s);
    Rational eps = (q_max + V * beta) / Rational(deadline_D - 1);
    if (!(eps > Rational(0)))
        throw ConfigError("derive_epsilon: derived epsilon is not positive (all-zero load and V)");
    return eps;
}

}  // namespace csma
