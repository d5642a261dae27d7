#pragma once

#include <cstdint>

#include "csma/rational.hpp"

namespace csma {

// Threshold drop rule: the one-slot objective is linear in d with slope
// s*(Q + Z - V*beta), so drop at the cap once Q + Z strictly exceeds
// V*beta, else nothing. Compared exactly in rationals so the strict
// boundary (Q + Z == V*beta keeps everything) never depends on rounding.
inline std::int64_t drop_decision(std::int64_t Q, const Rational& Z, const Rational& V,
                                  const Rational& beta, std::int64_t drop_max) {
    return (Rational(Q) + Z > V * beta) ? drop_max : 0;
}

}  // namespace csma
