#pragma once

#include <algorithm>
#include <cstdint>

#include "csma/utility_fn.hpp"

namespace csma {

// Closed-form maximizer of V*U(eta*s) - Y*eta*s over eta in [0, A_max]:
//   eta = clamp(U'^{-1}(Y/V) / s, 0, A_max).
// Y = 0 makes the argument fall below U's derivative range; U'^{-1} is then
// +inf and eta pins to A_max. The explicit Y >= V*U'(0) guard returns 0
// without touching U'^{-1}, which keeps the token-queue cap Y_max exact in
// floating point (no libm rounding can leak a positive eta there).
inline double compute_eta(double Y, double V, std::int64_t s, std::int64_t arrival_max,
                          const UtilityFn& u) {
    if (Y >= V * u.uprime0()) return 0.0;
    if (Y <= 0.0) return (double)arrival_max;
    double raw = u.uprime_inv(Y / V) / (double)s;
    return std::clamp(raw, 0.0, (double)arrival_max);
}

// Bang-bang admission: the one-slot objective is linear in r with slope
// s*(Y - Q), so admit everything on strictly positive slope, nothing
// otherwise (ties admit nothing).
inline std::int64_t admit(double Y, std::int64_t Q, std::int64_t A_t) {
    return Y - (double)Q > 0.0 ? A_t : 0;
}

}  // namespace csma
