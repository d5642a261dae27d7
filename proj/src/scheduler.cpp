#include "csma/scheduler.hpp"

#include <cmath>

namespace csma {

std::uint64_t resolve_control(const ConflictGraph& g, const std::vector<std::int64_t>& backoffs) {
    const int n = g.link_count();
    std::vector<char> silenced(n, 0);
    std::uint64_t z = 0;

    std::int64_t max_backoff = 0;
    for (int i = 0; i < n; ++i) max_backoff = std::max(max_backoff, backoffs[i]);

    for (std::int64_t tau = 0; tau <= max_backoff; ++tau) {
        std::uint64_t talkers = 0;
        for (int i = 0; i < n; ++i)
            if (backoffs[i] == tau && !silenced[i]) talkers |= (1ULL << i);
        if (!talkers) continue;
        for (int i = 0; i < n; ++i) {
            if (!((talkers >> i) & 1u)) continue;
            if ((talkers & g.conflict_mask(i)) == 0) z |= (1ULL << i);
            // a transmitted INTENT silences later conflicting talkers even
            // when it collided
            for (int j : g.conflict_set(i))
                if (backoffs[j] > tau) silenced[j] = 1;
        }
    }
    return z;
}

ControlSchedule control_phase(const ConflictGraph& g, std::int64_t W, std::mt19937_64& rng) {
    ControlSchedule cs;
    cs.backoffs.resize(g.link_count());
    std::uniform_int_distribution<std::int64_t> dist(0, W - 1);
    for (auto& b : cs.backoffs) b = dist(rng);
    cs.z = resolve_control(g, cs.backoffs);
    return cs;
}

double link_weight(std::span<const LinkTypeQueues> types) {
    double w = 0.0;
    for (const auto& q : types) w = std::max(w, (double)q.Q + q.Z.to_double());
    return w;
}

double activation_probability(double w) { return 1.0 / (1.0 + std::exp(-w)); }

std::uint64_t scheduling_phase(const ConflictGraph& g, std::uint64_t z, std::uint64_t x_prev,
                               const std::vector<double>& weights, std::mt19937_64& rng) {
    if (!g.is_independent(x_prev))
        throw EngineBug("scheduling_phase: previous schedule is not an independent set");
    if (!g.is_independent(z)) throw EngineBug("scheduling_phase: control schedule is not an independent set");

    std::uint64_t x = 0;
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (int i = 0; i < g.link_count(); ++i) {
        if (!((z >> i) & 1u)) {
            x |= x_prev & (1ULL << i);
            continue;
        }
        if (x_prev & g.conflict_mask(i)) continue;  // a neighbor was active: stay off
        double p = activation_probability(weights[i]);
        if (coin(rng) < p) x |= (1ULL << i);
    }
    if (!g.is_independent(x)) throw EngineBug("scheduling_phase produced a conflicting schedule");
    return x;
}

std::optional<int> select_job_type(std::span<const LinkTypeQueues> types,
                                   std::span<const JobTypeSpec> specs,
                                   std::int64_t slots_left_in_super,
                                   std::optional<int> in_service_type) {
    if (in_service_type) return in_service_type;
    std::optional<int> best;
    Rational best_w{0};
    for (int m = 0; m < (int)types.size(); ++m) {
        if (!types[m].has_pending()) continue;
        if (specs[m].size_s > slots_left_in_super) continue;  // would cross the super-slot edge
        Rational w = Rational(types[m].Q) + types[m].Z;
        if (!best || w > best_w) {
            best = m;
            best_w = w;
        }
    }
    return best;
}

}  // namespace csma
