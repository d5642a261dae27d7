#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "csma/graph.hpp"
#include "csma/job_types.hpp"
#include "csma/queues.hpp"

namespace csma {

// One control phase outcome: which links won the INTENT contention and may
// change their activation this super slot.
struct ControlSchedule {
    std::uint64_t z = 0;                 // winners, always an independent set
    std::vector<std::int64_t> backoffs;  // chosen mini-slot per link
};

// Deterministic INTENT resolution for a fixed backoff vector. Mini-slots are
// processed in order: a link whose turn arrives unsilenced broadcasts; a
// broadcast (collided or not) silences every conflicting link with a
// strictly larger backoff; simultaneous conflicting broadcasts collide and
// win nothing. Used by both the simulator and the exhaustive distribution
// oracle so the two can never drift apart.
std::uint64_t resolve_control(const ConflictGraph& g, const std::vector<std::int64_t>& backoffs);

// Draws one backoff per link uniformly over {0, .., W-1} and resolves.
ControlSchedule control_phase(const ConflictGraph& g, std::int64_t W, std::mt19937_64& rng);

// w_i = max over types of (Q + Z); 0 when everything is empty.
double link_weight(std::span<const LinkTypeQueues> types);

// p = e^w / (1 + e^w), computed as 1/(1 + e^-w) so large weights saturate
// to 1 instead of overflowing.
double activation_probability(double w);

// Applies the per-link update rule given the control schedule:
//   z_i = 0                  -> keep x_prev_i
//   z_i = 1, neighbor active -> 0
//   z_i = 1, neighborhood idle -> 1 with probability p_i
// Both inputs must be independent sets; the output then is too.
std::uint64_t scheduling_phase(const ConflictGraph& g, std::uint64_t z, std::uint64_t x_prev,
                               const std::vector<double>& weights, std::mt19937_64& rng);

// Job-type choice for one active link. An unfinished job is continued
// unconditionally. Otherwise the highest-weight (Q+Z, exact-compared) type
// that still fits in the current super slot and has a pending job wins,
// smallest type id on ties; nullopt when nothing is eligible (the link
// idles while active).
std::optional<int> select_job_type(std::span<const LinkTypeQueues> types,
                                   std::span<const JobTypeSpec> specs,
                                   std::int64_t slots_left_in_super,
                                   std::optional<int> in_service_type);

}  // namespace csma
