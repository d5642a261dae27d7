#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <vector>

#include "csma/rational.hpp"

namespace csma {

struct EngineBug : std::logic_error {
    using std::logic_error::logic_error;
};

enum class JobStatus { Waiting, InService, Delivered, Dropped };

struct JobRecord {
    std::int64_t job_id = 0;
    int type_id = 0;
    std::int64_t admit_slot = 0;
    std::int64_t packets_remaining = 0;
    JobStatus status = JobStatus::Waiting;
    std::optional<std::int64_t> depart_slot;
};

// Queue-law update functions. Pure; the engine applies them once per slot
// with that slot's decisions.

// Q' = max{Q - mu - d*s, 0} + r*s
inline std::int64_t update_Q(std::int64_t Q, int mu, std::int64_t d, std::int64_t r,
                             std::int64_t s) {
    std::int64_t dec = Q - mu - d * s;
    return (dec > 0 ? dec : 0) + r * s;
}

// Y' = max{Y - r*s, 0} + eta*s
inline double update_Y(double Y, std::int64_t r, double eta, std::int64_t s) {
    double dec = Y - (double)(r * s);
    return (dec > 0.0 ? dec : 0.0) + eta * (double)s;
}

// Z' = max{Z + 1{Q>0}*(eps - mu) - d*s - 1{Q=0}, 0}, exact in rationals
inline Rational update_Z(const Rational& Z, std::int64_t Q_before, int mu, std::int64_t d,
                         std::int64_t s, const Rational& eps) {
    Rational next = Z;
    if (Q_before > 0)
        next += eps - Rational(mu);
    else
        next -= Rational(1);
    next -= Rational(d * s);
    return next > Rational(0) ? next : Rational(0);
}

// All state of one (link, type) pair: the packet queue Q, the two virtual
// queues, and the FIFO job ledger that gives Q its job-boundary semantics.
// Q is an exact integer and Z an exact rational; Y lives in doubles (the
// admission closed form produces irrational values for general utilities).
struct LinkTypeQueues {
    std::int64_t Q = 0;
    double Y = 0.0;
    Rational Z{0};
    std::deque<JobRecord> ledger;  // waiting + in-service jobs, FIFO
    bool has_in_service = false;   // true iff ledger.front() is mid-transmission

    std::int64_t ledger_packets() const {
        std::int64_t sum = 0;
        for (const auto& j : ledger) sum += j.packets_remaining;
        return sum;
    }
    bool has_pending() const { return !ledger.empty(); }
};

struct ServeResult {
    bool completed = false;
    JobRecord job;  // set when completed
};

struct DropResult {
    std::int64_t jobs_dropped = 0;
    std::int64_t packets_removed = 0;
    bool aborted_in_service = false;
    std::vector<JobRecord> dropped;  // departed records, FIFO order
};

// Appends `count` fresh jobs of s packets each, admitted at `slot`.
void ledger_admit(LinkTypeQueues& q, std::int64_t count, int type_id, std::int64_t s,
                  std::int64_t slot, std::int64_t& next_job_id);

// Transmits one packet of the head job (promoting it to in-service first if
// needed). Throws EngineBug when no job is available: the scheduler must
// never pick an empty type.
ServeResult ledger_serve_packet(LinkTypeQueues& q, std::int64_t slot);

// Drops up to `budget` oldest waiting jobs. The in-service job is skipped
// unless it is the only job left and budget remains, in which case it is
// aborted (partial transmission yields nothing).
DropResult ledger_drop(LinkTypeQueues& q, std::int64_t budget, std::int64_t slot);

}  // namespace csma
