#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "csma/config.hpp"
#include "csma/queues.hpp"
#include "csma/rng.hpp"
#include "csma/scheduler.hpp"

namespace csma {

// Everything one slot did, with start- and end-of-slot queue values.
// Per-(link,type) vectors are indexed link * type_count + type.
struct SlotTrace {
    std::int64_t slot = 0;
    bool super_start = false;
    std::uint64_t z = 0;
    std::uint64_t x = 0;
    std::vector<double> w;  // per link

    std::vector<std::int64_t> A, r, d;
    std::vector<double> eta;
    std::vector<int> mu;

    std::vector<std::int64_t> Q0, Q1;
    std::vector<double> Y0, Y1;
    std::vector<Rational> Z0, Z1;

    struct Departure {
        int link;
        JobRecord job;
    };
    std::vector<Departure> delivered;
    std::vector<Departure> dropped;
    std::int64_t admitted_jobs = 0;
};

struct LinkTypeMetrics {
    std::int64_t arrivals = 0;
    std::int64_t admitted = 0;
    std::int64_t delivered = 0;
    std::int64_t dropped = 0;
    std::int64_t served_packets = 0;
    std::int64_t drop_decision_total = 0;  // sum of decided d (may exceed jobs present)
    std::int64_t max_Q = 0;
    double max_Y = 0.0;
    Rational max_Z{0};
    std::int64_t max_delay = 0;
    std::int64_t delay_violations = 0;  // departures with depart - admit > D
    std::int64_t pending = 0;           // still queued at end of run
    std::int64_t pending_overdue = 0;   // pending and already older than D
    std::int64_t clamp_slack_slots = 0; // slots where decided d*s exceeded removable packets
};

struct MetricsSummary {
    std::int64_t horizon = 0;
    int links = 0;
    int types = 0;
    std::vector<LinkTypeMetrics> per;  // link * types + type
    double net_utility = 0.0;          // sum of U(rbar*s) - beta*dbar*s, dbar from actual drops
    std::int64_t idle_while_active = 0;
    std::int64_t total_delay_violations = 0;

    const LinkTypeMetrics& at(int link, int type) const { return per[link * types + type]; }
};

struct DelayViolation {
    int link = 0;
    JobRecord job;
};

// Runs the per-slot control loop: arrivals, rate control, CSMA scheduling
// and transmission, dropping, queue updates. Deterministic given the config
// seed. Internal consistency (independent-set schedules, ledger/queue
// agreement, queue caps, super-slot cleanliness) is asserted every slot and
// raises EngineBug on failure.
class Engine {
  public:
    explicit Engine(std::shared_ptr<const SimConfig> cfg);

    // Observer sees every slot (used by CSV writers and the drift checker).
    void set_observer(std::function<void(const SlotTrace&)> obs) { observer_ = std::move(obs); }

    void step();
    MetricsSummary run();  // cfg->horizon slots, then finalize

    std::int64_t slot() const { return slot_; }
    std::uint64_t x_mask() const { return x_prev_; }
    const LinkTypeQueues& queues(int link, int type) const { return q_[idx(link, type)]; }
    const SimConfig& cfg() const { return *cfg_; }
    const std::vector<DelayViolation>& violations() const { return violations_; }

    MetricsSummary finalize_metrics() const;

    // Remaining ledger contents, for the job-event writer.
    void for_each_pending(const std::function<void(int link, const JobRecord&)>& fn) const;

  private:
    int idx(int link, int type) const { return link * types_ + type; }
    void check_invariants_post(std::int64_t t);

    std::shared_ptr<const SimConfig> cfg_;
    int links_ = 0;
    int types_ = 0;
    std::vector<LinkTypeQueues> q_;
    std::vector<std::optional<int>> in_service_;  // per link
    std::uint64_t x_prev_ = 0;
    std::int64_t slot_ = 0;
    std::int64_t next_job_id_ = 0;
    RngBundle rng_;

    // float-consistent caps, fixed at construction (see bounds.hpp)
    std::vector<double> y_cap_;
    std::vector<Rational> q_cap_, z_cap_;
    std::vector<Rational> vbeta_;  // V*beta, for the exact drop compare

    std::vector<LinkTypeMetrics> metrics_;
    std::int64_t idle_while_active_ = 0;
    std::vector<DelayViolation> violations_;

    std::function<void(const SlotTrace&)> observer_;
    SlotTrace trace_;  // reused buffer
};

MetricsSummary run_simulation(const SimConfig& cfg,
                              const std::function<void(const SlotTrace&)>& observer = nullptr);

}  // namespace csma
