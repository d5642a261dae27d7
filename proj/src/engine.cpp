#include "csma/engine.hpp"

#include <algorithm>
#include <cmath>

#include "csma/dropper.hpp"
#include "csma/rate_control.hpp"

namespace csma {

namespace {
constexpr std::size_t kMaxStoredViolations = 10000;
}

Engine::Engine(std::shared_ptr<const SimConfig> cfg)
    : cfg_(std::move(cfg)),
      links_(cfg_->graph.link_count()),
      types_(cfg_->type_count()),
      rng_(cfg_->rng_seed) {
    cfg_->validate();
    q_.resize((std::size_t)links_ * types_);
    in_service_.assign(links_, std::nullopt);
    metrics_.resize(q_.size());

    const double v = cfg_->V.to_double();
    const double u0 = cfg_->utility->uprime0();
    const Rational vu0 = cfg_->V * cfg_->utility->uprime0_rational();
    for (int i = 0; i < links_; ++i) {
        for (int m = 0; m < types_; ++m) {
            const auto& s = cfg_->specs[i][m];
            y_cap_.push_back(v * u0 + (double)(s.arrival_max * s.size_s));
            q_cap_.push_back(vu0 + Rational(2 * s.arrival_max * s.size_s));
            z_cap_.push_back(cfg_->V * cfg_->beta + s.epsilon);
        }
    }
    trace_.w.resize(links_);
    const std::size_t n = q_.size();
    trace_.A.resize(n); trace_.r.resize(n); trace_.d.resize(n);
    trace_.eta.resize(n); trace_.mu.resize(n);
    trace_.Q0.resize(n); trace_.Q1.resize(n);
    trace_.Y0.resize(n); trace_.Y1.resize(n);
    trace_.Z0.resize(n); trace_.Z1.resize(n);
}

void Engine::step() {
    const std::int64_t t = slot_;
    const bool super = (t % cfg_->T) == 0;
    trace_.slot = t;
    trace_.super_start = super;
    trace_.delivered.clear();
    trace_.dropped.clear();
    trace_.admitted_jobs = 0;

    // start-of-slot snapshot; every decision below reads these
    for (std::size_t k = 0; k < q_.size(); ++k) {
        trace_.Q0[k] = q_[k].Q;
        trace_.Y0[k] = q_[k].Y;
        trace_.Z0[k] = q_[k].Z;
    }

    // arrivals
    for (int i = 0; i < links_; ++i) {
        for (int m = 0; m < types_; ++m) {
            const auto& spec = cfg_->specs[i][m];
            std::int64_t a = 0;
            if (cfg_->arrival_law.kind == ArrivalLaw::Kind::UniformInt) {
                std::uniform_int_distribution<std::int64_t> dist(0, spec.arrival_max);
                a = dist(rng_.arrivals);
            } else {
                std::bernoulli_distribution coin(cfg_->arrival_law.batch_p);
                a = coin(rng_.arrivals) ? spec.arrival_max : 0;
            }
            trace_.A[idx(i, m)] = a;
        }
    }

    // rate control
    const double v = cfg_->V.to_double();
    for (int i = 0; i < links_; ++i) {
        for (int m = 0; m < types_; ++m) {
            const int k = idx(i, m);
            const auto& spec = cfg_->specs[i][m];
            trace_.eta[k] = compute_eta(trace_.Y0[k], v, spec.size_s, spec.arrival_max,
                                        *cfg_->utility);
            trace_.r[k] = admit(trace_.Y0[k], trace_.Q0[k], trace_.A[k]);
        }
    }

    // link scheduling; weights read the start-of-slot queues
    for (int i = 0; i < links_; ++i)
        trace_.w[i] = link_weight(std::span(q_).subspan((std::size_t)i * types_, types_));
    std::uint64_t x = x_prev_;
    std::uint64_t z = 0;
    if (super) {
        for (int i = 0; i < links_; ++i)
            if (in_service_[i])
                throw EngineBug("job still in service at a super-slot boundary");
        ControlSchedule cs = control_phase(cfg_->graph, cfg_->W, rng_.control);
        z = cs.z;
        x = scheduling_phase(cfg_->graph, z, x_prev_, trace_.w, rng_.activation);
    }
    if (!cfg_->graph.is_independent(x)) throw EngineBug("active set has a conflict");
    trace_.z = z;
    trace_.x = x;

    // transmission
    std::fill(trace_.mu.begin(), trace_.mu.end(), 0);
    const std::int64_t slots_left = cfg_->T - (t % cfg_->T);
    for (int i = 0; i < links_; ++i) {
        if (!((x >> i) & 1u)) continue;
        std::optional<int> chosen =
            select_job_type(std::span(q_).subspan((std::size_t)i * types_, types_),
                            std::span(cfg_->specs[i]), slots_left, in_service_[i]);
        if (!chosen) {
            ++idle_while_active_;
            continue;
        }
        const int m = *chosen;
        auto res = ledger_serve_packet(q_[idx(i, m)], t);
        trace_.mu[idx(i, m)] = 1;
        if (res.completed) {
            in_service_[i] = std::nullopt;
            trace_.delivered.push_back({i, res.job});
        } else {
            in_service_[i] = m;
        }
    }

    // job dropping (start-of-slot queues, after service by construction)
    for (int i = 0; i < links_; ++i) {
        for (int m = 0; m < types_; ++m) {
            const int k = idx(i, m);
            const auto& spec = cfg_->specs[i][m];
            const std::int64_t d =
                drop_decision(trace_.Q0[k], trace_.Z0[k], cfg_->V, cfg_->beta, spec.drop_max);
            trace_.d[k] = d;
            if (d == 0) continue;
            auto res = ledger_drop(q_[k], d, t);
            if (res.aborted_in_service) in_service_[i] = std::nullopt;
            if (res.packets_removed < d * spec.size_s) ++metrics_[k].clamp_slack_slots;
            for (auto& j : res.dropped) trace_.dropped.push_back({i, j});
        }
    }

    // admissions enter the ledger after service and dropping: a job admitted
    // at t can depart no earlier than t + 1
    for (int i = 0; i < links_; ++i) {
        for (int m = 0; m < types_; ++m) {
            const int k = idx(i, m);
            if (trace_.r[k] > 0) {
                ledger_admit(q_[k], trace_.r[k], m, cfg_->specs[i][m].size_s, t, next_job_id_);
                trace_.admitted_jobs += trace_.r[k];
            }
        }
    }

    // queue updates from this slot's decisions
    for (int i = 0; i < links_; ++i) {
        for (int m = 0; m < types_; ++m) {
            const int k = idx(i, m);
            const auto& spec = cfg_->specs[i][m];
            q_[k].Q = update_Q(trace_.Q0[k], trace_.mu[k], trace_.d[k], trace_.r[k], spec.size_s);
            q_[k].Y = update_Y(trace_.Y0[k], trace_.r[k], trace_.eta[k], spec.size_s);
            q_[k].Z = update_Z(trace_.Z0[k], trace_.Q0[k], trace_.mu[k], trace_.d[k], spec.size_s,
                               spec.epsilon);
            trace_.Q1[k] = q_[k].Q;
            trace_.Y1[k] = q_[k].Y;
            trace_.Z1[k] = q_[k].Z;
        }
    }

    x_prev_ = x;
    ++slot_;
    check_invariants_post(t);

    // metrics
    for (int i = 0; i < links_; ++i) {
        for (int m = 0; m < types_; ++m) {
            const int k = idx(i, m);
            auto& mm = metrics_[k];
            mm.arrivals += trace_.A[k];
            mm.admitted += trace_.r[k];
            mm.served_packets += trace_.mu[k];
            mm.drop_decision_total += trace_.d[k];
            mm.max_Q = std::max(mm.max_Q, q_[k].Q);
            mm.max_Y = std::max(mm.max_Y, q_[k].Y);
            mm.max_Z = rational_max(mm.max_Z, q_[k].Z);
        }
    }
    auto account_departure = [&](const SlotTrace::Departure& dep, bool delivered) {
        const int k = idx(dep.link, dep.job.type_id);
        auto& mm = metrics_[k];
        if (delivered)
            ++mm.delivered;
        else
            ++mm.dropped;
        const std::int64_t delay = *dep.job.depart_slot - dep.job.admit_slot;
        mm.max_delay = std::max(mm.max_delay, delay);
        if (delay > cfg_->specs[dep.link][dep.job.type_id].deadline_D) {
            ++mm.delay_violations;
            if (violations_.size() < kMaxStoredViolations)
                violations_.push_back({dep.link, dep.job});
        }
    };
    for (const auto& dep : trace_.delivered) account_departure(dep, true);
    for (const auto& dep : trace_.dropped) account_departure(dep, false);

    if (observer_) observer_(trace_);
}

void Engine::check_invariants_post(std::int64_t t) {
    for (int i = 0; i < links_; ++i) {
        int in_service_count = 0;
        for (int m = 0; m < types_; ++m) {
            const int k = idx(i, m);
            const auto& lt = q_[k];
            if (lt.Q != lt.ledger_packets())
                throw EngineBug("packet conservation broken at slot " + std::to_string(t) +
                                " link " + std::to_string(i) + " type " + std::to_string(m));
            if (Rational(lt.Q) > q_cap_[k])
                throw EngineBug("Q exceeded its cap at slot " + std::to_string(t));
            if (lt.Y > y_cap_[k]) throw EngineBug("Y exceeded its cap at slot " + std::to_string(t));
            if (lt.Z > z_cap_[k]) throw EngineBug("Z exceeded its cap at slot " + std::to_string(t));
            if (lt.has_in_service) {
                ++in_service_count;
                if (!in_service_[i] || *in_service_[i] != m)
                    throw EngineBug("in-service marker out of sync");
            }
        }
        if (in_service_count > 1) throw EngineBug("more than one in-service job on a link");
        if (in_service_count == 0 && in_service_[i])
            throw EngineBug("dangling in-service marker");
    }
}

MetricsSummary Engine::finalize_metrics() const {
    MetricsSummary s;
    s.horizon = slot_;
    s.links = links_;
    s.types = types_;
    s.per = metrics_;
    s.idle_while_active = idle_while_active_;
    for (int i = 0; i < links_; ++i) {
        for (int m = 0; m < types_; ++m) {
            const int k = idx(i, m);
            auto& mm = s.per[k];
            mm.pending = 0;
            mm.pending_overdue = 0;
            for (const auto& j : q_[k].ledger) {
                ++mm.pending;
                if (slot_ - j.admit_slot > cfg_->specs[i][m].deadline_D) ++mm.pending_overdue;
            }
            if (mm.admitted != mm.delivered + mm.dropped + mm.pending)
                throw EngineBug("job conservation broken in metrics");
            s.total_delay_violations += mm.delay_violations;
            if (slot_ > 0) {
                const auto& spec = cfg_->specs[i][m];
                const double rbar = (double)mm.admitted / (double)slot_;
                const double dbar = (double)mm.dropped / (double)slot_;
                s.net_utility += cfg_->utility->value(rbar * (double)spec.size_s) -
                                 cfg_->beta.to_double() * dbar * (double)spec.size_s;
            }
        }
    }
    return s;
}

MetricsSummary Engine::run() {
    for (std::int64_t t = 0; t < cfg_->horizon; ++t) step();
    return finalize_metrics();
}

void Engine::for_each_pending(const std::function<void(int, const JobRecord&)>& fn) const {
    for (int i = 0; i < links_; ++i)
        for (int m = 0; m < types_; ++m)
            for (const auto& j : q_[idx(i, m)].ledger) fn(i, j);
}

MetricsSummary run_simulation(const SimConfig& cfg,
                              const std::function<void(const SlotTrace&)>& observer) {
    Engine eng(std::make_shared<SimConfig>(cfg));
    if (observer) eng.set_observer(observer);
    return eng.run();
}

}  // namespace csma
