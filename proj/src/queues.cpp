#include "csma/queues.hpp"

namespace csma {

void ledger_admit(LinkTypeQueues& q, std::int64_t count, int type_id, std::int64_t s,
                  std::int64_t slot, std::int64_t& next_job_id) {
    for (std::int64_t k = 0; k < count; ++k) {
        JobRecord j;
        j.job_id = next_job_id++;
        j.type_id = type_id;
        j.admit_slot = slot;
        j.packets_remaining = s;
        j.status = JobStatus::Waiting;
        q.ledger.push_back(j);
    }
}

ServeResult ledger_serve_packet(LinkTypeQueues& q, std::int64_t slot) {
    if (q.ledger.empty()) throw EngineBug("ledger_serve_packet: no job of this type");
    JobRecord& head = q.ledger.front();
    if (!q.has_in_service) {
        head.status = JobStatus::InService;
        q.has_in_service = true;
    }
    if (head.status != JobStatus::InService || head.packets_remaining <= 0)
        throw EngineBug("ledger_serve_packet: head job not serviceable");
    --head.packets_remaining;
    ServeResult res;
    if (head.packets_remaining == 0) {
        head.status = JobStatus::Delivered;
        head.depart_slot = slot;
        res.completed = true;
        res.job = head;
        q.ledger.pop_front();
        q.has_in_service = false;
    }
    return res;
}

DropResult ledger_drop(LinkTypeQueues& q, std::int64_t budget, std::int64_t slot) {
    DropResult res;
    auto depart = [&](JobRecord j) {
        j.status = JobStatus::Dropped;
        j.depart_slot = slot;
        res.packets_removed += j.packets_remaining;
        ++res.jobs_dropped;
        res.dropped.push_back(j);
    };
    while (budget > res.jobs_dropped && !q.ledger.empty()) {
        // oldest waiting job; front may be in service
        std::size_t idx = (q.has_in_service && q.ledger.size() > 1) ? 1 : 0;
        if (q.has_in_service && q.ledger.size() == 1) {
            // in-service job is the last one standing: abort it
            depart(q.ledger.front());
            q.ledger.pop_front();
            q.has_in_service = false;
            res.aborted_in_service = true;
            break;
        }
        if (q.has_in_service && idx == 1) {
            depart(q.ledger[1]);
            q.ledger.erase(q.ledger.begin() + 1);
        } else {
            depart(q.ledger.front());
            q.ledger.pop_front();
        }
    }
    return res;
}

}  // namespace csma
