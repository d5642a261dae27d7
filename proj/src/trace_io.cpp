#include "csma/trace_io.hpp"

#include <charconv>
#include <stdexcept>

#include <json.hpp>

namespace csma {

std::string fmt_double(double v) {
    char buf[40];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw std::runtime_error("fmt_double failed");
    return std::string(buf, p);
}

TraceCsvWriter::TraceCsvWriter(const std::string& path, int types) : out_(path), types_(types) {
    if (!out_) throw std::runtime_error("cannot open trace file: " + path);
    out_ << "slot,link,type,A,r,eta,d,mu,z,x,Q,Y,Z,w\n";
}

void TraceCsvWriter::operator()(const SlotTrace& t) {
    const int links = (int)t.w.size();
    for (int i = 0; i < links; ++i) {
        for (int m = 0; m < types_; ++m) {
            const int k = i * types_ + m;
            out_ << t.slot << ',' << i << ',' << m << ',' << t.A[k] << ',' << t.r[k] << ','
                 << fmt_double(t.eta[k]) << ',' << t.d[k] << ',' << t.mu[k] << ','
                 << ((t.z >> i) & 1u) << ',' << ((t.x >> i) & 1u) << ',' << t.Q0[k] << ','
                 << fmt_double(t.Y0[k]) << ',' << fmt_double(t.Z0[k].to_double()) << ','
                 << fmt_double(t.w[i]) << '\n';
        }
    }
}

JobEventCsvWriter::JobEventCsvWriter(const std::string& path) : out_(path) {
    if (!out_) throw std::runtime_error("cannot open job event file: " + path);
    out_ << "job_id,link,type,admit_slot,depart_slot,outcome\n";
}

void JobEventCsvWriter::operator()(const SlotTrace& t) {
    for (const auto& dep : t.delivered)
        out_ << dep.job.job_id << ',' << dep.link << ',' << dep.job.type_id << ','
             << dep.job.admit_slot << ',' << *dep.job.depart_slot << ",delivered\n";
    for (const auto& dep : t.dropped)
        out_ << dep.job.job_id << ',' << dep.link << ',' << dep.job.type_id << ','
             << dep.job.admit_slot << ',' << *dep.job.depart_slot << ",dropped\n";
}

void JobEventCsvWriter::finish(const Engine& eng) {
    eng.for_each_pending([&](int link, const JobRecord& j) {
        out_ << j.job_id << ',' << link << ',' << j.type_id << ',' << j.admit_slot
             << ",,pending\n";
    });
}

std::string summary_to_json(const MetricsSummary& s, const SimConfig& cfg) {
    nlohmann::json j;
    j["horizon"] = s.horizon;
    j["links"] = s.links;
    j["types"] = s.types;
    j["net_utility"] = s.net_utility;
    j["idle_while_active_slots"] = s.idle_while_active;
    j["delay_violations"] = s.total_delay_violations;
    auto arr = nlohmann::json::array();
    for (int i = 0; i < s.links; ++i) {
        for (int m = 0; m < s.types; ++m) {
            const auto& mm = s.at(i, m);
            const auto& spec = cfg.specs[i][m];
            nlohmann::json e;
            e["link"] = i;
            e["type"] = m;
            e["size"] = spec.size_s;
            e["deadline"] = spec.deadline_D;
            e["epsilon"] = spec.epsilon.str();
            e["drop_max"] = spec.drop_max;
            e["arrivals"] = mm.arrivals;
            e["admitted"] = mm.admitted;
            e["delivered"] = mm.delivered;
            e["dropped"] = mm.dropped;
            e["pending"] = mm.pending;
            e["pending_overdue"] = mm.pending_overdue;
            e["served_packets"] = mm.served_packets;
            e["drop_decision_total"] = mm.drop_decision_total;
            e["clamp_slack_slots"] = mm.clamp_slack_slots;
            e["mean_admit_rate"] = s.horizon ? (double)mm.admitted / (double)s.horizon : 0.0;
            e["mean_drop_rate"] = s.horizon ? (double)mm.dropped / (double)s.horizon : 0.0;
            e["max_Q"] = mm.max_Q;
            e["max_Y"] = mm.max_Y;
            e["max_Z"] = mm.max_Z.str();
            e["bound_Q"] = cfg.bounds[i][m].Q_max.str();
            e["bound_Y"] = cfg.bounds[i][m].Y_max.str();
            e["bound_Z"] = cfg.bounds[i][m].Z_max.str();
            e["max_delay"] = mm.max_delay;
            e["delay_violations"] = mm.delay_violations;
            arr.push_back(e);
        }
    }
    j["per_link_type"] = arr;
    return j.dump(2);
}

void write_summary_json(const MetricsSummary& s, const SimConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open summary file: " + path);
    out << summary_to_json(s, cfg) << "\n";
}

}  // namespace csma
