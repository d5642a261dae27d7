#pragma once

#include <fstream>
#include <string>

#include "csma/engine.hpp"

namespace csma {

// Shortest round-trip decimal for a double (std::to_chars), so traces are
// byte-stable across runs and re-parse to the same value.
std::string fmt_double(double v);

// One row per (slot, link, type):
//   slot,link,type,A,r,eta,d,mu,z,x,Q,Y,Z,w
// Q/Y/Z are start-of-slot values; decisions are this slot's.
class TraceCsvWriter {
  public:
    explicit TraceCsvWriter(const std::string& path, int types);
    void operator()(const SlotTrace& t);

  private:
    std::ofstream out_;
    int types_;
};

// One row per job: job_id,link,type,admit_slot,depart_slot,outcome.
// Departures stream out as they happen; call finish() after the run to list
// jobs still queued (empty depart_slot, outcome "pending").
class JobEventCsvWriter {
  public:
    explicit JobEventCsvWriter(const std::string& path);
    void operator()(const SlotTrace& t);
    void finish(const Engine& eng);

  private:
    std::ofstream out_;
};

void write_summary_json(const MetricsSummary& s, const SimConfig& cfg, const std::string& path);
std::string summary_to_json(const MetricsSummary& s, const SimConfig& cfg);

}  // namespace csma
