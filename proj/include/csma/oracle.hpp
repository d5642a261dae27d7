#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "csma/config.hpp"
#include "csma/engine.hpp"
#include "csma/graph.hpp"
#include "csma/utility_fn.hpp"

namespace csma {

struct OracleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// All collision-free activation vectors of a graph, as bitmasks in
// ascending order (index 0 is the empty set).
struct IndependentSetFamily {
    std::vector<std::uint64_t> sets;

    int size() const { return (int)sets.size(); }
    int index_of(std::uint64_t mask) const;  // -1 when absent
};

IndependentSetFamily enumerate_independent_sets(const ConflictGraph& g, int max_links = 20);

// Exact law of the control phase: every one of the W^E equiprobable backoff
// vectors is pushed through the same deterministic resolution the simulator
// uses, and outcomes are tallied. rho(z) = count[z] / total with no
// rounding anywhere; counts always sum to exactly W^E.
struct ScheduleDistribution {
    std::vector<std::uint64_t> support;  // sorted masks with positive probability
    std::vector<std::int64_t> counts;
    std::int64_t total = 0;

    double prob(std::size_t k) const { return (double)counts[k] / (double)total; }
    std::optional<std::int64_t> count_of(std::uint64_t mask) const;
    bool covers_all_links(int link_count) const;
};

ScheduleDistribution control_schedule_distribution(const ConflictGraph& g, std::int64_t W,
                                                   bool parallel = false,
                                                   std::int64_t max_vectors = 10'000'000);

// Frozen-weight scheduling chain over the independent sets. p[i] comes from
// activation_probability(w[i]).
struct DtmcModel {
    IndependentSetFamily states;
    ScheduleDistribution rho;
    std::vector<double> p;                  // per link
    std::vector<std::vector<double>> P;     // transition matrix
    double max_row_sum_error = 0.0;
    double max_diag_crosscheck_error = 0.0; // row-completion diagonal vs direct enumeration
};

DtmcModel transition_matrix(const ConflictGraph& g, const IndependentSetFamily& states,
                            const ScheduleDistribution& rho, const std::vector<double>& weights,
                            bool parallel = false);

// Left fixed point of P by power iteration, plus the closed-form comparison
// pi(chi) ~ prod p_i/(1-p_i).
struct StationaryResult {
    std::vector<double> pi_power;
    std::vector<double> pi_product;
    double max_deviation = 0.0;
    std::int64_t iterations = 0;
};

StationaryResult stationary_distribution(const DtmcModel& model, double tol = 1e-14,
                                         std::int64_t max_iter = 20'000'000);

std::vector<double> product_form_distribution(const IndependentSetFamily& states,
                                              const std::vector<double>& p);

// max over pairs |pi(a) P(a,b) - pi(b) P(b,a)|
double verify_detailed_balance(const DtmcModel& model, const std::vector<double>& pi);

// Runs only the per-slot scheduling transitions with frozen weights and
// returns the empirical state distribution and its total-variation distance
// from `pi_ref`.
struct FrozenChainResult {
    std::vector<double> empirical;
    double tv_distance = 0.0;
    std::int64_t transitions = 0;
};

FrozenChainResult run_frozen_chain(const ConflictGraph& g, std::int64_t W,
                                   const std::vector<double>& weights,
                                   const IndependentSetFamily& states,
                                   const std::vector<double>& pi_ref, std::int64_t transitions,
                                   std::uint64_t seed, std::int64_t burn_in = 1000);

// Per-slot drift-plus-penalty audit. The quadratic expansion of the three
// queue laws gives, deterministically for every slot,
//   L(t+1) - L(t) - V * sum(U(eta*s) - beta*d*s)
//     <= B + sum(Z*eps) - Phi1 - Phi2 - Phi3 - Phi4
// with B = 1/2 * sum[3(A_max*s)^2 + 2(1+d_max*s)^2 + eps^2].
struct DriftTerms {
    double L_t = 0.0, L_t1 = 0.0, Delta = 0.0;
    double Phi1 = 0.0, Phi2 = 0.0, Phi3 = 0.0, Phi4 = 0.0;
    double B_const = 0.0, Z_eps_sum = 0.0;
    double lhs = 0.0, rhs = 0.0;
    bool holds = false;
};

double drift_B(const SimConfig& cfg);
DriftTerms drift_check(const SlotTrace& tr, const SimConfig& cfg, double tol = 1e-9);

// Utility ceiling with perfect knowledge: time-share the independent sets
// (capacity = convex hull of their indicator vectors) and route each link's
// capacity across its job types by water-filling. Concave in the hull
// weights; solved by conditional-gradient ascent from a coarse simplex seed,
// stopping on a duality-gap certificate well inside `tol`.
struct OfflineBound {
    double utility = 0.0;
    std::vector<double> capacity;             // per link, packets/slot
    std::vector<std::vector<double>> rates;   // [link][type] jobs/slot
    std::vector<double> hull_weights;         // per independent set
    double certificate_gap = 0.0;
};

OfflineBound offline_optimum(const ConflictGraph& g,
                             const std::vector<std::vector<JobTypeSpec>>& specs,
                             const std::vector<std::vector<double>>& arrival_mean,
                             const UtilityFn& u, double tol = 1e-3);

}  // namespace csma
