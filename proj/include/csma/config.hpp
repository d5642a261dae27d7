#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "csma/bounds.hpp"
#include "csma/graph.hpp"
#include "csma/job_types.hpp"
#include "csma/rational.hpp"
#include "csma/utility_fn.hpp"

namespace csma {

struct ArrivalLaw {
    enum class Kind { UniformInt, BernoulliBatch };
    Kind kind = Kind::UniformInt;
    double batch_p = 0.5;  // BernoulliBatch: A = arrival_max w.p. batch_p else 0
};

// Full simulation input. Immutable after build(); safe to share across
// concurrently running simulation instances.
struct SimConfig {
    ConflictGraph graph = ConflictGraph::path(1);

    // specs[link][type]; realized from the shared catalog plus overrides.
    std::vector<std::vector<JobTypeSpec>> specs;
    // bounds[link][type], derived from specs.
    std::vector<std::vector<QueueBounds>> bounds;

    Rational V{100};
    Rational beta{5};
    std::int64_t T = 1;        // super-slot length in slots
    std::int64_t W = 2;        // mini-slots in the control phase
    std::int64_t horizon = 0;  // total slots
    std::uint64_t rng_seed = 1;
    std::shared_ptr<const UtilityFn> utility;
    ArrivalLaw arrival_law;

    // Scales every epsilon after derivation. 1 in normal runs; small values
    // deliberately void the delay guarantee so the audit has something to
    // find (negative control).
    Rational epsilon_scale{1};

    // Lemma-style precondition check is waived when epsilon_scale != 1 only
    // in the direction that keeps configs valid; see build().
    int type_count() const { return specs.empty() ? 0 : (int)specs[0].size(); }
    std::int64_t s_max() const;

    void validate() const;
};

struct JobTypeInput {
    std::int64_t size_s = 1;
    std::int64_t deadline_D = 1;
    std::int64_t arrival_max = 0;
    std::optional<std::int64_t> drop_max;  // nullopt = derive
    std::optional<Rational> epsilon;       // nullopt = derive from deadline
};

struct OverrideInput {
    int link = 0;
    int type = 0;
    JobTypeInput values;  // only fields present in the file are applied
    bool has_size = false, has_deadline = false, has_arrival = false, has_drop = false,
         has_epsilon = false;
};

struct SimConfigInput {
    ConflictGraph graph = ConflictGraph::path(1);
    std::vector<JobTypeInput> job_types;
    std::vector<OverrideInput> overrides;
    Rational V{100};
    Rational beta{5};
    std::int64_t T = 1;
    std::int64_t W = 2;
    std::int64_t horizon = 0;
    std::uint64_t rng_seed = 1;
    std::string utility_kind = "log1p";
    double utility_alpha = 2.0;
    ArrivalLaw arrival_law;
    Rational epsilon_scale{1};

    // Resolves auto fields (epsilon, drop_max), applies overrides, derives
    // bounds, and validates everything.
    SimConfig build() const;
};

// Strict loader: unknown keys anywhere in the document are an error.
SimConfigInput load_config_string(const std::string& text);
SimConfigInput load_config_file(const std::string& path);

}  // namespace csma
