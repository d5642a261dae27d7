#include "csma/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace csma {

using nlohmann::json;

std::int64_t SimConfig::s_max() const {
    std::int64_t m = 1;
    for (const auto& link : specs)
        for (const auto& t : link) m = std::max(m, t.size_s);
    return m;
}

void SimConfig::validate() const {
    if (!utility) throw ConfigError("utility function not set");
    if (!(V > Rational(0))) throw ConfigError("V must be > 0");
    if (!(beta > utility->uprime0_rational()))
        throw ConfigError("beta must exceed U'(0) = " + utility->uprime0_rational().str() +
                          ", got " + beta.str());
    if (T < s_max())
        throw ConfigError("super-slot length T = " + std::to_string(T) +
                          " must be >= max job size " + std::to_string(s_max()));
    if (W < 2) throw ConfigError("control phase needs W >= 2 mini-slots");
    if (horizon < 0) throw ConfigError("horizon must be >= 0");
    if (specs.empty() || (int)specs.size() != graph.link_count())
        throw ConfigError("specs must cover every link");
    for (const auto& link : specs)
        for (const auto& t : link) t.validate();
}

SimConfig SimConfigInput::build() const {
    if (job_types.empty()) throw ConfigError("at least one job type required");

    SimConfig cfg;
    cfg.graph = graph;
    cfg.V = V;
    cfg.beta = beta;
    cfg.T = T;
    cfg.W = W;
    cfg.horizon = horizon;
    cfg.rng_seed = rng_seed;
    cfg.utility = make_utility(utility_kind, utility_alpha);
    cfg.arrival_law = arrival_law;
    cfg.epsilon_scale = epsilon_scale;

    const int links = graph.link_count();
    const int types = (int)job_types.size();
    const Rational u0 = cfg.utility->uprime0_rational();

    std::vector<std::vector<JobTypeInput>> in(links, job_types);
    for (const auto& ov : overrides) {
        if (ov.link < 0 || ov.link >= links) throw ConfigError("override link out of range");
        if (ov.type < 0 || ov.type >= types) throw ConfigError("override type out of range");
        auto& dst = in[ov.link][ov.type];
        if (ov.has_size) dst.size_s = ov.values.size_s;
        if (ov.has_deadline) dst.deadline_D = ov.values.deadline_D;
        if (ov.has_arrival) dst.arrival_max = ov.values.arrival_max;
        if (ov.has_drop) dst.drop_max = ov.values.drop_max;
        if (ov.has_epsilon) dst.epsilon = ov.values.epsilon;
    }

    cfg.specs.assign(links, {});
    cfg.bounds.assign(links, {});
    for (int i = 0; i < links; ++i) {
        for (int m = 0; m < types; ++m) {
            const auto& src = in[i][m];
            JobTypeSpec spec;
            spec.type_id = m;
            spec.size_s = src.size_s;
            spec.deadline_D = src.deadline_D;
            spec.arrival_max = src.arrival_max;
            if (spec.size_s < 1) throw ConfigError("job size must be >= 1");

            Rational eps = src.epsilon
                               ? *src.epsilon
                               : derive_epsilon(V, u0, beta, spec.arrival_max, spec.size_s,
                                                spec.deadline_D);
            eps = eps * epsilon_scale;
            spec.epsilon = eps;

            if (src.drop_max) {
                spec.drop_max = *src.drop_max;
            } else {
                // smallest integer satisfying d_max >= max{A_max, eps/s}
                Rational need = rational_max(Rational(spec.arrival_max), eps / Rational(spec.size_s));
                std::int64_t d = need.num() / need.den();
                if (Rational(d) < need) ++d;
                spec.drop_max = std::max<std::int64_t>(d, 1);
            }
            cfg.specs[i].push_back(spec);
            cfg.bounds[i].push_back(
                derive_bounds(V, u0, beta, spec.arrival_max, spec.size_s, spec.epsilon));
        }
    }
    cfg.validate();
    return cfg;
}

namespace {

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("unknown key \"" + it.key() + "\" in " + where);
}

Rational as_rational(const json& j, const std::string& key) {
    if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
    if (j.is_string()) return Rational::parse(j.get<std::string>());
    throw ConfigError(key + ": exact numbers must be integers or strings like \"2.5\" or \"3/7\"");
}

std::int64_t as_int(const json& j, const std::string& key) {
    if (!j.is_number_integer()) throw ConfigError(key + ": expected an integer");
    return j.get<std::int64_t>();
}

ConflictGraph parse_graph(const json& g) {
    if (!g.is_object()) throw ConfigError("graph: expected an object");
    reject_unknown_keys(g, {"kind", "links", "rows", "cols", "conflicts", "symmetrize"}, "graph");
    std::string kind = g.value("kind", std::string("explicit"));
    if (kind == "path") return ConflictGraph::path((int)as_int(g.at("links"), "graph.links"));
    if (kind == "cycle") return ConflictGraph::cycle((int)as_int(g.at("links"), "graph.links"));
    if (kind == "complete")
        return ConflictGraph::complete((int)as_int(g.at("links"), "graph.links"));
    if (kind == "grid")
        return ConflictGraph::grid((int)as_int(g.at("rows"), "graph.rows"),
                                   (int)as_int(g.at("cols"), "graph.cols"));
    if (kind == "explicit") {
        if (!g.contains("conflicts")) throw ConfigError("graph: explicit kind needs \"conflicts\"");
        std::vector<std::vector<int>> lists;
        for (const auto& row : g.at("conflicts")) lists.push_back(row.get<std::vector<int>>());
        return ConflictGraph::from_conflict_lists(lists, g.value("symmetrize", false));
    }
    throw ConfigError("graph.kind: unknown kind \"" + kind + "\"");
}

JobTypeInput parse_job_type(const json& t, int idx) {
    const std::string where = "job_types[" + std::to_string(idx) + "]";
    reject_unknown_keys(t, {"size", "deadline", "arrival_max", "drop_max", "epsilon"}, where);
    JobTypeInput in;
    in.size_s = as_int(t.at("size"), where + ".size");
    in.deadline_D = as_int(t.at("deadline"), where + ".deadline");
    in.arrival_max = as_int(t.at("arrival_max"), where + ".arrival_max");
    if (t.contains("drop_max") && !(t.at("drop_max").is_string() && t.at("drop_max") == "auto"))
        in.drop_max = as_int(t.at("drop_max"), where + ".drop_max");
    if (t.contains("epsilon") && !(t.at("epsilon").is_string() && t.at("epsilon") == "auto"))
        in.epsilon = as_rational(t.at("epsilon"), where + ".epsilon");
    return in;
}

}  // namespace

SimConfigInput load_config_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    reject_unknown_keys(j,
                        {"graph", "job_types", "overrides", "V", "beta", "T", "W", "horizon",
                         "seed", "utility", "arrival_law", "epsilon_scale"},
                        "config root");

    SimConfigInput in;
    in.graph = parse_graph(j.at("graph"));
    if (!j.contains("job_types") || !j.at("job_types").is_array() || j.at("job_types").empty())
        throw ConfigError("job_types: expected a non-empty array");
    int idx = 0;
    for (const auto& t : j.at("job_types")) in.job_types.push_back(parse_job_type(t, idx++));

    if (j.contains("overrides")) {
        for (const auto& o : j.at("overrides")) {
            reject_unknown_keys(
                o, {"link", "type", "size", "deadline", "arrival_max", "drop_max", "epsilon"},
                "overrides[]");
            OverrideInput ov;
            ov.link = (int)as_int(o.at("link"), "overrides.link");
            ov.type = (int)as_int(o.at("type"), "overrides.type");
            if (o.contains("size")) { ov.values.size_s = as_int(o.at("size"), "overrides.size"); ov.has_size = true; }
            if (o.contains("deadline")) { ov.values.deadline_D = as_int(o.at("deadline"), "overrides.deadline"); ov.has_deadline = true; }
            if (o.contains("arrival_max")) { ov.values.arrival_max = as_int(o.at("arrival_max"), "overrides.arrival_max"); ov.has_arrival = true; }
            if (o.contains("drop_max")) { ov.values.drop_max = as_int(o.at("drop_max"), "overrides.drop_max"); ov.has_drop = true; }
            if (o.contains("epsilon")) { ov.values.epsilon = as_rational(o.at("epsilon"), "overrides.epsilon"); ov.has_epsilon = true; }
            in.overrides.push_back(ov);
        }
    }

    if (j.contains("V")) in.V = as_rational(j.at("V"), "V");
    if (j.contains("beta")) in.beta = as_rational(j.at("beta"), "beta");
    if (j.contains("T")) in.T = as_int(j.at("T"), "T");
    if (j.contains("W")) in.W = as_int(j.at("W"), "W");
    if (j.contains("horizon")) in.horizon = as_int(j.at("horizon"), "horizon");
    if (j.contains("seed")) in.rng_seed = (std::uint64_t)as_int(j.at("seed"), "seed");
    if (j.contains("epsilon_scale")) in.epsilon_scale = as_rational(j.at("epsilon_scale"), "epsilon_scale");

    if (j.contains("utility")) {
        const auto& u = j.at("utility");
        reject_unknown_keys(u, {"kind", "alpha"}, "utility");
        in.utility_kind = u.at("kind").get<std::string>();
        if (u.contains("alpha")) in.utility_alpha = u.at("alpha").get<double>();
    }
    if (j.contains("arrival_law")) {
        const auto& a = j.at("arrival_law");
        reject_unknown_keys(a, {"kind", "p"}, "arrival_law");
        std::string kind = a.at("kind").get<std::string>();
        if (kind == "uniform") {
            in.arrival_law.kind = ArrivalLaw::Kind::UniformInt;
        } else if (kind == "bernoulli_batch") {
            in.arrival_law.kind = ArrivalLaw::Kind::BernoulliBatch;
            in.arrival_law.batch_p = a.value("p", 0.5);
            if (in.arrival_law.batch_p < 0.0 || in.arrival_law.batch_p > 1.0)
                throw ConfigError("arrival_law.p must be in [0, 1]");
        } else {
            throw ConfigError("arrival_law.kind: unknown kind \"" + kind + "\"");
        }
    }
    return in;
}

SimConfigInput load_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return load_config_string(ss.str());
}

}  // namespace csma
