#include "csma/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "csma/rng.hpp"
#include "csma/scheduler.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace csma {

int IndependentSetFamily::index_of(std::uint64_t mask) const {
    auto it = std::lower_bound(sets.begin(), sets.end(), mask);
    if (it == sets.end() || *it != mask) return -1;
    return (int)(it - sets.begin());
}

IndependentSetFamily enumerate_independent_sets(const ConflictGraph& g, int max_links) {
    const int n = g.link_count();
    if (n > max_links)
        throw OracleError("independent-set enumeration capped at " + std::to_string(max_links) +
                          " links");
    IndependentSetFamily fam;
    fam.sets.push_back(0);
    for (std::uint64_t mask = 1; mask < (1ULL << n); ++mask)
        if (g.is_independent(mask)) fam.sets.push_back(mask);
    return fam;
}

std::optional<std::int64_t> ScheduleDistribution::count_of(std::uint64_t mask) const {
    auto it = std::lower_bound(support.begin(), support.end(), mask);
    if (it == support.end() || *it != mask) return std::nullopt;
    return counts[it - support.begin()];
}

bool ScheduleDistribution::covers_all_links(int link_count) const {
    std::uint64_t all = 0;
    for (auto z : support) all |= z;
    return all == ((link_count == 64) ? ~0ULL : ((1ULL << link_count) - 1));
}

namespace {

// decodes vector index -> per-link backoffs (mixed radix, link 0 fastest)
void decode_backoffs(std::int64_t index, std::int64_t W, std::vector<std::int64_t>& out) {
    for (auto& b : out) {
        b = index % W;
        index /= W;
    }
}

using CountMap = std::map<std::uint64_t, std::int64_t>;

CountMap tally_range(const ConflictGraph& g, std::int64_t W, std::int64_t begin,
                     std::int64_t end) {
    CountMap local;
    std::vector<std::int64_t> backoffs(g.link_count());
    for (std::int64_t v = begin; v < end; ++v) {
        decode_backoffs(v, W, backoffs);
        ++local[resolve_control(g, backoffs)];
    }
    return local;
}

}  // namespace

ScheduleDistribution control_schedule_distribution(const ConflictGraph& g, std::int64_t W,
                                                   bool parallel, std::int64_t max_vectors) {
    if (W < 2) throw OracleError("control phase needs W >= 2");
    const int n = g.link_count();
    double approx = std::pow((double)W, (double)n);
    if (approx > (double)max_vectors)
        throw OracleError("W^links = " + std::to_string(approx) + " exceeds enumeration cap");
    std::int64_t total = 1;
    for (int i = 0; i < n; ++i) total *= W;

    CountMap merged;
    if (!parallel) {
        merged = tally_range(g, W, 0, total);
    } else {
#ifdef _OPENMP
        const int threads = omp_get_max_threads();
        std::vector<CountMap> partial(threads);
#pragma omp parallel num_threads(threads)
        {
            const int tid = omp_get_thread_num();
            const std::int64_t chunk = (total + threads - 1) / threads;
            const std::int64_t b = std::min<std::int64_t>(tid * chunk, total);
            const std::int64_t e = std::min<std::int64_t>(b + chunk, total);
            partial[tid] = tally_range(g, W, b, e);
        }
        for (const auto& pm : partial)
            for (const auto& [z, c] : pm) merged[z] += c;
#else
        merged = tally_range(g, W, 0, total);
#endif
    }

    ScheduleDistribution dist;
    dist.total = total;
    std::int64_t sum = 0;
    for (const auto& [z, c] : merged) {
        dist.support.push_back(z);
        dist.counts.push_back(c);
        sum += c;
    }
    if (sum != total) throw OracleError("schedule distribution counts do not sum to W^links");
    return dist;
}

namespace {

double transition_entry(const ConflictGraph& g, const ScheduleDistribution& rho,
                        const std::vector<double>& p, std::uint64_t a, std::uint64_t b) {
    const std::uint64_t uni = a | b;
    if (!g.is_independent(uni)) return 0.0;
    const std::uint64_t delta = a ^ b;
    const std::uint64_t blocked = g.neighborhood(uni);
    double sum = 0.0;
    for (std::size_t k = 0; k < rho.support.size(); ++k) {
        const std::uint64_t z = rho.support[k];
        if ((z & delta) != delta) continue;
        double term = rho.prob(k);
        for (int i = 0; i < g.link_count(); ++i) {
            const std::uint64_t bit = 1ULL << i;
            if (!(z & bit)) continue;
            if (bit & (a & ~b)) term *= 1.0 - p[i];        // turning off
            else if (bit & (b & ~a)) term *= p[i];         // turning on
            else if (bit & (a & b)) term *= p[i];          // staying on
            else if (!(bit & blocked)) term *= 1.0 - p[i]; // free but stays off
            // blocked links keep state 0 with probability 1
        }
        sum += term;
    }
    return sum;
}

// stay probability by direct reasoning: every z-link in `a` keeps state 1,
// every unblocked z-link outside keeps state 0
double stay_probability(const ConflictGraph& g, const ScheduleDistribution& rho,
                        const std::vector<double>& p, std::uint64_t a) {
    const std::uint64_t blocked = g.neighborhood(a);
    double sum = 0.0;
    for (std::size_t k = 0; k < rho.support.size(); ++k) {
        const std::uint64_t z = rho.support[k];
        double term = rho.prob(k);
        for (int i = 0; i < g.link_count(); ++i) {
            const std::uint64_t bit = 1ULL << i;
            if (!(z & bit)) continue;
            if (bit & a) term *= p[i];
            else if (!(bit & blocked)) term *= 1.0 - p[i];
        }
        sum += term;
    }
    return sum;
}

}  // namespace

DtmcModel transition_matrix(const ConflictGraph& g, const IndependentSetFamily& states,
                            const ScheduleDistribution& rho, const std::vector<double>& weights,
                            bool parallel) {
    DtmcModel model;
    model.states = states;
    model.rho = rho;
    model.p.resize(g.link_count());
    for (int i = 0; i < g.link_count(); ++i) model.p[i] = activation_probability(weights[i]);

    const int S = states.size();
    model.P.assign(S, std::vector<double>(S, 0.0));

#pragma omp parallel for schedule(dynamic) if (parallel)
    for (int r = 0; r < S; ++r) {
        double off_sum = 0.0;
        for (int c = 0; c < S; ++c) {
            if (c == r) continue;
            double v = transition_entry(g, rho, model.p, states.sets[r], states.sets[c]);
            model.P[r][c] = v;
            off_sum += v;
        }
        model.P[r][r] = 1.0 - off_sum;
    }

    double max_row_err = 0.0, max_diag_err = 0.0;
    for (int r = 0; r < S; ++r) {
        double row = 0.0;
        for (int c = 0; c < S; ++c) {
            if (model.P[r][c] < -1e-15) throw OracleError("negative transition probability");
            row += model.P[r][c];
        }
        max_row_err = std::max(max_row_err, std::abs(row - 1.0));
        const double direct = stay_probability(g, rho, model.p, states.sets[r]);
        max_diag_err = std::max(max_diag_err, std::abs(direct - model.P[r][r]));
    }
    model.max_row_sum_error = max_row_err;
    model.max_diag_crosscheck_error = max_diag_err;
    if (max_diag_err > 1e-12)
        throw OracleError("diagonal cross-check failed: " + std::to_string(max_diag_err));
    return model;
}

std::vector<double> product_form_distribution(const IndependentSetFamily& states,
                                              const std::vector<double>& p) {
    std::vector<double> pi(states.size(), 0.0);
    double H = 0.0;
    for (int k = 0; k < states.size(); ++k) {
        double prod = 1.0;
        for (int i = 0; i < (int)p.size(); ++i)
            if ((states.sets[k] >> i) & 1u) prod *= p[i] / (1.0 - p[i]);
        pi[k] = prod;
        H += prod;
    }
    for (auto& v : pi) v /= H;
    return pi;
}

StationaryResult stationary_distribution(const DtmcModel& model, double tol,
                                         std::int64_t max_iter) {
    if (!model.rho.covers_all_links((int)model.p.size()))
        throw OracleError("some link never appears in a control schedule; chain is reducible");
    const int S = model.states.size();
    StationaryResult res;
    std::vector<double> v(S, 1.0 / S), next(S, 0.0);
    std::int64_t it = 0;
    for (; it < max_iter; ++it) {
        std::fill(next.begin(), next.end(), 0.0);
        for (int r = 0; r < S; ++r) {
            const double vr = v[r];
            if (vr == 0.0) continue;
            for (int c = 0; c < S; ++c) next[c] += vr * model.P[r][c];
        }
        double norm = 0.0;
        for (double x : next) norm += x;
        for (auto& x : next) x /= norm;
        double diff = 0.0;
        for (int k = 0; k < S; ++k) diff = std::max(diff, std::abs(next[k] - v[k]));
        v.swap(next);
        if (diff < tol) break;
    }
    if (it >= max_iter) throw OracleError("power iteration did not converge");
    res.iterations = it;
    res.pi_power = v;
    res.pi_product = product_form_distribution(model.states, model.p);
    for (int k = 0; k < S; ++k)
        res.max_deviation = std::max(res.max_deviation, std::abs(res.pi_power[k] - res.pi_product[k]));
    return res;
}

double verify_detailed_balance(const DtmcModel& model, const std::vector<double>& pi) {
    const int S = model.states.size();
    double residual = 0.0;
    for (int a = 0; a < S; ++a)
        for (int b = a + 1; b < S; ++b)
            residual = std::max(residual,
                                std::abs(pi[a] * model.P[a][b] - pi[b] * model.P[b][a]));
    return residual;
}

FrozenChainResult run_frozen_chain(const ConflictGraph& g, std::int64_t W,
                                   const std::vector<double>& weights,
                                   const IndependentSetFamily& states,
                                   const std::vector<double>& pi_ref, std::int64_t transitions,
                                   std::uint64_t seed, std::int64_t burn_in) {
    std::mt19937_64 rng_control(splitmix64(seed ^ 0xF0F0F0ULL));
    std::mt19937_64 rng_coin(splitmix64(seed ^ 0x0E0E0EULL));
    std::uint64_t x = 0;
    std::vector<std::int64_t> occupancy(states.size(), 0);
    for (std::int64_t t = 0; t < burn_in + transitions; ++t) {
        ControlSchedule cs = control_phase(g, W, rng_control);
        x = scheduling_phase(g, cs.z, x, weights, rng_coin);
        if (t >= burn_in) {
            int k = states.index_of(x);
            if (k < 0) throw OracleError("chain reached a state outside the family");
            ++occupancy[k];
        }
    }
    FrozenChainResult res;
    res.transitions = transitions;
    res.empirical.resize(states.size());
    for (int k = 0; k < states.size(); ++k)
        res.empirical[k] = (double)occupancy[k] / (double)transitions;
    double tv = 0.0;
    for (int k = 0; k < states.size(); ++k) tv += std::abs(res.empirical[k] - pi_ref[k]);
    res.tv_distance = 0.5 * tv;
    return res;
}

double drift_B(const SimConfig& cfg) {
    double B = 0.0;
    for (int i = 0; i < cfg.graph.link_count(); ++i) {
        for (int m = 0; m < cfg.type_count(); ++m) {
            const auto& s = cfg.specs[i][m];
            const double as = (double)(s.arrival_max * s.size_s);
            const double ds = 1.0 + (double)(s.drop_max * s.size_s);
            const double eps = s.epsilon.to_double();
            B += 3.0 * as * as + 2.0 * ds * ds + eps * eps;
        }
    }
    return 0.5 * B;
}

DriftTerms drift_check(const SlotTrace& tr, const SimConfig& cfg, double tol) {
    DriftTerms out;
    const double V = cfg.V.to_double();
    const double beta = cfg.beta.to_double();
    const double vbeta = V * beta;
    double penalty = 0.0;
    for (int i = 0; i < cfg.graph.link_count(); ++i) {
        for (int m = 0; m < cfg.type_count(); ++m) {
            const std::size_t k = (std::size_t)i * cfg.type_count() + m;
            const auto& spec = cfg.specs[i][m];
            const double s = (double)spec.size_s;
            const double Q0 = (double)tr.Q0[k], Y0 = tr.Y0[k], Z0 = tr.Z0[k].to_double();
            const double Q1 = (double)tr.Q1[k], Y1 = tr.Y1[k], Z1 = tr.Z1[k].to_double();
            out.L_t += 0.5 * (Y0 * Y0 + Q0 * Q0 + Z0 * Z0);
            out.L_t1 += 0.5 * (Y1 * Y1 + Q1 * Q1 + Z1 * Z1);
            const double eta_s = tr.eta[k] * s;
            const double d_s = (double)tr.d[k] * s;
            const double r_s = (double)tr.r[k] * s;
            penalty += cfg.utility->value(eta_s) - beta * d_s;
            out.Phi1 += V * cfg.utility->value(eta_s) - Y0 * eta_s;
            out.Phi2 += r_s * (Y0 - Q0);
            out.Phi3 += (double)tr.mu[k] * (Q0 + Z0);
            out.Phi4 += d_s * (Q0 + Z0 - vbeta);
            out.Z_eps_sum += Z0 * spec.epsilon.to_double();
        }
    }
    out.B_const = drift_B(cfg);
    out.Delta = out.L_t1 - out.L_t;
    out.lhs = out.Delta - V * penalty;
    out.rhs = out.B_const + out.Z_eps_sum - out.Phi1 - out.Phi2 - out.Phi3 - out.Phi4;
    out.holds = out.lhs <= out.rhs + tol;
    return out;
}

namespace {

// best split of capacity c across types with per-type caps, identical U:
// water-fill to a common level, clipped at each cap
struct LinkAllocation {
    double utility = 0.0;
    double marginal = 0.0;  // dU/dc at the optimum (0 when capacity is slack)
    std::vector<double> b;  // packets/slot per type
};

LinkAllocation allocate_link(double c, const std::vector<double>& caps, const UtilityFn& u) {
    LinkAllocation out;
    const int M = (int)caps.size();
    out.b.assign(M, 0.0);
    double total_cap = 0.0;
    for (double x : caps) total_cap += x;
    const double budget = std::min(c, total_cap);
    if (budget <= 0.0 || M == 0) {
        out.marginal = total_cap > 0.0 ? u.uprime(0.0) : 0.0;
        return out;
    }

    // common level theta with b_m = min(cap_m, theta)
    std::vector<double> sorted = caps;
    std::sort(sorted.begin(), sorted.end());
    double used = 0.0;
    int remaining = M;
    double theta = 0.0;
    for (int k = 0; k < M; ++k) {
        const double step = sorted[k] - theta;
        if (used + step * remaining >= budget) {
            theta += (budget - used) / remaining;
            used = budget;
            break;
        }
        used += step * remaining;
        theta = sorted[k];
        --remaining;
    }
    for (int m = 0; m < M; ++m) out.b[m] = std::min(caps[m], theta);
    for (int m = 0; m < M; ++m) out.utility += u.value(out.b[m]);
    out.marginal = (c < total_cap) ? u.uprime(theta) : 0.0;
    return out;
}

}  // namespace

OfflineBound offline_optimum(const ConflictGraph& g,
                             const std::vector<std::vector<JobTypeSpec>>& specs,
                             const std::vector<std::vector<double>>& arrival_mean,
                             const UtilityFn& u, double tol) {
    const int n = g.link_count();
    if (n > 6) throw OracleError("offline bound capped at 6 links");
    IndependentSetFamily fam = enumerate_independent_sets(g);
    const int S = fam.size();
    const int M = (int)specs[0].size();

    std::vector<std::vector<double>> caps(n, std::vector<double>(M, 0.0));
    for (int i = 0; i < n; ++i)
        for (int m = 0; m < M; ++m)
            caps[i][m] = arrival_mean[i][m] * (double)specs[i][m].size_s;

    auto capacities = [&](const std::vector<double>& alpha) {
        std::vector<double> c(n, 0.0);
        for (int k = 0; k < S; ++k)
            for (int i = 0; i < n; ++i)
                if ((fam.sets[k] >> i) & 1u) c[i] += alpha[k];
        return c;
    };
    auto objective = [&](const std::vector<double>& alpha, std::vector<double>* marginals) {
        const auto c = capacities(alpha);
        double total = 0.0;
        if (marginals) marginals->assign(n, 0.0);
        for (int i = 0; i < n; ++i) {
            auto a = allocate_link(c[i], caps[i], u);
            total += a.utility;
            if (marginals) (*marginals)[i] = a.marginal;
        }
        return total;
    };

    std::vector<double> alpha(S, 1.0 / S);
    const double inner_tol = std::min(tol * 1e-3, 1e-7);
    double gap = 0.0;
    for (int iter = 0; iter < 20000; ++iter) {
        std::vector<double> marg;
        objective(alpha, &marg);
        // linearized score of each vertex of the hull
        int best = 0;
        double best_score = -1.0;
        double cur_score = 0.0;
        for (int k = 0; k < S; ++k) {
            double score = 0.0;
            for (int i = 0; i < n; ++i)
                if ((fam.sets[k] >> i) & 1u) score += marg[i];
            if (score > best_score) {
                best_score = score;
                best = k;
            }
            cur_score += alpha[k] * score;
        }
        gap = best_score - cur_score;
        if (gap <= inner_tol) break;

        // golden-section line search toward the best vertex
        auto blend_val = [&](double gamma) {
            std::vector<double> trial(alpha);
            for (auto& x : trial) x *= (1.0 - gamma);
            trial[best] += gamma;
            return objective(trial, nullptr);
        };
        double lo = 0.0, hi = 1.0;
        const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
        double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
        double f1 = blend_val(x1), f2 = blend_val(x2);
        for (int ls = 0; ls < 60; ++ls) {
            if (f1 < f2) {
                lo = x1; x1 = x2; f1 = f2;
                x2 = lo + phi * (hi - lo); f2 = blend_val(x2);
            } else {
                hi = x2; x2 = x1; f2 = f1;
                x1 = hi - phi * (hi - lo); f1 = blend_val(x1);
            }
        }
        const double gamma = 0.5 * (lo + hi);
        if (gamma <= 0.0) break;
        for (auto& x : alpha) x *= (1.0 - gamma);
        alpha[best] += gamma;
    }

    OfflineBound out;
    out.hull_weights = alpha;
    out.capacity = capacities(alpha);
    out.rates.assign(n, std::vector<double>(M, 0.0));
    for (int i = 0; i < n; ++i) {
        auto a = allocate_link(out.capacity[i], caps[i], u);
        out.utility += a.utility;
        for (int m = 0; m < M; ++m) out.rates[i][m] = a.b[m] / (double)specs[i][m].size_s;
    }
    out.certificate_gap = gap;
    return out;
}

}  // namespace csma
