#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "csma/engine.hpp"
#include "csma/oracle.hpp"
#include "csma/rng.hpp"
#include "csma/trace_io.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::int64_t> seed, horizon, T, W;
    std::optional<std::string> V;
    std::string trace = "off";
};

csma::SimConfig load_with_overrides(const CommonOpts& o) {
    csma::SimConfigInput in = csma::load_config_file(o.config_path);
    if (o.seed) in.rng_seed = (std::uint64_t)*o.seed;
    if (o.horizon) in.horizon = *o.horizon;
    if (o.T) in.T = *o.T;
    if (o.W) in.W = *o.W;
    if (o.V) in.V = csma::Rational::parse(*o.V);
    return in.build();
}

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_path, "config file (json)")->required();
    cmd->add_option("--out", o.out_dir, "output directory");
    cmd->add_option("--seed", o.seed, "override rng seed");
    cmd->add_option("--horizon", o.horizon, "override horizon (slots)");
    cmd->add_option("--V", o.V, "override V (integer or \"p/q\")");
    cmd->add_option("--T", o.T, "override super-slot length");
    cmd->add_option("--W", o.W, "override control-phase mini-slots");
    cmd->add_option("--trace", o.trace, "on|off: write trace.csv and jobs.csv");
}

std::vector<std::vector<double>> arrival_means(const csma::SimConfig& cfg) {
    std::vector<std::vector<double>> mean(cfg.graph.link_count(),
                                          std::vector<double>(cfg.type_count(), 0.0));
    for (int i = 0; i < cfg.graph.link_count(); ++i)
        for (int m = 0; m < cfg.type_count(); ++m) {
            const double amax = (double)cfg.specs[i][m].arrival_max;
            mean[i][m] = cfg.arrival_law.kind == csma::ArrivalLaw::Kind::UniformInt
                             ? amax / 2.0
                             : amax * cfg.arrival_law.batch_p;
        }
    return mean;
}

int cmd_simulate(const CommonOpts& o) {
    csma::SimConfig cfg = load_with_overrides(o);
    fs::create_directories(o.out_dir);
    csma::Engine eng(std::make_shared<csma::SimConfig>(cfg));

    std::optional<csma::TraceCsvWriter> trace;
    std::optional<csma::JobEventCsvWriter> jobs;
    if (o.trace == "on") {
        trace.emplace((fs::path(o.out_dir) / "trace.csv").string(), cfg.type_count());
        jobs.emplace((fs::path(o.out_dir) / "jobs.csv").string());
        eng.set_observer([&](const csma::SlotTrace& t) {
            (*trace)(t);
            (*jobs)(t);
        });
    }
    csma::MetricsSummary sum = eng.run();
    if (jobs) jobs->finish(eng);
    csma::write_summary_json(sum, cfg, (fs::path(o.out_dir) / "summary.json").string());
    std::cout << "simulated " << sum.horizon << " slots | net utility "
              << csma::fmt_double(sum.net_utility) << " | delay violations "
              << sum.total_delay_violations << " | idle-while-active " << sum.idle_while_active
              << "\n";
    return 0;
}

int cmd_verify_dtmc(const CommonOpts& o, int weight_trials, double weight_max,
                    std::int64_t transitions, bool empirical, double perturb) {
    csma::SimConfig cfg = load_with_overrides(o);
    fs::create_directories(o.out_dir);
    const auto& g = cfg.graph;

    auto states = csma::enumerate_independent_sets(g);
    auto rho = csma::control_schedule_distribution(g, cfg.W, true);

    json report;
    report["graph_links"] = g.link_count();
    report["states"] = states.size();
    report["W"] = cfg.W;
    json rho_json = json::array();
    for (std::size_t k = 0; k < rho.support.size(); ++k) {
        std::int64_t c = rho.counts[k], t = rho.total, gg = std::gcd(c, t);
        rho_json.push_back({{"z", rho.support[k]},
                            {"prob", std::to_string(c / gg) + "/" + std::to_string(t / gg)}});
    }
    report["rho"] = rho_json;
    report["rho_covers_all_links"] = rho.covers_all_links(g.link_count());

    bool ok = rho.covers_all_links(g.link_count());
    std::mt19937_64 wrng(csma::splitmix64(cfg.rng_seed ^ 0xD73CULL));
    std::uniform_real_distribution<double> wdist(0.0, weight_max);
    json trials = json::array();
    double worst_dev = 0.0, worst_bal = 0.0, worst_row = 0.0, worst_tv = 0.0;
    for (int trial = 0; trial < weight_trials; ++trial) {
        std::vector<double> w(g.link_count());
        for (auto& x : w) x = wdist(wrng);
        auto model = csma::transition_matrix(g, states, rho, w, true);
        if (perturb > 0.0 && model.states.size() >= 2) {
            // deliberately break reversibility: move mass within one row
            int r = 0, c = 1;
            double shift = std::min(perturb, model.P[r][r]);
            model.P[r][r] -= shift;
            model.P[r][c] += shift;
        }
        auto stat = csma::stationary_distribution(model);
        double bal = csma::verify_detailed_balance(model, stat.pi_product);
        double tv = -1.0;
        if (empirical) {
            auto chain = csma::run_frozen_chain(g, cfg.W, w, states, stat.pi_product, transitions,
                                                csma::derive_subseed(cfg.rng_seed, trial));
            tv = chain.tv_distance;
            worst_tv = std::max(worst_tv, tv);
        }
        worst_dev = std::max(worst_dev, stat.max_deviation);
        worst_bal = std::max(worst_bal, bal);
        worst_row = std::max(worst_row, model.max_row_sum_error);
        json tj;
        tj["weights"] = w;
        tj["row_sum_error"] = model.max_row_sum_error;
        tj["diag_crosscheck_error"] = model.max_diag_crosscheck_error;
        tj["power_vs_product_max_dev"] = stat.max_deviation;
        tj["power_iterations"] = stat.iterations;
        tj["detailed_balance_residual"] = bal;
        if (empirical) tj["empirical_tv"] = tv;
        trials.push_back(tj);
    }
    report["trials"] = trials;

    const bool row_ok = worst_row <= 1e-12;
    const bool dev_ok = worst_dev <= 1e-9;
    const bool bal_ok = worst_bal <= 1e-10;
    const bool tv_ok = !empirical || worst_tv <= 0.02;
    ok = ok && row_ok && dev_ok && bal_ok && tv_ok;
    report["pass"] = ok;

    std::ofstream(fs::path(o.out_dir) / "verify_dtmc.json") << report.dump(2) << "\n";
    std::cout << (row_ok ? "[PASS]" : "[FAIL]") << " transition rows sum to 1 (max err "
              << worst_row << ")\n";
    std::cout << (dev_ok ? "[PASS]" : "[FAIL]")
              << " stationary distribution matches product form (max dev " << worst_dev << ")\n";
    std::cout << (bal_ok ? "[PASS]" : "[FAIL]") << " detailed balance (max residual " << worst_bal
              << ")\n";
    if (empirical)
        std::cout << (tv_ok ? "[PASS]" : "[FAIL]") << " empirical chain TV distance " << worst_tv
                  << " over " << transitions << " transitions\n";
    return ok ? 0 : 2;
}

int cmd_verify_drift(const CommonOpts& o) {
    csma::SimConfig cfg = load_with_overrides(o);
    fs::create_directories(o.out_dir);
    auto cfg_ptr = std::make_shared<csma::SimConfig>(cfg);
    csma::Engine eng(cfg_ptr);
    std::int64_t violations = 0, slots = 0;
    double worst_margin = -1e300;  // lhs - rhs, should stay <= 0
    eng.set_observer([&](const csma::SlotTrace& t) {
        auto d = csma::drift_check(t, *cfg_ptr);
        ++slots;
        worst_margin = std::max(worst_margin, d.lhs - d.rhs);
        if (!d.holds) ++violations;
    });
    eng.run();
    json report;
    report["slots"] = slots;
    report["violations"] = violations;
    report["worst_margin"] = worst_margin;
    report["B"] = csma::drift_B(cfg);
    report["pass"] = violations == 0;
    std::ofstream(fs::path(o.out_dir) / "verify_drift.json") << report.dump(2) << "\n";
    std::cout << (violations == 0 ? "[PASS]" : "[FAIL]") << " drift inequality held on "
              << (slots - violations) << "/" << slots << " slots (worst lhs-rhs margin "
              << worst_margin << ")\n";
    return violations == 0 ? 0 : 2;
}

int cmd_audit_delay(const CommonOpts& o) {
    csma::SimConfig cfg = load_with_overrides(o);
    fs::create_directories(o.out_dir);
    csma::Engine eng(std::make_shared<csma::SimConfig>(cfg));
    csma::MetricsSummary sum = eng.run();
    json report;
    report["horizon"] = sum.horizon;
    report["delay_violations"] = sum.total_delay_violations;
    json vio = json::array();
    for (const auto& v : eng.violations()) {
        vio.push_back({{"job_id", v.job.job_id},
                       {"link", v.link},
                       {"type", v.job.type_id},
                       {"admit_slot", v.job.admit_slot},
                       {"depart_slot", *v.job.depart_slot},
                       {"delay", *v.job.depart_slot - v.job.admit_slot}});
        if (vio.size() >= 100) break;
    }
    report["first_violations"] = vio;
    std::int64_t overdue = 0;
    for (const auto& m : sum.per) overdue += m.pending_overdue;
    report["pending_overdue"] = overdue;
    report["pass"] = sum.total_delay_violations == 0;
    std::ofstream(fs::path(o.out_dir) / "audit_delay.json") << report.dump(2) << "\n";
    std::cout << (sum.total_delay_violations == 0 ? "[PASS]" : "[FAIL]") << " delay audit: "
              << sum.total_delay_violations << " violations over " << sum.horizon
              << " slots (pending overdue: " << overdue << ")\n";
    return sum.total_delay_violations == 0 ? 0 : 2;
}

int cmd_offline_bound(const CommonOpts& o) {
    csma::SimConfig cfg = load_with_overrides(o);
    fs::create_directories(o.out_dir);
    auto bound = csma::offline_optimum(cfg.graph, cfg.specs, arrival_means(cfg), *cfg.utility);
    json report;
    report["utility"] = bound.utility;
    report["certificate_gap"] = bound.certificate_gap;
    report["capacity"] = bound.capacity;
    report["rates"] = bound.rates;
    std::ofstream(fs::path(o.out_dir) / "offline_bound.json") << report.dump(2) << "\n";
    std::cout << "offline utility bound: " << csma::fmt_double(bound.utility)
              << " (certificate gap " << bound.certificate_gap << ")\n";
    return 0;
}

int cmd_sweep(const CommonOpts& o, const std::string& v_list, int seeds) {
    csma::SimConfigInput base = csma::load_config_file(o.config_path);
    if (o.horizon) base.horizon = *o.horizon;
    if (o.W) base.W = *o.W;
    fs::create_directories(o.out_dir);

    std::vector<csma::Rational> vs;
    {
        std::stringstream ss(v_list);
        std::string tok;
        while (std::getline(ss, tok, ',')) vs.push_back(csma::Rational::parse(tok));
    }
    if (vs.empty()) throw csma::ConfigError("sweep: empty V list");

    // offline ceiling is V-independent
    csma::SimConfig probe = base.build();
    auto bound = csma::offline_optimum(probe.graph, probe.specs, arrival_means(probe),
                                       *probe.utility);

    struct Cell {
        csma::Rational V;
        std::int64_t T;
        std::uint64_t seed;
        double utility = 0.0;
    };
    std::vector<Cell> cells;
    const std::int64_t s_max = probe.s_max();
    for (const auto& v : vs) {
        const std::int64_t t_len =
            (std::int64_t)std::ceil(std::sqrt(v.to_double())) * s_max;  // keeps T/V -> 0
        for (int s = 0; s < seeds; ++s)
            cells.push_back({v, t_len, csma::derive_subseed(base.rng_seed, cells.size()), 0.0});
    }

#pragma omp parallel for schedule(dynamic)
    for (int c = 0; c < (int)cells.size(); ++c) {
        csma::SimConfigInput in = base;  // each cell owns its instance
        in.V = cells[c].V;
        in.T = cells[c].T;
        in.rng_seed = cells[c].seed;
        csma::Engine eng(std::make_shared<csma::SimConfig>(in.build()));
        cells[c].utility = eng.run().net_utility;
    }

    std::ofstream csv(fs::path(o.out_dir) / "sweep.csv");
    csv << "V,T,seed,net_utility,offline_bound,gap\n";
    for (const auto& c : cells)
        csv << c.V.str() << ',' << c.T << ',' << c.seed << ',' << csma::fmt_double(c.utility)
            << ',' << csma::fmt_double(bound.utility) << ','
            << csma::fmt_double(bound.utility - c.utility) << "\n";

    std::cout << "V,T,mean_utility,std,offline_bound,mean_gap\n";
    for (const auto& v : vs) {
        double mean = 0.0, var = 0.0;
        int n = 0;
        std::int64_t t_len = 0;
        for (const auto& c : cells)
            if (c.V == v) {
                mean += c.utility;
                ++n;
                t_len = c.T;
            }
        mean /= n;
        for (const auto& c : cells)
            if (c.V == v) var += (c.utility - mean) * (c.utility - mean);
        var = n > 1 ? var / (n - 1) : 0.0;
        std::cout << v.str() << ',' << t_len << ',' << csma::fmt_double(mean) << ','
                  << csma::fmt_double(std::sqrt(var)) << ',' << csma::fmt_double(bound.utility)
                  << ',' << csma::fmt_double(bound.utility - mean) << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"slot-accurate CSMA scheduling simulator and verification suite"};
    app.require_subcommand(1);

    CommonOpts sim_o, dtmc_o, drift_o, audit_o, off_o, sweep_o;
    int weight_trials = 5, sweep_seeds = 5;
    double weight_max = 3.0, perturb = 0.0;
    std::int64_t transitions = 1'000'000;
    bool empirical = false;
    std::string v_list = "10,100,1000";

    auto* sim = app.add_subcommand("simulate", "run the dynamic algorithm and emit summary/trace");
    add_common(sim, sim_o);

    auto* dtmc = app.add_subcommand(
        "verify-dtmc", "exact schedule-chain checks: product form, balance, empirical agreement");
    add_common(dtmc, dtmc_o);
    dtmc->add_option("--weight-trials", weight_trials, "random frozen-weight vectors to test");
    dtmc->add_option("--weight-max", weight_max, "weights drawn uniformly from [0, max]");
    dtmc->add_option("--transitions", transitions, "empirical chain length");
    dtmc->add_flag("--empirical", empirical, "also compare empirical frequencies (slower)");
    dtmc->add_option("--perturb", perturb,
                     "deliberately shift this much transition mass (negative control)");

    auto* drift = app.add_subcommand("verify-drift", "check the per-slot drift bound on a run");
    add_common(drift, drift_o);

    auto* audit = app.add_subcommand("audit-delay", "re-run and flag jobs that missed deadlines");
    add_common(audit, audit_o);

    auto* off = app.add_subcommand("offline-bound", "time-sharing utility ceiling");
    add_common(off, off_o);

    auto* sweep = app.add_subcommand("sweep", "V sweep with T = ceil(sqrt(V))*s_max per cell");
    add_common(sweep, sweep_o);
    sweep->add_option("--V-list", v_list, "comma-separated V values");
    sweep->add_option("--seeds", sweep_seeds, "seeds per cell");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (sim->parsed()) return cmd_simulate(sim_o);
        if (dtmc->parsed())
            return cmd_verify_dtmc(dtmc_o, weight_trials, weight_max, transitions, empirical,
                                   perturb);
        if (drift->parsed()) return cmd_verify_drift(drift_o);
        if (audit->parsed()) return cmd_audit_delay(audit_o);
        if (off->parsed()) return cmd_offline_bound(off_o);
        if (sweep->parsed()) return cmd_sweep(sweep_o, v_list, sweep_seeds);
    } catch (const csma::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const csma::GraphError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const csma::OracleError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const csma::EngineBug& e) {
        std::cerr << "invariant failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
