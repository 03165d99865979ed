// Acceptance suite: one line per criterion, exit 0 only if all pass.
//
//   acceptance [--runs N] [--jobs N] [--seed S]
//
// The campaign criteria default to 1000 fuzzed runs per algorithm.

#include <atomic>
#include <chrono>
#include <cstring>
#include <iostream>

#include "stabforge/harness.hpp"
#include "stabforge/rollback.hpp"

using namespace stabforge;

namespace {

struct CampaignStats {
    std::atomic<std::size_t> runs{0};
    std::atomic<std::size_t> not_silent{0};       // criterion 1
    std::atomic<std::size_t> round_violations{0};  // criterion 2
    std::atomic<std::size_t> move_violations{0};   // criterion 3
    std::atomic<std::size_t> invariant_violations{0};  // criterion 4
    std::atomic<std::size_t> checked_steps{0};
    std::atomic<std::size_t> bound_below_t{0};
};

bool check_named(const BoundReport& report,
                 std::initializer_list<const char*> names) {
    for (const BoundCheck& c : report.checks) {
        for (const char* name : names) {
            if (c.name == name && c.applicable && !c.pass) return false;
        }
    }
    return true;
}

void campaign(const std::string& instance_name, std::size_t runs,
              std::size_t jobs, std::uint64_t master_seed, CampaignStats& stats,
              std::string& first_failure) {
    static const char* kDaemons[] = {"sync", "central-random", "dist-random",
                                     "adv"};
    static const double kDensities[] = {0.0, 0.02, 0.05, 0.1, 0.3};
    std::mutex failure_mutex;

    parallel_for(runs, jobs, [&](std::size_t i) {
        Rng rng = Rng(master_seed).split(std::hash<std::string>{}(instance_name))
                      .split(i);
        InstanceOptions opts;
        Instance inst = make_instance(instance_name, opts);

        GraphSpec spec;
        spec.n = 5 + rng.below(56);  // n in [5..60]
        spec.seed = rng.next();
        if (inst.labeling == LabelingKind::OrientedRing) {
            spec.kind = GraphSpec::Kind::OrientedRing;
        } else {
            spec.kind = GraphSpec::Kind::RandomConnected;
            spec.extra_edge_prob = kDensities[i % 5];
        }
        Topology topo = generate_graph(spec, inst.labeling);

        TransParams params;
        params.mode = Mode::Lazy;
        params.bound = 2 * topo.diameter() + 4;

        StateMap init = inst.make_initial(topo, rng.next());
        SyncHistory oracle =
            run_to_stability(topo, inst.alg, init, default_max_rounds(topo));
        if (oracle.stability_time > *params.bound) ++stats.bound_below_t;

        TransConfig start = fuzz_config(topo, inst.alg, oracle, params, rng.next());
        DaemonPolicy policy = make_policy(topo, kDaemons[i % 4], "", rng.next());
        RunSummary summary = run_checked(topo, inst, params, policy,
                                         std::move(start), oracle, 0);

        ++stats.runs;
        stats.checked_steps += summary.steps;
        const bool silent = summary.terminated && !summary.terminal_issue;
        if (!silent) ++stats.not_silent;
        if (!check_named(summary.bounds, {"rounds-to-clean", "rounds-total"}))
            ++stats.round_violations;
        if (!check_named(summary.bounds,
                         {"reset-moves", "update-moves-per-node-before-clean",
                          "propagate-moves-aggregate", "clear-moves-before-clean"}))
            ++stats.move_violations;
        if (!summary.invariant_violations.empty())
            ++stats.invariant_violations;

        if (!silent || !summary.bounds.all_pass() ||
            !summary.invariant_violations.empty()) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (first_failure.empty()) {
                first_failure = instance_name + " run " + std::to_string(i) + ": ";
                if (!summary.terminated)
                    first_failure += "not terminated";
                else if (summary.terminal_issue)
                    first_failure += *summary.terminal_issue;
                else if (!summary.invariant_violations.empty())
                    first_failure += summary.invariant_violations.front();
                else
                    first_failure += "bound violation";
            }
        }
    });
}

struct Criterion {
    std::string name;
    bool pass;
    std::string detail;
};

void report(std::vector<Criterion>& all, const std::string& name, bool pass,
            const std::string& detail) {
    all.push_back({name, pass, detail});
    std::cout << "[" << all.size() << "] " << name << ": "
              << (pass ? "PASS" : "FAIL") << " (" << detail << ")\n"
              << std::flush;
}

}  // namespace

int main(int argc, char** argv) {
    std::size_t runs = 1000;
    std::size_t jobs = 0;
    std::uint64_t seed = 20240601;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--runs") == 0 && i + 1 < argc)
            runs = std::stoul(argv[++i]);
        else if (std::strcmp(argv[i], "--jobs") == 0 && i + 1 < argc)
            jobs = std::stoul(argv[++i]);
        else if (std::strcmp(argv[i], "--seed") == 0 && i + 1 < argc)
            seed = std::stoull(argv[++i]);
    }

    std::vector<Criterion> results;
    const std::vector<std::string> names = instance_names();

    // Criteria 1-4 share one campaign over all four algorithms.
    CampaignStats stats;
    std::string first_failure;
    for (const std::string& name : names)
        campaign(name, runs, jobs, seed, stats, first_failure);

    {
        const std::size_t total = stats.runs.load();
        std::string detail = std::to_string(total - stats.not_silent.load()) +
                             "/" + std::to_string(total) +
                             " runs terminal and output-correct";
        if (stats.bound_below_t.load() != 0)
            detail += ", " + std::to_string(stats.bound_below_t.load()) +
                      " runs with B below the stability time";
        if (!first_failure.empty()) detail += "; first failure: " + first_failure;
        report(results, "silence and output correctness over fuzzed campaigns",
               stats.not_silent.load() == 0, detail);
    }
    report(results, "round budgets with exact constants",
           stats.round_violations.load() == 0,
           std::to_string(stats.round_violations.load()) + " violations over " +
               std::to_string(stats.runs.load()) + " runs");
    report(results, "move budgets with exact constants",
           stats.move_violations.load() == 0,
           std::to_string(stats.move_violations.load()) + " violations");
    report(results, "per-step invariant suite",
           stats.invariant_violations.load() == 0,
           std::to_string(stats.checked_steps.load()) + " steps checked, " +
               std::to_string(stats.invariant_violations.load()) + " violations");

    // Criterion 5: synchronous round budgets of the shipped algorithms.
    {
        std::size_t checked = 0, failures = 0;
        std::string why, detail;
        auto fail = [&](const std::string& what) {
            ++failures;
            if (detail.empty()) detail = what;
        };
        Rng rng = Rng(seed).split(5);
        for (int rep = 0; rep < 40; ++rep) {
            GraphSpec spec;
            spec.kind = GraphSpec::Kind::RandomConnected;
            spec.n = 5 + rng.below(56);
            spec.seed = rng.next();
            spec.extra_edge_prob = rep % 2 == 0 ? 0.05 : 0.2;
            for (const char* name : {"leader", "bfs", "cluster-front"}) {
                Instance inst = make_instance(name);
                Topology t = generate_graph(spec, inst.labeling);
                StateMap init = inst.make_initial(t, rng.next());
                SyncHistory hist =
                    run_to_stability(t, inst.alg, init, default_max_rounds(t));
                ++checked;
                const std::uint32_t budget =
                    std::string(name) == "cluster-front"
                        ? 2 * t.diameter() - 1
                        : t.diameter();
                if (hist.stability_time > budget)
                    fail(std::string(name) + ": stability time above budget");
                if (std::string(name) == "cluster-front" &&
                    hist.stability_time > 4 * t.diameter() + 2)
                    fail("cluster-front: composite budget exceeded");
                if (!inst.validate_stable(t, hist.rounds.back(), &why))
                    fail(std::string(name) + ": " + why);
            }
        }
        for (std::size_t n : {4u, 8u, 16u, 32u, 64u}) {
            Instance inst = make_instance("color3");
            GraphSpec spec;
            spec.kind = GraphSpec::Kind::OrientedRing;
            spec.n = n;
            Topology t = generate_graph(spec, inst.labeling);
            StateMap init = inst.make_initial(t, rng.next());
            SyncHistory hist =
                run_to_stability(t, inst.alg, init, default_max_rounds(t));
            ++checked;
            const double space = static_cast<double>(n) * n;
            if (hist.stability_time > log_star(space) + 7)
                fail("color3: stability time above the iterated-log budget");
            if (!inst.validate_stable(t, hist.rounds.back(), &why))
                fail("color3: " + why);
        }
        report(results, "synchronous stability budgets per algorithm",
               failures == 0,
               std::to_string(checked) + " oracle runs, " +
                   std::to_string(failures) + " violations" +
                   (detail.empty() ? "" : "; first: " + detail));
    }

    // Criterion 6: unbounded greedy executions never reach a terminal
    // configuration within the step budget.
    {
        const std::size_t budget = 100000;
        std::size_t terminations = 0;
        std::string detail;
        struct Probe {
            GraphSpec::Kind kind;
            std::size_t n;
            PolicyKind policy;
        };
        const std::vector<Probe> probes{
            {GraphSpec::Kind::Path, 4, PolicyKind::Synchronous},
            {GraphSpec::Kind::Ring, 6, PolicyKind::CentralRandom},
            {GraphSpec::Kind::Star, 7, PolicyKind::CentralRandom},
            {GraphSpec::Kind::RandomConnected, 10, PolicyKind::CentralRandom},
        };
        for (const Probe& probe : probes) {
            Instance inst = make_instance("leader");
            GraphSpec spec;
            spec.kind = probe.kind;
            spec.n = probe.n;
            spec.seed = 3;
            Topology t = generate_graph(spec, inst.labeling);
            StateMap init = inst.make_initial(t, 11);
            TransParams params;
            params.mode = Mode::Greedy;
            params.row_cap = static_cast<std::uint32_t>(budget + t.n() + 8);
            DaemonPolicy policy;
            policy.kind = probe.policy;
            policy.seed = 17;
            ExecutionTrace trace = run_execution(t, inst.alg, params,
                                                 clean_config(init), policy,
                                                 budget);
            if (trace.terminated || trace.steps.size() != budget) {
                ++terminations;
                if (detail.empty())
                    detail = "graph kind " + std::to_string(int(probe.kind)) +
                             " stopped early";
            }
        }
        report(results, "unbounded greedy executions never terminate",
               terminations == 0,
               std::to_string(probes.size()) + " graphs x " +
                   std::to_string(budget) + " steps" +
                   (detail.empty() ? "" : "; " + detail));
    }

    // Criterion 7: exponential lower bound of the full-recompute baseline,
    // against the polynomial budget of the history-replay transformation.
    {
        bool pass = true;
        std::string detail;
        for (std::uint32_t x = 1; x <= 13; ++x) {
            LowerBoundResult r = run_lower_bound(x);
            if (r.steps < (std::size_t(1) << x) - 1) {
                pass = false;
                detail = "x=" + std::to_string(x) + " below the bound";
            }
        }
        const auto start = std::chrono::steady_clock::now();
        ContrastReport contrast = rollback_contrast(14);
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                .count();
        if (contrast.rollback.steps < 16383) {
            pass = false;
            detail = "x=14 below the bound";
        }
        if (elapsed >= 5.0) {
            pass = false;
            detail = "x=14 took " + std::to_string(elapsed) + "s";
        }
        if (!contrast.transformer_terminated ||
            contrast.transformer_moves > contrast.transformer_budget) {
            pass = false;
            detail = "history-replay contrast out of budget";
        }
        report(results, "exponential lower bound of the naive baseline", pass,
               "x=14: " + std::to_string(contrast.rollback.steps) +
                   " steps vs 16383, replay " +
                   std::to_string(contrast.transformer_moves) + " moves (budget " +
                   std::to_string(static_cast<std::size_t>(
                       contrast.transformer_budget)) +
                   ") in " + std::to_string(elapsed).substr(0, 4) + "s" +
                   (detail.empty() ? "" : "; " + detail));
    }

    // Criterion 8: replaying a trace from its recorded header reproduces the
    // run bit-exactly.
    {
        std::size_t checked = 0, mismatches = 0;
        Rng rng = Rng(seed).split(8);
        static const char* kDaemons[] = {"sync", "central-random", "dist-random",
                                         "adv"};
        for (const std::string& name : names) {
            for (int rep = 0; rep < 6; ++rep) {
                Instance inst = make_instance(name);
                GraphSpec spec;
                spec.n = 5 + rng.below(30);
                spec.seed = rng.next();
                spec.kind = inst.labeling == LabelingKind::OrientedRing
                                ? GraphSpec::Kind::OrientedRing
                                : GraphSpec::Kind::RandomConnected;
                Topology t = generate_graph(spec, inst.labeling);
                TransParams params;
                params.bound = 2 * t.diameter() + 4;
                StateMap init = inst.make_initial(t, rng.next());
                SyncHistory oracle =
                    run_to_stability(t, inst.alg, init, default_max_rounds(t));
                TransConfig start =
                    fuzz_config(t, inst.alg, oracle, params, rng.next());
                DaemonPolicy policy = make_policy(t, kDaemons[rep % 4], "",
                                                  rng.next());
                const std::size_t max_steps = default_max_steps(t.n(), params);
                ExecutionTrace a = run_execution(t, inst.alg, params, start,
                                                 policy, max_steps);
                ExecutionTrace b = run_execution(t, inst.alg, params, start,
                                                 policy, max_steps);
                ExecutionTrace c = replay_trace(t, inst.alg, params, a);
                ++checked;
                const bool same =
                    a.final_config == b.final_config &&
                    a.round_marks == b.round_marks &&
                    a.final_config == c.final_config &&
                    a.round_marks == c.round_marks &&
                    tally_moves(t, inst.alg, params, a) ==
                        tally_moves(t, inst.alg, params, b);
                if (!same) ++mismatches;
            }
        }
        report(results, "trace replay determinism", mismatches == 0,
               std::to_string(checked) + " traces replayed, " +
                   std::to_string(mismatches) + " mismatches");
    }

    std::size_t passed = 0;
    for (const Criterion& c : results)
        if (c.pass) ++passed;
    std::cout << "ACCEPTANCE: " << passed << "/" << results.size() << " criteria pass\n";
    return passed == results.size() ? 0 : 1;
}
