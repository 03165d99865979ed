#include "stabforge/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include "stabforge/rollback.hpp"

namespace stabforge {

namespace {

std::string pad3(std::size_t v) {
    std::string s = std::to_string(v);
    return std::string(s.size() >= 3 ? 0 : 3 - s.size(), '0') + s;
}

std::vector<std::pair<std::size_t, std::size_t>> tree_from_pruefer(
    std::size_t n, Rng& rng) {
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    if (n < 2) return edges;
    if (n == 2) {
        edges.emplace_back(0, 1);
        return edges;
    }
    std::vector<std::size_t> seq(n - 2);
    for (auto& v : seq) v = rng.below(n);
    std::vector<std::size_t> degree(n, 1);
    for (std::size_t v : seq) ++degree[v];
    std::vector<bool> used(n, false);
    for (std::size_t v : seq) {
        std::size_t leaf = n;
        for (std::size_t u = 0; u < n; ++u) {
            if (degree[u] == 1 && !used[u]) {
                leaf = u;
                break;
            }
        }
        edges.emplace_back(leaf, v);
        used[leaf] = true;
        --degree[v];
    }
    std::size_t a = n, b = n;
    for (std::size_t u = 0; u < n; ++u) {
        if (degree[u] == 1 && !used[u]) {
            if (a == n)
                a = u;
            else
                b = u;
        }
    }
    edges.emplace_back(a, b);
    return edges;
}

double unit_real(Rng& rng) {
    return static_cast<double>(rng.next() >> 11) * 0x1.0p-53;
}

}  // namespace

GraphSpec::Kind graph_kind_from_name(const std::string& name) {
    if (name == "path") return GraphSpec::Kind::Path;
    if (name == "ring") return GraphSpec::Kind::Ring;
    if (name == "oriented-ring") return GraphSpec::Kind::OrientedRing;
    if (name == "star") return GraphSpec::Kind::Star;
    if (name == "random-connected") return GraphSpec::Kind::RandomConnected;
    throw std::invalid_argument("unknown graph generator '" + name + "'");
}

Topology generate_graph(const GraphSpec& spec, LabelingKind labeling) {
    if (spec.kind == GraphSpec::Kind::File) {
        return load_graph_file(spec.file);
    }
    const std::size_t n = spec.n;
    if (n == 0) throw std::invalid_argument("graph generator: n must be positive");

    std::vector<std::pair<std::size_t, std::size_t>> edges;
    Rng rng(spec.seed);
    switch (spec.kind) {
        case GraphSpec::Kind::Path:
            for (std::size_t i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
            break;
        case GraphSpec::Kind::Ring:
        case GraphSpec::Kind::OrientedRing:
            if (n < 3)
                throw std::invalid_argument("ring generators need at least 3 nodes");
            for (std::size_t i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
            break;
        case GraphSpec::Kind::Star:
            for (std::size_t i = 1; i < n; ++i) edges.emplace_back(0, i);
            break;
        case GraphSpec::Kind::RandomConnected: {
            edges = tree_from_pruefer(n, rng);
            std::set<std::pair<std::size_t, std::size_t>> have;
            for (const auto& [u, v] : edges)
                have.insert({std::min(u, v), std::max(u, v)});
            for (std::size_t u = 0; u < n; ++u) {
                for (std::size_t v = u + 1; v < n; ++v) {
                    if (have.count({u, v})) continue;
                    if (unit_real(rng) < spec.extra_edge_prob) edges.emplace_back(u, v);
                }
            }
            break;
        }
        case GraphSpec::Kind::File:
            break;  // handled above
    }

    std::vector<std::string> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = "n" + pad3(i);

    if (labeling == LabelingKind::OrientedRing &&
        spec.kind != GraphSpec::Kind::OrientedRing)
        throw std::invalid_argument(
            "this algorithm needs the oriented-ring generator");

    std::vector<Arc> arcs;
    switch (labeling) {
        case LabelingKind::Plain:
            for (const auto& [u, v] : edges) {
                arcs.push_back({ids[u], ids[v], ""});
                arcs.push_back({ids[v], ids[u], ""});
            }
            break;
        case LabelingKind::OrientedRing:
            // Arc from the clockwise successor carries R, from the
            // predecessor L; both directions of an edge then differ.
            for (std::size_t v = 0; v < n; ++v) {
                arcs.push_back({ids[(v + 1) % n], ids[v], "R"});
                arcs.push_back({ids[(v + n - 1) % n], ids[v], "L"});
            }
            break;
        case LabelingKind::Ports: {
            std::vector<std::vector<std::size_t>> nbrs(n);
            for (const auto& [u, v] : edges) {
                nbrs[u].push_back(v);
                nbrs[v].push_back(u);
            }
            for (std::size_t v = 0; v < n; ++v) {
                std::sort(nbrs[v].begin(), nbrs[v].end());
                for (std::size_t k = 0; k < nbrs[v].size(); ++k)
                    arcs.push_back({ids[nbrs[v][k]], ids[v], pad3(k)});
            }
            break;
        }
    }
    return build_topology(std::move(ids), arcs);
}

std::uint64_t resolve_seed(std::uint64_t configured) {
    if (const char* env = std::getenv("STABFORGE_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw std::invalid_argument("STABFORGE_SEED is not a number");
        }
    }
    return configured;
}

DaemonPolicy make_policy(const Topology& t, const std::string& daemon,
                         const std::string& script_file, std::uint64_t seed) {
    std::string name = daemon;
    std::string file = script_file;
    if (name.rfind("script:", 0) == 0) {
        file = name.substr(7);
        name = "script";
    }
    DaemonPolicy policy = policy_from_name(name, seed);
    if (policy.kind == PolicyKind::Scripted) {
        if (file.empty())
            throw std::invalid_argument("scripted daemon needs a script file");
        std::ifstream in(file);
        if (!in) throw IoError("cannot open script file '" + file + "'");
        nlohmann::json j;
        in >> j;
        for (const nlohmann::json& step : j.at("steps")) {
            std::vector<NodeIndex> sel;
            for (const nlohmann::json& id : step)
                sel.push_back(t.index_of(id.get<std::string>()));
            policy.script.push_back(std::move(sel));
        }
    }
    return policy;
}

RunSummary run_checked(const Topology& t, const Instance& inst,
                       const TransParams& params, const DaemonPolicy& policy,
                       TransConfig initial, const SyncHistory& oracle,
                       std::size_t max_steps, ExecutionTrace* out_trace) {
    RunSummary summary;
    summary.expects_infinite = params.expects_infinite_run();
    summary.stability_time = oracle.stability_time;
    summary.tally.per_node.assign(t.n(), {});
    summary.tally.update_before_clean_per_node.assign(t.n(), 0);

    InvariantMonitor monitor(t);
    auto observer = [&](const Engine& eng, std::size_t step_index,
                        const Engine::StepResult& result, const StepRecord& rec) {
        if (step_index == 0) {
            monitor.at_start(eng);
            if (eng.clean()) summary.tally.first_clean_step = 0;
            return;
        }
        monitor.after_step(eng, step_index, result, rec);
        const bool before_clean = !summary.tally.first_clean_step.has_value();
        for (std::size_t i = 0; i < rec.selected.size(); ++i) {
            const NodeIndex p = rec.selected[i];
            MoveCounts& node = summary.tally.per_node[p];
            switch (rec.rules[i].kind) {
                case RuleKind::Reset:
                    ++node.reset;
                    ++summary.tally.global.reset;
                    break;
                case RuleKind::Propagate:
                    ++node.propagate;
                    ++summary.tally.global.propagate;
                    if (before_clean) ++summary.tally.propagate_before_clean;
                    break;
                case RuleKind::Clear:
                    ++node.clear;
                    ++summary.tally.global.clear;
                    if (before_clean) ++summary.tally.clear_before_clean;
                    break;
                case RuleKind::Update:
                    ++node.update;
                    ++summary.tally.global.update;
                    if (before_clean) {
                        ++summary.tally.update_before_clean;
                        ++summary.tally.update_before_clean_per_node[p];
                    }
                    break;
            }
        }
        if (!summary.tally.first_clean_step && eng.clean())
            summary.tally.first_clean_step = step_index;
    };

    const std::size_t budget =
        max_steps != 0 ? max_steps : default_max_steps(t.n(), params);
    ExecutionTrace trace = run_execution(t, inst.alg, params, std::move(initial),
                                         policy, budget, observer);

    summary.terminated = trace.terminated;
    summary.stop = trace.stop;
    summary.steps = trace.steps.size();
    summary.rounds = trace.round_marks.size();
    summary.moves = summary.tally.global;
    for (const TransNodeState& node : trace.final_config)
        summary.final_height = std::max(summary.final_height, node.height());
    summary.bounds = verify_bounds(t, params, trace, summary.tally,
                                   oracle.stability_time);
    summary.invariant_violations = monitor.violations();
    if (trace.terminated)
        summary.terminal_issue =
            check_terminal_shape(t, oracle, params, trace.final_config);
    if (out_trace) *out_trace = std::move(trace);
    return summary;
}

void parallel_for(std::size_t count, std::size_t jobs,
                  const std::function<void(std::size_t)>& body) {
    if (count == 0) return;
    std::size_t workers = jobs != 0 ? jobs : std::thread::hardware_concurrency();
    workers = std::max<std::size_t>(1, std::min(workers, count));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (std::thread& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

FuzzReport fuzz_campaign(const Topology& t, const Instance& inst,
                         const TransParams& params, const std::string& daemon,
                         std::uint64_t seed, std::size_t count,
                         std::size_t max_steps, std::size_t jobs) {
    FuzzReport report;
    report.runs = count;
    if (count == 0) return report;

    Rng master(seed);
    const StateMap init = inst.make_initial(t, master.split(1).next());
    const SyncHistory oracle =
        run_to_stability(t, inst.alg, init, default_max_rounds(t));

    std::vector<RunSummary> summaries(count);
    parallel_for(count, jobs, [&](std::size_t i) {
        Rng run_rng = Rng(seed).split(1000 + i);
        TransConfig start = fuzz_config(t, inst.alg, oracle, params, run_rng.next());
        DaemonPolicy policy = make_policy(t, daemon, "", run_rng.next());
        summaries[i] =
            run_checked(t, inst, params, policy, std::move(start), oracle, max_steps);
    });

    const double n3 = static_cast<double>(t.n()) * t.n() * t.n();
    for (std::size_t i = 0; i < count; ++i) {
        const RunSummary& s = summaries[i];
        if (s.terminated) ++report.terminated;
        if (!s.bounds.all_pass()) ++report.bound_failures;
        if (!s.invariant_violations.empty()) ++report.invariant_failures;
        if (s.terminated && s.terminal_issue) ++report.terminal_failures;
        report.max_moves = std::max(report.max_moves, s.moves.total());
        report.max_rounds = std::max(report.max_rounds, s.rounds);
        report.worst_moves_over_n3 =
            std::max(report.worst_moves_over_n3, s.moves.total() / n3);
        if (report.diagnostics.size() < 8) {
            if (!s.terminated)
                report.diagnostics.push_back("run " + std::to_string(i) +
                                             ": did not terminate");
            else if (s.terminal_issue)
                report.diagnostics.push_back("run " + std::to_string(i) + ": " +
                                             *s.terminal_issue);
            else if (!s.invariant_violations.empty())
                report.diagnostics.push_back("run " + std::to_string(i) + ": " +
                                             s.invariant_violations.front());
        }
    }
    return report;
}

nlohmann::json fuzz_report_to_json(const FuzzReport& report) {
    return nlohmann::json{{"runs", report.runs},
                          {"terminated", report.terminated},
                          {"bound_failures", report.bound_failures},
                          {"invariant_failures", report.invariant_failures},
                          {"terminal_failures", report.terminal_failures},
                          {"max_moves", report.max_moves},
                          {"max_rounds", report.max_rounds},
                          {"worst_moves_over_n3", report.worst_moves_over_n3},
                          {"diagnostics", report.diagnostics},
                          {"all_ok", report.all_ok()}};
}

namespace {

struct Prepared {
    Topology topo;
    Instance inst;
    StateMap init;
    SyncHistory oracle;
};

Prepared prepare(const CampaignConfig& config, std::uint64_t seed) {
    Instance inst = make_instance(config.instance, config.options);
    GraphSpec spec = config.graph;
    if (spec.kind != GraphSpec::Kind::File)
        spec.seed = Rng(seed).split(7).next();
    Topology topo = generate_graph(spec, inst.labeling);
    StateMap init = inst.make_initial(topo, Rng(seed).split(1).next());
    SyncHistory oracle =
        run_to_stability(topo, inst.alg, init, default_max_rounds(topo));
    return {std::move(topo), std::move(inst), std::move(init), std::move(oracle)};
}

void ensure_dir(const std::string& dir) {
    if (!dir.empty()) std::filesystem::create_directories(dir);
}

}  // namespace

int cmd_oracle(const CampaignConfig& config, std::ostream& out, std::ostream& err) {
    try {
        const std::uint64_t seed = resolve_seed(config.seed);
        Prepared p = prepare(config, seed);
        if (!config.out_dir.empty()) {
            ensure_dir(config.out_dir);
            std::ofstream file(config.out_dir + "/oracle.jsonl");
            write_history_jsonl(file, p.topo, p.inst.alg, p.oracle);
        } else {
            write_history_jsonl(out, p.topo, p.inst.alg, p.oracle);
        }
        out << "T=" << p.oracle.stability_time << '\n';
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
}

int cmd_run(const CampaignConfig& config, std::ostream& out, std::ostream& err) {
    try {
        const std::uint64_t seed = resolve_seed(config.seed);
        Prepared p = prepare(config, seed);
        Rng master(seed);

        TransConfig initial;
        if (!config.init_config_file.empty()) {
            std::ifstream in(config.init_config_file);
            if (!in)
                throw IoError("cannot open configuration file '" +
                              config.init_config_file + "'");
            nlohmann::json j;
            in >> j;
            initial = config_from_json(p.topo, p.inst.alg, j);
            std::string why;
            StateMap init_states(p.topo.n());
            for (NodeIndex q = 0; q < p.topo.n(); ++q)
                init_states[q] = initial[q].rows[0];
            if (!p.inst.alg.is_valid(p.topo, init_states, &why))
                throw SyncError("invalid initial configuration: " + why);
        } else if (config.corrupt) {
            initial = fuzz_config(p.topo, p.inst.alg, p.oracle, config.params,
                                  master.split(3).next());
        } else {
            initial = clean_config(p.init);
        }

        DaemonPolicy policy = make_policy(p.topo, config.daemon,
                                          config.script_file,
                                          master.split(4).next());
        ExecutionTrace trace;
        RunSummary summary =
            run_checked(p.topo, p.inst, config.params, policy, std::move(initial),
                        p.oracle, config.max_steps, &trace);

        if (!config.out_dir.empty()) {
            ensure_dir(config.out_dir);
            std::ofstream tf(config.out_dir + "/trace.jsonl");
            TraceBundle bundle{config.instance, config.options, config.params,
                               policy, graph_to_json(p.topo), trace};
            write_trace_jsonl(tf, p.topo, p.inst.alg, bundle);
            std::ofstream bf(config.out_dir + "/bounds.json");
            bf << bound_report_to_json(summary.bounds).dump(2) << '\n';
            std::ofstream cf(config.out_dir + "/bounds.csv");
            cf << bound_report_to_csv(summary.bounds);
        }

        nlohmann::json status{{"terminated", summary.terminated},
                              {"stop", stop_reason_text(summary.stop)},
                              {"steps", summary.steps},
                              {"rounds", summary.rounds},
                              {"moves",
                               {{"R", summary.moves.reset},
                                {"P", summary.moves.propagate},
                                {"C", summary.moves.clear},
                                {"U", summary.moves.update}}},
                              {"stability_time", summary.stability_time},
                              {"final_height", summary.final_height},
                              {"bounds_pass", summary.bounds.all_pass()},
                              {"invariants_ok",
                               summary.invariant_violations.empty()}};
        if (summary.expects_infinite) status["expected-infinite"] = true;
        if (summary.terminal_issue) status["terminal_issue"] = *summary.terminal_issue;
        out << status.dump(2) << '\n';

        if (!summary.ok()) {
            for (const std::string& v : summary.invariant_violations)
                err << "invariant: " << v << '\n';
            return 1;
        }
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
}

int cmd_fuzz(const CampaignConfig& config, std::ostream& out, std::ostream& err) {
    try {
        const std::uint64_t seed = resolve_seed(config.seed);
        Instance inst = make_instance(config.instance, config.options);
        GraphSpec spec = config.graph;
        if (spec.kind != GraphSpec::Kind::File)
            spec.seed = Rng(seed).split(7).next();
        Topology topo = generate_graph(spec, inst.labeling);
        FuzzReport report =
            fuzz_campaign(topo, inst, config.params, config.daemon, seed,
                          config.fuzz_count, config.max_steps, config.jobs);
        if (!config.out_dir.empty()) {
            ensure_dir(config.out_dir);
            std::ofstream f(config.out_dir + "/fuzz_report.json");
            f << fuzz_report_to_json(report).dump(2) << '\n';
        }
        out << fuzz_report_to_json(report).dump(2) << '\n';
        return report.all_ok() ? 0 : 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
}

int cmd_rollback(std::uint32_t x, bool with_contrast, std::ostream& out,
                 std::ostream& err) {
    try {
        nlohmann::json j;
        if (with_contrast) {
            ContrastReport report = rollback_contrast(x);
            const bool pass =
                report.rollback.steps >= report.two_pow_bound &&
                report.transformer_terminated &&
                report.transformer_moves <= report.transformer_budget;
            j = {{"x", report.rollback.x},
                 {"nodes", report.rollback.nodes},
                 {"diameter", report.rollback.diameter},
                 {"steps", report.rollback.steps},
                 {"2^x-1", report.two_pow_bound},
                 {"transformer_moves", report.transformer_moves},
                 {"transformer_budget", report.transformer_budget},
                 {"transformer_terminated", report.transformer_terminated},
                 {"pass", pass}};
        } else {
            LowerBoundResult result = run_lower_bound(x);
            j = {{"x", result.x},
                 {"nodes", result.nodes},
                 {"diameter", result.diameter},
                 {"steps", result.steps},
                 {"2^x-1", std::ldexp(1.0, static_cast<int>(x)) - 1.0},
                 {"pass", result.steps >= std::ldexp(1.0, static_cast<int>(x)) - 1.0}};
        }
        out << j.dump(2) << '\n';
        return j.at("pass").get<bool>() ? 0 : 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace stabforge
