#include "doctest.h"

#include "stabforge/analysis.hpp"
#include "stabforge/instances.hpp"

using namespace stabforge;

namespace {

struct Setup {
    Topology topo;
    Instance inst;
    SyncHistory oracle;
    TransParams params;
};

Setup ring_setup(std::size_t n, std::uint64_t seed, Mode mode,
                 std::optional<std::uint32_t> bound) {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back("v" + std::to_string(i));
    std::vector<Arc> arcs;
    for (std::size_t i = 0; i < n; ++i) {
        arcs.push_back({ids[i], ids[(i + 1) % n], ""});
        arcs.push_back({ids[(i + 1) % n], ids[i], ""});
    }
    Topology topo(ids, arcs);
    Instance inst = make_instance("leader");
    StateMap init = inst.make_initial(topo, seed);
    SyncHistory oracle = run_to_stability(topo, inst.alg, init, default_max_rounds(topo));
    TransParams params;
    params.mode = mode;
    params.bound = bound;
    return {std::move(topo), std::move(inst), std::move(oracle), params};
}

DaemonPolicy policy_of(PolicyKind kind, std::uint64_t seed) {
    DaemonPolicy p;
    p.kind = kind;
    p.seed = seed;
    return p;
}

}  // namespace

TEST_SUITE("daemon") {

TEST_CASE("engine caches agree with the plain guard evaluation") {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        Setup s = ring_setup(6, seed, Mode::Lazy, 8);
        TransConfig start = fuzz_config(s.topo, s.inst.alg, s.oracle, s.params, seed);
        DaemonPolicy policy = policy_of(PolicyKind::DistributedRandom, seed * 13);

        auto check_engine = [&](const Engine& eng, std::size_t,
                                const Engine::StepResult&, const StepRecord&) {
            const TransConfig& cfg = eng.config();
            for (NodeIndex p = 0; p < s.topo.n(); ++p) {
                CHECK(eng.rule_of(p) ==
                      enabled_rule(s.topo, s.inst.alg, cfg, s.params, p));
                CHECK(eng.root_at(p) == is_root(s.topo, s.inst.alg, cfg, p));
            }
            CHECK(eng.clean() == is_clean(s.topo, s.inst.alg, cfg));
            CHECK(eng.almost_clean() == is_almost_clean(s.topo, s.inst.alg, cfg));
        };
        run_execution(s.topo, s.inst.alg, s.params, start, policy, 500, check_engine);
    }
}

TEST_CASE("executions are reproducible from their parameters") {
    Setup s = ring_setup(7, 3, Mode::Lazy, 10);
    TransConfig start = fuzz_config(s.topo, s.inst.alg, s.oracle, s.params, 42);
    for (PolicyKind kind : {PolicyKind::Synchronous, PolicyKind::CentralRandom,
                            PolicyKind::DistributedRandom,
                            PolicyKind::AdversarialHeuristic}) {
        DaemonPolicy policy = policy_of(kind, 99);
        ExecutionTrace a =
            run_execution(s.topo, s.inst.alg, s.params, start, policy, 5000);
        ExecutionTrace b =
            run_execution(s.topo, s.inst.alg, s.params, start, policy, 5000);
        CHECK(a.terminated);
        CHECK(a.final_config == b.final_config);
        CHECK(a.round_marks == b.round_marks);
        REQUIRE(a.steps.size() == b.steps.size());
        for (std::size_t i = 0; i < a.steps.size(); ++i) {
            CHECK(a.steps[i].selected == b.steps[i].selected);
            CHECK(a.steps[i].rules == b.steps[i].rules);
        }
    }
}

TEST_CASE("steps bound moves which bound n times steps") {
    Setup s = ring_setup(6, 5, Mode::Lazy, 8);
    TransConfig start = fuzz_config(s.topo, s.inst.alg, s.oracle, s.params, 7);
    ExecutionTrace trace =
        run_execution(s.topo, s.inst.alg, s.params, start,
                      policy_of(PolicyKind::DistributedRandom, 3), 5000);
    CHECK(trace.terminated);
    const std::size_t moves = trace.move_count();
    CHECK(trace.steps.size() <= moves);
    CHECK(moves <= trace.steps.size() * s.topo.n());
}

TEST_CASE("under the synchronous policy every step closes a round") {
    Setup s = ring_setup(5, 2, Mode::Lazy, 8);
    TransConfig start = fuzz_config(s.topo, s.inst.alg, s.oracle, s.params, 9);
    ExecutionTrace trace =
        run_execution(s.topo, s.inst.alg, s.params, start,
                      policy_of(PolicyKind::Synchronous, 0), 5000);
    CHECK(trace.terminated);
    REQUIRE(trace.round_marks.size() == trace.steps.size());
    for (std::size_t i = 0; i < trace.round_marks.size(); ++i)
        CHECK(trace.round_marks[i] == i + 1);
}

TEST_CASE("a terminal initial configuration yields an empty trace") {
    Setup s = ring_setup(5, 4, Mode::Lazy, 8);
    // Drive to termination first, then restart from the terminal point.
    TransConfig start = clean_config(s.oracle.rounds[0]);
    ExecutionTrace first =
        run_execution(s.topo, s.inst.alg, s.params, start,
                      policy_of(PolicyKind::Synchronous, 0), 5000);
    REQUIRE(first.terminated);
    ExecutionTrace second =
        run_execution(s.topo, s.inst.alg, s.params, first.final_config,
                      policy_of(PolicyKind::CentralRandom, 1), 5000);
    CHECK(second.terminated);
    CHECK(second.steps.empty());
    CHECK(second.round_marks.empty());
}

TEST_CASE("central scheduling ends a round only when all pending nodes moved") {
    // Path x(3)-y(1)-z(2): initially exactly x and z are enabled.
    Topology t({"x", "y", "z"},
               {{"x", "y", ""}, {"y", "x", ""}, {"y", "z", ""}, {"z", "y", ""}});
    Instance inst = make_instance("leader");
    StateMap init{{3, 3}, {1, 1}, {2, 2}};
    TransParams params;
    params.bound = 4;
    {
        Engine probe(t, inst.alg, params, clean_config(init));
        CHECK(probe.enabled_nodes() == std::vector<NodeIndex>{0, 2});
    }
    DaemonPolicy policy = policy_of(PolicyKind::Scripted, 0);
    policy.script = {{0}, {2}, {1}};
    ExecutionTrace trace = run_execution(t, inst.alg, params,
                                         clean_config(init), policy, 100);
    REQUIRE(trace.round_marks.size() >= 1);
    CHECK(trace.round_marks[0] == 2);  // first round spans both activations
    CHECK(compute_rounds(t, inst.alg, params, trace) == trace.round_marks);
}

TEST_CASE("scripted daemons can starve an enabled node") {
    // Star: center c and two leaves; the script never activates l2.
    Topology t({"c", "l1", "l2"},
               {{"c", "l1", ""}, {"l1", "c", ""}, {"c", "l2", ""}, {"l2", "c", ""}});
    Instance inst = make_instance("leader");
    StateMap init{{5, 5}, {8, 8}, {2, 2}};
    TransParams params;
    params.mode = Mode::Greedy;
    params.bound = 2;
    DaemonPolicy policy = policy_of(PolicyKind::Scripted, 0);
    policy.script = {{1}, {0}, {1}};
    ExecutionTrace trace = run_execution(t, inst.alg, params,
                                         clean_config(init), policy, 100);
    CHECK(trace.stop == StopReason::ScriptEnd);
    CHECK(trace.final_config[2].height() == 0);
    // The starved leaf stayed enabled the whole time.
    Engine probe(t, inst.alg, params, trace.final_config);
    CHECK(probe.rule_of(2).has_value());
}

TEST_CASE("policy faults abort the execution") {
    Setup s = ring_setup(4, 6, Mode::Lazy, 6);
    TransConfig start = clean_config(s.oracle.rounds[0]);
    SUBCASE("empty selection") {
        DaemonPolicy policy = policy_of(PolicyKind::Scripted, 0);
        policy.script = {{}};
        CHECK_THROWS_AS(run_execution(s.topo, s.inst.alg, s.params, start, policy, 10),
                        PolicyFault);
    }
    SUBCASE("disabled node selected") {
        // Terminal configuration first, script then picks node 0.
        ExecutionTrace done =
            run_execution(s.topo, s.inst.alg, s.params, start,
                          policy_of(PolicyKind::Synchronous, 0), 5000);
        REQUIRE(done.terminated);
        Engine probe(s.topo, s.inst.alg, s.params, done.final_config);
        REQUIRE_FALSE(probe.rule_of(0).has_value());
        CHECK_THROWS_AS(probe.step({0}), PolicyFault);
    }
    SUBCASE("duplicate selection") {
        Engine probe(s.topo, s.inst.alg, s.params, start);
        CHECK_THROWS_AS(probe.step({0, 0}), PolicyFault);
    }
}

TEST_CASE("recorded round marks match the replay computation") {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        Setup s = ring_setup(6, seed, Mode::Lazy, 8);
        TransConfig start = fuzz_config(s.topo, s.inst.alg, s.oracle, s.params, seed);
        for (PolicyKind kind : {PolicyKind::CentralRandom,
                                PolicyKind::DistributedRandom,
                                PolicyKind::AdversarialHeuristic}) {
            ExecutionTrace trace = run_execution(s.topo, s.inst.alg, s.params, start,
                                                 policy_of(kind, seed * 7), 5000);
            CHECK(compute_rounds(s.topo, s.inst.alg, s.params, trace) ==
                  trace.round_marks);
            ExecutionTrace redo = replay_trace(s.topo, s.inst.alg, s.params, trace);
            CHECK(redo.final_config == trace.final_config);
            CHECK(redo.terminated == trace.terminated);
        }
    }
}

TEST_CASE("a single node updates exactly T times and stops") {
    // A counter that ticks up to 3 and stays: T = 3.
    SyncAlgorithm ticker;
    ticker.name = "ticker";
    ticker.algo = [](const StateValue& s, View) {
        return s[0] < 3 ? StateValue{s[0] + 1} : s;
    };
    ticker.is_valid = [](const Topology&, std::span<const StateValue> states,
                         std::string*) { return states[0][0] == 0; };
    ticker.sample_state = [](const Topology&, NodeIndex, Rng& rng) {
        return StateValue{static_cast<std::int64_t>(rng.below(5))};
    };
    Topology t({"solo"}, {});
    StateMap init{StateValue{0}};
    SyncHistory oracle = run_to_stability(t, ticker, init, 16);
    REQUIRE(oracle.stability_time == 3);
    TransParams params;
    params.bound = 10;
    ExecutionTrace trace =
        run_execution(t, ticker, params, clean_config(init),
                      policy_of(PolicyKind::CentralRandom, 4), 100);
    CHECK(trace.terminated);
    CHECK(trace.steps.size() == 3);
    for (const StepRecord& s : trace.steps)
        CHECK(s.rules[0].kind == RuleKind::Update);
    CHECK(trace.final_config[0].height() == 3);
}

TEST_CASE("the step budget stops infinite greedy executions") {
    Setup s = ring_setup(4, 8, Mode::Greedy, std::nullopt);
    s.params.row_cap = 100000;
    TransConfig start = clean_config(s.oracle.rounds[0]);
    ExecutionTrace trace =
        run_execution(s.topo, s.inst.alg, s.params, start,
                      policy_of(PolicyKind::CentralRandom, 5), 300);
    CHECK_FALSE(trace.terminated);
    CHECK(trace.stop == StopReason::MaxSteps);
    CHECK(trace.steps.size() == 300);
}

TEST_CASE("the row cap stops runaway histories with a diagnostic stop") {
    Setup s = ring_setup(4, 9, Mode::Greedy, std::nullopt);
    s.params.row_cap = 5;
    TransConfig start = clean_config(s.oracle.rounds[0]);
    ExecutionTrace trace =
        run_execution(s.topo, s.inst.alg, s.params, start,
                      policy_of(PolicyKind::Synchronous, 0), 10000);
    CHECK_FALSE(trace.terminated);
    CHECK(trace.stop == StopReason::RowCap);
    for (const TransNodeState& node : trace.final_config)
        CHECK(node.height() <= 5);
}

}  // TEST_SUITE
