#include "doctest.h"

#include "stabforge/rollback.hpp"

using namespace stabforge;

TEST_SUITE("rollback") {

TEST_CASE("the smallest gadget graph is the five-node path") {
    GadgetGraph g = gadget_graph(1);
    CHECK(g.topo.n() == 5);
    CHECK(g.array_len == 3);
    CHECK(g.topo.diameter() == 4);
    CHECK(g.initial_index[g.node('a', 1)] == 1);
    CHECK(g.initial_index[g.node('c', 1)] == 1);
    CHECK(g.initial_index[g.node('d', 1)] == 2);
    CHECK(g.initial_index[g.node('b', 1)] == 3);
    CHECK(g.initial_index[g.node('e', 1)] == 3);
}

TEST_CASE("the chained gadget graph grows five nodes per level") {
    GadgetGraph g = gadget_graph(3);
    CHECK(g.topo.n() == 15);
    CHECK(g.topo.diameter() == 8);
    CHECK(g.array_len == 9);
    const std::vector<std::pair<char, std::uint32_t>> expects{
        {'a', 3}, {'c', 3}, {'d', 3}, {'b', 3}, {'e', 3},
        {'a', 2}, {'c', 2}, {'d', 2}, {'b', 2}, {'e', 2},
        {'a', 1}, {'c', 1}, {'d', 1}, {'b', 1}, {'e', 1}};
    const std::vector<std::uint32_t> indices{1, 1, 2, 3, 3, 4, 4, 5, 6, 6,
                                             7, 7, 8, 9, 9};
    for (std::size_t i = 0; i < expects.size(); ++i) {
        auto [kind, gadget] = expects[i];
        CHECK(g.initial_index[g.node(kind, gadget)] == indices[i]);
    }
}

TEST_CASE("threshold arrays are recognized and junk is rejected") {
    CHECK(array_index({1, 1, 0}) == 2);
    CHECK(array_index({1, 1, 1}) == 3);
    CHECK(array_index({0, 0, 0}) == 0);
    CHECK_FALSE(array_index({1, 0, 1}).has_value());
}

TEST_CASE("an activation moves a node to one past the neighborhood minimum") {
    GadgetGraph g = gadget_graph(3);
    BitArrays arrays = initial_arrays(g);

    SUBCASE("the outer b-node drops by one toward its a-neighbor") {
        const NodeIndex b3 = g.node('b', 3);
        CHECK(array_index(arrays[b3]) == 3);
        CHECK(rc_activate(g.topo, arrays, b3));
        CHECK(array_index(arrays[b3]) == 2);  // a3 holds index 1
    }
    SUBCASE("a node whose index already matches is a no-op") {
        const NodeIndex d3 = g.node('d', 3);
        // d3 sits between c3 (index 1) and e3 (index 3): min+1 = 2 = own.
        CHECK_FALSE(rc_activate(g.topo, arrays, d3));
        CHECK(array_index(arrays[d3]) == 2);
    }
    SUBCASE("the innermost a-node climbs") {
        const NodeIndex a3 = g.node('a', 3);
        CHECK(rc_activate(g.topo, arrays, a3));
        CHECK(array_index(arrays[a3]) == 2);  // c3 shares the minimum index 1
    }
}

TEST_CASE("the recursive schedule has the documented lengths") {
    CHECK(exponential_schedule(gadget_graph(1)) ==
          std::vector<NodeIndex>{gadget_graph(1).node('a', 1)});
    CHECK(exponential_schedule(gadget_graph(2)).size() == 12);
    std::size_t prev = 1;
    for (std::uint32_t x = 2; x <= 12; ++x) {
        const std::size_t len = exponential_schedule(gadget_graph(x)).size();
        CHECK(len >= 2 * prev + 1);
        prev = len;
    }
}

TEST_CASE("the lower-bound run beats two to the x minus one") {
    LowerBoundResult r3 = run_lower_bound(3);
    CHECK(r3.steps >= 7);
    CHECK(r3.nodes == 15);
    CHECK(r3.diameter == 8);

    LowerBoundResult r10 = run_lower_bound(10);
    CHECK(r10.steps >= 1023);
}

TEST_CASE("after the schedule a synchronous sweep reaches all ones") {
    GadgetGraph g = gadget_graph(4);
    LowerBoundResult r = run_lower_bound(4);
    BitArrays arrays = r.final_arrays;
    rc_run_to_terminal(g.topo, arrays, 10 * g.topo.n());
    for (const auto& cells : arrays)
        for (std::uint8_t c : cells) CHECK(c == 1);
}

TEST_CASE("all-ones inputs pull any threshold start to all ones") {
    GadgetGraph g = gadget_graph(3);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Rng rng(seed);
        BitArrays arrays(g.topo.n());
        for (auto& cells : arrays) {
            cells.assign(g.array_len, 0);
            const std::uint32_t idx =
                1 + static_cast<std::uint32_t>(rng.below(g.array_len));
            for (std::uint32_t j = 0; j < idx; ++j) cells[j] = 1;
        }
        rc_run_to_terminal(g.topo, arrays, 10 * g.topo.n());
        for (const auto& cells : arrays)
            for (std::uint8_t c : cells) CHECK(c == 1);
    }
}

TEST_CASE("the min-propagation algorithm settles on the global minimum") {
    SyncAlgorithm alg = min_input_algorithm();
    GadgetGraph g = gadget_graph(2);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Rng rng(seed);
        StateMap init(g.topo.n());
        std::int64_t global_min = 1;
        for (NodeIndex p = 0; p < g.topo.n(); ++p) {
            const std::int64_t input = static_cast<std::int64_t>(rng.below(2));
            init[p] = StateValue{input, input};
            global_min = std::min(global_min, input);
        }
        SyncHistory hist =
            run_to_stability(g.topo, alg, init, default_max_rounds(g.topo));
        CHECK(hist.stability_time <= g.topo.diameter());
        for (NodeIndex p = 0; p < g.topo.n(); ++p)
            CHECK(hist.rounds.back()[p][1] == global_min);
    }
}

TEST_CASE("the history-replay run on the gadgets stays within its budget") {
    ContrastReport report = rollback_contrast(6);
    CHECK(report.rollback.steps >= 63);
    CHECK(report.two_pow_bound == 63.0);
    CHECK(report.transformer_terminated);
    CHECK(report.transformer_moves <= report.transformer_budget);
}

}  // TEST_SUITE
