#include "doctest.h"

#include <algorithm>

#include "stabforge/topology.hpp"

using namespace stabforge;

namespace {

std::vector<Arc> both_ways(std::vector<std::pair<std::string, std::string>> edges,
                           const std::string& label = "") {
    std::vector<Arc> arcs;
    for (auto& [u, v] : edges) {
        arcs.push_back({u, v, label});
        arcs.push_back({v, u, label});
    }
    return arcs;
}

// Reference all-pairs distances (Floyd-Warshall) for cross-checking BFS.
std::vector<std::vector<int>> fw_distances(std::size_t n,
                                           const std::vector<Arc>& arcs,
                                           const std::vector<std::string>& ids) {
    const int inf = 1 << 20;
    std::vector<std::vector<int>> d(n, std::vector<int>(n, inf));
    auto idx = [&](const std::string& id) {
        return std::find(ids.begin(), ids.end(), id) - ids.begin();
    };
    for (std::size_t i = 0; i < n; ++i) d[i][i] = 0;
    for (const Arc& a : arcs) d[idx(a.src)][idx(a.dst)] = 1;
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
    return d;
}

}  // namespace

TEST_SUITE("topology") {

TEST_CASE("two-node graph has diameter 1") {
    Topology t({"a", "b"}, both_ways({{"a", "b"}}));
    CHECK(t.n() == 2);
    CHECK(t.diameter() == 1);
    CHECK(t.distance(0, 1) == 1);
}

TEST_CASE("single node has diameter 0") {
    Topology t({"a"}, {});
    CHECK(t.n() == 1);
    CHECK(t.diameter() == 0);
    CHECK(t.incoming(0).empty());
}

TEST_CASE("asymmetric arc set is rejected") {
    CHECK_THROWS_WITH_AS(Topology({"a", "b"}, {{"a", "b", ""}}),
                         doctest::Contains("asymmetric"), TopologyError);
}

TEST_CASE("self loops are rejected") {
    CHECK_THROWS_WITH_AS(Topology({"a"}, {{"a", "a", ""}}),
                         doctest::Contains("self-loop"), TopologyError);
}

TEST_CASE("duplicate arcs are rejected") {
    CHECK_THROWS_WITH_AS(
        Topology({"a", "b"}, {{"a", "b", ""}, {"a", "b", "x"}, {"b", "a", ""}}),
        doctest::Contains("duplicate arc"), TopologyError);
}

TEST_CASE("disconnected graphs are rejected") {
    CHECK_THROWS_WITH_AS(
        Topology({"a", "b", "c", "d"}, both_ways({{"a", "b"}, {"c", "d"}})),
        doctest::Contains("disconnected"), TopologyError);
}

TEST_CASE("distances match a reference shortest-path computation") {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        Rng rng(seed);
        const std::size_t n = 2 + rng.below(10);
        std::vector<std::string> ids;
        for (std::size_t i = 0; i < n; ++i) ids.push_back("v" + std::to_string(i));
        std::vector<std::pair<std::string, std::string>> edges;
        for (std::size_t i = 1; i < n; ++i)
            edges.emplace_back(ids[rng.below(i)], ids[i]);  // random tree
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t u = rng.below(n), v = rng.below(n);
            if (u == v) continue;
            bool dup = false;
            for (auto& [a, b] : edges)
                if ((a == ids[u] && b == ids[v]) || (a == ids[v] && b == ids[u]))
                    dup = true;
            if (!dup) edges.emplace_back(ids[u], ids[v]);
        }
        const std::vector<Arc> arcs = both_ways(edges);
        Topology t(ids, arcs);
        auto ref = fw_distances(n, arcs, ids);
        int ref_diam = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                CHECK(t.distance(i, j) == static_cast<std::uint32_t>(ref[i][j]));
                ref_diam = std::max(ref_diam, ref[i][j]);
            }
        CHECK(t.diameter() == static_cast<std::uint32_t>(ref_diam));
    }
}

TEST_CASE("distances are symmetric") {
    Topology t({"a", "b", "c", "d"},
               both_ways({{"a", "b"}, {"b", "c"}, {"c", "d"}, {"d", "a"}}));
    for (NodeIndex p = 0; p < t.n(); ++p)
        for (NodeIndex q = 0; q < t.n(); ++q)
            CHECK(t.distance(p, q) == t.distance(q, p));
}

TEST_CASE("construction is deterministic") {
    auto arcs = both_ways({{"a", "b"}, {"b", "c"}});
    Topology t1({"a", "b", "c"}, arcs);
    Topology t2({"a", "b", "c"}, arcs);
    CHECK(t1.node_ids() == t2.node_ids());
    CHECK(t1.diameter() == t2.diameter());
    for (NodeIndex p = 0; p < t1.n(); ++p)
        for (NodeIndex q = 0; q < t1.n(); ++q)
            CHECK(t1.distance(p, q) == t2.distance(p, q));
}

TEST_CASE("neighbor_view collapses identical label-state pairs") {
    Topology t({"p", "q", "r"}, both_ways({{"q", "p"}, {"r", "p"}}));
    const NodeIndex p = t.index_of("p");
    std::vector<StateValue> states(3);
    states[t.index_of("q")] = StateValue{7};
    states[t.index_of("r")] = StateValue{7};
    states[p] = StateValue{1};
    auto view = t.neighbor_view(p, states);
    REQUIRE(view.size() == 1);
    CHECK(view[0].state == StateValue{7});
}

TEST_CASE("neighbor_view keeps distinct label-state pairs") {
    std::vector<Arc> arcs{{"q", "p", "L"}, {"p", "q", "R"},
                          {"r", "p", "R"}, {"p", "r", "L"}};
    Topology t({"p", "q", "r"}, arcs);
    std::vector<StateValue> states(3);
    states[t.index_of("q")] = StateValue{1};
    states[t.index_of("r")] = StateValue{2};
    auto view = t.neighbor_view(t.index_of("p"), states);
    CHECK(view.size() == 2);
}

TEST_CASE("neighbor_view of an isolated node is empty") {
    Topology t({"a"}, {});
    std::vector<StateValue> states{StateValue{42}};
    CHECK(t.neighbor_view(0, states).empty());
}

TEST_CASE("neighbor_view ignores the node's own state") {
    Topology t({"a", "b"}, both_ways({{"a", "b"}}));
    std::vector<StateValue> states{StateValue{1}, StateValue{2}};
    auto before = t.neighbor_view(0, states);
    states[0] = StateValue{99};
    CHECK(t.neighbor_view(0, states) == before);
}

TEST_CASE("label order follows byte order") {
    std::vector<Arc> arcs{{"a", "b", "02"}, {"b", "a", "10"}};
    Topology t({"a", "b"}, arcs);
    REQUIRE(t.label_count() == 2);
    CHECK(t.label_text(0) == "02");
    CHECK(t.label_text(1) == "10");
}

TEST_CASE("unknown node id is rejected") {
    Topology t({"a", "b"}, both_ways({{"a", "b"}}));
    CHECK_THROWS_AS(t.index_of("zz"), TopologyError);
    CHECK_THROWS_AS(Topology({"a"}, {{"a", "zz", ""}}), TopologyError);
}

}  // TEST_SUITE
