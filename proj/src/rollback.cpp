#include "stabforge/rollback.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace stabforge {

namespace {

std::string node_name(char kind, std::uint32_t gadget) {
    return std::string(1, kind) + std::to_string(gadget);
}

constexpr const char* kKinds = "bacde";

}  // namespace

NodeIndex GadgetGraph::node(char kind, std::uint32_t gadget) const {
    const char* at = std::strchr(kKinds, kind);
    if (at == nullptr || gadget < 1 || gadget > x)
        throw TransError("gadget_graph: no node " + node_name(kind, gadget));
    return static_cast<NodeIndex>((gadget - 1) * 5 + (at - kKinds));
}

GadgetGraph gadget_graph(std::uint32_t x) {
    if (x < 1) throw TransError("gadget_graph: x must be at least 1");
    std::vector<std::string> ids;
    for (std::uint32_t g = 1; g <= x; ++g)
        for (const char* k = kKinds; *k; ++k) ids.push_back(node_name(*k, g));

    std::vector<Arc> arcs;
    auto link = [&](const std::string& u, const std::string& v) {
        arcs.push_back({u, v, ""});
        arcs.push_back({v, u, ""});
    };
    for (std::uint32_t g = 1; g <= x; ++g) {
        link(node_name('b', g), node_name('a', g));
        link(node_name('a', g), node_name('c', g));
        link(node_name('c', g), node_name('d', g));
        link(node_name('d', g), node_name('e', g));
        if (g > 1) {
            link(node_name('b', g), node_name('c', g - 1));
            link(node_name('e', g), node_name('c', g - 1));
        }
    }

    GadgetGraph g{Topology(std::move(ids), arcs), x, 3 * x, {}};
    g.initial_index.assign(g.topo.n(), 0);
    for (std::uint32_t i = 1; i <= x; ++i) {
        const std::uint32_t base = 3 * (x - i);
        g.initial_index[g.node('a', i)] = base + 1;
        g.initial_index[g.node('c', i)] = base + 1;
        g.initial_index[g.node('d', i)] = base + 2;
        g.initial_index[g.node('b', i)] = base + 3;
        g.initial_index[g.node('e', i)] = base + 3;
    }
    return g;
}

BitArrays initial_arrays(const GadgetGraph& g) {
    BitArrays arrays(g.topo.n());
    for (NodeIndex p = 0; p < g.topo.n(); ++p) {
        arrays[p].assign(g.array_len, 0);
        for (std::uint32_t j = 0; j < g.initial_index[p] && j < g.array_len; ++j)
            arrays[p][j] = 1;
    }
    return arrays;
}

std::optional<std::uint32_t> array_index(const std::vector<std::uint8_t>& cells) {
    std::uint32_t i = 0;
    while (i < cells.size() && cells[i] == 1) ++i;
    for (std::uint32_t j = i; j < cells.size(); ++j)
        if (cells[j] != 0) return std::nullopt;
    return i;
}

bool rc_activate(const Topology& t, BitArrays& arrays, NodeIndex p) {
    const std::vector<std::uint8_t> old = arrays[p];
    std::vector<std::uint8_t>& cells = arrays[p];
    for (std::size_t i = 1; i < cells.size(); ++i) {
        std::uint8_t m = cells[i - 1];  // own value already rewritten
        for (const auto& e : t.incoming(p))
            m = std::min(m, arrays[e.source][i - 1]);
        cells[i] = m;
    }
    return cells != old;
}

std::vector<NodeIndex> exponential_schedule(const GadgetGraph& g) {
    // climb(i) = b_i followed by c/d/e of every gadget below, in order.
    auto climb = [&](std::uint32_t i) {
        std::vector<NodeIndex> path{g.node('b', i)};
        for (std::uint32_t j = i - 1; j >= 1; --j) {
            path.push_back(g.node('c', j));
            path.push_back(g.node('d', j));
            path.push_back(g.node('e', j));
        }
        return path;
    };
    std::vector<NodeIndex> schedule{g.node('a', 1)};
    for (std::uint32_t i = 2; i <= g.x; ++i) {
        std::vector<NodeIndex> next = schedule;
        const std::vector<NodeIndex> path = climb(i);
        next.insert(next.end(), path.begin(), path.end());
        for (std::uint32_t j = 1; j < i; ++j) next.push_back(g.node('a', j));
        next.push_back(g.node('a', i));
        next.insert(next.end(), path.begin(), path.end());
        next.insert(next.end(), schedule.begin(), schedule.end());
        schedule = std::move(next);
    }
    return schedule;
}

LowerBoundResult run_lower_bound(std::uint32_t x) {
    const GadgetGraph g = gadget_graph(x);
    BitArrays arrays = initial_arrays(g);
    const std::vector<NodeIndex> schedule = exponential_schedule(g);

    LowerBoundResult result;
    result.x = x;
    result.nodes = g.topo.n();
    result.diameter = g.topo.diameter();
    for (NodeIndex p : schedule) {
        if (!rc_activate(g.topo, arrays, p))
            throw TransError("lower-bound schedule: activation of '" +
                             g.topo.id_of(p) + "' changed nothing at step " +
                             std::to_string(result.steps + 1));
        ++result.steps;
        for (NodeIndex q = 0; q < g.topo.n(); ++q) {
            if (!array_index(arrays[q]))
                throw TransError("lower-bound schedule: node '" + g.topo.id_of(q) +
                                 "' left the threshold-array family");
        }
    }
    result.final_arrays = std::move(arrays);
    return result;
}

std::size_t rc_run_to_terminal(const Topology& t, BitArrays& arrays,
                               std::size_t max_rounds) {
    for (std::size_t round = 0; round < max_rounds; ++round) {
        const BitArrays snapshot = arrays;
        bool changed = false;
        for (NodeIndex p = 0; p < t.n(); ++p) {
            std::vector<std::uint8_t>& cells = arrays[p];
            for (std::size_t i = 1; i < cells.size(); ++i) {
                std::uint8_t m = cells[i - 1];
                for (const auto& e : t.incoming(p))
                    m = std::min(m, snapshot[e.source][i - 1]);
                cells[i] = m;
            }
            if (cells != snapshot[p]) changed = true;
        }
        if (!changed) return round;
    }
    throw TransError("rolled-back system did not reach a terminal configuration");
}

SyncAlgorithm min_input_algorithm() {
    SyncAlgorithm alg;
    alg.name = "min-input";
    alg.algo = [](const StateValue& s, View view) {
        std::int64_t m = s[1];
        for (const LabeledState& e : view) m = std::min(m, e.state[1]);
        return StateValue{s[0], m};
    };
    alg.is_valid = [](const Topology&, std::span<const StateValue> states,
                      std::string* why) {
        for (const StateValue& s : states) {
            if (s[1] != s[0]) {
                if (why) *why = "S not initialized to the input";
                return false;
            }
        }
        return true;
    };
    alg.sample_state = [](const Topology&, NodeIndex, Rng& rng) {
        return StateValue{static_cast<std::int64_t>(rng.below(2)),
                          static_cast<std::int64_t>(rng.below(2))};
    };
    alg.codec.encode = [](const Topology&, const StateValue& s) {
        return nlohmann::json{{"input", s[0]}, {"value", s[1]}};
    };
    alg.codec.decode = [](const Topology&, const nlohmann::json& j) {
        return StateValue{j.at("input").get<std::int64_t>(),
                          j.at("value").get<std::int64_t>()};
    };
    return alg;
}

ContrastReport rollback_contrast(std::uint32_t x) {
    ContrastReport report;
    report.rollback = run_lower_bound(x);
    report.two_pow_bound = std::ldexp(1.0, static_cast<int>(x)) - 1.0;

    const GadgetGraph g = gadget_graph(x);
    const SyncAlgorithm alg = min_input_algorithm();

    // Same logs as the lower-bound start, carried as replay histories.
    TransParams params;
    params.mode = Mode::Lazy;
    params.bound = g.array_len - 1;
    TransConfig cfg(g.topo.n());
    const BitArrays arrays = initial_arrays(g);
    for (NodeIndex p = 0; p < g.topo.n(); ++p) {
        cfg[p].status = Status::Correct;
        for (std::uint32_t j = 0; j < g.array_len; ++j)
            cfg[p].rows.push_back(StateValue{1, arrays[p][j]});
    }

    StateMap init(g.topo.n(), StateValue{1, 1});
    const SyncHistory oracle =
        run_to_stability(g.topo, alg, init, default_max_rounds(g.topo));

    DaemonPolicy policy;
    policy.kind = PolicyKind::AdversarialHeuristic;
    ExecutionTrace trace =
        run_execution(g.topo, alg, params, std::move(cfg), policy,
                      default_max_steps(g.topo.n(), params));
    report.transformer_moves = trace.move_count();
    report.transformer_terminated = trace.terminated;
    report.transformer_budget =
        total_move_budget(g.topo.n(), g.topo.diameter(), params,
                          oracle.stability_time)
            .value_or(0);
    return report;
}

}  // namespace stabforge
