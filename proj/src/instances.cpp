#include "stabforge/instances.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <set>

namespace stabforge {

namespace {

using nlohmann::json;

// Draws `count` distinct values in [0, space) deterministically.
std::vector<std::int64_t> distinct_ids(std::int64_t space, std::size_t count,
                                       Rng& rng) {
    std::set<std::int64_t> seen;
    std::vector<std::int64_t> out;
    while (out.size() < count) {
        auto v = static_cast<std::int64_t>(rng.below(space));
        if (seen.insert(v).second) out.push_back(v);
    }
    return out;
}

bool distinct_cell0(std::span<const StateValue> states, std::string* why) {
    std::set<std::int64_t> ids;
    for (const StateValue& s : states) {
        if (!ids.insert(s[0]).second) {
            if (why) *why = "duplicate identifier " + std::to_string(s[0]);
            return false;
        }
    }
    return true;
}

std::int64_t min_id(std::span<const StateValue> states) {
    std::int64_t m = states[0][0];
    for (const StateValue& s : states) m = std::min(m, s[0]);
    return m;
}

// ---------------------------------------------------------------------
// leader: state (ID, Best), Best converges to the minimum identifier.

Instance make_leader() {
    Instance inst;
    inst.alg.name = "leader";
    inst.labeling = LabelingKind::Plain;
    inst.alg.algo = [](const StateValue& s, View view) {
        std::int64_t best = s[1];
        for (const LabeledState& e : view) best = std::min(best, e.state[1]);
        return StateValue{s[0], best};
    };
    inst.alg.is_valid = [](const Topology&, std::span<const StateValue> states,
                           std::string* why) {
        if (!distinct_cell0(states, why)) return false;
        for (const StateValue& s : states) {
            if (s.size() != 2 || s[1] != s[0]) {
                if (why) *why = "Best not initialized to the node identifier";
                return false;
            }
        }
        return true;
    };
    inst.alg.sample_state = [](const Topology& t, NodeIndex, Rng& rng) {
        std::int64_t space = static_cast<std::int64_t>(t.n() * t.n() + 4);
        return StateValue{static_cast<std::int64_t>(rng.below(space)),
                          static_cast<std::int64_t>(rng.below(space))};
    };
    inst.alg.codec.encode = [](const Topology&, const StateValue& s) {
        return json{{"id", s[0]}, {"best", s[1]}};
    };
    inst.alg.codec.decode = [](const Topology&, const json& j) {
        return StateValue{j.at("id").get<std::int64_t>(),
                          j.at("best").get<std::int64_t>()};
    };
    inst.make_initial = [](const Topology& t, std::uint64_t seed) {
        Rng rng(seed);
        auto ids = distinct_ids(static_cast<std::int64_t>(t.n() * t.n() + 4),
                                t.n(), rng);
        StateMap init(t.n());
        for (NodeIndex p = 0; p < t.n(); ++p) init[p] = {ids[p], ids[p]};
        return init;
    };
    inst.validate_stable = [](const Topology&, std::span<const StateValue> states,
                              std::string* why) {
        std::int64_t m = min_id(states);
        for (const StateValue& s : states) {
            if (s[1] != m) {
                if (why) *why = "Best " + std::to_string(s[1]) +
                                " differs from the minimum identifier " +
                                std::to_string(m);
                return false;
            }
        }
        return true;
    };
    return inst;
}

// ---------------------------------------------------------------------
// bfs: state (Root, Par). Par holds the label of the channel toward the
// parent, or -1 while unset. Once set it never changes.

constexpr std::int64_t kNoParent = -1;

Instance make_bfs() {
    Instance inst;
    inst.alg.name = "bfs";
    inst.labeling = LabelingKind::Ports;
    inst.alg.algo = [](const StateValue& s, View view) {
        if (s[0] != 0 || s[1] != kNoParent) return s;
        std::int64_t best = kNoParent;
        for (const LabeledState& e : view) {
            if (e.state[0] != 0 || e.state[1] != kNoParent) {
                if (best == kNoParent || e.label < best) best = e.label;
            }
        }
        if (best == kNoParent) return s;
        return StateValue{s[0], best};
    };
    inst.alg.is_valid = [](const Topology& t, std::span<const StateValue> states,
                           std::string* why) {
        std::size_t roots = 0;
        for (const StateValue& s : states) {
            if (s[0] != 0) ++roots;
            if (s[1] != kNoParent) {
                if (why) *why = "parent pointer not NULL initially";
                return false;
            }
        }
        if (roots != 1) {
            if (why) *why = "expected exactly one root, found " + std::to_string(roots);
            return false;
        }
        for (NodeIndex p = 0; p < t.n(); ++p) {
            std::set<LabelId> labels;
            for (const auto& e : t.incoming(p)) {
                if (!labels.insert(e.label).second) {
                    if (why) *why = "channels of node '" + t.id_of(p) +
                                    "' do not carry distinct labels";
                    return false;
                }
            }
        }
        return true;
    };
    inst.alg.sample_state = [](const Topology& t, NodeIndex, Rng& rng) {
        std::int64_t par = rng.coin()
            ? kNoParent
            : static_cast<std::int64_t>(rng.below(std::max<std::size_t>(t.label_count(), 1)));
        return StateValue{static_cast<std::int64_t>(rng.below(2)), par};
    };
    inst.alg.codec.encode = [](const Topology& t, const StateValue& s) {
        json j{{"root", s[0] != 0}};
        if (s[1] == kNoParent)
            j["par"] = nullptr;
        else
            j["par"] = t.label_text(static_cast<LabelId>(s[1]));
        return j;
    };
    inst.alg.codec.decode = [](const Topology& t, const json& j) {
        std::int64_t par = kNoParent;
        if (!j.at("par").is_null()) {
            const std::string text = j.at("par").get<std::string>();
            for (LabelId l = 0; l < static_cast<LabelId>(t.label_count()); ++l)
                if (t.label_text(l) == text) { par = l; break; }
        }
        return StateValue{j.at("root").get<bool>() ? 1 : 0, par};
    };
    inst.make_initial = [](const Topology& t, std::uint64_t seed) {
        Rng rng(seed);
        NodeIndex root = static_cast<NodeIndex>(rng.below(t.n()));
        StateMap init(t.n());
        for (NodeIndex p = 0; p < t.n(); ++p)
            init[p] = {p == root ? 1 : 0, kNoParent};
        return init;
    };
    inst.validate_stable = [](const Topology& t, std::span<const StateValue> states,
                              std::string* why) {
        NodeIndex root = t.n();
        for (NodeIndex p = 0; p < t.n(); ++p)
            if (states[p][0] != 0) root = p;
        if (root == t.n()) {
            if (why) *why = "no root node";
            return false;
        }
        for (NodeIndex p = 0; p < t.n(); ++p) {
            if (p == root) {
                if (states[p][1] != kNoParent) {
                    if (why) *why = "root grew a parent pointer";
                    return false;
                }
                continue;
            }
            if (states[p][1] == kNoParent) {
                if (why) *why = "node '" + t.id_of(p) + "' has no parent";
                return false;
            }
            NodeIndex parent = t.n();
            for (const auto& e : t.incoming(p))
                if (e.label == static_cast<LabelId>(states[p][1])) parent = e.source;
            if (parent == t.n()) {
                if (why) *why = "parent label of '" + t.id_of(p) +
                                "' matches no incoming channel";
                return false;
            }
            if (t.distance(parent, root) + 1 != t.distance(p, root)) {
                if (why) *why = "tree depth of '" + t.id_of(p) +
                                "' differs from its graph distance to the root";
                return false;
            }
        }
        return true;
    };
    return inst;
}

// ---------------------------------------------------------------------
// color3: Cole-Vishkin color reduction on oriented rings, then three
// rounds eliminating colors 5, 4, 3.

std::int64_t pow_int(std::int64_t base, int exp) {
    std::int64_t v = 1;
    for (int i = 0; i < exp; ++i) v *= base;
    return v;
}

const LabeledState* find_label(View view, LabelId l) {
    for (const LabeledState& e : view)
        if (e.label == l) return &e;
    return nullptr;
}

Instance make_color3(const InstanceOptions& opts) {
    Instance inst;
    inst.alg.name = "color3";
    inst.labeling = LabelingKind::OrientedRing;
    const int c = opts.color_exponent;

    // On a valid oriented ring the interned label table is exactly
    // {"L", "R"}, so the right-hand channel is label id 1.
    constexpr LabelId kRight = 1;

    inst.alg.algo = [](const StateValue& s, View view) {
        const std::int64_t id = s[0], ph = s[1], mcs = s[2], nb = s[3], col = s[4];
        if (ph == 0) {
            const LabeledState* right = find_label(view, kRight);
            if (right == nullptr) return s;
            const std::int64_t next_mcs = 1 + ceil_log2(mcs);
            const std::int64_t next_col = color_split_position(col, right->state[4]);
            if (next_mcs == mcs) return StateValue{id, 1, mcs, nb, next_col};
            return StateValue{id, 0, next_mcs, nb, next_col};
        }
        if (nb > 0) {
            if (col == 2 + nb) {
                std::vector<std::int64_t> used;
                for (const LabeledState& e : view) used.push_back(e.state[4]);
                std::int64_t nc = 0;
                while (std::find(used.begin(), used.end(), nc) != used.end()) ++nc;
                return StateValue{id, 1, mcs, nb - 1, nc};
            }
            return StateValue{id, 1, mcs, nb - 1, col};
        }
        return s;
    };
    inst.alg.is_valid = [c](const Topology& t, std::span<const StateValue> states,
                            std::string* why) {
        if (t.label_count() != 2 || t.label_text(0) != "L" || t.label_text(1) != "R") {
            if (why) *why = "channel labels are not the ring orientation L/R";
            return false;
        }
        for (NodeIndex p = 0; p < t.n(); ++p) {
            auto in = t.incoming(p);
            if (in.size() != 2 || in[0].label == in[1].label) {
                if (why) *why = "node '" + t.id_of(p) +
                                "' does not have one L and one R channel";
                return false;
            }
            // Both directions of one edge must carry different labels.
            for (const auto& e : in) {
                for (const auto& back : t.incoming(e.source)) {
                    if (back.source == p && back.label == e.label) {
                        if (why) *why = "edge ('" + t.id_of(e.source) + "', '" +
                                        t.id_of(p) + "') labeled " +
                                        t.label_text(e.label) + " both ways";
                        return false;
                    }
                }
            }
        }
        if (!distinct_cell0(states, why)) return false;
        const std::int64_t space = pow_int(static_cast<std::int64_t>(t.n()), c);
        const std::int64_t mcs0 = ceil_log2(space);
        for (const StateValue& s : states) {
            if (s[0] < 0 || s[0] >= space) {
                if (why) *why = "identifier " + std::to_string(s[0]) +
                                " outside [0.." + std::to_string(space - 1) + "]";
                return false;
            }
            if (s[1] != 0 || s[2] != mcs0 || s[3] != 3 || s[4] != s[0]) {
                if (why) *why = "phase variables not correctly initialized";
                return false;
            }
        }
        return true;
    };
    inst.alg.sample_state = [c](const Topology& t, NodeIndex, Rng& rng) {
        const std::int64_t space = pow_int(static_cast<std::int64_t>(t.n()), c);
        const std::int64_t mcs0 = ceil_log2(space);
        return StateValue{static_cast<std::int64_t>(rng.below(space)),
                          static_cast<std::int64_t>(rng.below(2)),
                          static_cast<std::int64_t>(rng.below(mcs0 + 2)),
                          static_cast<std::int64_t>(rng.below(4)),
                          static_cast<std::int64_t>(rng.below(space))};
    };
    inst.alg.codec.encode = [](const Topology&, const StateValue& s) {
        return json{{"id", s[0]}, {"ph", s[1]}, {"max_col_size", s[2]},
                    {"nb_rds", s[3]}, {"color", s[4]}};
    };
    inst.alg.codec.decode = [](const Topology&, const json& j) {
        return StateValue{j.at("id").get<std::int64_t>(),
                          j.at("ph").get<std::int64_t>(),
                          j.at("max_col_size").get<std::int64_t>(),
                          j.at("nb_rds").get<std::int64_t>(),
                          j.at("color").get<std::int64_t>()};
    };
    inst.make_initial = [c](const Topology& t, std::uint64_t seed) {
        Rng rng(seed);
        const std::int64_t space = pow_int(static_cast<std::int64_t>(t.n()), c);
        const std::int64_t mcs0 = ceil_log2(space);
        auto ids = distinct_ids(space, t.n(), rng);
        StateMap init(t.n());
        for (NodeIndex p = 0; p < t.n(); ++p)
            init[p] = {ids[p], 0, mcs0, 3, ids[p]};
        return init;
    };
    inst.validate_stable = [](const Topology& t, std::span<const StateValue> states,
                              std::string* why) {
        for (NodeIndex p = 0; p < t.n(); ++p) {
            if (states[p][4] < 0 || states[p][4] > 2) {
                if (why) *why = "color " + std::to_string(states[p][4]) +
                                " of '" + t.id_of(p) + "' outside {0,1,2}";
                return false;
            }
            for (const auto& e : t.incoming(p)) {
                if (states[e.source][4] == states[p][4]) {
                    if (why) *why = "neighbors '" + t.id_of(e.source) + "' and '" +
                                    t.id_of(p) + "' share color " +
                                    std::to_string(states[p][4]);
                    return false;
                }
            }
        }
        return true;
    };
    return inst;
}

// ---------------------------------------------------------------------
// cluster-front: leader election composed with BFS distances and parents
// rooted at the elected node. State (ID, Best, Dist, Par).

Instance make_cluster_front() {
    Instance inst;
    inst.alg.name = "cluster-front";
    inst.labeling = LabelingKind::Plain;
    inst.alg.algo = [](const StateValue& s, View view) {
        const std::int64_t id = s[0];
        std::int64_t best = s[1];
        for (const LabeledState& e : view) best = std::min(best, e.state[1]);
        if (best == id) return StateValue{id, best, 0, id};
        if (view.empty()) return StateValue{id, best, s[2], s[3]};
        std::int64_t min_dist = view[0].state[2];
        for (const LabeledState& e : view) min_dist = std::min(min_dist, e.state[2]);
        std::int64_t par = std::numeric_limits<std::int64_t>::max();
        for (const LabeledState& e : view)
            if (e.state[2] == min_dist) par = std::min(par, e.state[0]);
        return StateValue{id, best, min_dist + 1, par};
    };
    inst.alg.is_valid = [](const Topology&, std::span<const StateValue> states,
                           std::string* why) {
        if (!distinct_cell0(states, why)) return false;
        for (const StateValue& s : states) {
            if (s[1] != s[0] || s[2] != 0 || s[3] != s[0]) {
                if (why) *why = "Best/Dist/Par not correctly initialized";
                return false;
            }
        }
        return true;
    };
    inst.alg.sample_state = [](const Topology& t, NodeIndex, Rng& rng) {
        std::int64_t space = static_cast<std::int64_t>(t.n() * t.n() + 4);
        return StateValue{static_cast<std::int64_t>(rng.below(space)),
                          static_cast<std::int64_t>(rng.below(space)),
                          static_cast<std::int64_t>(rng.below(t.n() + 2)),
                          static_cast<std::int64_t>(rng.below(space))};
    };
    inst.alg.codec.encode = [](const Topology&, const StateValue& s) {
        return json{{"id", s[0]}, {"best", s[1]}, {"dist", s[2]}, {"par", s[3]}};
    };
    inst.alg.codec.decode = [](const Topology&, const json& j) {
        return StateValue{j.at("id").get<std::int64_t>(),
                          j.at("best").get<std::int64_t>(),
                          j.at("dist").get<std::int64_t>(),
                          j.at("par").get<std::int64_t>()};
    };
    inst.make_initial = [](const Topology& t, std::uint64_t seed) {
        Rng rng(seed);
        auto ids = distinct_ids(static_cast<std::int64_t>(t.n() * t.n() + 4),
                                t.n(), rng);
        StateMap init(t.n());
        for (NodeIndex p = 0; p < t.n(); ++p)
            init[p] = {ids[p], ids[p], 0, ids[p]};
        return init;
    };
    inst.validate_stable = [](const Topology& t, std::span<const StateValue> states,
                              std::string* why) {
        const std::int64_t m = min_id(states);
        NodeIndex leader = 0;
        for (NodeIndex p = 0; p < t.n(); ++p)
            if (states[p][0] == m) leader = p;
        for (NodeIndex p = 0; p < t.n(); ++p) {
            const StateValue& s = states[p];
            if (s[1] != m) {
                if (why) *why = "Best of '" + t.id_of(p) + "' is not the leader id";
                return false;
            }
            if (s[2] != t.distance(p, leader)) {
                if (why) *why = "Dist of '" + t.id_of(p) +
                                "' differs from its distance to the leader";
                return false;
            }
            if (p == leader) {
                if (s[3] != m) {
                    if (why) *why = "leader does not point to itself";
                    return false;
                }
                continue;
            }
            bool ok = false;
            for (const auto& e : t.incoming(p))
                if (states[e.source][0] == s[3] &&
                    t.distance(e.source, leader) + 1 == t.distance(p, leader))
                    ok = true;
            if (!ok) {
                if (why) *why = "Par of '" + t.id_of(p) +
                                "' is not a neighbor one hop closer to the leader";
                return false;
            }
        }
        return true;
    };
    return inst;
}

}  // namespace

std::int64_t ceil_log2(std::int64_t v) {
    if (v <= 1) return 0;
    std::uint64_t u = static_cast<std::uint64_t>(v);
    int bits = 64 - std::countl_zero(u - 1);
    return bits;
}

int lowest_differing_bit(std::int64_t c1, std::int64_t c2) {
    std::uint64_t x = static_cast<std::uint64_t>(c1) ^ static_cast<std::uint64_t>(c2);
    if (x == 0) return 0;
    return std::countr_zero(x);
}

std::int64_t color_split_position(std::int64_t c1, std::int64_t c2) {
    int b = lowest_differing_bit(c1, c2);
    std::int64_t bit = (static_cast<std::uint64_t>(c1) >> b) & 1;
    return 2 * static_cast<std::int64_t>(b) + bit;
}

std::uint32_t log_star(double v) {
    std::uint32_t k = 0;
    while (v > 1.0) {
        v = std::log2(v);
        ++k;
    }
    return k;
}

Instance make_instance(const std::string& name, const InstanceOptions& opts) {
    if (name == "leader") return make_leader();
    if (name == "bfs") return make_bfs();
    if (name == "color3") return make_color3(opts);
    if (name == "cluster-front") return make_cluster_front();
    throw std::invalid_argument("unknown instance '" + name + "'");
}

std::vector<std::string> instance_names() {
    return {"leader", "bfs", "color3", "cluster-front"};
}

}  // namespace stabforge
