#include "stabforge/topology.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <map>
#include <set>

namespace stabforge {

namespace {
constexpr std::uint32_t kUnreached = std::numeric_limits<std::uint32_t>::max();
}

Topology::Topology(std::vector<std::string> node_ids,
                   const std::vector<Arc>& arcs)
    : node_ids_(std::move(node_ids)) {
    const std::size_t n = node_ids_.size();
    if (n == 0) throw TopologyError("topology: empty node set");

    std::map<std::string, NodeIndex> by_id;
    for (NodeIndex i = 0; i < n; ++i) {
        if (!by_id.emplace(node_ids_[i], i).second)
            throw TopologyError("topology: duplicate node id '" + node_ids_[i] + "'");
    }

    auto resolve = [&](const std::string& id) -> NodeIndex {
        auto it = by_id.find(id);
        if (it == by_id.end())
            throw TopologyError("topology: arc references unknown node '" + id + "'");
        return it->second;
    };

    std::set<std::pair<NodeIndex, NodeIndex>> pairs;
    std::set<std::string> label_set;
    for (const Arc& a : arcs) {
        NodeIndex s = resolve(a.src), d = resolve(a.dst);
        if (s == d)
            throw TopologyError("topology: self-loop at node '" + a.src + "'");
        if (!pairs.emplace(s, d).second)
            throw TopologyError("topology: duplicate arc (" + a.src + ", " + a.dst + ")");
        label_set.insert(a.label);
    }
    for (auto [s, d] : pairs) {
        if (!pairs.count({d, s}))
            throw TopologyError("topology: asymmetric arc set, (" + node_ids_[s] +
                                ", " + node_ids_[d] + ") has no reverse arc");
    }

    labels_.assign(label_set.begin(), label_set.end());
    auto label_id = [&](const std::string& text) -> LabelId {
        auto it = std::lower_bound(labels_.begin(), labels_.end(), text);
        return static_cast<LabelId>(it - labels_.begin());
    };

    // Group incoming arcs by destination, ordered by (label, source).
    std::vector<std::vector<InArc>> in(n);
    for (const Arc& a : arcs)
        in[resolve(a.dst)].push_back({label_id(a.label), resolve(a.src)});
    in_off_.assign(n + 1, 0);
    for (NodeIndex p = 0; p < n; ++p) {
        std::sort(in[p].begin(), in[p].end(), [](const InArc& x, const InArc& y) {
            return std::tie(x.label, x.source) < std::tie(y.label, y.source);
        });
        in_off_[p + 1] = in_off_[p] + in[p].size();
        in_arcs_.insert(in_arcs_.end(), in[p].begin(), in[p].end());
    }

    // All-pairs BFS; symmetry of arcs makes incoming == outgoing adjacency.
    dist_.assign(n * n, kUnreached);
    std::deque<NodeIndex> queue;
    for (NodeIndex s = 0; s < n; ++s) {
        auto* row = dist_.data() + s * n;
        row[s] = 0;
        queue.clear();
        queue.push_back(s);
        while (!queue.empty()) {
            NodeIndex u = queue.front();
            queue.pop_front();
            for (const InArc& e : incoming(u)) {
                if (row[e.source] == kUnreached) {
                    row[e.source] = row[u] + 1;
                    queue.push_back(e.source);
                }
            }
        }
        for (NodeIndex q = 0; q < n; ++q) {
            if (row[q] == kUnreached)
                throw TopologyError("topology: disconnected, no path from '" +
                                    node_ids_[s] + "' to '" + node_ids_[q] + "'");
            diameter_ = std::max(diameter_, row[q]);
        }
    }
}

NodeIndex Topology::index_of(const std::string& id) const {
    for (NodeIndex i = 0; i < node_ids_.size(); ++i)
        if (node_ids_[i] == id) return i;
    throw TopologyError("topology: unknown node id '" + id + "'");
}

std::vector<LabeledState> Topology::neighbor_view(
    NodeIndex p, std::span<const StateValue> states) const {
    if (p >= n()) throw TopologyError("topology: node index out of range");
    std::vector<LabeledState> out;
    neighbor_view_into(p, states, out);
    return out;
}

void Topology::neighbor_view_into(NodeIndex p, std::span<const StateValue> states,
                                  std::vector<LabeledState>& out) const {
    out.clear();
    for (const InArc& e : incoming(p))
        out.push_back({e.label, states[e.source]});
    dedup_view(out);
}

Topology build_topology(std::vector<std::string> node_ids,
                        const std::vector<Arc>& arcs) {
    return Topology(std::move(node_ids), arcs);
}

}  // namespace stabforge
