#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "stabforge/state.hpp"

namespace stabforge {

using NodeIndex = std::uint32_t;

struct Arc {
    std::string src;
    std::string dst;
    std::string label;  // empty string is the singleton "no label"
};

class TopologyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Validated communication graph: symmetric, simple, connected. Immutable
// after construction and safe to share across threads.
class Topology {
public:
    // Rejects asymmetric arc sets, self loops, duplicate (src, dst) pairs
    // and disconnected graphs, naming the offending element.
    Topology(std::vector<std::string> node_ids, const std::vector<Arc>& arcs);

    std::size_t n() const { return node_ids_.size(); }
    std::uint32_t diameter() const { return diameter_; }
    const std::vector<std::string>& node_ids() const { return node_ids_; }

    NodeIndex index_of(const std::string& id) const;
    const std::string& id_of(NodeIndex p) const { return node_ids_.at(p); }

    std::uint32_t distance(NodeIndex p, NodeIndex q) const {
        return dist_[p * n() + q];
    }

    struct InArc {
        LabelId label;
        NodeIndex source;
    };

    // Incoming channels of p, in deterministic order.
    std::span<const InArc> incoming(NodeIndex p) const {
        return {in_arcs_.data() + in_off_[p], in_off_[p + 1] - in_off_[p]};
    }

    std::size_t degree(NodeIndex p) const {
        return in_off_[p + 1] - in_off_[p];
    }

    const std::string& label_text(LabelId l) const { return labels_.at(l); }
    std::size_t label_count() const { return labels_.size(); }

    // The deduplicated set of (channel label, source state) pairs visible
    // to p, given one state per node. Depends only on the states of N(p).
    std::vector<LabeledState> neighbor_view(
        NodeIndex p, std::span<const StateValue> states) const;

    // Same, appended into a caller-owned scratch buffer (hot path).
    void neighbor_view_into(NodeIndex p, std::span<const StateValue> states,
                            std::vector<LabeledState>& out) const;

private:
    std::vector<std::string> node_ids_;
    std::vector<std::string> labels_;      // sorted, so LabelId order == byte order
    std::vector<InArc> in_arcs_;           // grouped by destination
    std::vector<std::size_t> in_off_;      // n+1 offsets into in_arcs_
    std::vector<std::uint32_t> dist_;      // n*n hop distances
    std::uint32_t diameter_ = 0;
};

// Spec'd entry point: validates and builds (helper kept for symmetry with
// the file loader; identical to the constructor).
Topology build_topology(std::vector<std::string> node_ids,
                        const std::vector<Arc>& arcs);

}  // namespace stabforge
