#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "stabforge/analysis.hpp"

namespace stabforge {

// Chained-gadget topology on which the naive full-recompute transformation
// of the min-propagation algorithm needs exponentially many steps.
struct GadgetGraph {
    Topology topo;
    std::uint32_t x = 1;
    std::uint32_t array_len = 3;             // cells per node log
    std::vector<std::uint32_t> initial_index;  // per node, the i of its i-bar array

    NodeIndex node(char kind, std::uint32_t gadget) const;
};

GadgetGraph gadget_graph(std::uint32_t x);

// Per-node logs of the rolled-back system: cell 0 is the read-only input.
using BitArrays = std::vector<std::vector<std::uint8_t>>;

// Arrays of the construction's initial configuration (all inputs 1).
BitArrays initial_arrays(const GadgetGraph& g);

// i such that the array is all-ones below i and all-zeros from i on;
// nullopt when the array has no such threshold shape.
std::optional<std::uint32_t> array_index(const std::vector<std::uint8_t>& cells);

// One atomic activation: recomputes every cell in increasing order as the
// closed-neighborhood minimum of the previous cell, own cells chaining
// through the values already rewritten. Returns whether anything changed.
bool rc_activate(const Topology& t, BitArrays& arrays, NodeIndex p);

// The recursive schedule realizing at least 2^x - 1 effective activations.
std::vector<NodeIndex> exponential_schedule(const GadgetGraph& g);

struct LowerBoundResult {
    std::uint32_t x = 1;
    std::size_t nodes = 0;
    std::uint32_t diameter = 0;
    std::size_t steps = 0;  // effective activations of the schedule
    BitArrays final_arrays;
};

// Replays the schedule under central scheduling, checking that every
// activation changes the activated node and every intermediate array keeps
// the threshold shape. Throws TransError on a construction bug.
LowerBoundResult run_lower_bound(std::uint32_t x);

// Synchronous sweep of the rolled-back system; rounds until fixed point.
std::size_t rc_run_to_terminal(const Topology& t, BitArrays& arrays,
                               std::size_t max_rounds);

// The min-propagation input algorithm itself, as a synchronous algorithm
// usable with the history-replay transformation. State (I, S).
SyncAlgorithm min_input_algorithm();

// Runs the history-replay transformation in lazy mode on the same gadget
// graph from logs matching the lower-bound start, for the side-by-side
// move-count comparison.
struct ContrastReport {
    LowerBoundResult rollback;
    double two_pow_bound = 0;        // 2^x - 1
    std::size_t transformer_moves = 0;
    double transformer_budget = 0;   // explicit worst-case move budget
    bool transformer_terminated = false;
};

ContrastReport rollback_contrast(std::uint32_t x);

}  // namespace stabforge
