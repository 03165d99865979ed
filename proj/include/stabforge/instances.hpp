#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "stabforge/sync.hpp"

namespace stabforge {

// Channel labeling a shipped algorithm expects from its input graphs.
enum class LabelingKind {
    Plain,         // every channel carries the empty label
    Ports,         // locally distinct labels per node
    OrientedRing,  // degree-2 ring, labels L/R forming a consistent orientation
};

struct InstanceOptions {
    int color_exponent = 2;  // identifier space [0 .. n^c - 1] for color3
};

// A shipped synchronous algorithm plus everything the harness needs to
// drive it: a valid-initial-configuration generator and a checker for the
// stable output it is supposed to compute.
struct Instance {
    SyncAlgorithm alg;
    LabelingKind labeling = LabelingKind::Plain;
    std::function<StateMap(const Topology&, std::uint64_t seed)> make_initial;
    std::function<bool(const Topology&, std::span<const StateValue>,
                       std::string* why)> validate_stable;
};

// Registry keyed by name: leader | bfs | color3 | cluster-front.
Instance make_instance(const std::string& name,
                       const InstanceOptions& opts = {});
std::vector<std::string> instance_names();

// Bit helpers of the ring-coloring algorithm, exposed for tests.
std::int64_t ceil_log2(std::int64_t v);
int lowest_differing_bit(std::int64_t c1, std::int64_t c2);
std::int64_t color_split_position(std::int64_t c1, std::int64_t c2);

// Iterated logarithm: applications of log2 needed to reach at most 1.
std::uint32_t log_star(double v);

}  // namespace stabforge
