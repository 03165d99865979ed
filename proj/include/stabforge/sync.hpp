#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

#include "stabforge/topology.hpp"

#include "json.hpp"

namespace stabforge {

class SyncError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Serialization of opaque states; each algorithm ships its own.
struct StateCodec {
    std::function<nlohmann::json(const Topology&, const StateValue&)> encode;
    std::function<StateValue(const Topology&, const nlohmann::json&)> decode;
};

// A pluggable synchronous algorithm: a pure transition function over
// (own state, set of (label, neighbor state)), a validity predicate for
// initial configurations, and a junk-state sampler used only for fuzzing.
struct SyncAlgorithm {
    std::string name;
    std::function<StateValue(const StateValue&, View)> algo;
    std::function<bool(const Topology&, std::span<const StateValue>,
                       std::string* why)> is_valid;
    std::function<StateValue(const Topology&, NodeIndex, Rng&)> sample_state;
    StateCodec codec;
};

using StateMap = std::vector<StateValue>;  // indexed by NodeIndex

// A full fault-free synchronous run. rounds[i] is the configuration at the
// start of round i; rounds[stability_time] is a fixed point of one more
// synchronous round.
struct SyncHistory {
    std::vector<StateMap> rounds;
    std::uint32_t stability_time = 0;

    // Row i, extended past stability by the fixed point.
    const StateMap& row(std::uint32_t i) const {
        return i < rounds.size() ? rounds[i] : rounds.back();
    }
};

// One synchronous round: every node applies the algorithm to the pre-round
// snapshot and its deduplicated neighbor view.
StateMap sync_round(const Topology& t, const SyncAlgorithm& alg,
                    const StateMap& states);

inline std::uint32_t default_max_rounds(const Topology& t) {
    return static_cast<std::uint32_t>(4 * t.n() + 16);
}

// Iterates sync_round until two consecutive configurations are equal.
// Throws SyncError on an invalid initial configuration or when no fixed
// point is reached within max_rounds.
SyncHistory run_to_stability(const Topology& t, const SyncAlgorithm& alg,
                             const StateMap& init, std::uint32_t max_rounds);

}  // namespace stabforge
