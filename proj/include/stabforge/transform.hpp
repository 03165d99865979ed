#pragma once

#include <optional>
#include <vector>

#include "stabforge/sync.hpp"

namespace stabforge {

enum class Status : std::uint8_t { Correct, Error };

inline char status_char(Status s) { return s == Status::Correct ? 'C' : 'E'; }

// Node state of the transformed system. rows[0] is the read-only initial
// state of the simulated algorithm; rows[1..] the replayed history. The
// height of a node is the number of replayed rows.
struct TransNodeState {
    Status status = Status::Correct;
    std::vector<StateValue> rows;  // rows[0] = init, never modified

    std::uint32_t height() const {
        return static_cast<std::uint32_t>(rows.size() - 1);
    }

    friend bool operator==(const TransNodeState&, const TransNodeState&) = default;
};

using TransConfig = std::vector<TransNodeState>;  // indexed by NodeIndex

enum class Mode : std::uint8_t { Lazy, Greedy };

struct TransParams {
    Mode mode = Mode::Lazy;
    std::optional<std::uint32_t> bound;  // nullopt = unbounded histories
    // Simulator-level protection: executions stop (without terminating)
    // once some history would outgrow this many rows.
    std::uint32_t row_cap = 0;  // 0 = use default_row_cap(n)

    bool expects_infinite_run() const {
        return mode == Mode::Greedy && !bound.has_value();
    }
};

inline std::uint32_t default_row_cap(std::size_t n) {
    return static_cast<std::uint32_t>(8 * n + 64);
}

inline std::uint32_t effective_row_cap(const TransParams& params, std::size_t n) {
    return params.row_cap != 0 ? params.row_cap : default_row_cap(n);
}

// Rules of the transformed system, in decreasing priority: Reset, then
// Propagate(i) with smaller i first, then Clear/Update.
enum class RuleKind : std::uint8_t { Reset, Propagate, Clear, Update };

struct Rule {
    RuleKind kind;
    std::uint32_t trunc_index = 0;  // Propagate only

    friend bool operator==(const Rule&, const Rule&) = default;
};

class TransError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// --- history recurrence ------------------------------------------------

// Applies the simulated algorithm to row i of p and its neighbors.
// Requires the row to exist at p and every neighbor.
StateValue row_algo(const Topology& t, const SyncAlgorithm& alg,
                    const TransConfig& cfg, NodeIndex p, std::uint32_t i);
StateValue row_algo(const Topology& t, const SyncAlgorithm& alg,
                    const TransConfig& cfg, NodeIndex p, std::uint32_t i,
                    std::vector<LabeledState>& scratch);

// --- guards -------------------------------------------------------------

// Some replayed row with all its dependencies present violates the
// recurrence.
bool algo_error(const Topology& t, const SyncAlgorithm& alg,
                const TransConfig& cfg, NodeIndex p);
bool algo_error(const Topology& t, const SyncAlgorithm& alg,
                const TransConfig& cfg, NodeIndex p,
                std::vector<LabeledState>& scratch);

// Status/height combination that no correct recovery can produce.
bool dependency_error(const Topology& t, const TransConfig& cfg, NodeIndex p);

bool is_root(const Topology& t, const SyncAlgorithm& alg,
             const TransConfig& cfg, NodeIndex p);

// Smallest i such that some erroneous neighbor sits strictly below i and
// i strictly below p's height; nullopt when no such index exists.
std::optional<std::uint32_t> propagate_index(const Topology& t,
                                             const TransConfig& cfg, NodeIndex p);

bool can_clear_error(const Topology& t, const TransConfig& cfg, NodeIndex p);

bool updatable(const Topology& t, const SyncAlgorithm& alg,
               const TransConfig& cfg, const TransParams& params, NodeIndex p);
bool updatable(const Topology& t, const SyncAlgorithm& alg,
               const TransConfig& cfg, const TransParams& params, NodeIndex p,
               std::vector<LabeledState>& scratch);

// Highest-priority enabled rule, or nullopt when p is disabled.
std::optional<Rule> enabled_rule(const Topology& t, const SyncAlgorithm& alg,
                                 const TransConfig& cfg, const TransParams& params,
                                 NodeIndex p);

// --- steps ----------------------------------------------------------------

struct MoveRecord {
    NodeIndex node;
    Rule rule;

    friend bool operator==(const MoveRecord&, const MoveRecord&) = default;
};

// Atomically executes the enabled rule of every selected node against the
// pre-step configuration. Selecting a disabled node is a harness bug and
// throws TransError.
std::pair<TransConfig, std::vector<MoveRecord>> apply_step(
    const Topology& t, const SyncAlgorithm& alg, const TransConfig& cfg,
    const TransParams& params, const std::vector<NodeIndex>& selected);

// --- initial configurations -----------------------------------------------

// Clean start: every node at height 0, status Correct.
TransConfig clean_config(const StateMap& init);

// Corrupted start for fuzz campaigns: keeps the read-only initial states,
// draws statuses uniformly, heights uniformly in [0 .. min(B, 2D+2)], and
// fills rows with a mix of true history rows and sampled junk.
TransConfig fuzz_config(const Topology& t, const SyncAlgorithm& alg,
                        const SyncHistory& oracle, const TransParams& params,
                        std::uint64_t seed);

}  // namespace stabforge
