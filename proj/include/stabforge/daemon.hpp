#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "stabforge/transform.hpp"

namespace stabforge {

class PolicyFault : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class PolicyKind : std::uint8_t {
    Synchronous,
    CentralRandom,
    DistributedRandom,
    Scripted,
    AdversarialHeuristic,
};

// Selects, at every step, a non-empty subset of the enabled nodes. No
// fairness of any kind is imposed.
struct DaemonPolicy {
    PolicyKind kind = PolicyKind::Synchronous;
    std::uint64_t seed = 0;
    std::vector<std::vector<NodeIndex>> script;  // Scripted only
};

DaemonPolicy policy_from_name(const std::string& name, std::uint64_t seed);
std::string policy_name(PolicyKind kind);

struct StepRecord {
    std::vector<NodeIndex> selected;  // ascending
    std::vector<Rule> rules;          // aligned with selected
};

enum class StopReason : std::uint8_t { Terminal, MaxSteps, RowCap, ScriptEnd };

struct ExecutionTrace {
    TransConfig initial;
    std::vector<StepRecord> steps;
    std::vector<std::size_t> round_marks;  // 1-based indices of round-ending steps
    TransConfig final_config;
    bool terminated = false;
    StopReason stop = StopReason::Terminal;

    std::size_t move_count() const {
        std::size_t m = 0;
        for (const StepRecord& s : steps) m += s.selected.size();
        return m;
    }
};

// Incremental simulator of the transformed system. After every step only
// the activated nodes and their neighbors are re-evaluated; aggregate
// counters keep cleanliness queries O(1). Equivalence with the plain
// per-node guard evaluation is pinned by tests.
class Engine {
public:
    Engine(const Topology& t, const SyncAlgorithm& alg, TransParams params,
           TransConfig initial);

    const TransConfig& config() const { return cfg_; }
    const Topology& topology() const { return topo_; }
    const TransParams& params() const { return params_; }

    bool terminal() const { return enabled_total_ == 0; }
    std::optional<Rule> rule_of(NodeIndex p) const { return eval_[p].rule; }
    bool root_at(NodeIndex p) const { return eval_[p].root; }
    std::vector<NodeIndex> enabled_nodes() const;

    // Structural configuration classes, maintained incrementally.
    bool clean() const { return root_count_ == 0; }
    bool almost_clean() const { return bad_root_count_ == 0 && bad_edge_count_ == 0; }

    // Rule-side counterparts, from the cached guards.
    bool error_rule_enabled() const { return error_rule_count_ > 0; }
    bool only_update_enabled() const {
        return enabled_total_ == enabled_by_kind_[static_cast<int>(RuleKind::Update)];
    }

    struct StepResult {
        std::vector<MoveRecord> moves;
        // Nodes enabled before the step, disabled after it, and not moving
        // in it (the neutralized nodes of the step).
        std::vector<NodeIndex> neutralized;
        // Nodes that became roots in this step; always empty unless the
        // no-root-creation invariant is violated.
        std::vector<NodeIndex> new_roots;
        bool row_cap_hit = false;  // set instead of applying the step
    };

    // Executes one atomic step. Throws PolicyFault when the selection is
    // empty or contains a disabled node.
    StepResult step(const std::vector<NodeIndex>& selected);

private:
    struct NodeEval {
        bool root = false;
        bool misplaced_root = false;  // root with nonzero height or status C
        std::optional<Rule> rule;
    };

    NodeEval eval_node(NodeIndex p) const;
    void install_eval(NodeIndex p, NodeEval e);
    void count_eval(const NodeEval& e, int sign);

    const Topology& topo_;
    const SyncAlgorithm& alg_;
    TransParams params_;
    std::uint32_t row_cap_;
    TransConfig cfg_;
    std::vector<NodeEval> eval_;

    std::size_t enabled_total_ = 0;
    std::size_t enabled_by_kind_[4] = {0, 0, 0, 0};
    std::size_t error_rule_count_ = 0;
    std::size_t root_count_ = 0;
    std::size_t bad_root_count_ = 0;
    std::size_t bad_edge_count_ = 0;  // unordered adjacent pairs with height gap >= 2

    mutable std::vector<LabeledState> scratch_;
    // Leading rows already known to satisfy the recurrence. Rows never
    // change in place, so a verified prefix stays valid until a truncation
    // at the node or a neighbor replaces some of its dependencies.
    mutable std::vector<std::uint32_t> verified_;
    std::vector<std::uint8_t> mark_;  // scratch flags, one per node

    bool banded_algo_error(NodeIndex p) const;
};

inline std::size_t default_max_steps(std::size_t n, const TransParams& params) {
    const std::size_t b_eff =
        params.bound ? *params.bound : default_row_cap(n);
    return 64 * n * n * n + 64 * n * b_eff;
}

// Observer invoked after every applied step of a run or replay.
using StepObserver =
    std::function<void(const Engine&, std::size_t step_index,
                       const Engine::StepResult&, const StepRecord&)>;

// Drives an execution under the given policy until the configuration is
// terminal, max_steps is reached, the row cap triggers, or a script runs
// out. Records every move and the round structure.
ExecutionTrace run_execution(const Topology& t, const SyncAlgorithm& alg,
                             const TransParams& params, TransConfig initial,
                             const DaemonPolicy& policy, std::size_t max_steps,
                             const StepObserver& observer = nullptr);

// Replays recorded steps on a fresh engine (scripted selection), checking
// that every re-derived rule matches the record.
ExecutionTrace replay_trace(const Topology& t, const SyncAlgorithm& alg,
                            const TransParams& params, const ExecutionTrace& trace,
                            const StepObserver& observer = nullptr);

// Round boundaries of a recorded trace, from the neutralization-based
// inductive definition.
std::vector<std::size_t> compute_rounds(const Topology& t, const SyncAlgorithm& alg,
                                        const TransParams& params,
                                        const ExecutionTrace& trace);

}  // namespace stabforge
