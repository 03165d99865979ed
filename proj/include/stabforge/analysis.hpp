#pragma once

#include <optional>
#include <string>
#include <vector>

#include "stabforge/daemon.hpp"

namespace stabforge {

// --- configuration classes -------------------------------------------

// Every root sits at height 0 with status Error, and adjacent heights
// differ by at most one.
bool is_almost_clean(const Topology& t, const SyncAlgorithm& alg,
                     const TransConfig& cfg);

// No node is a root.
bool is_clean(const Topology& t, const SyncAlgorithm& alg,
              const TransConfig& cfg);

// Strictly height-decreasing all-erroneous path from p to a root, built by
// greedy descent. Requires cfg[p].status == Error; nullopt signals a broken
// configuration (should be impossible).
std::optional<std::vector<NodeIndex>> find_e_path(const Topology& t,
                                                  const TransConfig& cfg,
                                                  NodeIndex p);

// Decreasing path whose prefix steps down by exactly one through Correct
// nodes and whose suffix is an all-erroneous path to a root.
std::optional<std::vector<NodeIndex>> find_d_path(const Topology& t,
                                                  const TransConfig& cfg,
                                                  NodeIndex p);

// --- move accounting ----------------------------------------------------

struct MoveCounts {
    std::size_t reset = 0, propagate = 0, clear = 0, update = 0;

    std::size_t total() const { return reset + propagate + clear + update; }

    friend bool operator==(const MoveCounts&, const MoveCounts&) = default;
};

struct MoveTally {
    MoveCounts global;
    std::vector<MoveCounts> per_node;
    // Configuration index of the first clean configuration, when the trace
    // reaches one (index k means clean after k steps).
    std::optional<std::size_t> first_clean_step;
    std::size_t update_before_clean = 0;
    std::size_t clear_before_clean = 0;
    std::size_t propagate_before_clean = 0;
    std::vector<std::size_t> update_before_clean_per_node;

    friend bool operator==(const MoveTally&, const MoveTally&) = default;
};

// Classifies every recorded move and locates the first clean configuration
// by replaying the trace.
MoveTally tally_moves(const Topology& t, const SyncAlgorithm& alg,
                      const TransParams& params, const ExecutionTrace& trace);

// --- bound verification ---------------------------------------------------

struct BoundCheck {
    std::string name;
    std::string formula;   // the instantiated budget expression
    double observed = 0;
    double bound = 0;
    bool applicable = true;
    bool pass = true;
};

struct BoundReport {
    std::vector<BoundCheck> checks;

    bool all_pass() const {
        for (const BoundCheck& c : checks)
            if (c.applicable && !c.pass) return false;
        return true;
    }
};

// Checks the explicit move and round budgets of the transformed system
// against a recorded trace. T is the measured synchronous stability time.
BoundReport verify_bounds(const Topology& t, const SyncAlgorithm& alg,
                          const TransParams& params, const ExecutionTrace& trace,
                          std::uint32_t T);
BoundReport verify_bounds(const Topology& t, const TransParams& params,
                          const ExecutionTrace& trace, const MoveTally& tally,
                          std::uint32_t T);

// Worst-case total move budget with all explicit constants composed;
// infinite budgets (greedy unbounded) are reported as nullopt.
std::optional<double> total_move_budget(std::size_t n, std::uint32_t D,
                                        const TransParams& params, std::uint32_t T);

// --- terminal configurations ---------------------------------------------

// Verifies the shape of a terminal configuration: uniform height, all
// statuses Correct, rows equal to the synchronous history, and the height
// law of the chosen mode/bound. Returns a description of the first
// violation, if any.
std::optional<std::string> check_terminal_shape(const Topology& t,
                                                const SyncHistory& oracle,
                                                const TransParams& params,
                                                const TransConfig& cfg);

// --- per-step invariant suite ---------------------------------------------

// Checks, on every configuration of a run: root-set monotonicity, root
// clearing (a root executing a clear had height 0 and stops being a root),
// almost-clean and clean closure, existence of an erroneous descent path
// for every erroneous node, and agreement between the structural
// configuration classes and the enabled-rule view.
class InvariantMonitor {
public:
    explicit InvariantMonitor(const Topology& t) : topo_(t) {}

    void at_start(const Engine& eng);
    void after_step(const Engine& eng, std::size_t step_index,
                    const Engine::StepResult& result);
    void after_step(const Engine& eng, std::size_t step_index,
                    const Engine::StepResult& result, const StepRecord& record);

    const std::vector<std::string>& violations() const { return violations_; }
    bool ok() const { return violations_.empty(); }
    std::size_t checked_steps() const { return checked_steps_; }

    // Convenience observer adapter; step 0 is the initial configuration.
    StepObserver observer() {
        return [this](const Engine& eng, std::size_t i,
                      const Engine::StepResult& r, const StepRecord& rec) {
            if (i == 0)
                at_start(eng);
            else
                after_step(eng, i, r, rec);
        };
    }

private:
    void check_config(const Engine& eng, std::size_t step_index);

    const Topology& topo_;
    bool prev_clean_ = false;
    bool prev_almost_ = false;
    bool started_ = false;
    std::size_t checked_steps_ = 0;
    std::vector<std::uint8_t> prev_root_;
    std::vector<std::string> violations_;
};

}  // namespace stabforge
