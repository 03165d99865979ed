#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "stabforge/analysis.hpp"
#include "stabforge/instances.hpp"
#include "stabforge/json_io.hpp"

namespace stabforge {

// --- graph sources ----------------------------------------------------

struct GraphSpec {
    enum class Kind { File, Path, Ring, OrientedRing, Star, RandomConnected };
    Kind kind = Kind::RandomConnected;
    std::size_t n = 8;
    std::uint64_t seed = 1;
    double extra_edge_prob = 0.1;  // RandomConnected: density on top of the tree
    std::string file;
};

GraphSpec::Kind graph_kind_from_name(const std::string& name);
Topology generate_graph(const GraphSpec& spec, LabelingKind labeling);

// --- configuration -----------------------------------------------------

struct CampaignConfig {
    std::string instance = "leader";
    InstanceOptions options;
    GraphSpec graph;
    TransParams params;
    std::string daemon = "sync";
    std::string script_file;
    std::uint64_t seed = 1;
    std::size_t fuzz_count = 0;
    std::size_t max_steps = 0;  // 0 = default budget
    std::size_t jobs = 0;       // 0 = hardware concurrency
    bool corrupt = false;       // run from a fuzzed initial configuration
    std::string init_config_file;
    std::string out_dir;
};

// Environment variable STABFORGE_SEED overrides the configured seed.
std::uint64_t resolve_seed(std::uint64_t configured);

DaemonPolicy make_policy(const Topology& t, const std::string& daemon,
                         const std::string& script_file, std::uint64_t seed);

// --- single checked executions ---------------------------------------

struct RunSummary {
    bool terminated = false;
    StopReason stop = StopReason::Terminal;
    bool expects_infinite = false;
    std::size_t steps = 0;
    std::size_t rounds = 0;
    MoveCounts moves;
    MoveTally tally;
    std::uint32_t stability_time = 0;
    std::uint32_t final_height = 0;
    BoundReport bounds;
    std::optional<std::string> terminal_issue;
    std::vector<std::string> invariant_violations;

    bool ok() const {
        if (!invariant_violations.empty() || !bounds.all_pass()) return false;
        if (terminated) return !terminal_issue.has_value();
        return expects_infinite;
    }
};

// Runs one execution with the per-step invariant suite attached, then
// verifies move/round budgets and (for terminated runs) the terminal shape.
RunSummary run_checked(const Topology& t, const Instance& inst,
                       const TransParams& params, const DaemonPolicy& policy,
                       TransConfig initial, const SyncHistory& oracle,
                       std::size_t max_steps, ExecutionTrace* out_trace = nullptr);

// --- fuzz campaigns ------------------------------------------------------

struct FuzzReport {
    std::size_t runs = 0;
    std::size_t terminated = 0;
    std::size_t bound_failures = 0;
    std::size_t invariant_failures = 0;
    std::size_t terminal_failures = 0;
    std::size_t max_moves = 0;
    std::size_t max_rounds = 0;
    double worst_moves_over_n3 = 0;
    std::vector<std::string> diagnostics;  // first few failures, for triage

    bool all_ok() const {
        return bound_failures == 0 && invariant_failures == 0 &&
               terminal_failures == 0 && terminated == runs;
    }
};

FuzzReport fuzz_campaign(const Topology& t, const Instance& inst,
                         const TransParams& params, const std::string& daemon,
                         std::uint64_t seed, std::size_t count,
                         std::size_t max_steps, std::size_t jobs);

nlohmann::json fuzz_report_to_json(const FuzzReport& report);

// Simple index-parallel worker pool; rethrows the first worker exception.
void parallel_for(std::size_t count, std::size_t jobs,
                  const std::function<void(std::size_t)>& body);

// --- CLI entry points -------------------------------------------------

// Exit codes: 0 success, 1 property/bound violation, 2 invalid input.
int cmd_oracle(const CampaignConfig& config, std::ostream& out, std::ostream& err);
int cmd_run(const CampaignConfig& config, std::ostream& out, std::ostream& err);
int cmd_fuzz(const CampaignConfig& config, std::ostream& out, std::ostream& err);
int cmd_rollback(std::uint32_t x, bool with_contrast, std::ostream& out,
                 std::ostream& err);

}  // namespace stabforge
