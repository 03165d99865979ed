#pragma once

#include <iosfwd>
#include <string>

#include "stabforge/analysis.hpp"
#include "stabforge/instances.hpp"

#include "json.hpp"

namespace stabforge {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Graph files: {"nodes":[...], "arcs":[[src,dst,label],...]}.
nlohmann::json graph_to_json(const Topology& t);
Topology graph_from_json(const nlohmann::json& j);
Topology load_graph_file(const std::string& path);

// Configuration snapshots: map node -> {init, s, L}.
nlohmann::json config_to_json(const Topology& t, const SyncAlgorithm& alg,
                              const TransConfig& cfg);
TransConfig config_from_json(const Topology& t, const SyncAlgorithm& alg,
                             const nlohmann::json& j);

nlohmann::json params_to_json(const TransParams& params);
TransParams params_from_json(const nlohmann::json& j);

std::string rule_text(const Rule& rule);
Rule rule_from_text(const std::string& text);
std::string stop_reason_text(StopReason stop);

// Trace files: JSONL with one header line, one line per step, one footer.
struct TraceBundle {
    std::string instance;
    InstanceOptions options;
    TransParams params;
    DaemonPolicy policy;
    nlohmann::json graph;
    ExecutionTrace trace;
};

void write_trace_jsonl(std::ostream& out, const Topology& t,
                       const SyncAlgorithm& alg, const TraceBundle& bundle);
TraceBundle read_trace_jsonl(std::istream& in);

// Synchronous histories: one round per line plus a summary record.
void write_history_jsonl(std::ostream& out, const Topology& t,
                         const SyncAlgorithm& alg, const SyncHistory& hist);

nlohmann::json bound_report_to_json(const BoundReport& report);
std::string bound_report_to_csv(const BoundReport& report);

}  // namespace stabforge
