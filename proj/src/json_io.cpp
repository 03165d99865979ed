#include "stabforge/json_io.hpp"

#include <fstream>
#include <sstream>

#include "stabforge/analysis.hpp"

namespace stabforge {

using nlohmann::json;

json graph_to_json(const Topology& t) {
    json arcs = json::array();
    for (NodeIndex p = 0; p < t.n(); ++p)
        for (const auto& e : t.incoming(p))
            arcs.push_back({t.id_of(e.source), t.id_of(p), t.label_text(e.label)});
    return json{{"nodes", t.node_ids()}, {"arcs", arcs}};
}

Topology graph_from_json(const json& j) {
    if (!j.is_object() || !j.contains("nodes") || !j.contains("arcs"))
        throw IoError("graph: expected an object with 'nodes' and 'arcs'");
    std::vector<std::string> nodes;
    for (const json& v : j.at("nodes")) nodes.push_back(v.get<std::string>());
    std::vector<Arc> arcs;
    for (const json& a : j.at("arcs")) {
        if (!a.is_array() || a.size() < 2 || a.size() > 3)
            throw IoError("graph: arcs must be [src, dst, label] triples");
        Arc arc;
        arc.src = a.at(0).get<std::string>();
        arc.dst = a.at(1).get<std::string>();
        arc.label = a.size() == 3 ? a.at(2).get<std::string>() : "";
        arcs.push_back(std::move(arc));
    }
    return build_topology(std::move(nodes), arcs);
}

Topology load_graph_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open graph file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IoError("graph file '" + path + "': " + e.what());
    }
    return graph_from_json(j);
}

json config_to_json(const Topology& t, const SyncAlgorithm& alg,
                    const TransConfig& cfg) {
    json out = json::object();
    for (NodeIndex p = 0; p < t.n(); ++p) {
        json rows = json::array();
        for (std::size_t i = 1; i < cfg[p].rows.size(); ++i)
            rows.push_back(alg.codec.encode(t, cfg[p].rows[i]));
        out[t.id_of(p)] = {
            {"init", alg.codec.encode(t, cfg[p].rows[0])},
            {"s", std::string(1, status_char(cfg[p].status))},
            {"L", rows},
        };
    }
    return out;
}

TransConfig config_from_json(const Topology& t, const SyncAlgorithm& alg,
                             const json& j) {
    TransConfig cfg(t.n());
    for (NodeIndex p = 0; p < t.n(); ++p) {
        const std::string& id = t.id_of(p);
        if (!j.contains(id))
            throw IoError("configuration: missing node '" + id + "'");
        const json& node = j.at(id);
        const std::string s = node.at("s").get<std::string>();
        if (s != "C" && s != "E")
            throw IoError("configuration: bad status '" + s + "' at '" + id + "'");
        cfg[p].status = s == "C" ? Status::Correct : Status::Error;
        cfg[p].rows.push_back(alg.codec.decode(t, node.at("init")));
        for (const json& row : node.at("L"))
            cfg[p].rows.push_back(alg.codec.decode(t, row));
    }
    return cfg;
}

json params_to_json(const TransParams& params) {
    json j{{"mode", params.mode == Mode::Lazy ? "lazy" : "greedy"}};
    if (params.bound)
        j["bound"] = *params.bound;
    else
        j["bound"] = "inf";
    if (params.row_cap != 0) j["row_cap"] = params.row_cap;
    return j;
}

TransParams params_from_json(const json& j) {
    TransParams params;
    const std::string mode = j.at("mode").get<std::string>();
    if (mode == "lazy")
        params.mode = Mode::Lazy;
    else if (mode == "greedy")
        params.mode = Mode::Greedy;
    else
        throw IoError("params: bad mode '" + mode + "'");
    const json& b = j.at("bound");
    if (b.is_string()) {
        if (b.get<std::string>() != "inf")
            throw IoError("params: bad bound '" + b.get<std::string>() + "'");
    } else {
        params.bound = b.get<std::uint32_t>();
    }
    if (j.contains("row_cap")) params.row_cap = j.at("row_cap").get<std::uint32_t>();
    return params;
}

std::string rule_text(const Rule& rule) {
    switch (rule.kind) {
        case RuleKind::Reset: return "R";
        case RuleKind::Propagate: return "P" + std::to_string(rule.trunc_index);
        case RuleKind::Clear: return "C";
        case RuleKind::Update: return "U";
    }
    return "?";
}

Rule rule_from_text(const std::string& text) {
    if (text == "R") return {RuleKind::Reset};
    if (text == "C") return {RuleKind::Clear};
    if (text == "U") return {RuleKind::Update};
    if (!text.empty() && text[0] == 'P')
        return {RuleKind::Propagate,
                static_cast<std::uint32_t>(std::stoul(text.substr(1)))};
    throw IoError("trace: bad rule '" + text + "'");
}

std::string stop_reason_text(StopReason stop) {
    switch (stop) {
        case StopReason::Terminal: return "terminal";
        case StopReason::MaxSteps: return "max-steps";
        case StopReason::RowCap: return "row-cap";
        case StopReason::ScriptEnd: return "script-end";
    }
    return "?";
}

namespace {

StopReason stop_reason_from_text(const std::string& text) {
    if (text == "terminal") return StopReason::Terminal;
    if (text == "max-steps") return StopReason::MaxSteps;
    if (text == "row-cap") return StopReason::RowCap;
    if (text == "script-end") return StopReason::ScriptEnd;
    throw IoError("trace: bad stop reason '" + text + "'");
}

json policy_to_json(const DaemonPolicy& policy, const Topology& t) {
    json j{{"kind", policy_name(policy.kind)}, {"seed", policy.seed}};
    if (policy.kind == PolicyKind::Scripted) {
        json script = json::array();
        for (const auto& step : policy.script) {
            json sel = json::array();
            for (NodeIndex p : step) sel.push_back(t.id_of(p));
            script.push_back(sel);
        }
        j["script"] = script;
    }
    return j;
}

DaemonPolicy policy_from_json(const json& j, const Topology& t) {
    DaemonPolicy policy =
        policy_from_name(j.at("kind").get<std::string>(),
                         j.at("seed").get<std::uint64_t>());
    if (j.contains("script")) {
        for (const json& step : j.at("script")) {
            std::vector<NodeIndex> sel;
            for (const json& id : step)
                sel.push_back(t.index_of(id.get<std::string>()));
            policy.script.push_back(std::move(sel));
        }
    }
    return policy;
}

}  // namespace

void write_trace_jsonl(std::ostream& out, const Topology& t,
                       const SyncAlgorithm& alg, const TraceBundle& bundle) {
    json header{{"type", "header"},
                {"instance", bundle.instance},
                {"color_exponent", bundle.options.color_exponent},
                {"params", params_to_json(bundle.params)},
                {"policy", policy_to_json(bundle.policy, t)},
                {"graph", graph_to_json(t)},
                {"initial", config_to_json(t, alg, bundle.trace.initial)}};
    out << header.dump() << '\n';
    for (const StepRecord& step : bundle.trace.steps) {
        json sel = json::array();
        json rules = json::object();
        for (std::size_t i = 0; i < step.selected.size(); ++i) {
            sel.push_back(t.id_of(step.selected[i]));
            rules[t.id_of(step.selected[i])] = rule_text(step.rules[i]);
        }
        out << json{{"sel", sel}, {"rules", rules}}.dump() << '\n';
    }
    json footer{{"type", "footer"},
                {"round_marks", bundle.trace.round_marks},
                {"terminated", bundle.trace.terminated},
                {"stop", stop_reason_text(bundle.trace.stop)},
                {"final", config_to_json(t, alg, bundle.trace.final_config)}};
    out << footer.dump() << '\n';
}

TraceBundle read_trace_jsonl(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw IoError("trace: empty stream");
    json header = json::parse(line);
    if (header.value("type", "") != "header")
        throw IoError("trace: first record is not a header");

    TraceBundle bundle;
    bundle.instance = header.at("instance").get<std::string>();
    bundle.options.color_exponent = header.value("color_exponent", 2);
    bundle.params = params_from_json(header.at("params"));
    bundle.graph = header.at("graph");

    Topology t = graph_from_json(bundle.graph);
    const Instance inst = make_instance(bundle.instance, bundle.options);
    bundle.policy = policy_from_json(header.at("policy"), t);
    bundle.trace.initial = config_from_json(t, inst.alg, header.at("initial"));

    bool saw_footer = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        if (j.value("type", "") == "footer") {
            for (const json& m : j.at("round_marks"))
                bundle.trace.round_marks.push_back(m.get<std::size_t>());
            bundle.trace.terminated = j.at("terminated").get<bool>();
            bundle.trace.stop = stop_reason_from_text(j.at("stop").get<std::string>());
            bundle.trace.final_config =
                config_from_json(t, inst.alg, j.at("final"));
            saw_footer = true;
            break;
        }
        StepRecord step;
        for (const json& id : j.at("sel"))
            step.selected.push_back(t.index_of(id.get<std::string>()));
        const json& rules = j.at("rules");
        for (NodeIndex p : step.selected)
            step.rules.push_back(rule_from_text(rules.at(t.id_of(p)).get<std::string>()));
        bundle.trace.steps.push_back(std::move(step));
    }
    if (!saw_footer) throw IoError("trace: missing footer record");
    return bundle;
}

void write_history_jsonl(std::ostream& out, const Topology& t,
                         const SyncAlgorithm& alg, const SyncHistory& hist) {
    for (std::size_t i = 0; i < hist.rounds.size(); ++i) {
        json states = json::object();
        for (NodeIndex p = 0; p < t.n(); ++p)
            states[t.id_of(p)] = alg.codec.encode(t, hist.rounds[i][p]);
        out << json{{"round", i}, {"states", states}}.dump() << '\n';
    }
    out << json{{"type", "summary"}, {"stability_time", hist.stability_time}}.dump()
        << '\n';
}

json bound_report_to_json(const BoundReport& report) {
    json checks = json::array();
    for (const BoundCheck& c : report.checks) {
        checks.push_back({{"name", c.name},
                          {"formula", c.formula},
                          {"observed", c.observed},
                          {"bound", c.bound},
                          {"applicable", c.applicable},
                          {"pass", c.pass}});
    }
    return json{{"checks", checks}, {"all_pass", report.all_pass()}};
}

std::string bound_report_to_csv(const BoundReport& report) {
    std::ostringstream out;
    out << "name,formula,observed,bound,applicable,pass\n";
    for (const BoundCheck& c : report.checks) {
        out << c.name << ",\"" << c.formula << "\"," << c.observed << ','
            << c.bound << ',' << (c.applicable ? 1 : 0) << ','
            << (c.pass ? 1 : 0) << '\n';
    }
    return out.str();
}

}  // namespace stabforge
