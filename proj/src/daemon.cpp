#include "stabforge/daemon.hpp"

#include <algorithm>

namespace stabforge {

DaemonPolicy policy_from_name(const std::string& name, std::uint64_t seed) {
    DaemonPolicy p;
    p.seed = seed;
    if (name == "sync")
        p.kind = PolicyKind::Synchronous;
    else if (name == "central-random")
        p.kind = PolicyKind::CentralRandom;
    else if (name == "dist-random")
        p.kind = PolicyKind::DistributedRandom;
    else if (name == "adv")
        p.kind = PolicyKind::AdversarialHeuristic;
    else if (name == "script")
        p.kind = PolicyKind::Scripted;
    else
        throw PolicyFault("unknown daemon policy '" + name + "'");
    return p;
}

std::string policy_name(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::Synchronous: return "sync";
        case PolicyKind::CentralRandom: return "central-random";
        case PolicyKind::DistributedRandom: return "dist-random";
        case PolicyKind::Scripted: return "script";
        case PolicyKind::AdversarialHeuristic: return "adv";
    }
    return "?";
}

// ---------------------------------------------------------------------
// Engine

Engine::Engine(const Topology& t, const SyncAlgorithm& alg, TransParams params,
               TransConfig initial)
    : topo_(t),
      alg_(alg),
      params_(params),
      row_cap_(effective_row_cap(params, t.n())),
      cfg_(std::move(initial)),
      eval_(t.n()),
      verified_(t.n(), 0),
      mark_(t.n(), 0) {
    if (cfg_.size() != t.n())
        throw TransError("engine: configuration does not cover the node set");
    for (const TransNodeState& node : cfg_)
        if (node.rows.empty())
            throw TransError("engine: node without an initial row");
    for (NodeIndex p = 0; p < t.n(); ++p) install_eval(p, eval_node(p));
    for (NodeIndex p = 0; p < t.n(); ++p) {
        for (const auto& e : t.incoming(p)) {
            if (e.source < p) {
                const std::int64_t gap =
                    std::int64_t(cfg_[p].height()) - std::int64_t(cfg_[e.source].height());
                if (gap >= 2 || gap <= -2) ++bad_edge_count_;
            }
        }
    }
}

bool Engine::banded_algo_error(NodeIndex p) const {
    const std::uint32_t h = cfg_[p].height();
    if (h == 0) return false;
    std::uint32_t min_nbr = h;
    for (const auto& e : topo_.incoming(p))
        min_nbr = std::min(min_nbr, cfg_[e.source].height());
    const std::uint32_t top = std::min(h, min_nbr + 1);
    if (verified_[p] >= top) return false;
    for (std::uint32_t i = verified_[p] + 1; i <= top; ++i) {
        if (cfg_[p].rows[i] != row_algo(topo_, alg_, cfg_, p, i - 1, scratch_)) {
            verified_[p] = i - 1;
            return true;
        }
    }
    verified_[p] = top;
    return false;
}

Engine::NodeEval Engine::eval_node(NodeIndex p) const {
    NodeEval e;
    const TransNodeState& node = cfg_[p];
    e.root = dependency_error(topo_, cfg_, p) || banded_algo_error(p);
    e.misplaced_root =
        e.root && (node.height() > 0 || node.status == Status::Correct);
    if (e.misplaced_root) {
        e.rule = Rule{RuleKind::Reset};
        return e;
    }
    if (auto i = propagate_index(topo_, cfg_, p)) {
        e.rule = Rule{RuleKind::Propagate, *i};
        return e;
    }
    if (can_clear_error(topo_, cfg_, p)) {
        e.rule = Rule{RuleKind::Clear};
        return e;
    }
    if (updatable(topo_, alg_, cfg_, params_, p, scratch_))
        e.rule = Rule{RuleKind::Update};
    return e;
}

void Engine::count_eval(const NodeEval& e, int sign) {
    if (e.rule) {
        enabled_total_ += sign;
        enabled_by_kind_[static_cast<int>(e.rule->kind)] += sign;
        if (e.rule->kind == RuleKind::Reset || e.rule->kind == RuleKind::Propagate)
            error_rule_count_ += sign;
    }
    if (e.root) root_count_ += sign;
    if (e.misplaced_root) bad_root_count_ += sign;
}

void Engine::install_eval(NodeIndex p, NodeEval e) {
    count_eval(eval_[p], -1);
    eval_[p] = std::move(e);
    count_eval(eval_[p], +1);
}

std::vector<NodeIndex> Engine::enabled_nodes() const {
    std::vector<NodeIndex> out;
    out.reserve(enabled_total_);
    for (NodeIndex p = 0; p < eval_.size(); ++p)
        if (eval_[p].rule) out.push_back(p);
    return out;
}

Engine::StepResult Engine::step(const std::vector<NodeIndex>& selected) {
    if (selected.empty())
        throw PolicyFault("daemon selected an empty set on a non-terminal configuration");
    std::vector<NodeIndex> sel = selected;
    std::sort(sel.begin(), sel.end());
    if (std::adjacent_find(sel.begin(), sel.end()) != sel.end())
        throw PolicyFault("daemon selected a node twice in one step");

    struct Action {
        NodeIndex node;
        Rule rule;
        std::uint32_t old_height;
        StateValue pushed;
    };
    std::vector<Action> actions;
    actions.reserve(sel.size());
    for (NodeIndex p : sel) {
        if (p >= cfg_.size() || !eval_[p].rule)
            throw PolicyFault("daemon selected disabled node '" +
                              (p < cfg_.size() ? topo_.id_of(p) : std::to_string(p)) + "'");
        actions.push_back({p, *eval_[p].rule, cfg_[p].height(), {}});
    }

    StepResult result;
    for (Action& a : actions) {
        if (a.rule.kind == RuleKind::Update) {
            if (a.old_height + 1 > row_cap_) {
                result.row_cap_hit = true;
                return result;
            }
            a.pushed = row_algo(topo_, alg_, cfg_, a.node, a.old_height, scratch_);
        }
    }

    // Apply all effects against the pre-step snapshot. Truncations devalue
    // the verified prefixes that depended on the removed rows.
    auto truncate_to = [&](NodeIndex p, std::uint32_t k) {
        cfg_[p].rows.resize(k + 1);
        verified_[p] = std::min(verified_[p], k);
        for (const auto& e : topo_.incoming(p))
            verified_[e.source] = std::min(verified_[e.source], k);
    };
    for (const Action& a : actions) {
        TransNodeState& node = cfg_[a.node];
        switch (a.rule.kind) {
            case RuleKind::Reset:
                truncate_to(a.node, 0);
                node.status = Status::Error;
                break;
            case RuleKind::Propagate:
                truncate_to(a.node, a.rule.trunc_index);
                node.status = Status::Error;
                break;
            case RuleKind::Clear:
                node.status = Status::Correct;
                break;
            case RuleKind::Update:
                node.rows.push_back(a.pushed);
                break;
        }
        result.moves.push_back({a.node, a.rule});
    }

    // Height-gap bookkeeping for the edges whose endpoints moved in height.
    auto old_height_of = [&](NodeIndex q) -> std::uint32_t {
        for (const Action& a : actions)
            if (a.node == q) return a.old_height;
        return cfg_[q].height();
    };
    std::vector<std::pair<NodeIndex, NodeIndex>> edges;
    for (const Action& a : actions) {
        if (cfg_[a.node].height() == a.old_height) continue;
        for (const auto& e : topo_.incoming(a.node))
            edges.emplace_back(std::min(a.node, e.source),
                               std::max(a.node, e.source));
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    for (auto [u, v] : edges) {
        const std::int64_t oldgap =
            std::int64_t(old_height_of(u)) - std::int64_t(old_height_of(v));
        const std::int64_t newgap =
            std::int64_t(cfg_[u].height()) - std::int64_t(cfg_[v].height());
        const bool was_bad = oldgap >= 2 || oldgap <= -2;
        const bool is_bad = newgap >= 2 || newgap <= -2;
        if (was_bad && !is_bad) --bad_edge_count_;
        if (!was_bad && is_bad) ++bad_edge_count_;
    }

    // Re-evaluate the guards of the selected nodes and their neighbors.
    std::vector<NodeIndex> touched;
    for (const Action& a : actions) {
        mark_[a.node] = 2;
        touched.push_back(a.node);
    }
    for (const Action& a : actions) {
        for (const auto& e : topo_.incoming(a.node)) {
            if (mark_[e.source] == 0) {
                mark_[e.source] = 1;
                touched.push_back(e.source);
            }
        }
    }
    for (NodeIndex p : touched) {
        const bool was_enabled = eval_[p].rule.has_value();
        const bool was_root = eval_[p].root;
        install_eval(p, eval_node(p));
        if (was_enabled && !eval_[p].rule && mark_[p] != 2)
            result.neutralized.push_back(p);
        if (!was_root && eval_[p].root) result.new_roots.push_back(p);
    }
    for (NodeIndex p : touched) mark_[p] = 0;
    return result;
}

// ---------------------------------------------------------------------
// Policies

namespace {

std::vector<NodeIndex> select_nodes(const DaemonPolicy& policy, Rng& rng,
                                    const Engine& eng, std::size_t step_index,
                                    bool& script_end) {
    script_end = false;
    switch (policy.kind) {
        case PolicyKind::Synchronous:
            return eng.enabled_nodes();
        case PolicyKind::CentralRandom: {
            auto enabled = eng.enabled_nodes();
            return {enabled[rng.below(enabled.size())]};
        }
        case PolicyKind::DistributedRandom: {
            auto enabled = eng.enabled_nodes();
            std::vector<NodeIndex> sel;
            while (sel.empty()) {
                for (NodeIndex p : enabled)
                    if (rng.coin()) sel.push_back(p);
            }
            return sel;
        }
        case PolicyKind::Scripted: {
            if (step_index - 1 >= policy.script.size()) {
                script_end = true;
                return {};
            }
            return policy.script[step_index - 1];
        }
        case PolicyKind::AdversarialHeuristic: {
            // Favor the node whose activation truncates the deepest suffix
            // of its history; the practical move-count stressor.
            auto enabled = eng.enabled_nodes();
            NodeIndex best = enabled.front();
            std::int64_t best_depth = -1;
            for (NodeIndex p : enabled) {
                const Rule rule = *eng.rule_of(p);
                std::int64_t depth = 0;
                if (rule.kind == RuleKind::Reset)
                    depth = eng.config()[p].height();
                else if (rule.kind == RuleKind::Propagate)
                    depth = std::int64_t(eng.config()[p].height()) - rule.trunc_index;
                if (depth > best_depth) {
                    best_depth = depth;
                    best = p;
                }
            }
            return {best};
        }
    }
    throw PolicyFault("unhandled policy kind");
}

// Tracks the neutralization-based round structure of a run.
class RoundTracker {
public:
    explicit RoundTracker(const Engine& eng)
        : pending_(eng.config().size(), 0) {
        reset_from(eng);
    }

    void after_step(const Engine& eng, std::size_t step_index,
                    const Engine::StepResult& result,
                    const std::vector<NodeIndex>& moved,
                    std::vector<std::size_t>& marks) {
        for (NodeIndex p : moved) drop(p);
        for (NodeIndex p : result.neutralized) drop(p);
        if (pending_count_ == 0) {
            marks.push_back(step_index);
            reset_from(eng);
        }
    }

private:
    void reset_from(const Engine& eng) {
        std::fill(pending_.begin(), pending_.end(), 0);
        pending_count_ = 0;
        for (NodeIndex p = 0; p < pending_.size(); ++p) {
            if (eng.rule_of(p)) {
                pending_[p] = 1;
                ++pending_count_;
            }
        }
    }

    void drop(NodeIndex p) {
        if (pending_[p]) {
            pending_[p] = 0;
            --pending_count_;
        }
    }

    std::vector<std::uint8_t> pending_;
    std::size_t pending_count_ = 0;
};

}  // namespace

ExecutionTrace run_execution(const Topology& t, const SyncAlgorithm& alg,
                             const TransParams& params, TransConfig initial,
                             const DaemonPolicy& policy, std::size_t max_steps,
                             const StepObserver& observer) {
    ExecutionTrace trace;
    trace.initial = initial;
    Engine eng(t, alg, params, std::move(initial));
    Rng rng(policy.seed);
    RoundTracker rounds(eng);
    if (observer) observer(eng, 0, {}, {});

    while (true) {
        if (eng.terminal()) {
            trace.terminated = true;
            trace.stop = StopReason::Terminal;
            break;
        }
        if (trace.steps.size() >= max_steps) {
            trace.stop = StopReason::MaxSteps;
            break;
        }
        bool script_end = false;
        std::vector<NodeIndex> sel =
            select_nodes(policy, rng, eng, trace.steps.size() + 1, script_end);
        if (script_end) {
            trace.stop = StopReason::ScriptEnd;
            break;
        }
        Engine::StepResult result = eng.step(sel);
        if (result.row_cap_hit) {
            trace.stop = StopReason::RowCap;
            break;
        }
        StepRecord record;
        for (const MoveRecord& m : result.moves) {
            record.selected.push_back(m.node);
            record.rules.push_back(m.rule);
        }
        trace.steps.push_back(record);
        rounds.after_step(eng, trace.steps.size(), result, record.selected,
                          trace.round_marks);
        if (observer) observer(eng, trace.steps.size(), result, record);
    }
    trace.final_config = eng.config();
    return trace;
}

ExecutionTrace replay_trace(const Topology& t, const SyncAlgorithm& alg,
                            const TransParams& params, const ExecutionTrace& trace,
                            const StepObserver& observer) {
    ExecutionTrace out;
    out.initial = trace.initial;
    Engine eng(t, alg, params, trace.initial);
    RoundTracker rounds(eng);
    if (observer) observer(eng, 0, {}, {});
    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
        const StepRecord& rec = trace.steps[i];
        Engine::StepResult result = eng.step(rec.selected);
        if (result.row_cap_hit)
            throw TransError("replay: row cap hit at step " + std::to_string(i + 1));
        StepRecord redone;
        for (const MoveRecord& m : result.moves) {
            redone.selected.push_back(m.node);
            redone.rules.push_back(m.rule);
        }
        if (redone.selected != rec.selected || redone.rules != rec.rules)
            throw TransError("replay: derived rules diverge from the record at step " +
                             std::to_string(i + 1));
        out.steps.push_back(redone);
        rounds.after_step(eng, out.steps.size(), result, redone.selected,
                          out.round_marks);
        if (observer) observer(eng, out.steps.size(), result, redone);
    }
    out.final_config = eng.config();
    out.terminated = eng.terminal();
    out.stop = out.terminated ? StopReason::Terminal : trace.stop;
    return out;
}

std::vector<std::size_t> compute_rounds(const Topology& t, const SyncAlgorithm& alg,
                                        const TransParams& params,
                                        const ExecutionTrace& trace) {
    return replay_trace(t, alg, params, trace).round_marks;
}

}  // namespace stabforge
