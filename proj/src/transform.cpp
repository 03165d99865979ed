#include "stabforge/transform.hpp"

#include <algorithm>

namespace stabforge {

StateValue row_algo(const Topology& t, const SyncAlgorithm& alg,
                    const TransConfig& cfg, NodeIndex p, std::uint32_t i,
                    std::vector<LabeledState>& scratch) {
    const TransNodeState& node = cfg[p];
    if (i >= node.rows.size())
        throw TransError("row_algo: row " + std::to_string(i) +
                         " missing at node '" + t.id_of(p) + "'");
    scratch.clear();
    for (const auto& e : t.incoming(p)) {
        if (i >= cfg[e.source].rows.size())
            throw TransError("row_algo: row " + std::to_string(i) +
                             " missing at neighbor '" + t.id_of(e.source) + "'");
        scratch.push_back({e.label, cfg[e.source].rows[i]});
    }
    dedup_view(scratch);
    return alg.algo(node.rows[i], scratch);
}

StateValue row_algo(const Topology& t, const SyncAlgorithm& alg,
                    const TransConfig& cfg, NodeIndex p, std::uint32_t i) {
    std::vector<LabeledState> scratch;
    return row_algo(t, alg, cfg, p, i, scratch);
}

bool algo_error(const Topology& t, const SyncAlgorithm& alg,
                const TransConfig& cfg, NodeIndex p,
                std::vector<LabeledState>& scratch) {
    const std::uint32_t h = cfg[p].height();
    if (h == 0) return false;
    // Row i can only be checked when every neighbor holds row i-1.
    std::uint32_t min_nbr = h;
    for (const auto& e : t.incoming(p))
        min_nbr = std::min(min_nbr, cfg[e.source].height());
    const std::uint32_t top = std::min(h, min_nbr + 1);
    for (std::uint32_t i = 1; i <= top; ++i) {
        if (cfg[p].rows[i] != row_algo(t, alg, cfg, p, i - 1, scratch)) return true;
    }
    return false;
}

bool algo_error(const Topology& t, const SyncAlgorithm& alg,
                const TransConfig& cfg, NodeIndex p) {
    std::vector<LabeledState> scratch;
    return algo_error(t, alg, cfg, p, scratch);
}

bool dependency_error(const Topology& t, const TransConfig& cfg, NodeIndex p) {
    const TransNodeState& node = cfg[p];
    const std::uint32_t h = node.height();
    if (node.status == Status::Error) {
        for (const auto& e : t.incoming(p)) {
            const TransNodeState& q = cfg[e.source];
            if (q.status == Status::Error && q.height() < h) return false;
        }
        return true;
    }
    for (const auto& e : t.incoming(p))
        if (cfg[e.source].height() >= h + 2) return true;
    return false;
}

bool is_root(const Topology& t, const SyncAlgorithm& alg,
             const TransConfig& cfg, NodeIndex p) {
    return dependency_error(t, cfg, p) || algo_error(t, alg, cfg, p);
}

std::optional<std::uint32_t> propagate_index(const Topology& t,
                                             const TransConfig& cfg,
                                             NodeIndex p) {
    const std::uint32_t h = cfg[p].height();
    std::optional<std::uint32_t> lowest_err;
    for (const auto& e : t.incoming(p)) {
        const TransNodeState& q = cfg[e.source];
        if (q.status == Status::Error && (!lowest_err || q.height() < *lowest_err))
            lowest_err = q.height();
    }
    if (lowest_err && *lowest_err + 1 < h) return *lowest_err + 1;
    return std::nullopt;
}

bool can_clear_error(const Topology& t, const TransConfig& cfg, NodeIndex p) {
    const TransNodeState& node = cfg[p];
    if (node.status != Status::Error) return false;
    const std::uint32_t h = node.height();
    for (const auto& e : t.incoming(p)) {
        const TransNodeState& q = cfg[e.source];
        const std::uint32_t hq = q.height();
        if (hq + 1 < h || hq > h + 1) return false;
        if (hq > h && q.status != Status::Correct) return false;
    }
    return true;
}

bool updatable(const Topology& t, const SyncAlgorithm& alg,
               const TransConfig& cfg, const TransParams& params, NodeIndex p,
               std::vector<LabeledState>& scratch) {
    const TransNodeState& node = cfg[p];
    if (node.status != Status::Correct) return false;
    const std::uint32_t h = node.height();
    if (params.bound && h >= *params.bound) return false;
    bool ahead = false;
    for (const auto& e : t.incoming(p)) {
        const std::uint32_t hq = cfg[e.source].height();
        if (hq != h && hq != h + 1) return false;
        if (hq > h) ahead = true;
    }
    if (params.mode == Mode::Greedy) return true;
    // Lazy: only move when the simulation visibly goes on, either locally
    // (next row differs) or at some neighbor (catch-up).
    return ahead || node.rows[h] != row_algo(t, alg, cfg, p, h, scratch);
}

bool updatable(const Topology& t, const SyncAlgorithm& alg,
               const TransConfig& cfg, const TransParams& params, NodeIndex p) {
    std::vector<LabeledState> scratch;
    return updatable(t, alg, cfg, params, p, scratch);
}

std::optional<Rule> enabled_rule(const Topology& t, const SyncAlgorithm& alg,
                                 const TransConfig& cfg, const TransParams& params,
                                 NodeIndex p) {
    const TransNodeState& node = cfg[p];
    if (node.height() > 0 || node.status == Status::Correct) {
        if (is_root(t, alg, cfg, p)) return Rule{RuleKind::Reset};
    }
    if (auto i = propagate_index(t, cfg, p)) return Rule{RuleKind::Propagate, *i};
    if (can_clear_error(t, cfg, p)) return Rule{RuleKind::Clear};
    if (updatable(t, alg, cfg, params, p)) return Rule{RuleKind::Update};
    return std::nullopt;
}

std::pair<TransConfig, std::vector<MoveRecord>> apply_step(
    const Topology& t, const SyncAlgorithm& alg, const TransConfig& cfg,
    const TransParams& params, const std::vector<NodeIndex>& selected) {
    if (selected.empty())
        throw TransError("apply_step: empty selection");

    struct Action {
        NodeIndex node;
        Rule rule;
        StateValue pushed;  // Update only
    };
    std::vector<Action> actions;
    actions.reserve(selected.size());
    for (NodeIndex p : selected) {
        auto rule = enabled_rule(t, alg, cfg, params, p);
        if (!rule)
            throw TransError("apply_step: node '" + t.id_of(p) +
                             "' selected but disabled");
        Action a{p, *rule, {}};
        if (rule->kind == RuleKind::Update)
            a.pushed = row_algo(t, alg, cfg, p, cfg[p].height());
        actions.push_back(std::move(a));
    }

    TransConfig next = cfg;
    std::vector<MoveRecord> moves;
    moves.reserve(actions.size());
    for (const Action& a : actions) {
        TransNodeState& node = next[a.node];
        switch (a.rule.kind) {
            case RuleKind::Reset:
                node.rows.resize(1);
                node.status = Status::Error;
                break;
            case RuleKind::Propagate:
                node.rows.resize(a.rule.trunc_index + 1);
                node.status = Status::Error;
                break;
            case RuleKind::Clear:
                node.status = Status::Correct;
                break;
            case RuleKind::Update:
                node.rows.push_back(a.pushed);
                break;
        }
        moves.push_back({a.node, a.rule});
    }
    return {std::move(next), std::move(moves)};
}

TransConfig clean_config(const StateMap& init) {
    TransConfig cfg(init.size());
    for (std::size_t p = 0; p < init.size(); ++p) {
        cfg[p].status = Status::Correct;
        cfg[p].rows = {init[p]};
    }
    return cfg;
}

TransConfig fuzz_config(const Topology& t, const SyncAlgorithm& alg,
                        const SyncHistory& oracle, const TransParams& params,
                        std::uint64_t seed) {
    Rng rng(seed);
    const std::uint32_t ceiling = 2 * t.diameter() + 2;
    const std::uint32_t max_h =
        params.bound ? std::min(*params.bound, ceiling) : ceiling;
    TransConfig cfg(t.n());
    for (NodeIndex p = 0; p < t.n(); ++p) {
        TransNodeState& node = cfg[p];
        node.status = rng.coin() ? Status::Correct : Status::Error;
        const std::uint32_t h = static_cast<std::uint32_t>(rng.below(max_h + 1));
        node.rows.reserve(h + 1);
        node.rows.push_back(oracle.rounds[0][p]);
        for (std::uint32_t i = 1; i <= h; ++i) {
            if (rng.coin())
                node.rows.push_back(oracle.row(i)[p]);
            else
                node.rows.push_back(alg.sample_state(t, p, rng));
        }
    }
    return cfg;
}

}  // namespace stabforge
