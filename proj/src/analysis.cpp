#include "stabforge/analysis.hpp"

#include <algorithm>
#include <cmath>

namespace stabforge {

bool is_almost_clean(const Topology& t, const SyncAlgorithm& alg,
                     const TransConfig& cfg) {
    for (NodeIndex p = 0; p < t.n(); ++p) {
        if (is_root(t, alg, cfg, p) &&
            (cfg[p].height() > 0 || cfg[p].status == Status::Correct))
            return false;
        for (const auto& e : t.incoming(p)) {
            const std::int64_t gap =
                std::int64_t(cfg[p].height()) - std::int64_t(cfg[e.source].height());
            if (gap >= 2 || gap <= -2) return false;
        }
    }
    return true;
}

bool is_clean(const Topology& t, const SyncAlgorithm& alg,
              const TransConfig& cfg) {
    for (NodeIndex p = 0; p < t.n(); ++p)
        if (is_root(t, alg, cfg, p)) return false;
    return true;
}

std::optional<std::vector<NodeIndex>> find_e_path(const Topology& t,
                                                  const TransConfig& cfg,
                                                  NodeIndex p) {
    if (cfg[p].status != Status::Error)
        throw TransError("find_e_path: node '" + t.id_of(p) + "' is not in error");
    std::vector<NodeIndex> path{p};
    NodeIndex cur = p;
    for (std::size_t hops = 0; hops <= cfg[p].height() + 1; ++hops) {
        // Descend to any erroneous strictly-lower neighbor; if none exists
        // the current node is a root by the status/height guard.
        NodeIndex next = t.n();
        for (const auto& e : t.incoming(cur)) {
            const TransNodeState& q = cfg[e.source];
            if (q.status == Status::Error && q.height() < cfg[cur].height()) {
                next = e.source;
                break;
            }
        }
        if (next == t.n()) return path;
        path.push_back(next);
        cur = next;
    }
    return std::nullopt;
}

namespace {

bool d_path_search(const Topology& t, const TransConfig& cfg, NodeIndex cur,
                   std::vector<NodeIndex>& path) {
    path.push_back(cur);
    const std::uint32_t h = cfg[cur].height();
    // Hand over to an erroneous descent as soon as one is reachable.
    for (const auto& e : t.incoming(cur)) {
        const TransNodeState& q = cfg[e.source];
        if (q.status == Status::Error && q.height() < h) {
            auto suffix = find_e_path(t, cfg, e.source);
            if (suffix) {
                path.insert(path.end(), suffix->begin(), suffix->end());
                return true;
            }
        }
    }
    // Otherwise extend the correct prefix by exactly one height step.
    for (const auto& e : t.incoming(cur)) {
        const TransNodeState& q = cfg[e.source];
        if (q.status == Status::Correct && h > 0 && q.height() == h - 1) {
            if (d_path_search(t, cfg, e.source, path)) return true;
        }
    }
    path.pop_back();
    return false;
}

}  // namespace

std::optional<std::vector<NodeIndex>> find_d_path(const Topology& t,
                                                  const TransConfig& cfg,
                                                  NodeIndex p) {
    if (cfg[p].status == Status::Error) return find_e_path(t, cfg, p);
    std::vector<NodeIndex> path;
    if (d_path_search(t, cfg, p, path)) return path;
    return std::nullopt;
}

MoveTally tally_moves(const Topology& t, const SyncAlgorithm& alg,
                      const TransParams& params, const ExecutionTrace& trace) {
    MoveTally tally;
    tally.per_node.assign(t.n(), {});
    tally.update_before_clean_per_node.assign(t.n(), 0);

    Engine probe(t, alg, params, trace.initial);
    if (probe.clean()) tally.first_clean_step = 0;

    auto count = [&](const Engine& eng, std::size_t step_index,
                     const StepRecord& rec) {
        const bool before_clean = !tally.first_clean_step.has_value();
        for (std::size_t i = 0; i < rec.selected.size(); ++i) {
            const NodeIndex p = rec.selected[i];
            MoveCounts& node = tally.per_node[p];
            switch (rec.rules[i].kind) {
                case RuleKind::Reset: ++node.reset; ++tally.global.reset; break;
                case RuleKind::Propagate:
                    ++node.propagate;
                    ++tally.global.propagate;
                    if (before_clean) ++tally.propagate_before_clean;
                    break;
                case RuleKind::Clear:
                    ++node.clear;
                    ++tally.global.clear;
                    if (before_clean) ++tally.clear_before_clean;
                    break;
                case RuleKind::Update:
                    ++node.update;
                    ++tally.global.update;
                    if (before_clean) {
                        ++tally.update_before_clean;
                        ++tally.update_before_clean_per_node[p];
                    }
                    break;
            }
        }
        if (!tally.first_clean_step && eng.clean())
            tally.first_clean_step = step_index;
    };

    replay_trace(t, alg, params, trace,
                 [&](const Engine& eng, std::size_t i,
                     const Engine::StepResult&, const StepRecord& rec) {
                     count(eng, i, rec);
                 });
    return tally;
}

namespace {

std::uint32_t min_bd(const TransParams& params, std::uint32_t d) {
    return params.bound ? std::min(*params.bound, d) : d;
}

// Round index (1-based) of the round containing step `step`, given the
// recorded round-ending marks.
std::size_t round_of_step(const std::vector<std::size_t>& marks, std::size_t step) {
    std::size_t complete_before =
        std::lower_bound(marks.begin(), marks.end(), step) - marks.begin();
    return complete_before + 1;
}

}  // namespace

BoundReport verify_bounds(const Topology& t, const SyncAlgorithm& alg,
                          const TransParams& params, const ExecutionTrace& trace,
                          std::uint32_t T) {
    return verify_bounds(t, params, trace, tally_moves(t, alg, params, trace), T);
}

BoundReport verify_bounds(const Topology& t, const TransParams& params,
                          const ExecutionTrace& trace, const MoveTally& tally,
                          std::uint32_t T) {
    const double n = static_cast<double>(t.n());
    const double d = static_cast<double>(t.diameter());

    BoundReport report;
    auto add = [&](std::string name, std::string formula, double observed,
                   double bound, bool applicable = true) {
        report.checks.push_back({std::move(name), std::move(formula), observed,
                                 bound, applicable,
                                 !applicable || observed <= bound});
    };

    add("reset-moves", "n", static_cast<double>(tally.global.reset), n);

    {
        const double per_node_budget =
            params.bound ? std::min(n * *params.bound, 2 * n * d) : 2 * n * d;
        std::size_t worst = 0;
        for (std::size_t u : tally.update_before_clean_per_node)
            worst = std::max(worst, u);
        add("update-moves-per-node-before-clean", "min(n*B, 2*n*D)",
            static_cast<double>(worst), per_node_budget);
    }

    {
        const double budget = n * (n * (n + 1) + 2 * (n + d)) +
                              static_cast<double>(tally.update_before_clean);
        add("propagate-moves-aggregate",
            "n*(n*(n+1) + 2*(n+D)) + update-moves-before-clean",
            static_cast<double>(tally.global.propagate), budget);
    }

    add("clear-moves-before-clean", "propagate-moves + n",
        static_cast<double>(tally.clear_before_clean),
        static_cast<double>(tally.global.propagate) + n);

    {
        const double budget = 2.0 + 2.0 * min_bd(params, t.diameter());
        const bool reached = tally.first_clean_step.has_value();
        double observed = 0;
        bool applicable = true;
        if (reached) {
            observed = *tally.first_clean_step == 0
                           ? 0.0
                           : static_cast<double>(round_of_step(
                                 trace.round_marks, *tally.first_clean_step));
        } else if (trace.terminated) {
            observed = budget + 1;  // terminal configurations are clean
        } else {
            applicable = false;
        }
        add("rounds-to-clean", "2 + 2*min(B, D)", observed, budget, applicable);
    }

    {
        bool applicable = trace.terminated && !params.expects_infinite_run();
        double budget = 0;
        std::string formula;
        if (params.mode == Mode::Greedy) {
            formula = "min(2B, 2D) + 2 + B";
            if (params.bound)
                budget = 2.0 * min_bd(params, t.diameter()) + 2.0 + *params.bound;
            else
                applicable = false;
        } else {
            formula = "min(2B, 2D) + max(2D+2, D+3T)";
            budget = 2.0 * min_bd(params, t.diameter()) +
                     std::max(2.0 * d + 2.0, d + 3.0 * T);
        }
        add("rounds-total", formula,
            static_cast<double>(trace.round_marks.size()), budget, applicable);
    }

    return report;
}

std::optional<double> total_move_budget(std::size_t n_, std::uint32_t D,
                                        const TransParams& params,
                                        std::uint32_t T) {
    const double n = static_cast<double>(n_);
    const double d = static_cast<double>(D);
    const double u_before =
        params.bound ? std::min(n * *params.bound, 2 * n * d) * n : 2 * n * d * n;
    double u_tail;
    if (params.mode == Mode::Greedy) {
        if (!params.bound) return std::nullopt;
        u_tail = n * *params.bound;
    } else {
        const double cap = std::max<double>(T, d);
        u_tail = n * (params.bound ? std::min<double>(*params.bound, cap) : cap);
    }
    const double resets = n;
    const double props = u_before + n * (n * (n + 1) + 2 * (n + d));
    const double clears = props + n;
    return resets + u_before + u_tail + props + clears;
}

std::optional<std::string> check_terminal_shape(const Topology& t,
                                                const SyncHistory& oracle,
                                                const TransParams& params,
                                                const TransConfig& cfg) {
    if (params.expects_infinite_run())
        return "terminal configuration reached in greedy unbounded mode";
    const std::uint32_t h = cfg[0].height();
    for (NodeIndex p = 0; p < t.n(); ++p) {
        if (cfg[p].height() != h)
            return "heights not uniform: '" + t.id_of(p) + "' at " +
                   std::to_string(cfg[p].height()) + " vs " + std::to_string(h);
        if (cfg[p].status != Status::Correct)
            return "node '" + t.id_of(p) + "' still in error";
        for (std::uint32_t i = 1; i <= h; ++i) {
            if (cfg[p].rows[i] != oracle.row(i)[p])
                return "row " + std::to_string(i) + " of '" + t.id_of(p) +
                       "' differs from the synchronous history";
        }
    }
    const std::uint32_t T = oracle.stability_time;
    if (params.mode == Mode::Greedy) {
        if (h != *params.bound)
            return "greedy terminal height " + std::to_string(h) +
                   " differs from the bound " + std::to_string(*params.bound);
    } else if (params.bound && *params.bound < T) {
        if (h != *params.bound)
            return "terminal height " + std::to_string(h) +
                   " should equal the bound below the stability time";
    } else if (h < T) {
        return "terminal height " + std::to_string(h) +
               " below the stability time " + std::to_string(T);
    }
    if (params.bound && h > *params.bound)
        return "terminal height exceeds the bound";
    return std::nullopt;
}

void InvariantMonitor::at_start(const Engine& eng) {
    started_ = true;
    check_config(eng, 0);
    prev_clean_ = eng.clean();
    prev_almost_ = eng.almost_clean();
    prev_root_.assign(topo_.n(), 0);
    for (NodeIndex p = 0; p < topo_.n(); ++p) prev_root_[p] = eng.root_at(p);
}

void InvariantMonitor::after_step(const Engine& eng, std::size_t step_index,
                                  const Engine::StepResult& result) {
    after_step(eng, step_index, result, {});
}

void InvariantMonitor::after_step(const Engine& eng, std::size_t step_index,
                                  const Engine::StepResult& result,
                                  const StepRecord& record) {
    if (!started_) at_start(eng);
    ++checked_steps_;
    for (NodeIndex p : result.new_roots)
        violations_.push_back("step " + std::to_string(step_index) +
                              ": node '" + topo_.id_of(p) + "' became a root");
    // A root that clears its error flag must sit at height zero and stop
    // being a root.
    for (std::size_t i = 0; i < record.selected.size(); ++i) {
        const NodeIndex p = record.selected[i];
        if (record.rules[i].kind != RuleKind::Clear) continue;
        if (p < prev_root_.size() && prev_root_[p]) {
            if (eng.config()[p].height() != 0 || eng.root_at(p))
                violations_.push_back("step " + std::to_string(step_index) +
                                      ": root '" + topo_.id_of(p) +
                                      "' cleared without vanishing");
        }
    }
    check_config(eng, step_index);
    if (prev_clean_ && !eng.clean())
        violations_.push_back("step " + std::to_string(step_index) +
                              ": clean configuration lost");
    if (prev_almost_ && !eng.almost_clean())
        violations_.push_back("step " + std::to_string(step_index) +
                              ": almost-clean configuration lost");
    prev_clean_ = eng.clean();
    prev_almost_ = eng.almost_clean();
    if (prev_root_.size() == topo_.n())
        for (NodeIndex p = 0; p < topo_.n(); ++p) prev_root_[p] = eng.root_at(p);
}

void InvariantMonitor::check_config(const Engine& eng, std::size_t step_index) {
    const auto tag = [&] { return "step " + std::to_string(step_index) + ": "; };
    if (eng.almost_clean() == eng.error_rule_enabled())
        violations_.push_back(tag() +
                              "almost-clean disagrees with the enabled error rules");
    if (eng.clean() != eng.only_update_enabled())
        violations_.push_back(tag() +
                              "clean disagrees with the only-update-enabled view");
    const TransConfig& cfg = eng.config();
    for (NodeIndex p = 0; p < topo_.n(); ++p) {
        if (cfg[p].status == Status::Error && !find_e_path(topo_, cfg, p))
            violations_.push_back(tag() + "no erroneous descent path from '" +
                                  topo_.id_of(p) + "'");
    }
}

}  // namespace stabforge
