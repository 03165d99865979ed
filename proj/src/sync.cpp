#include "stabforge/sync.hpp"

namespace stabforge {

StateMap sync_round(const Topology& t, const SyncAlgorithm& alg,
                    const StateMap& states) {
    if (states.size() != t.n())
        throw SyncError("sync_round: configuration does not cover the node set");
    StateMap next(t.n());
    std::vector<LabeledState> view;
    for (NodeIndex p = 0; p < t.n(); ++p) {
        t.neighbor_view_into(p, states, view);
        try {
            next[p] = alg.algo(states[p], view);
        } catch (const std::exception& e) {
            throw SyncError("sync_round: algorithm failed at node '" +
                            t.id_of(p) + "': " + e.what());
        }
    }
    return next;
}

SyncHistory run_to_stability(const Topology& t, const SyncAlgorithm& alg,
                             const StateMap& init, std::uint32_t max_rounds) {
    std::string why;
    if (!alg.is_valid(t, init, &why))
        throw SyncError("invalid initial configuration: " + why);

    SyncHistory hist;
    hist.rounds.push_back(init);
    for (std::uint32_t i = 0; i <= max_rounds; ++i) {
        StateMap next = sync_round(t, alg, hist.rounds.back());
        if (next == hist.rounds.back()) {
            hist.stability_time = i;
            return hist;
        }
        hist.rounds.push_back(std::move(next));
    }
    throw SyncError("not stable within max_rounds (" +
                    std::to_string(max_rounds) + ")");
}

}  // namespace stabforge
