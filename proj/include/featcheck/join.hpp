#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "featcheck/controller.hpp"
#include "featcheck/mdp.hpp"
#include "featcheck/module.hpp"

namespace featcheck {

struct JoinOptions {
    /// When set, the product is restricted to states reachable from the
    /// initial states; disable to materialize all of Loc x V.
    bool reachable_only = true;
};

template <typename Loc>
struct JoinResult {
    ExplicitMdp mdp;
    std::vector<std::pair<Loc, Combination>> states;  // index -> <location, combination>

    std::int32_t index_of(const Loc& l, Combination c) const {
        for (std::size_t i = 0; i < states.size(); ++i)
            if (states[i].first == l && states[i].second == c) return static_cast<std::int32_t>(i);
        return -1;
    }
};

/// Mod |x| Con: the MDP semantics of a feature module under a controller.
/// Moves arise from exactly three rules: enabled action transitions freeze
/// the combination (R1); controller events that leave the module's own
/// features untouched in every target fire on their own and freeze the
/// location (R2); events that change own features synchronize with an
/// enabled switch transition whose rho admits every target (R3).
template <typename Loc>
JoinResult<Loc> join(const FeatureModule<Loc>& m, const Controller& con, JoinOptions opts = {}) {
    if (!m.interface.all().subset_of(con.signature.universe()))
        throw ContractViolation("join: module interface mentions features outside the controller signature");

    const Combination own = m.interface.own;

    struct EventInfo {
        const SwitchEvent* event;
        bool changes_own;
    };
    std::map<Combination, std::vector<EventInfo>> events_from;
    for (const auto& e : con.events) {
        bool changes = false;
        for (const auto& [target, p] : e.to.support())
            if (!((e.from ^ target) & own).empty()) changes = true;
        events_from[e.from].push_back({&e, changes});
    }

    using State = std::pair<Loc, Combination>;
    JoinResult<Loc> result;
    std::map<State, std::int32_t> index;
    MdpBuilder builder;

    // States are interned in discovery order; exploring by ascending index
    // is a breadth-first unfolding.
    auto intern = [&](const Loc& l, Combination c) {
        auto [it, inserted] = index.emplace(State(l, c), static_cast<std::int32_t>(result.states.size()));
        if (inserted) {
            result.states.emplace_back(l, c);
            builder.add_state();
        }
        return it->second;
    };

    for (const auto& l : m.initial)
        for (Combination c : con.initial) builder.mark_initial(intern(l, c));
    if (!opts.reachable_only)
        for (const auto& l : m.locations)
            for (Combination c : con.signature.valid) intern(l, c);

    for (std::int32_t s = 0; s < static_cast<std::int32_t>(result.states.size()); ++s) {
        const Loc loc = result.states[s].first;
        const Combination comb = result.states[s].second;

        // R1: action transitions with a satisfied guard; the combination is
        // frozen by the Dirac factor.
        for (const auto& t : m.tr_act) {
            if (!(t.source == loc)) continue;
            if (!satisfies(comb, t.guard)) continue;
            std::vector<std::pair<std::int32_t, Rational>> branches;
            for (const auto& [l2, p] : t.target.support()) branches.emplace_back(intern(l2, comb), p);
            builder.add_move(s, t.cost, std::move(branches));
        }

        auto evs = events_from.find(comb);
        if (evs == events_from.end()) continue;
        for (const auto& info : evs->second) {
            const SwitchEvent& e = *info.event;
            if (!info.changes_own) {
                // R2: the module idles; only the combination moves.
                std::vector<std::pair<std::int32_t, Rational>> branches;
                for (const auto& [c2, p] : e.to.support()) branches.emplace_back(intern(loc, c2), p);
                builder.add_move(s, e.cost, std::move(branches));
                continue;
            }
            // R3: synchronize with an enabled switch transition whose rho
            // admits every target of the event.
            for (const auto& t : m.tr_sw) {
                if (!(t.source == loc)) continue;
                if (!satisfies(comb, t.guard)) continue;
                bool all_admitted = true;
                for (const auto& [c2, p] : e.to.support())
                    if (!switch_holds(t.rho, comb, c2)) {
                        all_admitted = false;
                        break;
                    }
                if (!all_admitted) continue;
                std::vector<std::pair<std::int32_t, Rational>> branches;
                for (const auto& [l2, pl] : t.target.support())
                    for (const auto& [c2, pc] : e.to.support())
                        branches.emplace_back(intern(l2, c2), pl * pc);
                builder.add_move(s, t.cost + e.cost, std::move(branches));
            }
        }
    }

    result.mdp = builder.finalize();
    return result;
}

} // namespace featcheck
