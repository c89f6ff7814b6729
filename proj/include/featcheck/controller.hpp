#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "featcheck/core.hpp"
#include "featcheck/cost.hpp"
#include "featcheck/distribution.hpp"
#include "featcheck/module.hpp"

namespace featcheck {

/// One probabilistic feature switch event: from a valid combination, at a
/// cost, to a distribution over valid combinations.
struct SwitchEvent {
    Combination from;
    CostVector cost;
    Distribution<Combination> to;

    friend bool operator==(const SwitchEvent& a, const SwitchEvent& b) {
        return a.from == b.from && a.cost == b.cost && a.to == b.to;
    }
};

/// Probabilistic feature controller over a signature: the coordination
/// component specifying permitted dynamic feature changes and their costs.
/// A simple (nondeterministic) controller is the special case where every
/// event's distribution is Dirac.
struct Controller {
    FeatureSignature signature;
    std::vector<Combination> initial;
    std::vector<SwitchEvent> events;
};

inline std::vector<std::string> validate_controller(const Controller& c) {
    std::vector<std::string> out = validate_signature(c.signature);
    if (c.initial.empty()) out.push_back("controller has no initial feature combination");
    for (Combination ini : c.initial)
        if (!c.signature.is_valid(ini)) out.push_back("initial combination not in the valid set");

    std::map<std::pair<Combination, std::string>, CostVector> costs;
    int idx = 0;
    for (const auto& e : c.events) {
        std::string where = "switch event #" + std::to_string(idx++);
        if (!c.signature.is_valid(e.from)) out.push_back(where + ": source combination not in the valid set");
        for (const auto& [target, p] : e.to.support())
            if (!c.signature.is_valid(target))
                out.push_back(where + ": invalid target combination in the distribution support");
        if (e.to.total_mass() != 1) out.push_back(where + ": distribution not normalized");

        std::string dist_sig;
        for (const auto& [target, p] : e.to.support())
            dist_sig += std::to_string(target.bits()) + ":" + rational_to_string(p) + ";";
        auto key = std::make_pair(e.from, dist_sig);
        auto [it, inserted] = costs.emplace(key, e.cost);
        if (!inserted && !(it->second == e.cost))
            out.push_back(where + ": cost determinism violated (same source and distribution, different cost)");
    }
    return out;
}

/// Con_static: every valid combination is initial and nothing ever
/// switches. Models a static SPL.
inline Controller static_controller(FeatureSignature sig) {
    Controller c;
    c.initial = sig.valid;
    c.signature = std::move(sig);
    return c;
}

/// Con_{D,E}: dynamic features D and environment features E may change at
/// any time, everything else is frozen. Events are exactly the pairs of
/// valid combinations whose nonempty symmetric difference is inside D u E;
/// all events are Dirac with zero cost.
inline Controller de_controller(FeatureSignature sig, Combination dynamic, Combination environment) {
    if (!dynamic.disjoint_with(environment))
        throw ContractViolation("de_controller: dynamic and environment feature sets overlap");
    if (!dynamic.subset_of(sig.universe()) || !environment.subset_of(sig.universe()))
        throw ContractViolation("de_controller: feature set outside the signature");
    Controller c;
    c.initial = sig.valid;
    const Combination changeable = dynamic | environment;
    for (Combination from : sig.valid) {
        for (Combination to : sig.valid) {
            Combination diff = from ^ to;
            if (diff.empty() || !diff.subset_of(changeable)) continue;
            c.events.push_back({from, CostVector{}, dirac(to)});
        }
    }
    c.signature = std::move(sig);
    return c;
}

/// Controllers as feature modules: locations are the valid combinations,
/// each switch event becomes an action-labeled transition with a fresh
/// action name and the trivial guard; all features are external.
inline FeatureModule<Combination> controller_to_module(const Controller& c) {
    FeatureModule<Combination> m;
    m.locations = c.signature.valid;
    m.initial = c.initial;
    m.interface.own = Combination();
    m.interface.ext = c.signature.universe();
    for (std::size_t i = 0; i < c.events.size(); ++i) {
        std::string name = "switch_" + std::to_string(i);
        m.actions.push_back(name);
        m.tr_act.push_back({c.events[i].from, BoolExpr::tru(), name, c.events[i].cost, c.events[i].to});
    }
    std::sort(m.actions.begin(), m.actions.end());
    return m;
}

} // namespace featcheck
