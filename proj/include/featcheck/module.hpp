#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "featcheck/core.hpp"
#include "featcheck/cost.hpp"
#include "featcheck/distribution.hpp"
#include "featcheck/errors.hpp"

namespace featcheck {

/// Declaration of the features a module implements (own) versus the
/// features its behavior merely depends on (ext). Disjoint by definition.
struct FeatureInterface {
    Combination own;
    Combination ext;

    Combination all() const { return own | ext; }
};

template <typename Loc>
struct ActTransition {
    Loc source;
    BoolExpr guard;       // over own+ext features, unprimed
    std::string action;
    CostVector cost;
    Distribution<Loc> target;

    friend bool operator==(const ActTransition& a, const ActTransition& b) {
        return a.source == b.source && a.guard == b.guard && a.action == b.action &&
               a.cost == b.cost && a.target == b.target;
    }
};

template <typename Loc>
struct SwTransition {
    Loc source;
    BoolExpr guard;   // over own+ext features, unprimed
    BoolExpr rho;     // over own features and their primed copies
    CostVector cost;
    Distribution<Loc> target;

    friend bool operator==(const SwTransition& a, const SwTransition& b) {
        return a.source == b.source && a.guard == b.guard && a.rho == b.rho &&
               a.cost == b.cost && a.target == b.target;
    }
};

/// Data-abstract feature module: an MDP-like automaton whose transitions
/// carry feature guards, and whose switch transitions react to changes of
/// its own features.
template <typename Loc>
struct FeatureModule {
    std::vector<Loc> locations;
    std::vector<Loc> initial;
    FeatureInterface interface;
    std::vector<std::string> actions;  // sorted, unique
    std::vector<ActTransition<Loc>> tr_act;
    std::vector<SwTransition<Loc>> tr_sw;

    bool has_action(std::string_view a) const {
        return std::binary_search(actions.begin(), actions.end(), a);
    }
    bool has_location(const Loc& l) const {
        return std::find(locations.begin(), locations.end(), l) != locations.end();
    }
};

namespace detail {

template <typename Loc>
bool distribution_over(const Distribution<Loc>& d, const FeatureModule<Loc>& m) {
    for (const auto& [loc, p] : d.support())
        if (!m.has_location(loc)) return false;
    return true;
}

} // namespace detail

/// Diagnostic check of all structural module invariants. Returns one
/// message per violation; empty means well-formed.
template <typename Loc>
std::vector<std::string> validate_module(const FeatureModule<Loc>& m) {
    std::vector<std::string> out;
    if (!m.interface.own.disjoint_with(m.interface.ext))
        out.push_back("interface own and ext features overlap");
    if (m.initial.empty()) out.push_back("no initial location");
    for (const auto& l : m.initial)
        if (!m.has_location(l)) out.push_back("initial location not among declared locations");
    for (std::size_t i = 0; i < m.locations.size(); ++i)
        for (std::size_t j = i + 1; j < m.locations.size(); ++j)
            if (m.locations[i] == m.locations[j]) out.push_back("duplicate location");
    if (!std::is_sorted(m.actions.begin(), m.actions.end()))
        out.push_back("action set not sorted");

    const Combination iface = m.interface.all();
    int idx = 0;
    for (const auto& t : m.tr_act) {
        std::string where = "action transition #" + std::to_string(idx++);
        if (!m.has_action(t.action)) out.push_back(where + ": action '" + t.action + "' not declared");
        if (t.guard.has_primed_atoms()) out.push_back(where + ": guard contains primed atoms");
        if (!t.guard.unprimed_atoms().subset_of(iface))
            out.push_back(where + ": guard atom outside the feature interface");
        if (!m.has_location(t.source)) out.push_back(where + ": unknown source location");
        if (!detail::distribution_over(t.target, m)) out.push_back(where + ": distribution over unknown location");
        if (t.target.total_mass() != 1) out.push_back(where + ": distribution not normalized");
    }
    idx = 0;
    for (const auto& t : m.tr_sw) {
        std::string where = "switch transition #" + std::to_string(idx++);
        if (t.guard.has_primed_atoms()) out.push_back(where + ": guard contains primed atoms");
        if (!t.guard.unprimed_atoms().subset_of(iface))
            out.push_back(where + ": guard atom outside the feature interface");
        if (!t.rho.unprimed_atoms().subset_of(m.interface.own) ||
            !t.rho.primed_atoms().subset_of(m.interface.own))
            out.push_back(where + ": rho atom outside own features");
        if (!m.has_location(t.source)) out.push_back(where + ": unknown source location");
        if (!detail::distribution_over(t.target, m)) out.push_back(where + ": distribution over unknown location");
        if (t.target.total_mass() != 1) out.push_back(where + ": distribution not normalized");
    }
    return out;
}

inline bool composable(const FeatureInterface& a, const FeatureInterface& b) {
    return a.own.disjoint_with(b.own);
}

template <typename L1, typename L2>
bool composable(const FeatureModule<L1>& a, const FeatureModule<L2>& b) {
    return composable(a.interface, b.interface);
}

namespace detail {

template <typename Loc>
std::string dist_key(const Distribution<Loc>& d, const std::map<Loc, int>& loc_index) {
    std::string s;
    for (const auto& [loc, p] : d.support()) {
        s += std::to_string(loc_index.at(loc));
        s += ":";
        s += rational_to_string(p);
        s += ";";
    }
    return s;
}

} // namespace detail

/// Parallel composition per the six interleaving/synchronization rules:
/// non-shared actions interleave with the idle side frozen by a Dirac
/// factor, shared actions synchronize (guard conjunction, cost sum,
/// distribution product), single-sided switches conjoin a frame condition
/// on the other side's own features, and joint switches combine both rho
/// annotations. Duplicate transitions are merged (Trans is a set).
template <typename L1, typename L2>
FeatureModule<std::pair<L1, L2>> compose(const FeatureModule<L1>& m1, const FeatureModule<L2>& m2) {
    using Loc = std::pair<L1, L2>;
    if (!composable(m1, m2)) {
        std::ostringstream msg;
        msg << "modules not composable; shared own features:";
        for (FeatureId f : (m1.interface.own & m2.interface.own).members()) msg << " #" << f;
        throw ComposeError(msg.str());
    }

    FeatureModule<Loc> out;
    out.interface.own = m1.interface.own | m2.interface.own;
    out.interface.ext = (m1.interface.ext | m2.interface.ext).minus(out.interface.own);

    for (const auto& l1 : m1.locations)
        for (const auto& l2 : m2.locations) out.locations.emplace_back(l1, l2);
    for (const auto& l1 : m1.initial)
        for (const auto& l2 : m2.initial) out.initial.emplace_back(l1, l2);

    out.actions = m1.actions;
    out.actions.insert(out.actions.end(), m2.actions.begin(), m2.actions.end());
    std::sort(out.actions.begin(), out.actions.end());
    out.actions.erase(std::unique(out.actions.begin(), out.actions.end()), out.actions.end());

    std::map<Loc, int> loc_index;
    for (std::size_t i = 0; i < out.locations.size(); ++i) loc_index[out.locations[i]] = static_cast<int>(i);

    const BoolExpr frame1 = BoolExpr::frame_equal(m1.interface.own);
    const BoolExpr frame2 = BoolExpr::frame_equal(m2.interface.own);

    std::set<std::string> seen_act, seen_sw;
    auto push_act = [&](ActTransition<Loc> t) {
        std::string key = std::to_string(loc_index.at(t.source)) + "|" + t.guard.key() + "|" + t.action +
                          "|" + t.cost.to_string() + "|" + detail::dist_key(t.target, loc_index);
        if (seen_act.insert(std::move(key)).second) out.tr_act.push_back(std::move(t));
    };
    auto push_sw = [&](SwTransition<Loc> t) {
        std::string key = std::to_string(loc_index.at(t.source)) + "|" + t.guard.key() + "|" + t.rho.key() +
                          "|" + t.cost.to_string() + "|" + detail::dist_key(t.target, loc_index);
        if (seen_sw.insert(std::move(key)).second) out.tr_sw.push_back(std::move(t));
    };

    // (i) / (ii): interleaving of non-shared actions.
    for (const auto& t : m1.tr_act) {
        if (m2.has_action(t.action)) continue;
        for (const auto& l2 : m2.locations) {
            auto lift = [&](const L1& l) { return Loc(l, l2); };
            push_act({Loc(t.source, l2), t.guard, t.action, t.cost, t.target.map(lift)});
        }
    }
    for (const auto& t : m2.tr_act) {
        if (m1.has_action(t.action)) continue;
        for (const auto& l1 : m1.locations) {
            auto lift = [&](const L2& l) { return Loc(l1, l); };
            push_act({Loc(l1, t.source), t.guard, t.action, t.cost, t.target.map(lift)});
        }
    }
    // (iii): synchronization on shared actions.
    for (const auto& t1 : m1.tr_act) {
        if (!m2.has_action(t1.action)) continue;
        for (const auto& t2 : m2.tr_act) {
            if (t2.action != t1.action) continue;
            push_act({Loc(t1.source, t2.source), t1.guard && t2.guard, t1.action, t1.cost + t2.cost,
                      product(t1.target, t2.target)});
        }
    }
    // (iv) / (v): single-sided switches, the idle side's own features frozen.
    for (const auto& t : m1.tr_sw) {
        for (const auto& l2 : m2.locations) {
            auto lift = [&](const L1& l) { return Loc(l, l2); };
            push_sw({Loc(t.source, l2), t.guard, t.rho && frame2, t.cost, t.target.map(lift)});
        }
    }
    for (const auto& t : m2.tr_sw) {
        for (const auto& l1 : m1.locations) {
            auto lift = [&](const L2& l) { return Loc(l1, l); };
            push_sw({Loc(l1, t.source), t.guard, t.rho && frame1, t.cost, t.target.map(lift)});
        }
    }
    // (vi): joint switches.
    for (const auto& t1 : m1.tr_sw)
        for (const auto& t2 : m2.tr_sw)
            push_sw({Loc(t1.source, t2.source), t1.guard && t2.guard, t1.rho && t2.rho, t1.cost + t2.cost,
                     product(t1.target, t2.target)});

    return out;
}

} // namespace featcheck
