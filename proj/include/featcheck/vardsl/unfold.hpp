#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <unordered_map>
#include <utility>
#include <vector>

#include "featcheck/controller.hpp"
#include "featcheck/join.hpp"
#include "featcheck/mdp.hpp"
#include "featcheck/vardsl/ast.hpp"
#include "featcheck/vardsl/compose.hpp"
#include "featcheck/vardsl/eval.hpp"

namespace featcheck::vardsl {

/// Explicit MDP over <valuation, combination> states.
struct VarJoinResult {
    ExplicitMdp mdp;
    std::vector<Valuation> valuations;  // interned distinct valuations
    std::vector<std::pair<std::int32_t, Combination>> states;

    const Valuation& state_valuation(std::int32_t s) const { return valuations[states[s].first]; }
    Combination state_comb(std::int32_t s) const { return states[s].second; }

    /// Per-state mask of a predicate over <valuation, combination>.
    std::vector<char> eval_mask(const ExprPtr& pred) const {
        std::vector<char> mask(states.size(), 0);
        for (std::size_t s = 0; s < states.size(); ++s)
            mask[s] = eval_pred(pred, state_valuation(static_cast<std::int32_t>(s)), states[s].second);
        return mask;
    }
};

namespace detail {

struct ValuationHash {
    std::size_t operator()(const Valuation& v) const {
        std::size_t h = 1469598103934665603ull;
        for (std::int32_t x : v) {
            h ^= static_cast<std::size_t>(x) + 0x9e3779b97f4a7c15ull;
            h *= 1099511628211ull;
        }
        return h;
    }
};

/// Buckets transitions by an equality conjunct on the most discriminating
/// variable, so the per-state scan touches only plausible transitions.
struct TransitionIndex {
    int selector = -1;
    std::map<std::int64_t, std::vector<std::int32_t>> buckets;
    std::vector<std::int32_t> rest;

    static void equality_pins(const ExprPtr& e, std::map<int, std::int64_t>& pins) {
        if (!e) return;
        if (e->op == Op::And) {
            equality_pins(e->a, pins);
            equality_pins(e->b, pins);
            return;
        }
        if (e->op != Op::Eq) return;
        const Expr* lhs = e->a.get();
        const Expr* rhs = e->b.get();
        if (lhs->op != Op::VarRef) std::swap(lhs, rhs);
        if (lhs->op != Op::VarRef) return;
        if (rhs->op == Op::IntLit || rhs->op == Op::EnumLit || rhs->op == Op::BoolLit)
            pins.emplace(lhs->var_id, rhs->value);
    }

    static TransitionIndex build(const std::vector<SymbolicTransition>& transitions) {
        std::vector<std::map<int, std::int64_t>> pins(transitions.size());
        std::map<int, int> votes;
        for (std::size_t i = 0; i < transitions.size(); ++i) {
            equality_pins(transitions[i].guard, pins[i]);
            for (const auto& [var, value] : pins[i]) votes[var]++;
        }
        TransitionIndex index;
        int best_votes = 0;
        for (const auto& [var, count] : votes)
            if (count > best_votes) {
                best_votes = count;
                index.selector = var;
            }
        for (std::size_t i = 0; i < transitions.size(); ++i) {
            auto pin = pins[i].find(index.selector);
            if (index.selector >= 0 && pin != pins[i].end())
                index.buckets[pin->second].push_back(static_cast<std::int32_t>(i));
            else
                index.rest.push_back(static_cast<std::int32_t>(i));
        }
        return index;
    }

    template <typename Fn>
    void for_candidates(const Valuation& v, Fn&& fn) const {
        if (selector >= 0) {
            auto it = buckets.find(v[selector]);
            if (it != buckets.end())
                for (std::int32_t i : it->second) fn(i);
        }
        for (std::int32_t i : rest) fn(i);
    }
};

} // namespace detail

/// Mod |x| Con for a variable feature module without external variables:
/// states are <valuation, combination> pairs, moves mirror the
/// data-abstract join with distributions over valuations derived from the
/// probabilistic updates.
inline VarJoinResult join_var(const VarFeatureModule& m, const Controller& con,
                              const std::vector<const VarDecl*>& vartab, JoinOptions opts = {}) {
    if (!(m.own | m.ext).subset_of(con.signature.universe()))
        throw ContractViolation("join_var: module interface mentions features outside the signature");
    // Every referenced variable must be local: compose the modules first.
    {
        std::set<int> referenced;
        std::function<void(const ExprPtr&)> collect = [&](const ExprPtr& e) {
            if (!e) return;
            if (e->op == Op::VarRef) {
                referenced.insert(e->var_id);
                return;
            }
            collect(e->a);
            collect(e->b);
        };
        for (const auto& t : m.transitions) {
            collect(t.guard);
            for (const auto& br : t.update.branches)
                for (const auto& a : br.update.assigns) collect(a.rhs);
        }
        collect(m.init_condition);
        for (int id : referenced)
            if (!m.owns_var(id))
                throw ContractViolation(
                    "join_var: variable '" +
                    (id >= 0 && id < static_cast<int>(vartab.size()) && vartab[id] ? vartab[id]->name
                                                                                   : "?") +
                    "' is external to the module; compose the modules first");
    }

    struct EventInfo {
        const SwitchEvent* event;
        bool changes_own;
    };
    std::map<Combination, std::vector<EventInfo>> events_from;
    for (const auto& e : con.events) {
        bool changes = false;
        for (const auto& [target, p] : e.to.support())
            if (!((e.from ^ target) & m.own).empty()) changes = true;
        events_from[e.from].push_back({&e, changes});
    }

    auto index = detail::TransitionIndex::build(m.transitions);

    VarJoinResult result;
    std::unordered_map<Valuation, std::int32_t, detail::ValuationHash> val_ids;
    auto intern_valuation = [&](const Valuation& v) {
        auto [it, inserted] = val_ids.emplace(v, static_cast<std::int32_t>(result.valuations.size()));
        if (inserted) result.valuations.push_back(v);
        return it->second;
    };

    std::map<std::pair<std::int32_t, Combination>, std::int32_t> state_ids;
    MdpBuilder builder;
    auto intern_state = [&](std::int32_t vid, Combination c) {
        auto [it, inserted] =
            state_ids.emplace(std::make_pair(vid, c), static_cast<std::int32_t>(result.states.size()));
        if (inserted) {
            result.states.emplace_back(vid, c);
            builder.add_state();
        }
        return it->second;
    };

    for (const Valuation& v : initial_valuations(m, vartab)) {
        std::int32_t vid = intern_valuation(v);
        for (Combination c : con.initial) builder.mark_initial(intern_state(vid, c));
    }
    if (!opts.reachable_only)
        throw ContractViolation("join_var: only reachable-state construction is supported");

    std::string context;
    for (std::int32_t s = 0; s < static_cast<std::int32_t>(result.states.size()); ++s) {
        const Combination comb = result.states[s].second;
        const Valuation v = result.valuations[result.states[s].first];  // copy: interning reallocates

        auto evs = events_from.find(comb);

        index.for_candidates(v, [&](std::int32_t ti) {
            const SymbolicTransition& t = m.transitions[ti];
            if (!satisfies(comb, t.feature_guard)) return;
            if (!eval_bool(t.guard, v, comb)) return;
            context = "transition at line " + std::to_string(t.line);
            if (!t.is_switch) {
                // R1: the combination is frozen by the Dirac factor.
                auto lambda = apply_prob_update(t.update, v, vartab, context);
                std::vector<std::pair<std::int32_t, Rational>> branches;
                for (const auto& [v2, p] : lambda.support())
                    branches.emplace_back(intern_state(intern_valuation(v2), comb), p);
                builder.add_move(s, t.cost, std::move(branches));
                return;
            }
            if (evs == events_from.end()) return;
            // R3: switch transitions synchronize with own-changing events
            // whose every target is admitted by rho.
            for (const auto& info : evs->second) {
                if (!info.changes_own) continue;
                const SwitchEvent& e = *info.event;
                bool all_admitted = true;
                for (const auto& [c2, p] : e.to.support())
                    if (!switch_holds(t.rho, comb, c2)) {
                        all_admitted = false;
                        break;
                    }
                if (!all_admitted) continue;
                auto lambda = apply_prob_update(t.update, v, vartab, context);
                std::vector<std::pair<std::int32_t, Rational>> branches;
                for (const auto& [v2, pv] : lambda.support())
                    for (const auto& [c2, pc] : e.to.support())
                        branches.emplace_back(intern_state(intern_valuation(v2), c2), pv * pc);
                builder.add_move(s, t.cost + e.cost, std::move(branches));
            }
        });

        if (evs != events_from.end()) {
            // R2: events leaving the module's own features untouched fire on
            // their own; the valuation is frozen.
            for (const auto& info : evs->second) {
                if (info.changes_own) continue;
                const SwitchEvent& e = *info.event;
                std::int32_t vid = result.states[s].first;
                std::vector<std::pair<std::int32_t, Rational>> branches;
                for (const auto& [c2, p] : e.to.support())
                    branches.emplace_back(intern_state(vid, c2), p);
                builder.add_move(s, e.cost, std::move(branches));
            }
        }
    }

    result.mdp = builder.finalize();
    return result;
}

/// Convenience pipeline: compose all modules of the file and join with its
/// controller.
inline VarJoinResult build_mdp(const ModelFile& model, JoinOptions opts = {}) {
    if (model.modules.size() == 1)
        return join_var(model.modules.front(), model.build_controller(), model.var_table(), opts);
    VarFeatureModule composed = compose_all(model);
    return join_var(composed, model.build_controller(), model.var_table(), opts);
}

} // namespace featcheck::vardsl
