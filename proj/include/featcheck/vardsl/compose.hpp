#pragma once

#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "featcheck/errors.hpp"
#include "featcheck/vardsl/ast.hpp"

namespace featcheck::vardsl {

namespace detail {

inline ProbUpdate product_update(const ProbUpdate& a, const ProbUpdate& b) {
    // The combined branch performs both assignment lists simultaneously
    // (disjoint local variables) with probability p1 * p2. Branches are
    // kept unmerged; merging of equal results happens at evaluation.
    ProbUpdate out;
    for (const auto& ba : a.branches)
        for (const auto& bb : b.branches) {
            PuBranch br;
            br.prob = ba.prob * bb.prob;
            br.update.assigns = ba.update.assigns;
            br.update.assigns.insert(br.update.assigns.end(), bb.update.assigns.begin(),
                                     bb.update.assigns.end());
            out.branches.push_back(std::move(br));
        }
    return out;
}

inline BoolExpr conj_fguard(const BoolExpr& a, const BoolExpr& b) { return a && b; }

inline void push_unique(std::vector<SymbolicTransition>& out, SymbolicTransition t) {
    for (const auto& existing : out)
        if (existing == t) return;
    out.push_back(std::move(t));
}

} // namespace detail

/// Parallel composition of feature modules with variables: non-shared
/// actions interleave unchanged, shared actions merge guards, feature
/// guards, costs and probabilistic updates, and switch transitions follow
/// the frame-condition scheme of the data-abstract composition.
inline VarFeatureModule compose_var(const VarFeatureModule& m1, const VarFeatureModule& m2) {
    if (!m1.own.disjoint_with(m2.own)) {
        std::ostringstream msg;
        msg << "modules '" << m1.name << "' and '" << m2.name << "' own common features";
        throw ComposeError(msg.str());
    }
    for (const auto& v1 : m1.vars)
        for (const auto& v2 : m2.vars)
            if (v1.name == v2.name || v1.id == v2.id)
                throw ComposeError("modules '" + m1.name + "' and '" + m2.name +
                                   "' share local variable '" + v1.name + "'");

    VarFeatureModule out;
    out.name = m1.name + "_" + m2.name;
    out.own = m1.own | m2.own;
    out.ext = (m1.ext | m2.ext).minus(out.own);
    out.vars = m1.vars;
    out.vars.insert(out.vars.end(), m2.vars.begin(), m2.vars.end());
    out.init_condition = conjoin(m1.init_condition, m2.init_condition);

    auto acts1 = m1.action_set();
    auto acts2 = m2.action_set();
    auto shared = [&](const std::string& a) {
        return std::binary_search(acts1.begin(), acts1.end(), a) &&
               std::binary_search(acts2.begin(), acts2.end(), a);
    };

    const BoolExpr frame1 = BoolExpr::frame_equal(m1.own);
    const BoolExpr frame2 = BoolExpr::frame_equal(m2.own);

    // Rule 1: action transitions with non-shared actions carry over.
    for (const auto& t : m1.transitions)
        if (!t.is_switch && !shared(t.action)) detail::push_unique(out.transitions, t);
    for (const auto& t : m2.transitions)
        if (!t.is_switch && !shared(t.action)) detail::push_unique(out.transitions, t);

    // Rule 2: shared actions synchronize.
    for (const auto& t1 : m1.transitions) {
        if (t1.is_switch || !shared(t1.action)) continue;
        for (const auto& t2 : m2.transitions) {
            if (t2.is_switch || t2.action != t1.action) continue;
            SymbolicTransition t;
            t.action = t1.action;
            t.guard = conjoin(t1.guard, t2.guard);
            t.feature_guard = detail::conj_fguard(t1.feature_guard, t2.feature_guard);
            t.cost = t1.cost + t2.cost;
            t.update = detail::product_update(t1.update, t2.update);
            t.line = t1.line;
            detail::push_unique(out.transitions, std::move(t));
        }
    }

    // Switch transitions: single-sided with the other side's own features
    // framed, plus joint switches.
    for (const auto& t : m1.transitions) {
        if (!t.is_switch) continue;
        SymbolicTransition framed = t;
        framed.rho = t.rho && frame2;
        detail::push_unique(out.transitions, std::move(framed));
    }
    for (const auto& t : m2.transitions) {
        if (!t.is_switch) continue;
        SymbolicTransition framed = t;
        framed.rho = t.rho && frame1;
        detail::push_unique(out.transitions, std::move(framed));
    }
    for (const auto& t1 : m1.transitions) {
        if (!t1.is_switch) continue;
        for (const auto& t2 : m2.transitions) {
            if (!t2.is_switch) continue;
            SymbolicTransition t;
            t.is_switch = true;
            t.rho = t1.rho && t2.rho;
            t.guard = conjoin(t1.guard, t2.guard);
            t.feature_guard = detail::conj_fguard(t1.feature_guard, t2.feature_guard);
            t.cost = t1.cost + t2.cost;
            t.update = detail::product_update(t1.update, t2.update);
            t.line = t1.line;
            detail::push_unique(out.transitions, std::move(t));
        }
    }
    return out;
}

/// Folds compose_var over all modules of a model file, left to right.
inline VarFeatureModule compose_all(const ModelFile& model) {
    if (model.modules.empty()) throw ContractViolation("model has no modules");
    VarFeatureModule acc = model.modules.front();
    for (std::size_t i = 1; i < model.modules.size(); ++i) acc = compose_var(acc, model.modules[i]);
    return acc;
}

} // namespace featcheck::vardsl
