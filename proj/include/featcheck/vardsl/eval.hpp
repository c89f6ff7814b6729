#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "featcheck/distribution.hpp"
#include "featcheck/errors.hpp"
#include "featcheck/vardsl/ast.hpp"

namespace featcheck::vardsl {

/// Assignment of a value to every variable, indexed by variable id.
/// Booleans are 0/1, enums their ordinal.
using Valuation = std::vector<std::int32_t>;

namespace detail {

inline std::int64_t eval_value(const Expr* e, const Valuation& v, Combination comb) {
    switch (e->op) {
        case Op::IntLit:
        case Op::BoolLit:
        case Op::EnumLit: return e->value;
        case Op::VarRef:
            if (e->var_id < 0 || e->var_id >= static_cast<int>(v.size()))
                throw ContractViolation("unbound variable '" + e->name + "' in expression");
            return v[e->var_id];
        case Op::FeatHolds: return satisfies(comb, e->feat) ? 1 : 0;
        case Op::LabelRef: return eval_value(e->a.get(), v, comb);
        case Op::Add: return eval_value(e->a.get(), v, comb) + eval_value(e->b.get(), v, comb);
        case Op::Sub: return eval_value(e->a.get(), v, comb) - eval_value(e->b.get(), v, comb);
        case Op::Mul: return eval_value(e->a.get(), v, comb) * eval_value(e->b.get(), v, comb);
        case Op::MinOp: return std::min(eval_value(e->a.get(), v, comb), eval_value(e->b.get(), v, comb));
        case Op::MaxOp: return std::max(eval_value(e->a.get(), v, comb), eval_value(e->b.get(), v, comb));
        case Op::Neg: return -eval_value(e->a.get(), v, comb);
        case Op::Eq: return eval_value(e->a.get(), v, comb) == eval_value(e->b.get(), v, comb);
        case Op::Ne: return eval_value(e->a.get(), v, comb) != eval_value(e->b.get(), v, comb);
        case Op::Lt: return eval_value(e->a.get(), v, comb) < eval_value(e->b.get(), v, comb);
        case Op::Le: return eval_value(e->a.get(), v, comb) <= eval_value(e->b.get(), v, comb);
        case Op::Gt: return eval_value(e->a.get(), v, comb) > eval_value(e->b.get(), v, comb);
        case Op::Ge: return eval_value(e->a.get(), v, comb) >= eval_value(e->b.get(), v, comb);
        case Op::Not: return eval_value(e->a.get(), v, comb) == 0;
        case Op::And:
            return eval_value(e->a.get(), v, comb) != 0 && eval_value(e->b.get(), v, comb) != 0;
        case Op::Or:
            return eval_value(e->a.get(), v, comb) != 0 || eval_value(e->b.get(), v, comb) != 0;
        case Op::Implies:
            return eval_value(e->a.get(), v, comb) == 0 || eval_value(e->b.get(), v, comb) != 0;
        case Op::Iff:
            return (eval_value(e->a.get(), v, comb) != 0) == (eval_value(e->b.get(), v, comb) != 0);
    }
    throw ContractViolation("malformed expression");
}

} // namespace detail

inline std::int64_t eval_int(const ExprPtr& e, const Valuation& v) {
    return detail::eval_value(e.get(), v, Combination());
}

inline bool eval_bool(const ExprPtr& e, const Valuation& v, Combination comb) {
    if (!e) return true;  // absent guard
    return detail::eval_value(e.get(), v, comb) != 0;
}

/// Predicate evaluation over a state's variable valuation and feature
/// combination; feature atoms go through the satisfaction relation.
inline bool eval_pred(const ExprPtr& pred, const Valuation& v, Combination comb) {
    return eval_bool(pred, v, comb);
}

/// Applies a probabilistic update to a valuation: every branch maps the
/// valuation through its assignment list with all right-hand sides read
/// from the pre-state; branches yielding the same valuation are merged.
/// Values escaping a variable's domain raise a model error naming the
/// context and the variable.
inline Distribution<Valuation> apply_prob_update(const ProbUpdate& pu, const Valuation& v,
                                                 const std::vector<const VarDecl*>& vartab,
                                                 std::string_view context = "update") {
    std::vector<std::pair<Valuation, Rational>> entries;
    entries.reserve(pu.branches.size());
    for (const auto& br : pu.branches) {
        Valuation out = v;
        for (const auto& a : br.update.assigns) {
            std::int64_t value = detail::eval_value(a.rhs.get(), v, Combination());
            const VarDecl* decl =
                a.var_id >= 0 && a.var_id < static_cast<int>(vartab.size()) ? vartab[a.var_id] : nullptr;
            if (!decl) throw ContractViolation("assignment to unknown variable id");
            if (!value_in_domain(decl->type, value))
                throw ModelError(std::string(context) + ": value " + std::to_string(value) +
                                 " outside the domain of variable '" + decl->name + "'");
            out[a.var_id] = static_cast<std::int32_t>(value);
        }
        entries.emplace_back(std::move(out), br.prob);
    }
    return Distribution<Valuation>(std::move(entries));
}

/// Enumerates the valuations of the module's local variables satisfying
/// the per-variable inits and the explicit initial condition. Variables
/// outside the module are fixed to their domain minimum.
inline std::vector<Valuation> initial_valuations(const VarFeatureModule& m,
                                                 const std::vector<const VarDecl*>& vartab,
                                                 std::int64_t cap = (1 << 20)) {
    Valuation base(vartab.size(), 0);
    for (const auto* d : vartab) {
        if (!d) continue;
        std::int64_t lo = std::holds_alternative<RangeType>(d->type) ? std::get<RangeType>(d->type).lo : 0;
        base[d->id] = static_cast<std::int32_t>(d->init ? *d->init : lo);
    }
    std::vector<const VarDecl*> free_vars;
    std::int64_t combos = 1;
    for (const auto& d : m.vars) {
        if (d.init) continue;
        combos *= domain_size(d.type);
        if (combos > cap)
            throw ModelError("module '" + m.name + "': too many initial valuations to enumerate");
        free_vars.push_back(&d);
    }
    std::vector<Valuation> out;
    Valuation cur = base;
    // Depth-first over the free variables' domains.
    std::vector<std::int64_t> idx(free_vars.size(), 0);
    while (true) {
        for (std::size_t k = 0; k < free_vars.size(); ++k) {
            const VarDecl* d = free_vars[k];
            std::int64_t lo =
                std::holds_alternative<RangeType>(d->type) ? std::get<RangeType>(d->type).lo : 0;
            cur[d->id] = static_cast<std::int32_t>(lo + idx[k]);
        }
        if (!m.init_condition || eval_bool(m.init_condition, cur, Combination())) out.push_back(cur);
        std::size_t k = 0;
        while (k < free_vars.size()) {
            if (++idx[k] < domain_size(free_vars[k]->type)) break;
            idx[k] = 0;
            ++k;
        }
        if (k == free_vars.size()) break;
        if (free_vars.empty()) break;
    }
    return out;
}

} // namespace featcheck::vardsl
