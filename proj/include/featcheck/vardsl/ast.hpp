#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "featcheck/analysis.hpp"
#include "featcheck/controller.hpp"
#include "featcheck/core.hpp"
#include "featcheck/cost.hpp"
#include "featcheck/rational.hpp"

namespace featcheck::vardsl {

struct BoolType {
    friend bool operator==(const BoolType&, const BoolType&) { return true; }
};
struct RangeType {
    std::int64_t lo = 0, hi = 0;
    friend bool operator==(const RangeType& a, const RangeType& b) { return a.lo == b.lo && a.hi == b.hi; }
};
struct EnumType {
    std::vector<std::string> values;
    friend bool operator==(const EnumType& a, const EnumType& b) { return a.values == b.values; }
};
using VarType = std::variant<BoolType, RangeType, EnumType>;

inline std::int64_t domain_size(const VarType& t) {
    if (std::holds_alternative<BoolType>(t)) return 2;
    if (const auto* r = std::get_if<RangeType>(&t)) return r->hi - r->lo + 1;
    return static_cast<std::int64_t>(std::get<EnumType>(t).values.size());
}

inline bool value_in_domain(const VarType& t, std::int64_t v) {
    if (std::holds_alternative<BoolType>(t)) return v == 0 || v == 1;
    if (const auto* r = std::get_if<RangeType>(&t)) return v >= r->lo && v <= r->hi;
    return v >= 0 && v < static_cast<std::int64_t>(std::get<EnumType>(t).values.size());
}

/// Typed finite-domain variable. Enum and bool values are stored as
/// ordinals; `id` is the variable's index in the model-wide table.
struct VarDecl {
    std::string name;
    VarType type;
    std::optional<std::int64_t> init;
    int id = -1;

    friend bool operator==(const VarDecl& a, const VarDecl& b) {
        return a.name == b.name && a.type == b.type && a.init == b.init && a.id == b.id;
    }
};

enum class Op : std::uint8_t {
    IntLit,
    BoolLit,
    VarRef,
    EnumLit,
    FeatHolds,
    LabelRef,
    Add,
    Sub,
    Mul,
    MinOp,
    MaxOp,
    Neg,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Not,
    And,
    Or,
    Implies,
    Iff,
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Mixed integer/boolean expression tree; feature conditions appear as
/// FeatHolds atoms carrying a core feature expression.
struct Expr {
    Op op = Op::BoolLit;
    std::int64_t value = 0;   // IntLit value, BoolLit 0/1, EnumLit ordinal
    std::string name;         // VarRef / EnumLit / LabelRef spelling
    int var_id = -1;          // VarRef: variable id; EnumLit: owning variable id
    BoolExpr feat;            // FeatHolds payload
    ExprPtr a, b;             // operands (LabelRef keeps its body in a)
    int src_line = 0, src_col = 0;  // diagnostics only, never compared
};

inline ExprPtr make_int(std::int64_t v) {
    auto e = std::make_shared<Expr>();
    e->op = Op::IntLit;
    e->value = v;
    return e;
}
inline ExprPtr make_bool(bool v) {
    auto e = std::make_shared<Expr>();
    e->op = Op::BoolLit;
    e->value = v ? 1 : 0;
    return e;
}
inline ExprPtr make_var(std::string name, int id) {
    auto e = std::make_shared<Expr>();
    e->op = Op::VarRef;
    e->name = std::move(name);
    e->var_id = id;
    return e;
}
inline ExprPtr make_enum(std::string name, std::int64_t ordinal) {
    auto e = std::make_shared<Expr>();
    e->op = Op::EnumLit;
    e->name = std::move(name);
    e->value = ordinal;
    return e;
}
inline ExprPtr make_feat(BoolExpr fe) {
    auto e = std::make_shared<Expr>();
    e->op = Op::FeatHolds;
    e->feat = std::move(fe);
    return e;
}
inline ExprPtr make_label_ref(std::string name, ExprPtr body) {
    auto e = std::make_shared<Expr>();
    e->op = Op::LabelRef;
    e->name = std::move(name);
    e->a = std::move(body);
    return e;
}
inline ExprPtr make_unary(Op op, ExprPtr a) {
    auto e = std::make_shared<Expr>();
    e->op = op;
    e->a = std::move(a);
    return e;
}
inline ExprPtr make_binary(Op op, ExprPtr a, ExprPtr b) {
    auto e = std::make_shared<Expr>();
    e->op = op;
    e->a = std::move(a);
    e->b = std::move(b);
    return e;
}

/// Conjunction treating null as `true`.
inline ExprPtr conjoin(ExprPtr a, ExprPtr b) {
    if (!a) return b;
    if (!b) return a;
    return make_binary(Op::And, std::move(a), std::move(b));
}

inline bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->op != b->op || a->value != b->value || a->name != b->name || a->var_id != b->var_id)
        return false;
    if (a->op == Op::FeatHolds && !(a->feat == b->feat)) return false;
    if (a->op == Op::LabelRef) return true;  // identity is the label name
    return expr_equal(a->a, b->a) && expr_equal(a->b, b->b);
}

struct Assign {
    std::string var;
    int var_id = -1;
    ExprPtr rhs;

    friend bool operator==(const Assign& a, const Assign& b) {
        return a.var == b.var && a.var_id == b.var_id && expr_equal(a.rhs, b.rhs);
    }
};

/// One update: assignments to pairwise distinct local variables, all
/// right-hand sides evaluated in the pre-state.
struct Update {
    std::vector<Assign> assigns;

    friend bool operator==(const Update& a, const Update& b) { return a.assigns == b.assigns; }
};

struct PuBranch {
    Rational prob;
    Update update;

    friend bool operator==(const PuBranch& a, const PuBranch& b) {
        return a.prob == b.prob && a.update == b.update;
    }
};

/// Probabilistic update: positive branch probabilities summing to 1.
struct ProbUpdate {
    std::vector<PuBranch> branches;

    friend bool operator==(const ProbUpdate& a, const ProbUpdate& b) { return a.branches == b.branches; }
};

/// Symbolic guarded transition: a variable guard plus a feature guard,
/// labeled either by an action or by a switch annotation rho over the
/// module's own features and their primed copies.
struct SymbolicTransition {
    bool is_switch = false;
    std::string action;       // when !is_switch
    BoolExpr rho;             // when is_switch
    ExprPtr guard;            // null means true
    BoolExpr feature_guard;   // True when absent
    CostVector cost;
    ProbUpdate update;
    int line = 0;             // diagnostics only

    friend bool operator==(const SymbolicTransition& a, const SymbolicTransition& b) {
        return a.is_switch == b.is_switch && a.action == b.action && a.rho == b.rho &&
               expr_equal(a.guard, b.guard) && a.feature_guard == b.feature_guard && a.cost == b.cost &&
               a.update == b.update;
    }
};

/// Feature module with typed finite-domain variables and symbolic
/// transitions; locations are subsumed by the variable valuations.
struct VarFeatureModule {
    std::string name;
    Combination own, ext;
    std::vector<VarDecl> vars;
    ExprPtr init_condition;   // explicit extra condition, null if none
    std::vector<SymbolicTransition> transitions;

    std::vector<std::string> action_set() const {
        std::vector<std::string> acts;
        for (const auto& t : transitions)
            if (!t.is_switch) acts.push_back(t.action);
        std::sort(acts.begin(), acts.end());
        acts.erase(std::unique(acts.begin(), acts.end()), acts.end());
        return acts;
    }

    bool has_action(std::string_view a) const {
        for (const auto& t : transitions)
            if (!t.is_switch && t.action == a) return true;
        return false;
    }

    bool owns_var(int id) const {
        for (const auto& v : vars)
            if (v.id == id) return true;
        return false;
    }

    friend bool operator==(const VarFeatureModule& a, const VarFeatureModule& b) {
        return a.name == b.name && a.own == b.own && a.ext == b.ext && a.vars == b.vars &&
               expr_equal(a.init_condition, b.init_condition) && a.transitions == b.transitions;
    }
};

struct ControllerDecl {
    std::vector<Combination> initial;
    std::vector<SwitchEvent> events;

    friend bool operator==(const ControllerDecl& a, const ControllerDecl& b) {
        return a.initial == b.initial && a.events == b.events;
    }
};

struct LabelDecl {
    std::string name;
    ExprPtr cond;

    friend bool operator==(const LabelDecl& a, const LabelDecl& b) {
        return a.name == b.name && expr_equal(a.cond, b.cond);
    }
};

struct QueryDecl {
    std::string name;
    QueryKind kind = QueryKind::PmaxReach;
    std::string cost_type;
    ExprPtr target;
    ExprPtr constraint;  // until queries only

    friend bool operator==(const QueryDecl& a, const QueryDecl& b) {
        return a.name == b.name && a.kind == b.kind && a.cost_type == b.cost_type &&
               expr_equal(a.target, b.target) && expr_equal(a.constraint, b.constraint);
    }
};

struct ConstDecl {
    std::string name;
    std::int64_t value = 0;

    friend bool operator==(const ConstDecl& a, const ConstDecl& b) {
        return a.name == b.name && a.value == b.value;
    }
};

/// A parsed model file: signature, variable feature modules, optional
/// controller (static when absent), labels and queries.
struct ModelFile {
    std::vector<ConstDecl> constants;
    FeatureSignature signature;
    std::vector<VarFeatureModule> modules;
    bool has_controller = false;
    ControllerDecl controller;
    std::vector<LabelDecl> labels;
    std::vector<QueryDecl> queries;

    Controller build_controller() const {
        if (!has_controller) return static_controller(signature);
        Controller c;
        c.signature = signature;
        c.initial = controller.initial;
        c.events = controller.events;
        return c;
    }

    /// Model-wide variable table ordered by id.
    std::vector<const VarDecl*> var_table() const {
        std::vector<const VarDecl*> tab;
        for (const auto& m : modules)
            for (const auto& v : m.vars) {
                if (v.id >= static_cast<int>(tab.size())) tab.resize(v.id + 1, nullptr);
                tab[v.id] = &v;
            }
        return tab;
    }

    const LabelDecl* find_label(std::string_view name) const {
        for (const auto& l : labels)
            if (l.name == name) return &l;
        return nullptr;
    }

    const QueryDecl* find_query(std::string_view name) const {
        for (const auto& q : queries)
            if (q.name == name) return &q;
        return nullptr;
    }

    friend bool operator==(const ModelFile& a, const ModelFile& b) {
        return a.constants == b.constants && a.signature.features == b.signature.features &&
               a.signature.valid == b.signature.valid && a.modules == b.modules &&
               a.has_controller == b.has_controller && a.controller == b.controller &&
               a.labels == b.labels && a.queries == b.queries;
    }
};

} // namespace featcheck::vardsl
