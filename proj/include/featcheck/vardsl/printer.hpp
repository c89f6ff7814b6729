#pragma once

#include <sstream>
#include <string>

#include "featcheck/vardsl/ast.hpp"

namespace featcheck::vardsl {

namespace detail {

// Precedence levels, loosest first.
enum : int { kIff = 1, kImplies, kOr, kAnd, kNot, kRel, kSum, kTerm, kFactor };

inline void print_fexpr(std::ostream& os, const BoolExpr& e, const FeatureSignature& sig, int level) {
    using K = BoolExpr::Kind;
    auto paren = [&](int mine, auto&& body) {
        if (mine < level) {
            os << "(";
            body();
            os << ")";
        } else {
            body();
        }
    };
    switch (e.kind()) {
        case K::True: os << "true"; return;
        case K::False: os << "false"; return;
        case K::Atom:
            os << sig.features[e.atom_id()];
            if (e.atom_primed()) os << "'";
            return;
        case K::Not:
            paren(kNot, [&] {
                os << "!";
                print_fexpr(os, e.lhs(), sig, kNot);
            });
            return;
        case K::And:
            paren(kAnd, [&] {
                print_fexpr(os, e.lhs(), sig, kAnd);
                os << " & ";
                print_fexpr(os, e.rhs(), sig, kAnd + 1);
            });
            return;
        case K::Or:
            paren(kOr, [&] {
                print_fexpr(os, e.lhs(), sig, kOr);
                os << " | ";
                print_fexpr(os, e.rhs(), sig, kOr + 1);
            });
            return;
        case K::Implies:
            paren(kImplies, [&] {
                print_fexpr(os, e.lhs(), sig, kImplies + 1);
                os << " => ";
                print_fexpr(os, e.rhs(), sig, kImplies);
            });
            return;
        case K::Iff:
            paren(kIff, [&] {
                print_fexpr(os, e.lhs(), sig, kIff);
                os << " <=> ";
                print_fexpr(os, e.rhs(), sig, kIff + 1);
            });
            return;
    }
}

inline void print_expr(std::ostream& os, const ExprPtr& e, const FeatureSignature& sig, int level) {
    auto paren = [&](int mine, auto&& body) {
        if (mine < level) {
            os << "(";
            body();
            os << ")";
        } else {
            body();
        }
    };
    auto binary = [&](int mine, const char* sym, bool right_assoc = false) {
        paren(mine, [&] {
            print_expr(os, e->a, sig, right_assoc ? mine + 1 : mine);
            os << " " << sym << " ";
            print_expr(os, e->b, sig, right_assoc ? mine : mine + 1);
        });
    };
    switch (e->op) {
        case Op::IntLit:
            if (e->value < 0)
                paren(kFactor - 1, [&] { os << e->value; });
            else
                os << e->value;
            return;
        case Op::BoolLit: os << (e->value ? "true" : "false"); return;
        case Op::VarRef:
        case Op::EnumLit:
        case Op::LabelRef: os << e->name; return;
        case Op::FeatHolds:
            os << "feat(";
            print_fexpr(os, e->feat, sig, 0);
            os << ")";
            return;
        case Op::MinOp:
        case Op::MaxOp:
            os << (e->op == Op::MinOp ? "min(" : "max(");
            print_expr(os, e->a, sig, 0);
            os << ", ";
            print_expr(os, e->b, sig, 0);
            os << ")";
            return;
        case Op::Neg:
            paren(kFactor, [&] {
                os << "-";
                print_expr(os, e->a, sig, kFactor);
            });
            return;
        case Op::Add: binary(kSum, "+"); return;
        case Op::Sub: binary(kSum, "-"); return;
        case Op::Mul: binary(kTerm, "*"); return;
        case Op::Eq: binary(kRel, "="); return;
        case Op::Ne: binary(kRel, "!="); return;
        case Op::Lt: binary(kRel, "<"); return;
        case Op::Le: binary(kRel, "<="); return;
        case Op::Gt: binary(kRel, ">"); return;
        case Op::Ge: binary(kRel, ">="); return;
        case Op::Not:
            paren(kNot, [&] {
                os << "!";
                print_expr(os, e->a, sig, kNot);
            });
            return;
        case Op::And: binary(kAnd, "&"); return;
        case Op::Or: binary(kOr, "|"); return;
        case Op::Implies: binary(kImplies, "=>", /*right_assoc=*/true); return;
        case Op::Iff: binary(kIff, "<=>"); return;
    }
}

inline void print_combination(std::ostream& os, Combination c, const FeatureSignature& sig) {
    os << "{";
    bool first = true;
    for (FeatureId id : c.members()) {
        if (!first) os << ", ";
        os << sig.features[id];
        first = false;
    }
    os << "}";
}

inline void print_cost_clause(std::ostream& os, const CostVector& cost) {
    if (cost.zero()) return;
    os << " cost ";
    bool first = true;
    for (const auto& [type, amount] : cost.entries()) {
        if (!first) os << ", ";
        os << type << " " << amount;
        first = false;
    }
}

inline void print_value(std::ostream& os, const VarType& type, std::int64_t v) {
    if (std::holds_alternative<BoolType>(type)) {
        os << (v ? "true" : "false");
    } else if (const auto* en = std::get_if<EnumType>(&type)) {
        os << en->values[static_cast<std::size_t>(v)];
    } else {
        os << v;
    }
}

inline void print_update(std::ostream& os, const ProbUpdate& pu, const FeatureSignature& sig) {
    bool lone_sure_branch = pu.branches.size() == 1 && pu.branches[0].prob == 1;
    bool first = true;
    for (const auto& br : pu.branches) {
        if (!first) os << " + ";
        first = false;
        if (!lone_sure_branch) os << rational_to_string(br.prob) << ": ";
        os << "(";
        bool first_assign = true;
        for (const auto& a : br.update.assigns) {
            if (!first_assign) os << ", ";
            os << a.var << "' = ";
            print_expr(os, a.rhs, sig, 0);
            first_assign = false;
        }
        os << ")";
    }
}

} // namespace detail

/// Canonical text form. parse(pretty_print(parse(text))) reproduces the
/// first parse exactly.
inline std::string pretty_print(const ModelFile& model) {
    std::ostringstream os;
    const FeatureSignature& sig = model.signature;

    for (const auto& c : model.constants) os << "const " << c.name << " = " << c.value << ";\n";
    if (!model.constants.empty()) os << "\n";

    os << "signature {\n  features ";
    for (std::size_t i = 0; i < sig.features.size(); ++i)
        os << (i ? ", " : "") << sig.features[i];
    os << ";\n  valid ";
    for (std::size_t i = 0; i < sig.valid.size(); ++i) {
        if (i) os << ", ";
        detail::print_combination(os, sig.valid[i], sig);
    }
    os << ";\n}\n";

    for (const auto& m : model.modules) {
        os << "\nmodule " << m.name;
        if (!m.own.empty()) {
            os << " owns(";
            bool first = true;
            for (FeatureId id : m.own.members()) {
                os << (first ? "" : ", ") << sig.features[id];
                first = false;
            }
            os << ")";
        }
        if (!m.ext.empty()) {
            os << " uses(";
            bool first = true;
            for (FeatureId id : m.ext.members()) {
                os << (first ? "" : ", ") << sig.features[id];
                first = false;
            }
            os << ")";
        }
        os << " {\n";
        for (const auto& v : m.vars) {
            os << "  var " << v.name << " : ";
            if (std::holds_alternative<BoolType>(v.type)) {
                os << "bool";
            } else if (const auto* r = std::get_if<RangeType>(&v.type)) {
                os << "[" << r->lo << ".." << r->hi << "]";
            } else {
                const auto& en = std::get<EnumType>(v.type);
                os << "{";
                for (std::size_t i = 0; i < en.values.size(); ++i) os << (i ? ", " : "") << en.values[i];
                os << "}";
            }
            if (v.init) {
                os << " init ";
                detail::print_value(os, v.type, *v.init);
            }
            os << ";\n";
        }
        if (m.init_condition) {
            os << "  init ";
            detail::print_expr(os, m.init_condition, sig, 0);
            os << ";\n";
        }
        for (const auto& t : m.transitions) {
            os << "  [";
            if (t.is_switch) {
                os << "switch ";
                detail::print_fexpr(os, t.rho, sig, 0);
            } else {
                os << t.action;
            }
            os << "] ";
            bool trivial_fguard = t.feature_guard == BoolExpr::tru();
            if (!trivial_fguard) {
                os << "feat(";
                detail::print_fexpr(os, t.feature_guard, sig, 0);
                os << ")";
            }
            if (t.guard) {
                if (!trivial_fguard) os << " & ";
                detail::print_expr(os, t.guard, sig, trivial_fguard ? 0 : detail::kNot);
            } else if (trivial_fguard) {
                os << "true";
            }
            os << " -> ";
            detail::print_update(os, t.update, sig);
            detail::print_cost_clause(os, t.cost);
            os << ";\n";
        }
        os << "}\n";
    }

    if (model.has_controller) {
        os << "\ncontroller {\n  init ";
        for (std::size_t i = 0; i < model.controller.initial.size(); ++i) {
            if (i) os << ", ";
            detail::print_combination(os, model.controller.initial[i], sig);
        }
        os << ";\n";
        for (const auto& e : model.controller.events) {
            os << "  event ";
            detail::print_combination(os, e.from, sig);
            os << " -> ";
            if (e.to.size() == 1 && e.to.support().front().second == 1) {
                detail::print_combination(os, e.to.support().front().first, sig);
            } else {
                os << "{ ";
                bool first = true;
                for (const auto& [comb, p] : e.to.support()) {
                    if (!first) os << "; ";
                    os << rational_to_string(p) << ": ";
                    detail::print_combination(os, comb, sig);
                    first = false;
                }
                os << " }";
            }
            detail::print_cost_clause(os, e.cost);
            os << ";\n";
        }
        os << "}\n";
    }

    if (!model.labels.empty()) os << "\n";
    for (const auto& l : model.labels) {
        os << "label " << l.name << " = ";
        detail::print_expr(os, l.cond, sig, 0);
        os << ";\n";
    }

    if (!model.queries.empty()) os << "\n";
    for (const auto& q : model.queries) {
        os << "query " << q.name << " : ";
        switch (q.kind) {
            case QueryKind::PmaxReach:
            case QueryKind::PminReach:
                os << (q.kind == QueryKind::PmaxReach ? "Pmax" : "Pmin") << " [ F ";
                detail::print_expr(os, q.target, sig, 0);
                os << " ]";
                break;
            case QueryKind::PmaxUntil:
            case QueryKind::PminUntil:
                os << (q.kind == QueryKind::PmaxUntil ? "Pmax" : "Pmin") << " [ ";
                detail::print_expr(os, q.constraint, sig, detail::kIff + 1);
                os << " U ";
                detail::print_expr(os, q.target, sig, detail::kIff + 1);
                os << " ]";
                break;
            case QueryKind::EminReach:
            case QueryKind::EmaxReach:
                os << (q.kind == QueryKind::EminReach ? "Emin" : "Emax") << "(" << q.cost_type << ") [ F ";
                detail::print_expr(os, q.target, sig, 0);
                os << " ]";
                break;
        }
        os << ";\n";
    }
    return os.str();
}

} // namespace featcheck::vardsl
