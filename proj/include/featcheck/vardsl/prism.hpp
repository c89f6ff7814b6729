#pragma once

#include <ostream>
#include <set>
#include <sstream>
#include <string>

#include "featcheck/vardsl/ast.hpp"
#include "featcheck/vardsl/printer.hpp"

namespace featcheck::vardsl {

namespace detail {

/// Feature atoms become references to the controller module's boolean
/// feature variables.
inline void prism_fexpr(std::ostream& os, const BoolExpr& e, const FeatureSignature& sig) {
    using K = BoolExpr::Kind;
    switch (e.kind()) {
        case K::True: os << "true"; return;
        case K::False: os << "false"; return;
        case K::Atom: os << "f_" << sig.features[e.atom_id()]; return;
        case K::Not:
            os << "!(";
            prism_fexpr(os, e.lhs(), sig);
            os << ")";
            return;
        default: {
            const char* sym = e.kind() == K::And   ? "&"
                              : e.kind() == K::Or  ? "|"
                              : e.kind() == K::Implies ? "=>"
                                                   : "<=>";
            os << "(";
            prism_fexpr(os, e.lhs(), sig);
            os << " " << sym << " ";
            prism_fexpr(os, e.rhs(), sig);
            os << ")";
            return;
        }
    }
}

/// Enum values are lowered to their ordinals.
inline void prism_expr(std::ostream& os, const ExprPtr& e, const FeatureSignature& sig) {
    if (!e) {
        os << "true";
        return;
    }
    switch (e->op) {
        case Op::IntLit:
        case Op::EnumLit: os << e->value; return;
        case Op::BoolLit: os << (e->value ? "true" : "false"); return;
        case Op::VarRef: os << e->name; return;
        case Op::LabelRef: os << "\"" << e->name << "\""; return;
        case Op::FeatHolds: prism_fexpr(os, e->feat, sig); return;
        case Op::MinOp:
        case Op::MaxOp:
            os << (e->op == Op::MinOp ? "min(" : "max(");
            prism_expr(os, e->a, sig);
            os << ", ";
            prism_expr(os, e->b, sig);
            os << ")";
            return;
        case Op::Neg:
            os << "(-";
            prism_expr(os, e->a, sig);
            os << ")";
            return;
        case Op::Not:
            os << "!(";
            prism_expr(os, e->a, sig);
            os << ")";
            return;
        default: {
            const char* sym = nullptr;
            switch (e->op) {
                case Op::Add: sym = "+"; break;
                case Op::Sub: sym = "-"; break;
                case Op::Mul: sym = "*"; break;
                case Op::Eq: sym = "="; break;
                case Op::Ne: sym = "!="; break;
                case Op::Lt: sym = "<"; break;
                case Op::Le: sym = "<="; break;
                case Op::Gt: sym = ">"; break;
                case Op::Ge: sym = ">="; break;
                case Op::And: sym = "&"; break;
                case Op::Or: sym = "|"; break;
                case Op::Implies: sym = "=>"; break;
                case Op::Iff: sym = "<=>"; break;
                default: sym = "?";
            }
            os << "(";
            prism_expr(os, e->a, sig);
            os << " " << sym << " ";
            prism_expr(os, e->b, sig);
            os << ")";
            return;
        }
    }
}

inline std::string prism_event_action(std::size_t index) { return "ev_" + std::to_string(index); }

/// Static check whether a switch transition matches an event: the event's
/// source combination satisfies the feature guard and every target is
/// admitted by rho.
inline bool switch_matches_event(const SymbolicTransition& t, const SwitchEvent& e) {
    if (!satisfies(e.from, t.feature_guard)) return false;
    for (const auto& [target, p] : e.to.support())
        if (!switch_holds(t.rho, e.from, target)) return false;
    return true;
}

} // namespace detail

/// Syntactic translation into the PRISM guarded-command language: one
/// PRISM module per feature module, a controller module owning boolean
/// feature variables, switch events as synchronized commands, and one
/// reward structure per cost type. Semantic parity is not validated here.
inline void write_prism(std::ostream& os, const ModelFile& model) {
    const FeatureSignature& sig = model.signature;
    os << "// generated by featcheck export\nmdp\n\n";
    for (const auto& c : model.constants) os << "const int " << c.name << " = " << c.value << ";\n";
    if (!model.constants.empty()) os << "\n";

    std::set<std::string> cost_types;
    auto note_costs = [&](const CostVector& c) {
        for (const auto& [type, amount] : c.entries()) cost_types.insert(type);
    };

    for (const auto& m : model.modules) {
        os << "module " << m.name << "\n";
        for (const auto& v : m.vars) {
            os << "  " << v.name << " : ";
            if (std::holds_alternative<BoolType>(v.type)) {
                os << "bool";
                if (v.init) os << " init " << (*v.init ? "true" : "false");
            } else if (const auto* r = std::get_if<RangeType>(&v.type)) {
                os << "[" << r->lo << ".." << r->hi << "]";
                if (v.init) os << " init " << *v.init;
            } else {
                const auto& en = std::get<EnumType>(v.type);
                os << "[0.." << en.values.size() - 1 << "]";
                if (v.init) os << " init " << *v.init;
                os << "; //";
                for (std::size_t i = 0; i < en.values.size(); ++i)
                    os << " " << en.values[i] << "=" << i;
                os << "\n";
                continue;
            }
            os << ";\n";
        }
        for (const auto& t : m.transitions) {
            note_costs(t.cost);
            if (t.is_switch) continue;
            os << "  [" << t.action << "] ";
            detail::prism_expr(os, t.guard, sig);
            if (!(t.feature_guard == BoolExpr::tru())) {
                os << " & ";
                detail::prism_fexpr(os, t.feature_guard, sig);
            }
            os << " -> ";
            bool first = true;
            for (const auto& br : t.update.branches) {
                if (!first) os << " + ";
                first = false;
                os << rational_to_string(br.prob) << " : ";
                if (br.update.assigns.empty()) {
                    os << "true";
                } else {
                    bool fa = true;
                    for (const auto& a : br.update.assigns) {
                        if (!fa) os << " & ";
                        fa = false;
                        os << "(" << a.var << "'=";
                        detail::prism_expr(os, a.rhs, sig);
                        os << ")";
                    }
                }
            }
            os << ";\n";
        }
        // Switch transitions synchronize with the matching controller
        // events; rho and the feature guard are discharged statically per
        // event. A module whose own features an event changes must offer a
        // command, otherwise it blocks the event entirely.
        for (std::size_t k = 0; k < model.controller.events.size(); ++k) {
            const SwitchEvent& e = model.controller.events[k];
            bool changes_own = false;
            for (const auto& [target, p] : e.to.support())
                if (!((e.from ^ target) & m.own).empty()) changes_own = true;
            if (!changes_own) continue;
            bool any = false;
            for (const auto& t : m.transitions) {
                if (!t.is_switch || !detail::switch_matches_event(t, e)) continue;
                any = true;
                os << "  [" << detail::prism_event_action(k) << "] ";
                detail::prism_expr(os, t.guard, sig);
                os << " -> ";
                bool first = true;
                for (const auto& br : t.update.branches) {
                    if (!first) os << " + ";
                    first = false;
                    os << rational_to_string(br.prob) << " : ";
                    if (br.update.assigns.empty()) {
                        os << "true";
                    } else {
                        bool fa = true;
                        for (const auto& a : br.update.assigns) {
                            if (!fa) os << " & ";
                            fa = false;
                            os << "(" << a.var << "'=";
                            detail::prism_expr(os, a.rhs, sig);
                            os << ")";
                        }
                    }
                }
                os << ";\n";
                note_costs(t.cost);
            }
            if (!any) os << "  [" << detail::prism_event_action(k) << "] false -> true;\n";
        }
        os << "endmodule\n\n";
    }

    // Controller: boolean feature variables plus one command per event.
    Controller con = model.build_controller();
    os << "module controller\n";
    for (const auto& f : sig.features) os << "  f_" << f << " : bool;\n";
    for (std::size_t k = 0; k < con.events.size(); ++k) {
        const SwitchEvent& e = con.events[k];
        note_costs(e.cost);
        os << "  [" << detail::prism_event_action(k) << "] ";
        detail::prism_fexpr(os, BoolExpr::exactly(e.from, sig.universe()), sig);
        os << " -> ";
        bool first = true;
        for (const auto& [target, p] : e.to.support()) {
            if (!first) os << " + ";
            first = false;
            os << rational_to_string(p) << " : ";
            bool fa = true;
            for (FeatureId id = 0; id < sig.size(); ++id) {
                if (!fa) os << " & ";
                fa = false;
                os << "(f_" << sig.features[id] << "'=" << (target.contains(id) ? "true" : "false")
                   << ")";
            }
        }
        os << ";\n";
    }
    os << "endmodule\n\n";

    // Initial states: variable inits are carried by the declarations; the
    // init block enumerates the initial feature combinations.
    os << "init\n  (";
    bool first = true;
    for (Combination c : con.initial) {
        if (!first) os << " | ";
        first = false;
        detail::prism_fexpr(os, BoolExpr::exactly(c, sig.universe()), sig);
    }
    os << ")";
    for (const auto& m : model.modules) {
        for (const auto& v : m.vars)
            if (v.init) {
                os << " & (" << v.name << "=";
                if (std::holds_alternative<BoolType>(v.type))
                    os << (*v.init ? "true" : "false");
                else
                    os << *v.init;
                os << ")";
            }
        if (m.init_condition) {
            os << " & (";
            detail::prism_expr(os, m.init_condition, sig);
            os << ")";
        }
    }
    os << "\nendinit\n\n";

    for (const auto& l : model.labels) {
        os << "label \"" << l.name << "\" = ";
        detail::prism_expr(os, l.cond, sig);
        os << ";\n";
    }
    if (!model.labels.empty()) os << "\n";

    for (const auto& type : cost_types) {
        os << "rewards \"" << type << "\"\n";
        for (const auto& m : model.modules) {
            for (const auto& t : m.transitions) {
                if (t.cost.get(type) == 0) continue;
                if (t.is_switch) continue;
                os << "  [" << t.action << "] ";
                detail::prism_expr(os, t.guard, sig);
                if (!(t.feature_guard == BoolExpr::tru())) {
                    os << " & ";
                    detail::prism_fexpr(os, t.feature_guard, sig);
                }
                os << " : " << t.cost.get(type) << ";\n";
            }
            for (std::size_t k = 0; k < model.controller.events.size(); ++k) {
                const SwitchEvent& e = model.controller.events[k];
                for (const auto& t : m.transitions) {
                    if (!t.is_switch || t.cost.get(type) == 0) continue;
                    if (!detail::switch_matches_event(t, e)) continue;
                    bool changes_own = false;
                    for (const auto& [target, p] : e.to.support())
                        if (!((e.from ^ target) & m.own).empty()) changes_own = true;
                    if (!changes_own) continue;
                    os << "  [" << detail::prism_event_action(k) << "] ";
                    detail::prism_expr(os, t.guard, sig);
                    os << " : " << t.cost.get(type) << ";\n";
                }
            }
        }
        for (std::size_t k = 0; k < con.events.size(); ++k)
            if (con.events[k].cost.get(type) != 0)
                os << "  [" << detail::prism_event_action(k) << "] true : " << con.events[k].cost.get(type)
                   << ";\n";
        os << "endrewards\n\n";
    }
}

/// PRISM property list matching the model's queries.
inline void write_prism_props(std::ostream& os, const ModelFile& model) {
    const FeatureSignature& sig = model.signature;
    for (const auto& q : model.queries) {
        os << "// " << q.name << "\n";
        switch (q.kind) {
            case QueryKind::PmaxReach:
            case QueryKind::PminReach:
                os << (q.kind == QueryKind::PmaxReach ? "Pmax=? [ F " : "Pmin=? [ F ");
                detail::prism_expr(os, q.target, sig);
                os << " ]\n";
                break;
            case QueryKind::PmaxUntil:
            case QueryKind::PminUntil:
                os << (q.kind == QueryKind::PmaxUntil ? "Pmax=? [ " : "Pmin=? [ ");
                detail::prism_expr(os, q.constraint, sig);
                os << " U ";
                detail::prism_expr(os, q.target, sig);
                os << " ]\n";
                break;
            case QueryKind::EminReach:
            case QueryKind::EmaxReach:
                os << "R{\"" << q.cost_type << "\"}" << (q.kind == QueryKind::EminReach ? "min" : "max")
                   << "=? [ F ";
                detail::prism_expr(os, q.target, sig);
                os << " ]\n";
                break;
        }
    }
}

} // namespace featcheck::vardsl
