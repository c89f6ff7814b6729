#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "featcheck/vardsl/ast.hpp"
#include "featcheck/vardsl/eval.hpp"
#include "featcheck/vardsl/lexer.hpp"

namespace featcheck::vardsl {

using ConstOverrides = std::map<std::string, std::int64_t>;

namespace detail {

struct Type {
    enum Kind { Int, Bool, Enum } kind = Bool;
    int enum_var = -1;  // variable id whose declaration defines the enum
};

class Parser {
public:
    Parser(std::string_view src, ConstOverrides overrides)
        : toks_(tokenize(src)), overrides_(std::move(overrides)) {}

    ModelFile parse() {
        while (!at(Tok::End)) {
            const Token& t = peek();
            if (t.kind != Tok::Ident) fail("expected a declaration", t);
            if (t.text == "const")
                parse_const();
            else if (t.text == "signature")
                parse_signature();
            else if (t.text == "module")
                parse_module();
            else if (t.text == "controller")
                parse_controller();
            else if (t.text == "label")
                parse_label_raw();
            else if (t.text == "query")
                parse_query_raw();
            else
                fail("unknown declaration '" + t.text + "'", t);
        }
        resolve_model();
        return std::move(model_);
    }

private:
    // ---- token plumbing ----
    const Token& peek(int ahead = 0) const {
        std::size_t i = pos_ + ahead;
        return i < toks_.size() ? toks_[i] : toks_.back();
    }
    bool at(Tok k) const { return peek().kind == k; }
    bool at_ident(std::string_view word) const { return at(Tok::Ident) && peek().text == word; }
    const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
    bool accept(Tok k) {
        if (!at(k)) return false;
        next();
        return true;
    }
    bool accept_ident(std::string_view word) {
        if (!at_ident(word)) return false;
        next();
        return true;
    }
    const Token& expect(Tok k, const char* what) {
        if (!at(k)) fail(std::string("expected ") + what, peek());
        return next();
    }
    [[noreturn]] void fail(const std::string& msg, const Token& t) const {
        throw ParseError(msg + (t.text.empty() ? "" : " (near '" + t.text + "')"), t.line, t.col);
    }

    std::string expect_name(const char* what) { return expect(Tok::Ident, what).text; }

    // ---- constants ----
    std::int64_t eval_const(const ExprPtr& e) {
        switch (e->op) {
            case Op::IntLit: return e->value;
            case Op::Add: return eval_const(e->a) + eval_const(e->b);
            case Op::Sub: return eval_const(e->a) - eval_const(e->b);
            case Op::Mul: return eval_const(e->a) * eval_const(e->b);
            case Op::MinOp: return std::min(eval_const(e->a), eval_const(e->b));
            case Op::MaxOp: return std::max(eval_const(e->a), eval_const(e->b));
            case Op::Neg: return -eval_const(e->a);
            default:
                throw ParseError("expression is not an integer constant", e->src_line, e->src_col);
        }
    }

    std::int64_t parse_const_int(const char* what) {
        ExprPtr e = parse_expr();
        (void)what;
        return eval_const(e);
    }

    void parse_const() {
        next();  // const
        Token name_tok = peek();
        std::string name = expect_name("constant name");
        expect(Tok::Eq, "'='");
        std::int64_t value = parse_const_int("constant value");
        expect(Tok::Semi, "';'");
        auto ov = overrides_.find(name);
        if (ov != overrides_.end()) value = ov->second;
        if (consts_.count(name)) fail("duplicate constant '" + name + "'", name_tok);
        consts_[name] = value;
        model_.constants.push_back({name, value});
        declared_names_.insert(name);
    }

    // ---- signature ----
    void parse_signature() {
        Token kw = next();
        if (have_signature_) fail("duplicate signature block", kw);
        expect(Tok::LBrace, "'{'");
        if (!accept_ident("features")) fail("expected 'features'", peek());
        do {
            Token t = peek();
            std::string f = expect_name("feature name");
            if (model_.signature.index_of(f) >= 0) fail("duplicate feature '" + f + "'", t);
            model_.signature.features.push_back(f);
        } while (accept(Tok::Comma));
        expect(Tok::Semi, "';'");
        if (model_.signature.features.size() > 64) fail("more than 64 features", kw);
        if (!accept_ident("valid")) fail("expected 'valid'", peek());
        do {
            model_.signature.valid.push_back(parse_combination());
        } while (accept(Tok::Comma));
        expect(Tok::Semi, "';'");
        expect(Tok::RBrace, "'}'");
        have_signature_ = true;
        for (const auto& msg : validate_signature(model_.signature))
            throw ParseError("signature: " + msg, kw.line, kw.col);
    }

    Combination parse_combination() {
        expect(Tok::LBrace, "'{'");
        Combination c;
        if (!at(Tok::RBrace)) {
            do {
                Token t = peek();
                std::string f = expect_name("feature name");
                FeatureId id = model_.signature.index_of(f);
                if (id < 0) fail("unknown feature '" + f + "'", t);
                c = c.with(id);
            } while (accept(Tok::Comma));
        }
        expect(Tok::RBrace, "'}'");
        return c;
    }

    Combination parse_feature_set() {
        Combination c;
        expect(Tok::LParen, "'('");
        if (!at(Tok::RParen)) {
            do {
                Token t = peek();
                std::string f = expect_name("feature name");
                FeatureId id = model_.signature.index_of(f);
                if (id < 0) fail("unknown feature '" + f + "'", t);
                c = c.with(id);
            } while (accept(Tok::Comma));
        }
        expect(Tok::RParen, "')'");
        return c;
    }

    // ---- feature expressions (used inside feat(...) and switch heads) ----
    BoolExpr parse_fexpr(bool allow_primed) { return parse_fexpr_iff(allow_primed); }

    BoolExpr parse_fexpr_iff(bool allow_primed) {
        BoolExpr e = parse_fexpr_implies(allow_primed);
        while (accept(Tok::Iff)) e = BoolExpr::iff(e, parse_fexpr_implies(allow_primed));
        return e;
    }
    BoolExpr parse_fexpr_implies(bool allow_primed) {
        BoolExpr e = parse_fexpr_or(allow_primed);
        if (accept(Tok::Implies)) return BoolExpr::implies(e, parse_fexpr_implies(allow_primed));
        return e;
    }
    BoolExpr parse_fexpr_or(bool allow_primed) {
        BoolExpr e = parse_fexpr_and(allow_primed);
        while (accept(Tok::Pipe)) e = e || parse_fexpr_and(allow_primed);
        return e;
    }
    BoolExpr parse_fexpr_and(bool allow_primed) {
        BoolExpr e = parse_fexpr_unary(allow_primed);
        while (accept(Tok::Amp)) e = e && parse_fexpr_unary(allow_primed);
        return e;
    }
    BoolExpr parse_fexpr_unary(bool allow_primed) {
        if (accept(Tok::Not)) return !parse_fexpr_unary(allow_primed);
        if (accept(Tok::LParen)) {
            BoolExpr e = parse_fexpr(allow_primed);
            expect(Tok::RParen, "')'");
            return e;
        }
        Token t = peek();
        std::string name = expect_name("feature name");
        if (name == "true") return BoolExpr::tru();
        if (name == "false") return BoolExpr::fls();
        FeatureId id = model_.signature.index_of(name);
        if (id < 0) fail("unknown feature '" + name + "'", t);
        bool primed = false;
        if (accept(Tok::Prime)) {
            if (!allow_primed) fail("primed feature atom not allowed here", t);
            primed = true;
        }
        return BoolExpr::atom(id, primed);
    }

    // ---- general expressions (phase A: identifiers left unresolved) ----
    ExprPtr mark(ExprPtr e, const Token& t) {
        auto m = std::const_pointer_cast<Expr>(e);
        m->src_line = t.line;
        m->src_col = t.col;
        return m;
    }

    ExprPtr parse_expr() { return parse_iff(); }

    ExprPtr parse_iff() {
        ExprPtr e = parse_implies();
        while (at(Tok::Iff)) {
            Token t = next();
            e = mark(make_binary(Op::Iff, e, parse_implies()), t);
        }
        return e;
    }
    ExprPtr parse_implies() {
        ExprPtr e = parse_or();
        if (at(Tok::Implies)) {
            Token t = next();
            e = mark(make_binary(Op::Implies, e, parse_implies()), t);
        }
        return e;
    }
    ExprPtr parse_or() {
        ExprPtr e = parse_and();
        while (at(Tok::Pipe)) {
            Token t = next();
            e = mark(make_binary(Op::Or, e, parse_and()), t);
        }
        return e;
    }
    ExprPtr parse_and() {
        ExprPtr e = parse_not();
        while (at(Tok::Amp)) {
            Token t = next();
            e = mark(make_binary(Op::And, e, parse_not()), t);
        }
        return e;
    }
    ExprPtr parse_not() {
        if (at(Tok::Not)) {
            Token t = next();
            return mark(make_unary(Op::Not, parse_not()), t);
        }
        return parse_rel();
    }
    ExprPtr parse_rel() {
        ExprPtr e = parse_sum();
        Op op;
        switch (peek().kind) {
            case Tok::Eq: op = Op::Eq; break;
            case Tok::Ne: op = Op::Ne; break;
            case Tok::Lt: op = Op::Lt; break;
            case Tok::Le: op = Op::Le; break;
            case Tok::Gt: op = Op::Gt; break;
            case Tok::Ge: op = Op::Ge; break;
            default: return e;
        }
        Token t = next();
        return mark(make_binary(op, e, parse_sum()), t);
    }
    ExprPtr parse_sum() {
        ExprPtr e = parse_term();
        while (at(Tok::Plus) || at(Tok::Minus)) {
            Token t = next();
            e = mark(make_binary(t.kind == Tok::Plus ? Op::Add : Op::Sub, e, parse_term()), t);
        }
        return e;
    }
    ExprPtr parse_term() {
        ExprPtr e = parse_factor();
        while (at(Tok::Star) || at(Tok::Slash)) {
            Token t = next();
            ExprPtr rhs = parse_factor();
            if (t.kind == Tok::Slash) {
                // Division folds immediately and therefore exists only
                // between integer constants.
                if (e->op != Op::IntLit || rhs->op != Op::IntLit)
                    fail("division is only available in constant expressions", t);
                if (rhs->value == 0) fail("division by zero", t);
                if (e->value % rhs->value != 0) fail("constant division must be exact", t);
                e = mark(make_int(e->value / rhs->value), t);
            } else {
                e = mark(make_binary(Op::Mul, e, rhs), t);
            }
        }
        return e;
    }
    ExprPtr parse_factor() {
        Token t = peek();
        if (accept(Tok::Minus)) {
            ExprPtr inner = parse_factor();
            if (inner->op == Op::IntLit) return mark(make_int(-inner->value), t);
            return mark(make_unary(Op::Neg, inner), t);
        }
        if (at(Tok::Int)) {
            next();
            return mark(make_int(std::stoll(t.text)), t);
        }
        if (accept(Tok::LParen)) {
            ExprPtr e = parse_expr();
            expect(Tok::RParen, "')'");
            return e;
        }
        if (at(Tok::Ident)) {
            const std::string& name = t.text;
            if (name == "true" || name == "false") {
                next();
                return mark(make_bool(name == "true"), t);
            }
            if (name == "min" || name == "max") {
                next();
                expect(Tok::LParen, "'('");
                ExprPtr a = parse_expr();
                expect(Tok::Comma, "','");
                ExprPtr b = parse_expr();
                expect(Tok::RParen, "')'");
                return mark(make_binary(name == "min" ? Op::MinOp : Op::MaxOp, a, b), t);
            }
            if (name == "feat") {
                next();
                expect(Tok::LParen, "'('");
                BoolExpr fe = parse_fexpr(false);
                expect(Tok::RParen, "')'");
                return mark(make_feat(fe), t);
            }
            next();
            auto c = consts_.find(name);
            if (c != consts_.end()) return mark(make_int(c->second), t);
            return mark(make_var(name, -1), t);  // resolved in phase B
        }
        fail("expected an expression", t);
    }

    Rational parse_prob() {
        Token t = peek();
        if (at(Tok::Number)) {
            next();
            return parse_rational(t.text);
        }
        if (at(Tok::Int)) {
            next();
            if (accept(Tok::Slash)) {
                Token d = expect(Tok::Int, "denominator");
                return Rational(BigInt(t.text), BigInt(d.text));
            }
            return Rational(BigInt(t.text));
        }
        fail("expected a probability", t);
    }

    CostVector parse_cost_clause() {
        CostVector cost;
        do {
            Token t = peek();
            std::string type = expect_name("cost type");
            std::int64_t amount = parse_const_int("cost value");
            if (amount < 0) fail("negative cost", t);
            cost.add(type, static_cast<std::uint64_t>(amount));
        } while (accept(Tok::Comma));
        return cost;
    }

    // ---- modules ----
    void parse_module() {
        Token kw = next();
        if (!have_signature_) fail("module before signature block", kw);
        VarFeatureModule m;
        m.name = expect_name("module name");
        for (const auto& other : model_.modules)
            if (other.name == m.name) fail("duplicate module '" + m.name + "'", kw);
        if (accept_ident("owns")) m.own = parse_feature_set();
        if (accept_ident("uses")) m.ext = parse_feature_set();
        if (!m.own.disjoint_with(m.ext)) fail("owns and uses overlap", kw);
        expect(Tok::LBrace, "'{'");
        while (!accept(Tok::RBrace)) {
            if (at_ident("var"))
                parse_var_decl(m);
            else if (at_ident("init")) {
                next();
                ExprPtr cond = parse_expr();
                expect(Tok::Semi, "';'");
                m.init_condition = conjoin(m.init_condition, cond);
            } else if (at(Tok::LBrack))
                parse_transition(m);
            else
                fail("expected 'var', 'init' or a transition", peek());
        }
        model_.modules.push_back(std::move(m));
    }

    void parse_var_decl(VarFeatureModule& m) {
        next();  // var
        Token name_tok = peek();
        std::string name = expect_name("variable name");
        if (declared_names_.count(name)) fail("name '" + name + "' already declared", name_tok);
        expect(Tok::Colon, "':'");
        VarDecl decl;
        decl.name = name;
        if (accept_ident("bool")) {
            decl.type = BoolType{};
        } else if (accept(Tok::LBrack)) {
            std::int64_t lo = parse_const_int("range bound");
            expect(Tok::DotDot, "'..'");
            std::int64_t hi = parse_const_int("range bound");
            expect(Tok::RBrack, "']'");
            if (lo > hi) fail("empty range domain", name_tok);
            decl.type = RangeType{lo, hi};
        } else if (accept(Tok::LBrace)) {
            EnumType en;
            do {
                Token t = peek();
                std::string lit = expect_name("enum value");
                if (declared_names_.count(lit)) fail("name '" + lit + "' already declared", t);
                for (const auto& v : en.values)
                    if (v == lit) fail("duplicate enum value '" + lit + "'", t);
                en.values.push_back(lit);
            } while (accept(Tok::Comma));
            expect(Tok::RBrace, "'}'");
            decl.type = std::move(en);
        } else {
            fail("expected a variable type", peek());
        }
        if (accept_ident("init")) {
            Token t = peek();
            if (at(Tok::Int)) {
                next();
                decl.init = std::stoll(t.text);
            } else if (at(Tok::Minus)) {
                next();
                decl.init = -std::stoll(expect(Tok::Int, "number").text);
            } else {
                std::string lit = expect_name("initial value");
                if (lit == "true")
                    decl.init = 1;
                else if (lit == "false")
                    decl.init = 0;
                else if (const auto* en = std::get_if<EnumType>(&decl.type)) {
                    auto it = std::find(en->values.begin(), en->values.end(), lit);
                    if (it == en->values.end()) fail("'" + lit + "' is not a value of this enum", t);
                    decl.init = it - en->values.begin();
                } else {
                    auto c = consts_.find(lit);
                    if (c == consts_.end()) fail("unknown initial value '" + lit + "'", t);
                    decl.init = c->second;
                }
            }
            if (!value_in_domain(decl.type, *decl.init))
                fail("initial value outside the variable's domain", t);
        }
        expect(Tok::Semi, "';'");
        declared_names_.insert(name);
        m.vars.push_back(std::move(decl));
    }

    void parse_transition(VarFeatureModule& m) {
        Token open = next();  // '['
        SymbolicTransition t;
        t.line = open.line;
        if (accept_ident("switch")) {
            t.is_switch = true;
            t.rho = parse_fexpr(true);
            Combination atoms = t.rho.unprimed_atoms() | t.rho.primed_atoms();
            if (!atoms.subset_of(m.own)) fail("switch annotation mentions a non-own feature", open);
        } else {
            t.action = expect_name("action name");
        }
        expect(Tok::RBrack, "']'");
        ExprPtr cond = parse_expr();
        split_condition(cond, t, m, open);
        expect(Tok::Arrow, "'->'");
        t.update = parse_prob_update(open);
        if (accept_ident("cost")) t.cost = parse_cost_clause();
        expect(Tok::Semi, "';'");
        m.transitions.push_back(std::move(t));
    }

    /// Top-level conjuncts that are feat(...) atoms become the feature
    /// guard; everything else is the variable guard. feat(...) anywhere
    /// deeper is rejected: a transition's feature guard and variable guard
    /// are separate components joined conjunctively.
    void split_condition(const ExprPtr& cond, SymbolicTransition& t, const VarFeatureModule& m,
                         const Token& where) {
        std::vector<ExprPtr> conjuncts;
        collect_conjuncts(cond, conjuncts);
        BoolExpr fguard = BoolExpr::tru();
        bool have_fguard = false;
        ExprPtr vguard;
        for (const auto& c : conjuncts) {
            if (c->op == Op::BoolLit && c->value == 1) continue;  // trivial conjunct
            if (c->op == Op::FeatHolds) {
                Combination atoms = c->feat.unprimed_atoms();
                if (!atoms.subset_of(m.own | m.ext))
                    throw ParseError("feature guard mentions a feature outside owns/uses", c->src_line,
                                     c->src_col);
                fguard = have_fguard ? (fguard && c->feat) : c->feat;
                have_fguard = true;
            } else {
                if (contains_feat(c))
                    throw ParseError("feat(...) must appear as a top-level conjunct", c->src_line,
                                     c->src_col);
                vguard = conjoin(vguard, c);
            }
        }
        (void)where;
        t.feature_guard = fguard;
        t.guard = vguard;  // may stay null (true)
    }

    static void collect_conjuncts(const ExprPtr& e, std::vector<ExprPtr>& out) {
        if (e->op == Op::And) {
            collect_conjuncts(e->a, out);
            collect_conjuncts(e->b, out);
        } else {
            out.push_back(e);
        }
    }

    static bool contains_feat(const ExprPtr& e) {
        if (!e) return false;
        if (e->op == Op::FeatHolds) return true;
        return contains_feat(e->a) || contains_feat(e->b);
    }

    ProbUpdate parse_prob_update(const Token& where) {
        ProbUpdate pu;
        bool explicit_probs = false;
        do {
            PuBranch br;
            if (at(Tok::Number) || at(Tok::Int)) {
                br.prob = parse_prob();
                expect(Tok::Colon, "':'");
                explicit_probs = true;
            } else {
                br.prob = 1;
            }
            br.update = parse_update();
            pu.branches.push_back(std::move(br));
        } while (accept(Tok::Plus));
        if (pu.branches.size() > 1 && !explicit_probs)
            fail("multiple update branches need explicit probabilities", where);
        Rational sum = 0;
        for (const auto& br : pu.branches) {
            if (br.prob <= 0) fail("branch probability must be positive", where);
            sum += br.prob;
        }
        if (sum != 1)
            fail("update probabilities sum to " + rational_to_string(sum) + ", expected 1", where);
        return pu;
    }

    Update parse_update() {
        expect(Tok::LParen, "'('");
        Update u;
        if (!at(Tok::RParen)) {
            do {
                Assign a;
                Token t = peek();
                a.var = expect_name("variable name");
                expect(Tok::Prime, "'");
                expect(Tok::Eq, "'='");
                a.rhs = parse_expr();
                for (const auto& prev : u.assigns)
                    if (prev.var == a.var)
                        fail("variable '" + a.var + "' assigned twice in one update", t);
                u.assigns.push_back(std::move(a));
            } while (accept(Tok::Comma));
        }
        expect(Tok::RParen, "')'");
        return u;
    }

    // ---- controller ----
    void parse_controller() {
        Token kw = next();
        if (!have_signature_) fail("controller before signature block", kw);
        if (model_.has_controller) fail("duplicate controller block", kw);
        model_.has_controller = true;
        expect(Tok::LBrace, "'{'");
        if (!accept_ident("init")) fail("expected 'init'", peek());
        do {
            model_.controller.initial.push_back(parse_combination());
        } while (accept(Tok::Comma));
        expect(Tok::Semi, "';'");
        while (accept_ident("event")) {
            SwitchEvent e;
            e.from = parse_combination();
            expect(Tok::Arrow, "'->'");
            if (at(Tok::LBrace) && peek(1).kind != Tok::RBrace &&
                (peek(1).kind == Tok::Int || peek(1).kind == Tok::Number) ) {
                // probabilistic distribution { p: comb; ...; p: comb }
                next();
                std::vector<std::pair<Combination, Rational>> entries;
                do {
                    Rational p = parse_prob();
                    expect(Tok::Colon, "':'");
                    entries.emplace_back(parse_combination(), p);
                } while (accept(Tok::Semi) && !at(Tok::RBrace));
                expect(Tok::RBrace, "'}'");
                try {
                    e.to = Distribution<Combination>(std::move(entries));
                } catch (const ModelError& err) {
                    fail(std::string("switch event: ") + err.what(), kw);
                }
            } else {
                e.to = dirac(parse_combination());
            }
            if (accept_ident("cost")) e.cost = parse_cost_clause();
            expect(Tok::Semi, "';'");
            model_.controller.events.push_back(std::move(e));
        }
        expect(Tok::RBrace, "'}'");
    }

    // ---- labels and queries (conditions resolved in phase B) ----
    void parse_label_raw() {
        next();
        Token t = peek();
        std::string name = expect_name("label name");
        if (declared_names_.count(name)) fail("name '" + name + "' already declared", t);
        expect(Tok::Eq, "'='");
        ExprPtr cond = parse_expr();
        expect(Tok::Semi, "';'");
        declared_names_.insert(name);
        model_.labels.push_back({name, cond});
    }

    void parse_query_raw() {
        next();
        Token t = peek();
        QueryDecl q;
        q.name = expect_name("query name");
        for (const auto& other : model_.queries)
            if (other.name == q.name) fail("duplicate query '" + q.name + "'", t);
        expect(Tok::Colon, "':'");
        Token kind_tok = peek();
        std::string kind = expect_name("query kind");
        if (kind == "Pmax" || kind == "Pmin") {
            expect(Tok::LBrack, "'['");
            if (accept_ident("F")) {
                q.kind = kind == "Pmax" ? QueryKind::PmaxReach : QueryKind::PminReach;
                q.target = parse_expr();
            } else {
                ExprPtr first = parse_expr();
                if (!accept_ident("U")) fail("expected 'U' or 'F' in a probability query", peek());
                q.kind = kind == "Pmax" ? QueryKind::PmaxUntil : QueryKind::PminUntil;
                q.constraint = first;
                q.target = parse_expr();
            }
            expect(Tok::RBrack, "']'");
        } else if (kind == "Emin" || kind == "Emax") {
            expect(Tok::LParen, "'('");
            q.cost_type = expect_name("cost type");
            expect(Tok::RParen, "')'");
            expect(Tok::LBrack, "'['");
            if (!accept_ident("F")) fail("expected 'F' in an expected-cost query", peek());
            q.kind = kind == "Emin" ? QueryKind::EminReach : QueryKind::EmaxReach;
            q.target = parse_expr();
            expect(Tok::RBrack, "']'");
        } else {
            fail("unknown query kind '" + kind + "'", kind_tok);
        }
        expect(Tok::Semi, "';'");
        model_.queries.push_back(std::move(q));
    }

    // ---- phase B: name resolution and type checking ----
    struct VarInfo {
        int id;
        const VarDecl* decl;
        int module_index;
    };

    void resolve_model() {
        // Assign global variable ids in declaration order.
        int next_id = 0;
        for (std::size_t mi = 0; mi < model_.modules.size(); ++mi) {
            for (auto& v : model_.modules[mi].vars) {
                v.id = next_id++;
                vars_[v.name] = {v.id, &v, static_cast<int>(mi)};
                if (const auto* en = std::get_if<EnumType>(&v.type))
                    for (std::size_t k = 0; k < en->values.size(); ++k)
                        enum_lits_[en->values[k]] = {v.id, static_cast<std::int64_t>(k)};
            }
        }
        for (std::size_t i = 0; i < model_.modules.size(); ++i)
            for (std::size_t j = i + 1; j < model_.modules.size(); ++j)
                if (!model_.modules[i].own.disjoint_with(model_.modules[j].own))
                    throw ParseError("modules '" + model_.modules[i].name + "' and '" +
                                     model_.modules[j].name + "' own common features");

        for (std::size_t mi = 0; mi < model_.modules.size(); ++mi) {
            VarFeatureModule& m = model_.modules[mi];
            for (auto& t : m.transitions) {
                if (t.guard) {
                    t.guard = resolve(t.guard, static_cast<int>(mi), false);
                    require(t.guard, Type::Bool, "transition guard");
                }
                for (auto& br : t.update.branches) {
                    for (auto& a : br.update.assigns) {
                        auto v = vars_.find(a.var);
                        if (v == vars_.end())
                            throw ParseError("assignment to unknown variable '" + a.var + "'", t.line, 1);
                        if (v->second.module_index != static_cast<int>(mi))
                            throw ParseError("module '" + m.name + "' writes variable '" + a.var +
                                                 "' that is local to another module",
                                             t.line, 1);
                        a.var_id = v->second.id;
                        a.rhs = resolve(a.rhs, static_cast<int>(mi), false);
                        if (contains_feat(a.rhs))
                            throw ParseError("update expressions range over variables only", t.line, 1);
                        check_assign(*v->second.decl, a, t.line);
                    }
                }
            }
            if (m.init_condition) {
                m.init_condition = resolve(m.init_condition, static_cast<int>(mi), true);
                if (contains_feat(m.init_condition))
                    throw ParseError("initial conditions range over variables only");
                require(m.init_condition, Type::Bool, "init condition");
            }
            check_init_satisfiable(m);
        }

        for (auto& l : model_.labels) {
            l.cond = resolve(l.cond, -1, false);
            require(l.cond, Type::Bool, "label condition");
        }
        for (auto& q : model_.queries) {
            q.target = resolve(q.target, -1, false);
            require(q.target, Type::Bool, "query target");
            if (q.constraint) {
                q.constraint = resolve(q.constraint, -1, false);
                require(q.constraint, Type::Bool, "query constraint");
            }
        }

        if (model_.has_controller) {
            Controller con = model_.build_controller();
            auto violations = validate_controller(con);
            if (!violations.empty()) throw ParseError("controller: " + violations[0]);
        }
    }

    void check_assign(const VarDecl& target, const Assign& a, int line) {
        Type rhs = type_of(a.rhs);
        if (std::holds_alternative<BoolType>(target.type)) {
            if (rhs.kind != Type::Bool)
                throw ParseError("assigning a non-boolean to boolean variable '" + target.name + "'",
                                 line, 1);
        } else if (std::holds_alternative<RangeType>(target.type)) {
            if (rhs.kind != Type::Int)
                throw ParseError("assigning a non-integer to integer variable '" + target.name + "'",
                                 line, 1);
        } else {
            if (rhs.kind != Type::Enum || rhs.enum_var != target.id)
                throw ParseError("assigning a foreign value to enum variable '" + target.name + "'",
                                 line, 1);
        }
    }

    /// Resolves identifiers, rewrites the tree, and leaves it fully typed.
    /// `locals_only` restricts variable references to the module's own
    /// variables (initial conditions).
    ExprPtr resolve(const ExprPtr& e, int module_index, bool locals_only) {
        switch (e->op) {
            case Op::VarRef: {
                if (e->var_id >= 0) return e;
                auto v = vars_.find(e->name);
                if (v != vars_.end()) {
                    if (locals_only && v->second.module_index != module_index)
                        throw ParseError("initial condition mentions non-local variable '" + e->name + "'",
                                         e->src_line, e->src_col);
                    auto r = make_var(e->name, v->second.id);
                    auto m = std::const_pointer_cast<Expr>(r);
                    m->src_line = e->src_line;
                    m->src_col = e->src_col;
                    return r;
                }
                auto lit = enum_lits_.find(e->name);
                if (lit != enum_lits_.end()) {
                    auto r = make_enum(e->name, lit->second.second);
                    auto m = std::const_pointer_cast<Expr>(r);
                    m->var_id = lit->second.first;
                    m->src_line = e->src_line;
                    m->src_col = e->src_col;
                    return r;
                }
                if (module_index < 0) {
                    for (const auto& l : model_.labels)
                        if (l.name == e->name && l.cond) return make_label_ref(e->name, l.cond);
                }
                throw ParseError("unknown identifier '" + e->name + "'", e->src_line, e->src_col);
            }
            default: {
                if (!e->a && !e->b) return e;
                auto m = std::make_shared<Expr>(*e);
                if (e->a) m->a = resolve(e->a, module_index, locals_only);
                if (e->b) m->b = resolve(e->b, module_index, locals_only);
                return m;
            }
        }
    }

    Type type_of(const ExprPtr& e) {
        switch (e->op) {
            case Op::IntLit: return {Type::Int, -1};
            case Op::BoolLit: return {Type::Bool, -1};
            case Op::FeatHolds: return {Type::Bool, -1};
            case Op::LabelRef: return {Type::Bool, -1};
            case Op::EnumLit: return {Type::Enum, e->var_id};
            case Op::VarRef: {
                const VarDecl* d = vars_.at(e->name).decl;
                if (std::holds_alternative<BoolType>(d->type)) return {Type::Bool, -1};
                if (std::holds_alternative<RangeType>(d->type)) return {Type::Int, -1};
                return {Type::Enum, d->id};
            }
            case Op::Add:
            case Op::Sub:
            case Op::Mul:
            case Op::MinOp:
            case Op::MaxOp:
                require(e->a, Type::Int, "arithmetic operand");
                require(e->b, Type::Int, "arithmetic operand");
                return {Type::Int, -1};
            case Op::Neg:
                require(e->a, Type::Int, "arithmetic operand");
                return {Type::Int, -1};
            case Op::Lt:
            case Op::Le:
            case Op::Gt:
            case Op::Ge:
                require(e->a, Type::Int, "comparison operand");
                require(e->b, Type::Int, "comparison operand");
                return {Type::Bool, -1};
            case Op::Eq:
            case Op::Ne: {
                Type ta = type_of(e->a), tb = type_of(e->b);
                if (ta.kind != tb.kind || (ta.kind == Type::Enum && ta.enum_var != tb.enum_var))
                    throw ParseError("comparison between incompatible types", e->src_line, e->src_col);
                return {Type::Bool, -1};
            }
            case Op::Not:
                require(e->a, Type::Bool, "boolean operand");
                return {Type::Bool, -1};
            case Op::And:
            case Op::Or:
            case Op::Implies:
            case Op::Iff:
                require(e->a, Type::Bool, "boolean operand");
                require(e->b, Type::Bool, "boolean operand");
                return {Type::Bool, -1};
        }
        throw ParseError("malformed expression", e->src_line, e->src_col);
    }

    void require(const ExprPtr& e, Type::Kind kind, const char* what) {
        if (type_of(e).kind != kind)
            throw ParseError(std::string(what) + " has the wrong type", e->src_line, e->src_col);
    }

    /// Initial condition satisfiability by bounded domain enumeration.
    void check_init_satisfiable(const VarFeatureModule& m) {
        if (!m.init_condition) return;
        auto vartab = model_.var_table();
        try {
            if (initial_valuations(m, vartab).empty())
                throw ParseError("initial condition of module '" + m.name + "' is unsatisfiable");
        } catch (const ModelError& e) {
            throw ParseError(e.what());
        }
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    ConstOverrides overrides_;
    ModelFile model_;
    bool have_signature_ = false;
    std::map<std::string, std::int64_t> consts_;
    std::set<std::string> declared_names_;
    std::map<std::string, VarInfo> vars_;
    std::map<std::string, std::pair<int, std::int64_t>> enum_lits_;
};

} // namespace detail

/// Parses a model file, resolving identifiers, folding constants (with the
/// given overrides applied at their declarations) and validating every
/// structural invariant. Throws ParseError with a source position.
inline ModelFile parse_model(std::string_view text, const ConstOverrides& overrides = {}) {
    detail::Parser parser(text, overrides);
    return parser.parse();
}

} // namespace featcheck::vardsl
