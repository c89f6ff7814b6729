#pragma once

#include <bit>
#include <cctype>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "featcheck/errors.hpp"

namespace featcheck {

using FeatureId = int;

/// A set of features, as a bitset over the ordered feature list of a
/// signature. Signatures are capped at 64 features.
class Combination {
public:
    constexpr Combination() = default;
    constexpr explicit Combination(std::uint64_t bits) : bits_(bits) {}

    static Combination of(std::initializer_list<FeatureId> ids) {
        Combination c;
        for (FeatureId id : ids) c = c.with(id);
        return c;
    }

    constexpr std::uint64_t bits() const { return bits_; }
    constexpr bool empty() const { return bits_ == 0; }
    constexpr int count() const { return std::popcount(bits_); }
    constexpr bool contains(FeatureId id) const { return (bits_ >> id) & 1u; }

    constexpr Combination with(FeatureId id) const { return Combination(bits_ | (std::uint64_t{1} << id)); }
    constexpr Combination without(FeatureId id) const { return Combination(bits_ & ~(std::uint64_t{1} << id)); }

    constexpr Combination operator|(Combination o) const { return Combination(bits_ | o.bits_); }
    constexpr Combination operator&(Combination o) const { return Combination(bits_ & o.bits_); }
    constexpr Combination operator^(Combination o) const { return Combination(bits_ ^ o.bits_); }
    constexpr Combination minus(Combination o) const { return Combination(bits_ & ~o.bits_); }
    constexpr bool subset_of(Combination o) const { return (bits_ & ~o.bits_) == 0; }
    constexpr bool disjoint_with(Combination o) const { return (bits_ & o.bits_) == 0; }

    std::vector<FeatureId> members() const {
        std::vector<FeatureId> v;
        for (std::uint64_t b = bits_; b; b &= b - 1) v.push_back(std::countr_zero(b));
        return v;
    }

    friend constexpr bool operator==(Combination a, Combination b) { return a.bits_ == b.bits_; }
    friend constexpr bool operator<(Combination a, Combination b) { return a.bits_ < b.bits_; }

private:
    std::uint64_t bits_ = 0;
};

inline bool valid_identifier(std::string_view name) {
    if (name.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(name[0])) && name[0] != '_') return false;
    for (char ch : name)
        if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_') return false;
    return true;
}

/// The SPL universe: an ordered feature list plus the set of valid
/// feature combinations. All Combination values and feature ids used by
/// modules and controllers index into this ordered list.
struct FeatureSignature {
    std::vector<std::string> features;
    std::vector<Combination> valid;

    int size() const { return static_cast<int>(features.size()); }

    Combination universe() const {
        if (features.size() >= 64) return Combination(~std::uint64_t{0});
        return Combination((std::uint64_t{1} << features.size()) - 1);
    }

    FeatureId index_of(std::string_view name) const {
        for (std::size_t i = 0; i < features.size(); ++i)
            if (features[i] == name) return static_cast<FeatureId>(i);
        return -1;
    }

    bool is_valid(Combination c) const {
        for (Combination v : valid)
            if (v == c) return true;
        return false;
    }
};

inline std::vector<std::string> validate_signature(const FeatureSignature& sig) {
    std::vector<std::string> out;
    if (sig.features.size() > 64) out.push_back("signature has more than 64 features");
    for (std::size_t i = 0; i < sig.features.size(); ++i) {
        if (!valid_identifier(sig.features[i]))
            out.push_back("feature name '" + sig.features[i] + "' is not a valid identifier");
        for (std::size_t j = i + 1; j < sig.features.size(); ++j)
            if (sig.features[i] == sig.features[j])
                out.push_back("duplicate feature name '" + sig.features[i] + "'");
    }
    if (sig.valid.empty()) out.push_back("signature has no valid feature combinations");
    for (Combination c : sig.valid)
        if (!c.subset_of(sig.universe()))
            out.push_back("valid combination mentions features outside the signature");
    return out;
}

/// Boolean expressions over (possibly primed) feature atoms, kept as an
/// immutable shared tree.
class BoolExpr {
public:
    enum class Kind : std::uint8_t { True, False, Atom, Not, And, Or, Implies, Iff };

    BoolExpr() : node_(true_node()) {}

    static BoolExpr tru() { return BoolExpr(true_node()); }
    static BoolExpr fls() { return BoolExpr(false_node()); }
    static BoolExpr atom(FeatureId id, bool primed = false) {
        auto n = std::make_shared<Node>();
        n->kind = Kind::Atom;
        n->atom = id;
        n->primed = primed;
        return BoolExpr(std::move(n));
    }
    static BoolExpr primed_atom(FeatureId id) { return atom(id, true); }

    friend BoolExpr operator!(const BoolExpr& e) { return unary(Kind::Not, e); }
    friend BoolExpr operator&&(const BoolExpr& a, const BoolExpr& b) { return binary(Kind::And, a, b); }
    friend BoolExpr operator||(const BoolExpr& a, const BoolExpr& b) { return binary(Kind::Or, a, b); }
    static BoolExpr implies(const BoolExpr& a, const BoolExpr& b) { return binary(Kind::Implies, a, b); }
    static BoolExpr iff(const BoolExpr& a, const BoolExpr& b) { return binary(Kind::Iff, a, b); }

    /// Shortform Y = Y': conjunction of f <-> f' over the given features.
    static BoolExpr frame_equal(Combination features) {
        BoolExpr e = tru();
        bool first = true;
        for (FeatureId id : features.members()) {
            BoolExpr clause = iff(atom(id), primed_atom(id));
            e = first ? clause : (e && clause);
            first = false;
        }
        return e;
    }

    /// Conjunction of positive/negated atoms describing exactly `c` within
    /// the feature set `universe`.
    static BoolExpr exactly(Combination c, Combination universe) {
        BoolExpr e = tru();
        bool first = true;
        for (FeatureId id : universe.members()) {
            BoolExpr lit = c.contains(id) ? atom(id) : !atom(id);
            e = first ? lit : (e && lit);
            first = false;
        }
        return e;
    }

    Kind kind() const { return node_->kind; }
    FeatureId atom_id() const { return node_->atom; }
    bool atom_primed() const { return node_->primed; }
    BoolExpr lhs() const { return BoolExpr(node_->lhs); }
    BoolExpr rhs() const { return BoolExpr(node_->rhs); }

    /// Truth value with unprimed atoms read from `unprimed` and primed
    /// atoms from `primed`.
    bool evaluate(Combination unprimed, Combination primed) const { return eval(node_.get(), unprimed, primed); }

    bool has_primed_atoms() const { return !primed_atoms().empty(); }
    Combination unprimed_atoms() const {
        Combination c;
        collect(node_.get(), false, c);
        return c;
    }
    Combination primed_atoms() const {
        Combination c;
        collect(node_.get(), true, c);
        return c;
    }

    /// True when the expression contains no negation-introducing
    /// connectives (Not, Implies, Iff).
    bool is_positive() const { return positive(node_.get()); }

    /// Canonical structural serialization; used for ordering and
    /// set-semantics deduplication of transitions.
    std::string key() const {
        std::string s;
        write_key(node_.get(), s);
        return s;
    }

    friend bool operator==(const BoolExpr& a, const BoolExpr& b) {
        return a.node_ == b.node_ || a.key() == b.key();
    }

private:
    struct Node {
        Kind kind = Kind::True;
        FeatureId atom = -1;
        bool primed = false;
        std::shared_ptr<const Node> lhs, rhs;
    };
    using NodePtr = std::shared_ptr<const Node>;

    explicit BoolExpr(NodePtr n) : node_(std::move(n)) {}

    static NodePtr true_node() {
        static const NodePtr n = [] {
            auto p = std::make_shared<Node>();
            p->kind = Kind::True;
            return p;
        }();
        return n;
    }
    static NodePtr false_node() {
        static const NodePtr n = [] {
            auto p = std::make_shared<Node>();
            p->kind = Kind::False;
            return p;
        }();
        return n;
    }

    static BoolExpr unary(Kind k, const BoolExpr& e) {
        auto n = std::make_shared<Node>();
        n->kind = k;
        n->lhs = e.node_;
        return BoolExpr(std::move(n));
    }
    static BoolExpr binary(Kind k, const BoolExpr& a, const BoolExpr& b) {
        auto n = std::make_shared<Node>();
        n->kind = k;
        n->lhs = a.node_;
        n->rhs = b.node_;
        return BoolExpr(std::move(n));
    }

    static bool eval(const Node* n, Combination u, Combination p) {
        switch (n->kind) {
            case Kind::True: return true;
            case Kind::False: return false;
            case Kind::Atom: return n->primed ? p.contains(n->atom) : u.contains(n->atom);
            case Kind::Not: return !eval(n->lhs.get(), u, p);
            case Kind::And: return eval(n->lhs.get(), u, p) && eval(n->rhs.get(), u, p);
            case Kind::Or: return eval(n->lhs.get(), u, p) || eval(n->rhs.get(), u, p);
            case Kind::Implies: return !eval(n->lhs.get(), u, p) || eval(n->rhs.get(), u, p);
            case Kind::Iff: return eval(n->lhs.get(), u, p) == eval(n->rhs.get(), u, p);
        }
        return false;
    }

    static void collect(const Node* n, bool primed, Combination& out) {
        switch (n->kind) {
            case Kind::Atom:
                if (n->primed == primed) out = out.with(n->atom);
                return;
            case Kind::True:
            case Kind::False: return;
            case Kind::Not: collect(n->lhs.get(), primed, out); return;
            default:
                collect(n->lhs.get(), primed, out);
                collect(n->rhs.get(), primed, out);
                return;
        }
    }

    static bool positive(const Node* n) {
        switch (n->kind) {
            case Kind::True:
            case Kind::False:
            case Kind::Atom: return true;
            case Kind::And:
            case Kind::Or: return positive(n->lhs.get()) && positive(n->rhs.get());
            default: return false;
        }
    }

    static void write_key(const Node* n, std::string& s) {
        switch (n->kind) {
            case Kind::True: s += "T"; return;
            case Kind::False: s += "F"; return;
            case Kind::Atom:
                s += n->primed ? "p" : "a";
                s += std::to_string(n->atom);
                return;
            case Kind::Not:
                s += "!(";
                write_key(n->lhs.get(), s);
                s += ")";
                return;
            case Kind::And: s += "&"; break;
            case Kind::Or: s += "|"; break;
            case Kind::Implies: s += ">"; break;
            case Kind::Iff: s += "="; break;
        }
        s += "(";
        write_key(n->lhs.get(), s);
        s += ",";
        write_key(n->rhs.get(), s);
        s += ")";
    }

    NodePtr node_;
};

/// Satisfaction relation: truth of `expr` with each atom true iff its
/// feature is in `combination`. Rejects primed atoms.
inline bool satisfies(Combination combination, const BoolExpr& expr) {
    if (expr.has_primed_atoms())
        throw ContractViolation("satisfies: expression contains a primed atom");
    return expr.evaluate(combination, Combination());
}

/// Membership of (before, after) in the relation R_rho: unprimed atoms of
/// rho are read from `before`, primed atoms from `after`.
inline bool switch_holds(const BoolExpr& rho, Combination before, Combination after) {
    return rho.evaluate(before, after);
}

} // namespace featcheck
