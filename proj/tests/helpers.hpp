#pragma once

#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "featcheck/controller.hpp"
#include "featcheck/join.hpp"
#include "featcheck/mdp.hpp"
#include "featcheck/module.hpp"

namespace testgen {

using namespace featcheck;

struct Rng {
    std::mt19937 eng;
    explicit Rng(unsigned seed) : eng(seed) {}

    int range(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng); }
    bool chance(double p) { return std::uniform_real_distribution<double>(0, 1)(eng) < p; }
};

inline BoolExpr random_expr(Rng& rng, int num_features, int depth, bool allow_primed,
                            bool positive_only = false) {
    if (depth == 0 || rng.chance(0.35)) {
        int pick = rng.range(0, num_features + 1);
        if (pick == num_features) return BoolExpr::tru();
        if (pick == num_features + 1) return positive_only ? BoolExpr::tru() : BoolExpr::fls();
        bool primed = allow_primed && rng.chance(0.4);
        return BoolExpr::atom(pick, primed);
    }
    int op = rng.range(0, positive_only ? 1 : 4);
    BoolExpr a = random_expr(rng, num_features, depth - 1, allow_primed, positive_only);
    BoolExpr b = random_expr(rng, num_features, depth - 1, allow_primed, positive_only);
    switch (op) {
        case 0: return a && b;
        case 1: return a || b;
        case 2: return !a;
        case 3: return BoolExpr::implies(a, b);
        default: return BoolExpr::iff(a, b);
    }
}

/// Restricts atoms of a fresh random expression to the given feature set.
inline BoolExpr random_expr_over(Rng& rng, Combination atoms, int depth, bool allow_primed) {
    auto ids = atoms.members();
    if (ids.empty()) return rng.chance(0.8) ? BoolExpr::tru() : BoolExpr::fls();
    if (depth == 0 || rng.chance(0.35)) {
        int pick = rng.range(0, static_cast<int>(ids.size()));
        if (pick == static_cast<int>(ids.size())) return BoolExpr::tru();
        return BoolExpr::atom(ids[pick], allow_primed && rng.chance(0.4));
    }
    BoolExpr a = random_expr_over(rng, atoms, depth - 1, allow_primed);
    BoolExpr b = random_expr_over(rng, atoms, depth - 1, allow_primed);
    switch (rng.range(0, 3)) {
        case 0: return a && b;
        case 1: return a || b;
        case 2: return !a;
        default: return BoolExpr::iff(a, b);
    }
}

inline Distribution<int> random_location_dist(Rng& rng, int num_locations) {
    int support = rng.range(1, std::min(3, num_locations));
    std::set<int> targets;
    while (static_cast<int>(targets.size()) < support) targets.insert(rng.range(0, num_locations - 1));
    std::vector<std::pair<int, Rational>> entries;
    int total = 0;
    std::vector<int> weights;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        int w = rng.range(1, 4);
        weights.push_back(w);
        total += w;
    }
    std::size_t i = 0;
    for (int t : targets) entries.emplace_back(t, Rational(weights[i++], total));
    return Distribution<int>(std::move(entries));
}

inline CostVector random_cost(Rng& rng) {
    CostVector c;
    if (rng.chance(0.7)) c.add("energy", rng.range(0, 3));
    if (rng.chance(0.4)) c.add("money", rng.range(0, 5));
    return c;
}

/// Random well-formed feature module over integer locations.
inline FeatureModule<int> random_module(Rng& rng, Combination own, Combination ext,
                                        const std::vector<std::string>& action_pool) {
    FeatureModule<int> m;
    int nloc = rng.range(1, 3);
    for (int i = 0; i < nloc; ++i) m.locations.push_back(i);
    m.initial.push_back(rng.range(0, nloc - 1));
    m.interface = {own, ext};

    std::set<std::string> acts;
    for (const auto& a : action_pool)
        if (rng.chance(0.6)) acts.insert(a);
    m.actions.assign(acts.begin(), acts.end());

    int nact = rng.range(0, 3);
    for (int i = 0; i < nact && !m.actions.empty(); ++i) {
        const std::string& act = m.actions[rng.range(0, static_cast<int>(m.actions.size()) - 1)];
        m.tr_act.push_back({rng.range(0, nloc - 1), random_expr_over(rng, own | ext, 2, false), act,
                            random_cost(rng), random_location_dist(rng, nloc)});
    }
    int nsw = rng.range(0, 2);
    for (int i = 0; i < nsw; ++i) {
        m.tr_sw.push_back({rng.range(0, nloc - 1), random_expr_over(rng, own | ext, 2, false),
                           random_expr_over(rng, own, 2, true), random_cost(rng),
                           random_location_dist(rng, nloc)});
    }
    // Trans is a set: drop duplicates the generator may have produced.
    auto dedup = [](auto& transitions) {
        for (std::size_t i = 0; i < transitions.size(); ++i)
            for (std::size_t j = transitions.size(); j-- > i + 1;)
                if (transitions[j] == transitions[i]) transitions.erase(transitions.begin() + j);
    };
    dedup(m.tr_act);
    dedup(m.tr_sw);
    return m;
}

/// Random controller over a signature whose valid set is all subsets of a
/// small universe.
inline Controller random_controller(Rng& rng, int num_features) {
    FeatureSignature sig;
    for (int i = 0; i < num_features; ++i) sig.features.push_back(std::string(1, char('a' + i)));
    for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << num_features); ++bits)
        sig.valid.push_back(Combination(bits));
    Controller c;
    c.signature = sig;
    int ninit = rng.range(1, 2);
    for (int i = 0; i < ninit; ++i)
        c.initial.push_back(sig.valid[rng.range(0, static_cast<int>(sig.valid.size()) - 1)]);
    int nev = rng.range(0, 4);
    for (int i = 0; i < nev; ++i) {
        Combination from = sig.valid[rng.range(0, static_cast<int>(sig.valid.size()) - 1)];
        int support = rng.range(1, 2);
        std::set<Combination> targets;
        while (static_cast<int>(targets.size()) < support)
            targets.insert(sig.valid[rng.range(0, static_cast<int>(sig.valid.size()) - 1)]);
        std::vector<std::pair<Combination, Rational>> entries;
        int total = 0;
        std::vector<int> weights;
        for (std::size_t k = 0; k < targets.size(); ++k) {
            int w = rng.range(1, 3);
            weights.push_back(w);
            total += w;
        }
        std::size_t k = 0;
        for (Combination t : targets) entries.emplace_back(t, Rational(weights[k++], total));
        CostVector cost;
        if (rng.chance(0.5)) cost.add("money", rng.range(0, 4));
        c.events.push_back({from, cost, Distribution<Combination>(std::move(entries))});
    }
    return c;
}

/// Random MDP for oracle-vs-engine comparisons: small, rational
/// probabilities, one cost type including zero costs.
inline ExplicitMdp random_mdp(Rng& rng, int max_states, int max_moves_per_state,
                              std::vector<char>* target_out = nullptr,
                              std::vector<char>* constraint_out = nullptr) {
    int n = rng.range(2, max_states);
    MdpBuilder b;
    for (int i = 0; i < n; ++i) b.add_state();
    b.mark_initial(0);
    for (int s = 0; s < n; ++s) {
        int nmoves = rng.range(0, max_moves_per_state);
        if (s == 0 && nmoves == 0) nmoves = 1;
        for (int k = 0; k < nmoves; ++k) {
            int support = rng.range(1, std::min(3, n));
            std::set<int> targets;
            while (static_cast<int>(targets.size()) < support) targets.insert(rng.range(0, n - 1));
            std::vector<std::pair<std::int32_t, Rational>> branches;
            int total = 0;
            std::vector<int> weights;
            for (std::size_t i = 0; i < targets.size(); ++i) {
                int w = rng.range(1, 4);
                weights.push_back(w);
                total += w;
            }
            std::size_t i = 0;
            for (int t : targets) branches.emplace_back(t, Rational(weights[i++], total));
            CostVector cost;
            cost.add("c", rng.range(0, 3));
            b.add_move(s, cost, std::move(branches));
        }
    }
    if (target_out) {
        target_out->assign(n, 0);
        for (int s = 0; s < n; ++s) (*target_out)[s] = rng.chance(0.3);
        if (std::count(target_out->begin(), target_out->end(), 1) == 0) (*target_out)[n - 1] = 1;
    }
    if (constraint_out) {
        constraint_out->assign(n, 0);
        for (int s = 0; s < n; ++s) (*constraint_out)[s] = rng.chance(0.7);
    }
    return b.finalize();
}

/// Canonical semantic signature of a module: guards and switch
/// annotations are compared by truth table (composition laws hold only up
/// to logical equivalence of the composed expressions), locations through
/// the supplied key function.
template <typename Loc, typename LocKey>
std::multiset<std::string> module_signature(const FeatureModule<Loc>& m, int num_features, LocKey&& key) {
    std::multiset<std::string> sig;
    auto guard_tt = [&](const BoolExpr& e) {
        std::string tt;
        for (std::uint64_t c = 0; c < (std::uint64_t{1} << num_features); ++c)
            tt += e.evaluate(Combination(c), Combination()) ? '1' : '0';
        return tt;
    };
    auto rho_tt = [&](const BoolExpr& e) {
        std::string tt;
        for (std::uint64_t u = 0; u < (std::uint64_t{1} << num_features); ++u)
            for (std::uint64_t p = 0; p < (std::uint64_t{1} << num_features); ++p)
                tt += e.evaluate(Combination(u), Combination(p)) ? '1' : '0';
        return tt;
    };
    auto dist_key = [&](const Distribution<Loc>& d) {
        std::vector<std::string> parts;
        for (const auto& [loc, p] : d.support()) parts.push_back(key(loc) + "*" + rational_to_string(p));
        std::sort(parts.begin(), parts.end());
        std::string s;
        for (const auto& part : parts) s += part + ";";
        return s;
    };
    for (const auto& t : m.tr_act)
        sig.insert("A|" + key(t.source) + "|" + guard_tt(t.guard) + "|" + t.action + "|" +
                   t.cost.to_string() + "|" + dist_key(t.target));
    for (const auto& t : m.tr_sw)
        sig.insert("S|" + key(t.source) + "|" + guard_tt(t.guard) + "|" + rho_tt(t.rho) + "|" +
                   t.cost.to_string() + "|" + dist_key(t.target));
    return sig;
}

template <typename L1, typename L2, typename K1, typename K2>
bool modules_isomorphic(const FeatureModule<L1>& a, const FeatureModule<L2>& b, int num_features, K1&& ka,
                        K2&& kb) {
    if (!(a.interface.own == b.interface.own) || !(a.interface.ext == b.interface.ext)) return false;
    if (a.actions != b.actions) return false;
    std::multiset<std::string> la, lb, ia, ib;
    for (const auto& l : a.locations) la.insert(ka(l));
    for (const auto& l : b.locations) lb.insert(kb(l));
    for (const auto& l : a.initial) ia.insert(ka(l));
    for (const auto& l : b.initial) ib.insert(kb(l));
    if (la != lb || ia != ib) return false;
    return module_signature(a, num_features, ka) == module_signature(b, num_features, kb);
}

} // namespace testgen
