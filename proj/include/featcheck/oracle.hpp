#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "featcheck/analysis.hpp"
#include "featcheck/errors.hpp"
#include "featcheck/mdp.hpp"

namespace featcheck {

struct OracleOptions {
    std::int32_t max_states = 8;
    long max_scheduler_product = 100000;
};

/// Exact per-state oracle value; `infinite` marks an unbounded expected
/// cost.
struct OracleValue {
    bool infinite = false;
    Rational value = 0;

    double as_double() const { return infinite ? std::numeric_limits<double>::infinity() : to_double(value); }
};

struct OracleResult {
    std::vector<OracleValue> values;
};

namespace detail {

/// Solves A x = rhs by Gaussian elimination over exact rationals.
inline std::vector<Rational> solve_linear(std::vector<std::vector<Rational>> a, std::vector<Rational> rhs) {
    const std::size_t k = rhs.size();
    for (std::size_t col = 0; col < k; ++col) {
        std::size_t pivot = col;
        while (pivot < k && a[pivot][col] == 0) ++pivot;
        if (pivot == k) throw ModelError("oracle: singular linear system");
        std::swap(a[pivot], a[col]);
        std::swap(rhs[pivot], rhs[col]);
        for (std::size_t row = 0; row < k; ++row) {
            if (row == col || a[row][col] == 0) continue;
            Rational factor = a[row][col] / a[col][col];
            for (std::size_t c = col; c < k; ++c) a[row][c] -= factor * a[col][c];
            rhs[row] -= factor * rhs[col];
        }
    }
    std::vector<Rational> x(k);
    for (std::size_t i = 0; i < k; ++i) x[i] = rhs[i] / a[i][i];
    return x;
}

/// One memoryless deterministic scheduler, as the chosen move per state
/// (-1 at terminal or blocked states).
struct ChainView {
    const ExplicitMdp& m;
    const std::vector<std::int32_t>& choice;
    const std::vector<char>* blocked;

    std::int32_t move_of(std::int32_t s) const {
        if (choice[s] < 0 || (blocked && (*blocked)[s])) return -1;
        return m.move_begin(s) + choice[s];
    }
};

/// Exact reachability probabilities of the chain: backward-reachability
/// fixes the zeros, a rational linear system fixes the rest.
inline std::vector<Rational> chain_reach_probs(const ChainView& chain, const std::vector<char>& target) {
    const ExplicitMdp& m = chain.m;
    const std::int32_t n = m.num_states();

    std::vector<char> can_reach(n, 0);
    bool grew = true;
    for (std::int32_t s = 0; s < n; ++s) can_reach[s] = target[s];
    while (grew) {
        grew = false;
        for (std::int32_t s = 0; s < n; ++s) {
            if (can_reach[s]) continue;
            std::int32_t mv = chain.move_of(s);
            if (mv < 0) continue;
            for (std::int32_t b = m.branch_begin(mv); b < m.branch_end(mv); ++b)
                if (can_reach[m.branch_target(b)]) {
                    can_reach[s] = 1;
                    grew = true;
                    break;
                }
        }
    }

    std::vector<std::int32_t> unknown_index(n, -1);
    std::vector<std::int32_t> unknowns;
    for (std::int32_t s = 0; s < n; ++s)
        if (can_reach[s] && !target[s]) {
            unknown_index[s] = static_cast<std::int32_t>(unknowns.size());
            unknowns.push_back(s);
        }

    std::vector<Rational> probs(n, Rational(0));
    for (std::int32_t s = 0; s < n; ++s)
        if (target[s]) probs[s] = 1;
    if (unknowns.empty()) return probs;

    const std::size_t k = unknowns.size();
    std::vector<std::vector<Rational>> a(k, std::vector<Rational>(k, Rational(0)));
    std::vector<Rational> rhs(k, Rational(0));
    for (std::size_t i = 0; i < k; ++i) {
        std::int32_t s = unknowns[i];
        a[i][i] = 1;
        std::int32_t mv = chain.move_of(s);
        for (std::int32_t b = m.branch_begin(mv); b < m.branch_end(mv); ++b) {
            std::int32_t t = m.branch_target(b);
            if (target[t])
                rhs[i] += m.branch_prob(b);
            else if (unknown_index[t] >= 0)
                a[i][unknown_index[t]] -= m.branch_prob(b);
        }
    }
    auto x = solve_linear(std::move(a), std::move(rhs));
    for (std::size_t i = 0; i < k; ++i) probs[unknowns[i]] = x[i];
    return probs;
}

/// Exact expected accumulated cost of the chain; infinite where the chain
/// misses the target with positive probability.
inline std::vector<OracleValue> chain_expected_costs(const ChainView& chain, std::string_view cost_type,
                                                     const std::vector<char>& target) {
    const ExplicitMdp& m = chain.m;
    const std::int32_t n = m.num_states();
    std::vector<Rational> probs = chain_reach_probs(chain, target);

    std::vector<OracleValue> out(n);
    std::vector<std::int32_t> unknown_index(n, -1);
    std::vector<std::int32_t> unknowns;
    for (std::int32_t s = 0; s < n; ++s) {
        if (target[s]) {
            out[s] = {false, Rational(0)};
        } else if (probs[s] != 1) {
            out[s] = {true, Rational(0)};
        } else {
            unknown_index[s] = static_cast<std::int32_t>(unknowns.size());
            unknowns.push_back(s);
        }
    }
    if (unknowns.empty()) return out;

    const std::size_t k = unknowns.size();
    std::vector<std::vector<Rational>> a(k, std::vector<Rational>(k, Rational(0)));
    std::vector<Rational> rhs(k, Rational(0));
    for (std::size_t i = 0; i < k; ++i) {
        std::int32_t s = unknowns[i];
        a[i][i] = 1;
        std::int32_t mv = chain.move_of(s);
        rhs[i] = Rational(m.move_cost_value(mv, cost_type));
        for (std::int32_t b = m.branch_begin(mv); b < m.branch_end(mv); ++b) {
            std::int32_t t = m.branch_target(b);
            if (target[t]) continue;
            // Successors of an almost-surely-reaching state reach almost
            // surely themselves, so t is an unknown here.
            a[i][unknown_index[t]] -= m.branch_prob(b);
        }
    }
    auto x = solve_linear(std::move(a), std::move(rhs));
    for (std::size_t i = 0; i < k; ++i) out[unknowns[i]] = {false, x[i]};
    return out;
}

template <typename PerScheduler>
void enumerate_schedulers(const ExplicitMdp& m, const std::vector<char>* blocked, const OracleOptions& opts,
                          PerScheduler&& per_scheduler) {
    const std::int32_t n = m.num_states();
    if (n > opts.max_states)
        throw OracleRefusal("oracle: " + std::to_string(n) + " states exceed the bound of " +
                            std::to_string(opts.max_states));
    long product = 1;
    for (std::int32_t s = 0; s < n; ++s) {
        bool absorbed = blocked && (*blocked)[s];
        std::int32_t choices = absorbed ? 0 : m.moves_of(s);
        if (choices > 1) {
            product *= choices;
            if (product > opts.max_scheduler_product)
                throw OracleRefusal("oracle: scheduler count exceeds the bound of " +
                                    std::to_string(opts.max_scheduler_product));
        }
    }

    std::vector<std::int32_t> choice(n, -1);
    std::vector<std::int32_t> limits(n, 0);
    for (std::int32_t s = 0; s < n; ++s) {
        bool absorbed = blocked && (*blocked)[s];
        limits[s] = absorbed ? 0 : m.moves_of(s);
        if (limits[s] > 0) choice[s] = 0;
    }
    while (true) {
        per_scheduler(choice);
        std::int32_t s = 0;
        while (s < n) {
            if (limits[s] > 0 && choice[s] + 1 < limits[s]) {
                choice[s]++;
                for (std::int32_t r = 0; r < s; ++r)
                    if (limits[r] > 0) choice[r] = 0;
                break;
            }
            ++s;
        }
        if (s == n) break;
    }
}

} // namespace detail

/// All six query kinds answered from one scheduler enumeration. Each
/// induced chain is solved exactly in rationals; the result is the
/// componentwise extremum over schedulers.
struct OracleAllResult {
    OracleResult pmax_reach, pmin_reach, pmax_until, pmin_until, emin, emax;
};

inline OracleAllResult brute_force_oracle_all(const ExplicitMdp& m, std::string_view cost_type,
                                              const std::vector<char>& target,
                                              const std::vector<char>& constraint,
                                              const OracleOptions& opts = {}) {
    const std::int32_t n = m.num_states();
    OracleAllResult res;
    for (OracleResult* r : {&res.pmax_reach, &res.pmin_reach, &res.pmax_until, &res.pmin_until,
                            &res.emin, &res.emax})
        r->values.assign(n, OracleValue{});
    if (n == 0) return res;

    std::vector<char> blocked(n, 0);
    for (std::int32_t s = 0; s < n; ++s) blocked[s] = !constraint[s] && !target[s];

    auto take_prob = [&](OracleResult& max_out, OracleResult& min_out, const std::vector<Rational>& probs,
                         bool first) {
        for (std::int32_t s = 0; s < n; ++s) {
            if (first || probs[s] > max_out.values[s].value) max_out.values[s] = {false, probs[s]};
            if (first || probs[s] < min_out.values[s].value) min_out.values[s] = {false, probs[s]};
        }
    };
    auto take_cost = [&](const std::vector<OracleValue>& vals, bool first) {
        for (std::int32_t s = 0; s < n; ++s) {
            const OracleValue& v = vals[s];
            OracleValue& mx = res.emax.values[s];
            OracleValue& mn = res.emin.values[s];
            if (first) {
                mx = v;
                mn = v;
                continue;
            }
            if (v.infinite || (!mx.infinite && v.value > mx.value)) mx = v;
            if (mn.infinite || (!v.infinite && v.value < mn.value)) mn = v;
        }
    };

    bool first = true;
    detail::enumerate_schedulers(m, nullptr, opts, [&](const std::vector<std::int32_t>& choice) {
        detail::ChainView chain{m, choice, nullptr};
        take_prob(res.pmax_reach, res.pmin_reach, detail::chain_reach_probs(chain, target), first);
        take_cost(detail::chain_expected_costs(chain, cost_type, target), first);
        detail::ChainView until_chain{m, choice, &blocked};
        take_prob(res.pmax_until, res.pmin_until, detail::chain_reach_probs(until_chain, target), first);
        first = false;
    });
    return res;
}

/// Brute-force oracle for a single query: enumerates every memoryless
/// deterministic scheduler within the configured bounds, solves each
/// induced chain exactly in rationals, and returns the componentwise
/// extremum. Independent of the value-iteration engine by construction.
inline OracleResult brute_force_oracle(const ExplicitMdp& m, const Query& q, const OracleOptions& opts = {}) {
    std::vector<char> constraint = q.constraint;
    if (constraint.empty()) constraint.assign(m.num_states(), 1);
    auto all = brute_force_oracle_all(m, q.cost_type.empty() ? "c" : q.cost_type, q.target, constraint, opts);
    switch (q.kind) {
        case QueryKind::PmaxReach: return all.pmax_reach;
        case QueryKind::PminReach: return all.pmin_reach;
        case QueryKind::PmaxUntil: return all.pmax_until;
        case QueryKind::PminUntil: return all.pmin_until;
        case QueryKind::EminReach: return all.emin;
        case QueryKind::EmaxReach: return all.emax;
    }
    throw ContractViolation("brute_force_oracle: unknown query kind");
}

} // namespace featcheck
