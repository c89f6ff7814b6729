#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "featcheck/errors.hpp"
#include "featcheck/mdp.hpp"

namespace featcheck {

enum class Opt { Max, Min };

enum class QueryKind { PmaxReach, PminReach, PmaxUntil, PminUntil, EminReach, EmaxReach };

struct Query {
    QueryKind kind;
    std::string cost_type;                 // cost queries only
    std::vector<char> target;              // per-state predicate T
    std::vector<char> constraint;          // per-state predicate V (until queries only)
};

struct EngineOptions {
    double epsilon = 1e-9;        // absolute residual threshold, probability queries
    double cost_epsilon = 1e-8;   // relative residual threshold, expected-cost queries
    long max_iterations = 1000000;
    bool synthesize = false;
    std::function<void(long, const std::vector<double>&)> sweep_observer;
};

/// Per-state result values. Infinite expected costs are represented by
/// +infinity, classified exactly by the qualitative precomputation rather
/// than by iteration overflow.
struct AnalysisResult {
    std::vector<double> values;
    std::vector<std::int32_t> scheduler;  // per-state move offset; -1 when no move chosen
    bool has_scheduler = false;
    long iterations = 0;
    double residual = 0.0;
    bool converged = true;
};

namespace detail {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// CSR table of incoming moves per state.
struct InMoves {
    std::vector<std::int32_t> begin;  // size num_states+1
    std::vector<std::int32_t> moves;

    static InMoves build(const ExplicitMdp& m) {
        InMoves in;
        std::vector<std::int32_t> count(m.num_states() + 1, 0);
        for (std::int32_t mv = 0; mv < m.num_moves(); ++mv) {
            std::int32_t prev = -1;
            for (std::int32_t b = m.branch_begin(mv); b < m.branch_end(mv); ++b) {
                std::int32_t t = m.branch_target(b);
                if (t != prev) count[t + 1]++;  // branch targets are sorted and unique
                prev = t;
            }
        }
        in.begin = count;
        for (std::int32_t s = 0; s < m.num_states(); ++s) in.begin[s + 1] += in.begin[s];
        in.moves.resize(in.begin.back());
        std::vector<std::int32_t> cursor(in.begin.begin(), in.begin.end() - 1);
        for (std::int32_t mv = 0; mv < m.num_moves(); ++mv) {
            std::int32_t prev = -1;
            for (std::int32_t b = m.branch_begin(mv); b < m.branch_end(mv); ++b) {
                std::int32_t t = m.branch_target(b);
                if (t != prev) in.moves[cursor[t]++] = mv;
                prev = t;
            }
        }
        return in;
    }
};

inline bool state_blocked(const std::vector<char>* blocked, std::int32_t s) {
    return blocked && (*blocked)[s];
}

} // namespace detail

/// States whose maximal reachability probability is exactly 0: no path to
/// the target exists in the underlying graph.
inline std::vector<char> prob0_max(const ExplicitMdp& m, const std::vector<char>& target,
                                   const std::vector<char>* blocked = nullptr) {
    auto in = detail::InMoves::build(m);
    std::vector<char> reach(m.num_states(), 0);
    std::deque<std::int32_t> queue;
    for (std::int32_t s = 0; s < m.num_states(); ++s)
        if (target[s]) {
            reach[s] = 1;
            queue.push_back(s);
        }
    while (!queue.empty()) {
        std::int32_t t = queue.front();
        queue.pop_front();
        for (std::int32_t i = in.begin[t]; i < in.begin[t + 1]; ++i) {
            std::int32_t s = m.move_source(in.moves[i]);
            if (reach[s] || detail::state_blocked(blocked, s)) continue;
            reach[s] = 1;
            queue.push_back(s);
        }
    }
    std::vector<char> zero(m.num_states(), 0);
    for (std::int32_t s = 0; s < m.num_states(); ++s) zero[s] = !reach[s];
    return zero;
}

/// States whose maximal reachability probability is exactly 1: there is a
/// scheduler reaching the target almost surely (the standard greatest/least
/// double fixpoint).
inline std::vector<char> prob1_max(const ExplicitMdp& m, const std::vector<char>& target,
                                   const std::vector<char>* blocked = nullptr) {
    const std::int32_t n = m.num_states();
    auto in = detail::InMoves::build(m);
    std::vector<char> u(n, 1);
    std::vector<char> move_stays(m.num_moves());
    while (true) {
        for (std::int32_t mv = 0; mv < m.num_moves(); ++mv) {
            bool stays = true;
            for (std::int32_t b = m.branch_begin(mv); b < m.branch_end(mv) && stays; ++b)
                if (!u[m.branch_target(b)]) stays = false;
            move_stays[mv] = stays;
        }
        // Least fixpoint inside u: v = T plus u-states with a u-staying move
        // that has a branch into v.
        std::vector<char> v(n, 0);
        std::deque<std::int32_t> queue;
        for (std::int32_t s = 0; s < n; ++s)
            if (target[s]) {
                v[s] = 1;
                queue.push_back(s);
            }
        while (!queue.empty()) {
            std::int32_t t = queue.front();
            queue.pop_front();
            for (std::int32_t i = in.begin[t]; i < in.begin[t + 1]; ++i) {
                std::int32_t mv = in.moves[i];
                std::int32_t s = m.move_source(mv);
                if (v[s] || !u[s] || target[s] || detail::state_blocked(blocked, s)) continue;
                if (!move_stays[mv]) continue;
                v[s] = 1;
                queue.push_back(s);
            }
        }
        if (v == u) return u;
        u = std::move(v);
    }
}

/// States whose minimal reachability probability is exactly 0: some
/// scheduler avoids the target surely. Greatest fixpoint of the avoid
/// closure (terminal non-target states stay; otherwise some move must keep
/// all mass inside the set).
inline std::vector<char> prob0_min(const ExplicitMdp& m, const std::vector<char>& target,
                                   const std::vector<char>* blocked = nullptr) {
    const std::int32_t n = m.num_states();
    std::vector<char> in_a(n, 0);
    for (std::int32_t s = 0; s < n; ++s) in_a[s] = !target[s];

    // Counter-based elimination: a move "stays" while none of its branches
    // leave A; a state stays while it has a staying move or no moves at all.
    std::vector<std::int32_t> bad_branches(m.num_moves(), 0);
    std::vector<std::int32_t> staying_moves(n, 0);
    for (std::int32_t s = 0; s < n; ++s) {
        if (!in_a[s] || detail::state_blocked(blocked, s)) continue;
        for (std::int32_t mv = m.move_begin(s); mv < m.move_end(s); ++mv) {
            for (std::int32_t b = m.branch_begin(mv); b < m.branch_end(mv); ++b)
                if (!in_a[m.branch_target(b)]) bad_branches[mv]++;
            if (bad_branches[mv] == 0) staying_moves[s]++;
        }
    }
    std::deque<std::int32_t> queue;
    for (std::int32_t s = 0; s < n; ++s) {
        bool absorbed = detail::state_blocked(blocked, s);
        if (in_a[s] && !absorbed && m.moves_of(s) > 0 && staying_moves[s] == 0) {
            in_a[s] = 0;
            queue.push_back(s);
        }
    }
    auto in = detail::InMoves::build(m);
    while (!queue.empty()) {
        std::int32_t t = queue.front();
        queue.pop_front();
        for (std::int32_t i = in.begin[t]; i < in.begin[t + 1]; ++i) {
            std::int32_t mv = in.moves[i];
            std::int32_t s = m.move_source(mv);
            if (!in_a[s] || detail::state_blocked(blocked, s)) continue;
            if (bad_branches[mv]++ == 0) {
                if (--staying_moves[s] == 0 && m.moves_of(s) > 0) {
                    in_a[s] = 0;
                    queue.push_back(s);
                }
            }
        }
    }
    return in_a;
}

/// States whose minimal reachability probability is exactly 1: the target
/// states plus every state with no target-avoiding path into the sure-avoid
/// region computed by prob0_min.
inline std::vector<char> prob1_min(const ExplicitMdp& m, const std::vector<char>& target,
                                   const std::vector<char>* blocked = nullptr) {
    std::vector<char> avoid = prob0_min(m, target, blocked);
    auto in = detail::InMoves::build(m);
    std::vector<char> can_reach_avoid(m.num_states(), 0);
    std::deque<std::int32_t> queue;
    for (std::int32_t s = 0; s < m.num_states(); ++s)
        if (avoid[s]) {
            can_reach_avoid[s] = 1;
            queue.push_back(s);
        }
    while (!queue.empty()) {
        std::int32_t t = queue.front();
        queue.pop_front();
        for (std::int32_t i = in.begin[t]; i < in.begin[t + 1]; ++i) {
            std::int32_t s = m.move_source(in.moves[i]);
            if (can_reach_avoid[s] || target[s] || detail::state_blocked(blocked, s)) continue;
            can_reach_avoid[s] = 1;
            queue.push_back(s);
        }
    }
    std::vector<char> one(m.num_states(), 0);
    for (std::int32_t s = 0; s < m.num_states(); ++s) one[s] = target[s] || !can_reach_avoid[s];
    return one;
}

namespace detail {

struct ViOutcome {
    long iterations = 0;
    double residual = 0.0;
    bool converged = true;
};

/// Gauss-Seidel Bellman iteration over the non-frozen states, descending
/// state order. `move_value` computes the value of one move from the
/// current vector.
template <typename MoveValue>
ViOutcome value_iterate(const ExplicitMdp& m, std::vector<double>& v, const std::vector<char>& frozen,
                        const std::vector<char>* blocked, const std::vector<char>* move_allowed,
                        bool maximize, bool relative_residual, double eps, long max_iters,
                        MoveValue&& move_value,
                        const std::function<void(long, const std::vector<double>&)>& observer) {
    ViOutcome out;
    const std::int32_t n = m.num_states();
    for (long sweep = 1; sweep <= max_iters; ++sweep) {
        double residual = 0.0;
        for (std::int32_t s = n - 1; s >= 0; --s) {
            if (frozen[s] || state_blocked(blocked, s) || m.is_terminal(s)) continue;
            double best = 0.0;
            bool any = false;
            for (std::int32_t mv = m.move_begin(s); mv < m.move_end(s); ++mv) {
                if (move_allowed && !(*move_allowed)[mv]) continue;
                double val = move_value(mv, v);
                if (!any || (maximize ? val > best : val < best)) best = val;
                any = true;
            }
            if (!any) continue;
            double delta = std::abs(best - v[s]);
            if (relative_residual) delta /= std::max(1.0, std::abs(best));
            residual = std::max(residual, delta);
            v[s] = best;
        }
        out.iterations = sweep;
        out.residual = residual;
        if (observer) observer(sweep, v);
        if (residual < eps) return out;
    }
    out.converged = false;
    return out;
}

inline double prob_move_value(const ExplicitMdp& m, std::int32_t mv, const std::vector<double>& v) {
    double x = 0.0;
    for (std::int32_t b = m.branch_begin(mv); b < m.branch_end(mv); ++b)
        x += m.branch_prob_d(b) * v[m.branch_target(b)];
    return x;
}

/// Backward layering from `seeds` over eligible moves, preferring the
/// lowest move offset per state. A state is assigned a choice once some
/// eligible move gains a branch into the already-layered set, so every
/// chosen move makes progress toward the seeds with positive probability.
template <typename Eligible>
void layer_toward(const ExplicitMdp& m, const std::vector<char>& seeds, const std::vector<char>* blocked,
                  std::vector<std::int32_t>& sched, std::vector<char>& layered, Eligible&& eligible) {
    auto in = InMoves::build(m);
    std::deque<std::int32_t> queue;
    for (std::int32_t s = 0; s < m.num_states(); ++s)
        if (seeds[s]) {
            layered[s] = 1;
            queue.push_back(s);
        }
    while (!queue.empty()) {
        std::int32_t t = queue.front();
        queue.pop_front();
        for (std::int32_t i = in.begin[t]; i < in.begin[t + 1]; ++i) {
            std::int32_t s = m.move_source(in.moves[i]);
            if (layered[s] || seeds[s] || state_blocked(blocked, s)) continue;
            // First time s can make progress: scan all its moves so the
            // lowest eligible progressing offset wins deterministically.
            std::int32_t choice = -1;
            for (std::int32_t mv = m.move_begin(s); mv < m.move_end(s) && choice < 0; ++mv) {
                if (!eligible(mv)) continue;
                for (std::int32_t b = m.branch_begin(mv); b < m.branch_end(mv); ++b)
                    if (layered[m.branch_target(b)]) {
                        choice = mv - m.move_begin(s);
                        break;
                    }
            }
            if (choice < 0) continue;
            sched[s] = choice;
            layered[s] = 1;
            queue.push_back(s);
        }
    }
}

} // namespace detail

/// Extremal reachability probability with optimal-scheduler synthesis.
/// Qualitative precomputation pins the exact-0 states (both modes) and the
/// exact-1 states, then value iteration runs on the remainder: max-mode
/// iterates climb from 0, min-mode iterates descend from 1.
inline AnalysisResult reach_opt(const ExplicitMdp& m, const std::vector<char>& target, Opt mode,
                                const EngineOptions& opts = {}, const std::vector<char>* blocked = nullptr) {
    AnalysisResult res;
    const std::int32_t n = m.num_states();
    if (n == 0) return res;
    if (static_cast<std::int32_t>(target.size()) != n)
        throw ContractViolation("reach_opt: target predicate not total on states");

    std::vector<char> zero = (mode == Opt::Max) ? prob0_max(m, target, blocked) : prob0_min(m, target, blocked);
    std::vector<char> one = (mode == Opt::Max) ? prob1_max(m, target, blocked) : prob1_min(m, target, blocked);

    std::vector<double> v(n, mode == Opt::Max ? 0.0 : 1.0);
    std::vector<char> frozen(n, 0);
    for (std::int32_t s = 0; s < n; ++s) {
        if (zero[s]) {
            v[s] = 0.0;
            frozen[s] = 1;
        } else if (one[s]) {
            v[s] = 1.0;
            frozen[s] = 1;
        } else if (detail::state_blocked(blocked, s)) {
            v[s] = 0.0;
        }
    }

    auto outcome = detail::value_iterate(
        m, v, frozen, blocked, nullptr, mode == Opt::Max, false, opts.epsilon, opts.max_iterations,
        [&](std::int32_t mv, const std::vector<double>& cur) { return detail::prob_move_value(m, mv, cur); },
        opts.sweep_observer);

    res.values = v;
    res.iterations = outcome.iterations;
    res.residual = outcome.residual;
    res.converged = outcome.converged;

    if (opts.synthesize) {
        res.scheduler.assign(n, -1);
        std::vector<char> layered(n, 0);
        double tol = std::max(1e-12, 10.0 * outcome.residual);
        detail::layer_toward(m, target, blocked, res.scheduler, layered, [&](std::int32_t mv) {
            std::int32_t s = m.move_source(mv);
            return std::abs(detail::prob_move_value(m, mv, v) - v[s]) <= tol;
        });
        for (std::int32_t s = 0; s < n; ++s) {
            if (res.scheduler[s] >= 0 || target[s] || m.is_terminal(s) || detail::state_blocked(blocked, s))
                continue;
            // Value-0 states (max) or states indifferent toward the target:
            // any value-achieving move is optimal; take the first.
            std::int32_t choice = 0;
            for (std::int32_t mv = m.move_begin(s); mv < m.move_end(s); ++mv)
                if (std::abs(detail::prob_move_value(m, mv, v) - v[s]) <= tol) {
                    choice = mv - m.move_begin(s);
                    break;
                }
            res.scheduler[s] = choice;
        }
        res.has_scheduler = true;
    }
    return res;
}

/// Constrained reachability V U T: equal to plain reachability on the MDP
/// where states outside V u T are made absorbing with value 0.
inline AnalysisResult until_opt(const ExplicitMdp& m, const std::vector<char>& constraint,
                                const std::vector<char>& target, Opt mode, const EngineOptions& opts = {}) {
    const std::int32_t n = m.num_states();
    if (static_cast<std::int32_t>(constraint.size()) != n || static_cast<std::int32_t>(target.size()) != n)
        throw ContractViolation("until_opt: predicates not total on states");
    std::vector<char> blocked(n, 0);
    for (std::int32_t s = 0; s < n; ++s) blocked[s] = !constraint[s] && !target[s];
    return reach_opt(m, target, mode, opts, &blocked);
}

/// Extremal expected accumulated cost to reach T. Min-mode: infinite
/// exactly where Pmax(<>T) < 1, value iteration elsewhere restricted to
/// moves staying inside the Pmax=1 region, iterated downward from the cost
/// of a synthesized proper policy. Max-mode: infinite exactly where
/// Pmin(<>T) < 1, iterated upward from 0.
inline AnalysisResult expected_cost_opt(const ExplicitMdp& m, std::string_view cost_type,
                                        const std::vector<char>& target, Opt mode,
                                        const EngineOptions& opts = {}) {
    AnalysisResult res;
    const std::int32_t n = m.num_states();
    if (n == 0) return res;
    if (static_cast<std::int32_t>(target.size()) != n)
        throw ContractViolation("expected_cost_opt: target predicate not total on states");

    std::vector<double> move_cost(m.num_moves());
    for (std::int32_t mv = 0; mv < m.num_moves(); ++mv)
        move_cost[mv] = static_cast<double>(m.move_cost_value(mv, cost_type));
    auto cost_value = [&](std::int32_t mv, const std::vector<double>& cur) {
        return move_cost[mv] + detail::prob_move_value(m, mv, cur);
    };

    std::vector<char> finite = (mode == Opt::Min) ? prob1_max(m, target) : prob1_min(m, target);

    std::vector<double> v(n, 0.0);
    std::vector<char> frozen(n, 0);
    for (std::int32_t s = 0; s < n; ++s) {
        if (target[s]) {
            frozen[s] = 1;
        } else if (!finite[s]) {
            v[s] = detail::kInf;
            frozen[s] = 1;
        }
    }

    std::vector<char> allowed;
    std::vector<std::int32_t> proper_policy(n, -1);
    if (mode == Opt::Min) {
        // Restrict to moves whose successors all stay in the Pmax=1 region.
        allowed.assign(m.num_moves(), 0);
        for (std::int32_t mv = 0; mv < m.num_moves(); ++mv) {
            if (!finite[m.move_source(mv)]) continue;
            bool stays = true;
            for (std::int32_t b = m.branch_begin(mv); b < m.branch_end(mv); ++b)
                if (!finite[m.branch_target(b)]) stays = false;
            allowed[mv] = stays;
        }
        // A proper policy over the restricted moves, then its cost as the
        // downward starting point (min-mode value iteration from below can
        // stall on zero-cost cycles).
        std::vector<char> layered(n, 0);
        detail::layer_toward(m, target, nullptr, proper_policy, layered,
                             [&](std::int32_t mv) { return static_cast<bool>(allowed[mv]); });
        std::vector<double> bound(n, 0.0);
        std::vector<char> chain_frozen(n, 0);
        for (std::int32_t s = 0; s < n; ++s)
            if (target[s] || !finite[s]) chain_frozen[s] = 1;
        std::vector<char> chain_allowed(m.num_moves(), 0);
        for (std::int32_t s = 0; s < n; ++s)
            if (proper_policy[s] >= 0) chain_allowed[m.move_begin(s) + proper_policy[s]] = 1;
        detail::value_iterate(
            m, bound, chain_frozen, nullptr, &chain_allowed, false, true, 1e-12, opts.max_iterations,
            cost_value, nullptr);
        for (std::int32_t s = 0; s < n; ++s)
            if (!frozen[s]) v[s] = bound[s] * (1.0 + 1e-9);
    }

    auto outcome = detail::value_iterate(m, v, frozen, nullptr, allowed.empty() ? nullptr : &allowed,
                                         mode == Opt::Max, true, opts.cost_epsilon, opts.max_iterations,
                                         cost_value, opts.sweep_observer);

    res.values = v;
    res.iterations = outcome.iterations;
    res.residual = outcome.residual;
    res.converged = outcome.converged;

    if (opts.synthesize) {
        res.scheduler.assign(n, -1);
        std::vector<char> layered(n, 0);
        detail::layer_toward(m, target, nullptr, res.scheduler, layered, [&](std::int32_t mv) {
            std::int32_t s = m.move_source(mv);
            if (!finite[s] || std::isinf(v[s])) return false;
            if (!allowed.empty() && !allowed[mv]) return false;
            double tol = std::max(1e-9, 10.0 * outcome.residual) * std::max(1.0, std::abs(v[s]));
            return std::abs(cost_value(mv, v) - v[s]) <= tol;
        });
        if (mode == Opt::Max) {
            // Witness for infinite values: head for the sure-avoid region,
            // then stay inside it.
            std::vector<char> avoid = prob0_min(m, target);
            for (std::int32_t s = 0; s < n; ++s) {
                if (!avoid[s] || m.is_terminal(s)) continue;
                for (std::int32_t mv = m.move_begin(s); mv < m.move_end(s); ++mv) {
                    bool stays = true;
                    for (std::int32_t b = m.branch_begin(mv); b < m.branch_end(mv); ++b)
                        if (!avoid[m.branch_target(b)]) stays = false;
                    if (stays) {
                        res.scheduler[s] = mv - m.move_begin(s);
                        layered[s] = 1;
                        break;
                    }
                }
            }
            std::vector<char> toward(n, 0);
            std::vector<std::int32_t> toward_sched(n, -1);
            // Routes toward the avoid region must not pass through T.
            detail::layer_toward(m, avoid, &target, toward_sched, toward, [&](std::int32_t) { return true; });
            for (std::int32_t s = 0; s < n; ++s)
                if (res.scheduler[s] < 0 && !target[s] && toward_sched[s] >= 0 && std::isinf(v[s])) {
                    res.scheduler[s] = toward_sched[s];
                    layered[s] = 1;
                }
        }
        for (std::int32_t s = 0; s < n; ++s) {
            if (res.scheduler[s] >= 0 || target[s] || m.is_terminal(s)) continue;
            std::int32_t lo = m.move_begin(s);
            std::int32_t choice = 0;
            if (!allowed.empty())
                for (std::int32_t mv = lo; mv < m.move_end(s); ++mv)
                    if (allowed[mv]) {
                        choice = mv - lo;
                        break;
                    }
            res.scheduler[s] = choice;
        }
        res.has_scheduler = true;
    }
    return res;
}

/// The Markov chain induced by a memoryless deterministic scheduler: at
/// most one move per state remains.
inline ExplicitMdp induced_chain(const ExplicitMdp& m, const std::vector<std::int32_t>& scheduler) {
    if (static_cast<std::int32_t>(scheduler.size()) != m.num_states())
        throw ContractViolation("induced_chain: scheduler not total on states");
    MdpBuilder builder;
    builder.ensure_states(m.num_states());
    for (std::int32_t s : m.initial_states()) builder.mark_initial(s);
    for (std::int32_t s = 0; s < m.num_states(); ++s) {
        if (scheduler[s] < 0) continue;
        if (scheduler[s] >= m.moves_of(s))
            throw ContractViolation("induced_chain: scheduler selects a disabled move at state " +
                                    std::to_string(s));
        std::int32_t mv = m.move_begin(s) + scheduler[s];
        std::vector<std::pair<std::int32_t, Rational>> branches;
        for (std::int32_t b = m.branch_begin(mv); b < m.branch_end(mv); ++b)
            branches.emplace_back(m.branch_target(b), m.branch_prob(b));
        builder.add_move(s, m.move_cost(mv), std::move(branches));
    }
    return builder.finalize();
}

/// Convenience dispatch for a full Query.
inline AnalysisResult run_query(const ExplicitMdp& m, const Query& q, const EngineOptions& opts = {}) {
    switch (q.kind) {
        case QueryKind::PmaxReach: return reach_opt(m, q.target, Opt::Max, opts);
        case QueryKind::PminReach: return reach_opt(m, q.target, Opt::Min, opts);
        case QueryKind::PmaxUntil: return until_opt(m, q.constraint, q.target, Opt::Max, opts);
        case QueryKind::PminUntil: return until_opt(m, q.constraint, q.target, Opt::Min, opts);
        case QueryKind::EminReach: return expected_cost_opt(m, q.cost_type, q.target, Opt::Min, opts);
        case QueryKind::EmaxReach: return expected_cost_opt(m, q.cost_type, q.target, Opt::Max, opts);
    }
    throw ContractViolation("run_query: unknown query kind");
}

} // namespace featcheck
