#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "featcheck/cost.hpp"
#include "featcheck/errors.hpp"
#include "featcheck/rational.hpp"

namespace featcheck {

/// Explicit-state MDP over dense integer state indices. Moves are stored
/// CSR-style, sorted canonically per state and deduplicated (Moves is a
/// set); cost vectors and branch probabilities are interned.
class ExplicitMdp {
public:
    std::int32_t num_states() const { return num_states_; }
    const std::vector<std::int32_t>& initial_states() const { return initial_; }

    std::int32_t num_moves() const { return static_cast<std::int32_t>(move_cost_.size()); }
    std::int32_t move_begin(std::int32_t s) const { return state_move_begin_[s]; }
    std::int32_t move_end(std::int32_t s) const { return state_move_begin_[s + 1]; }
    std::int32_t moves_of(std::int32_t s) const { return move_end(s) - move_begin(s); }

    std::int32_t move_source(std::int32_t m) const { return move_source_[m]; }
    const CostVector& move_cost(std::int32_t m) const { return cost_table_[move_cost_[m]]; }
    std::uint64_t move_cost_value(std::int32_t m, std::string_view type) const {
        return move_cost(m).get(type);
    }

    std::int32_t branch_begin(std::int32_t m) const { return move_branch_begin_[m]; }
    std::int32_t branch_end(std::int32_t m) const { return move_branch_begin_[m + 1]; }
    std::int32_t num_branches(std::int32_t m) const { return branch_end(m) - branch_begin(m); }
    std::int32_t branch_target(std::int32_t b) const { return branch_target_[b]; }
    const Rational& branch_prob(std::int32_t b) const { return prob_table_[branch_prob_[b]]; }
    double branch_prob_d(std::int32_t b) const { return prob_double_table_[branch_prob_[b]]; }

    const std::vector<CostVector>& cost_table() const { return cost_table_; }

    bool is_terminal(std::int32_t s) const { return moves_of(s) == 0; }

    /// Probability of a move branch by target state; 0 if absent.
    Rational move_prob_to(std::int32_t m, std::int32_t target) const {
        for (std::int32_t b = branch_begin(m); b < branch_end(m); ++b)
            if (branch_target(b) == target) return branch_prob(b);
        return Rational(0);
    }

private:
    friend class MdpBuilder;

    std::int32_t num_states_ = 0;
    std::vector<std::int32_t> initial_;
    std::vector<std::int32_t> state_move_begin_;  // size num_states+1
    std::vector<std::int32_t> move_source_;
    std::vector<std::int32_t> move_cost_;         // index into cost_table_
    std::vector<std::int32_t> move_branch_begin_; // size num_moves+1
    std::vector<std::int32_t> branch_target_;
    std::vector<std::int32_t> branch_prob_;       // index into prob_table_
    std::vector<CostVector> cost_table_;
    std::vector<Rational> prob_table_;
    std::vector<double> prob_double_table_;
};

class MdpBuilder {
public:
    std::int32_t add_state() { return num_states_++; }
    void ensure_states(std::int32_t n) { num_states_ = std::max(num_states_, n); }
    std::int32_t num_states() const { return num_states_; }

    void mark_initial(std::int32_t s) { initial_.push_back(s); }

    /// Branches with the same target are merged; the distribution must sum
    /// to exactly 1.
    void add_move(std::int32_t source, CostVector cost, std::vector<std::pair<std::int32_t, Rational>> branches) {
        std::sort(branches.begin(), branches.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        std::vector<std::pair<std::int32_t, Rational>> merged;
        for (auto& br : branches) {
            if (!merged.empty() && merged.back().first == br.first)
                merged.back().second += br.second;
            else
                merged.push_back(std::move(br));
        }
        Rational sum = 0;
        for (const auto& [t, p] : merged) {
            if (p <= 0) throw ModelError("move branch with nonpositive probability");
            sum += p;
        }
        if (sum != 1) throw ModelError("move distribution not normalized: sums to " + rational_to_string(sum));
        moves_.push_back({source, std::move(cost), std::move(merged)});
    }

    ExplicitMdp finalize() {
        ExplicitMdp m;
        m.num_states_ = num_states_;
        m.initial_ = initial_;
        std::sort(m.initial_.begin(), m.initial_.end());
        m.initial_.erase(std::unique(m.initial_.begin(), m.initial_.end()), m.initial_.end());
        for (std::int32_t s : m.initial_)
            if (s < 0 || s >= num_states_) throw ModelError("initial state index out of range");

        for (const auto& mv : moves_) {
            if (mv.source < 0 || mv.source >= num_states_) throw ModelError("move source out of range");
            for (const auto& [t, p] : mv.branches)
                if (t < 0 || t >= num_states_) throw ModelError("move target out of range");
        }

        // Canonical per-state order: by (cost, branch list); duplicates merged.
        std::stable_sort(moves_.begin(), moves_.end(), [](const RawMove& a, const RawMove& b) {
            if (a.source != b.source) return a.source < b.source;
            if (!(a.cost == b.cost)) return a.cost < b.cost;
            return a.branches < b.branches;
        });
        moves_.erase(std::unique(moves_.begin(), moves_.end(),
                                 [](const RawMove& a, const RawMove& b) {
                                     return a.source == b.source && a.cost == b.cost && a.branches == b.branches;
                                 }),
                     moves_.end());

        std::map<CostVector, std::int32_t> cost_ids;
        std::map<Rational, std::int32_t> prob_ids;
        m.state_move_begin_.assign(num_states_ + 1, 0);
        for (const auto& mv : moves_) m.state_move_begin_[mv.source + 1]++;
        for (std::int32_t s = 0; s < num_states_; ++s) m.state_move_begin_[s + 1] += m.state_move_begin_[s];

        m.move_branch_begin_.push_back(0);
        for (const auto& mv : moves_) {
            m.move_source_.push_back(mv.source);
            auto [cit, cnew] = cost_ids.emplace(mv.cost, static_cast<std::int32_t>(m.cost_table_.size()));
            if (cnew) m.cost_table_.push_back(mv.cost);
            m.move_cost_.push_back(cit->second);
            for (const auto& [t, p] : mv.branches) {
                auto [pit, pnew] = prob_ids.emplace(p, static_cast<std::int32_t>(m.prob_table_.size()));
                if (pnew) {
                    m.prob_table_.push_back(p);
                    m.prob_double_table_.push_back(to_double(p));
                }
                m.branch_target_.push_back(t);
                m.branch_prob_.push_back(pit->second);
            }
            m.move_branch_begin_.push_back(static_cast<std::int32_t>(m.branch_target_.size()));
        }
        return m;
    }

private:
    struct RawMove {
        std::int32_t source;
        CostVector cost;
        std::vector<std::pair<std::int32_t, Rational>> branches;
    };

    std::int32_t num_states_ = 0;
    std::vector<std::int32_t> initial_;
    std::vector<RawMove> moves_;
};

inline std::vector<std::int32_t> terminal_states(const ExplicitMdp& m) {
    std::vector<std::int32_t> out;
    for (std::int32_t s = 0; s < m.num_states(); ++s)
        if (m.is_terminal(s)) out.push_back(s);
    return out;
}

/// One resolved step of a path: the move's cost, the probability of the
/// chosen branch, and the successor state.
struct PathStep {
    CostVector cost;
    Rational prob;
    std::int32_t state;
};

struct Path {
    std::int32_t start = 0;
    std::vector<PathStep> steps;
};

/// Pr(pi): product of the step probabilities; 1 for the empty path.
inline Rational path_prob(const Path& p) {
    Rational r = 1;
    for (const auto& step : p.steps) r *= step.prob;
    return r;
}

/// cost(pi) for one cost type: sum over steps; 0 for the empty path.
inline std::uint64_t path_cost(const Path& p, std::string_view cost_type) {
    std::uint64_t c = 0;
    for (const auto& step : p.steps) c += step.cost.get(cost_type);
    return c;
}

/// True when every step corresponds to a move of `m` taken with the
/// positive probability the move assigns to the step's successor.
inline bool is_valid_path(const ExplicitMdp& m, const Path& p) {
    if (p.start < 0 || p.start >= m.num_states()) return false;
    std::int32_t cur = p.start;
    for (const auto& step : p.steps) {
        bool matched = false;
        for (std::int32_t mv = m.move_begin(cur); mv < m.move_end(cur) && !matched; ++mv) {
            if (!(m.move_cost(mv) == step.cost)) continue;
            if (m.move_prob_to(mv, step.state) == step.prob && step.prob > 0) matched = true;
        }
        if (!matched) return false;
        cur = step.state;
    }
    return true;
}

/// Deterministic line-oriented text form: header lines with the state
/// count and initial states, then one sorted move per line.
inline void write_flat(std::ostream& os, const ExplicitMdp& m) {
    os << "states " << m.num_states() << "\n";
    os << "initial";
    for (std::int32_t s : m.initial_states()) os << " " << s;
    os << "\n";
    for (std::int32_t mv = 0; mv < m.num_moves(); ++mv) {
        os << "move " << m.move_source(mv) << " " << m.move_cost(mv).to_string();
        for (std::int32_t b = m.branch_begin(mv); b < m.branch_end(mv); ++b)
            os << " " << rational_to_string(m.branch_prob(b)) << " " << m.branch_target(b);
        os << "\n";
    }
}

inline std::string to_flat_string(const ExplicitMdp& m) {
    std::ostringstream os;
    write_flat(os, m);
    return os.str();
}

inline ExplicitMdp read_flat(std::istream& is) {
    MdpBuilder builder;
    std::string line;
    int lineno = 0;
    bool have_states = false;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string word;
        ls >> word;
        if (word == "states") {
            std::int32_t n;
            if (!(ls >> n)) throw ParseError("flat: bad state count", lineno, 1);
            builder.ensure_states(n);
            have_states = true;
        } else if (word == "initial") {
            std::int32_t s;
            while (ls >> s) builder.mark_initial(s);
        } else if (word == "move") {
            std::int32_t src;
            std::string cost_text;
            if (!(ls >> src >> cost_text)) throw ParseError("flat: bad move line", lineno, 1);
            CostVector cost;
            if (cost_text != "-") {
                std::istringstream cs(cost_text);
                std::string item;
                while (std::getline(cs, item, ',')) {
                    auto colon = item.find(':');
                    if (colon == std::string::npos) throw ParseError("flat: bad cost entry", lineno, 1);
                    cost.add(item.substr(0, colon), std::stoull(item.substr(colon + 1)));
                }
            }
            std::vector<std::pair<std::int32_t, Rational>> branches;
            std::string prob_text;
            std::int32_t target;
            while (ls >> prob_text >> target) branches.emplace_back(target, parse_rational(prob_text));
            if (branches.empty()) throw ParseError("flat: move without branches", lineno, 1);
            builder.add_move(src, std::move(cost), std::move(branches));
        } else {
            throw ParseError("flat: unknown directive '" + word + "'", lineno, 1);
        }
    }
    if (!have_states) throw ParseError("flat: missing states header");
    return builder.finalize();
}

/// GraphViz rendering; moves appear as small intermediate nodes carrying
/// the cost, branches as probability-labeled edges.
inline void write_dot(std::ostream& os, const ExplicitMdp& m,
                      const std::function<std::string(std::int32_t)>& state_label = {}) {
    os << "digraph mdp {\n  rankdir=LR;\n  node [shape=ellipse];\n";
    for (std::int32_t s = 0; s < m.num_states(); ++s) {
        std::string label = state_label ? state_label(s) : ("s" + std::to_string(s));
        bool initial = std::binary_search(m.initial_states().begin(), m.initial_states().end(), s);
        os << "  s" << s << " [label=\"" << label << "\"" << (initial ? ", penwidth=2" : "") << "];\n";
    }
    for (std::int32_t mv = 0; mv < m.num_moves(); ++mv) {
        os << "  m" << mv << " [shape=point, label=\"\"];\n";
        os << "  s" << m.move_source(mv) << " -> m" << mv << " [label=\"" << m.move_cost(mv).to_string()
           << "\", arrowhead=none];\n";
        for (std::int32_t b = m.branch_begin(mv); b < m.branch_end(mv); ++b)
            os << "  m" << mv << " -> s" << m.branch_target(b) << " [label=\""
               << rational_to_string(m.branch_prob(b)) << "\"];\n";
    }
    os << "}\n";
}

} // namespace featcheck
