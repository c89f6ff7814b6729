#pragma once

#include <algorithm>
#include <utility>
#include <vector>

#include "featcheck/errors.hpp"
#include "featcheck/rational.hpp"

namespace featcheck {

/// Finite-support probability distribution with exact rational weights.
/// Entries are kept sorted by outcome; duplicate outcomes are merged at
/// construction; the weights must be positive and sum to exactly 1.
template <typename T>
class Distribution {
public:
    using Entry = std::pair<T, Rational>;

    Distribution() = default;

    explicit Distribution(std::vector<Entry> entries) : entries_(normalize(std::move(entries))) {
        Rational sum = 0;
        for (const auto& [outcome, p] : entries_) {
            if (p <= 0) throw ModelError("distribution entry with nonpositive probability");
            sum += p;
        }
        if (entries_.empty()) throw ModelError("distribution with empty support");
        if (sum != 1) throw ModelError("distribution not normalized: sums to " + rational_to_string(sum));
    }

    /// Escape hatch for diagnostics and validators that must be able to
    /// inspect ill-formed data. Skips the normalization check.
    static Distribution unchecked(std::vector<Entry> entries) {
        Distribution d;
        d.entries_ = normalize(std::move(entries));
        return d;
    }

    static Distribution dirac(T outcome) {
        Distribution d;
        d.entries_.emplace_back(std::move(outcome), Rational(1));
        return d;
    }

    const std::vector<Entry>& support() const { return entries_; }
    std::size_t size() const { return entries_.size(); }

    Rational prob(const T& outcome) const {
        auto it = std::lower_bound(entries_.begin(), entries_.end(), outcome,
                                   [](const Entry& e, const T& k) { return e.first < k; });
        if (it != entries_.end() && it->first == outcome) return it->second;
        return Rational(0);
    }

    Rational total_mass() const {
        Rational sum = 0;
        for (const auto& e : entries_) sum += e.second;
        return sum;
    }

    /// Image distribution under `fn`; outcomes that collide are merged.
    template <typename F>
    auto map(F&& fn) const {
        using U = std::decay_t<decltype(fn(std::declval<const T&>()))>;
        std::vector<typename Distribution<U>::Entry> out;
        out.reserve(entries_.size());
        for (const auto& [outcome, p] : entries_) out.emplace_back(fn(outcome), p);
        return Distribution<U>(std::move(out));
    }

    friend bool operator==(const Distribution& a, const Distribution& b) { return a.entries_ == b.entries_; }
    friend bool operator<(const Distribution& a, const Distribution& b) { return a.entries_ < b.entries_; }

private:
    static std::vector<Entry> normalize(std::vector<Entry> entries) {
        std::sort(entries.begin(), entries.end(),
                  [](const Entry& a, const Entry& b) { return a.first < b.first; });
        std::vector<Entry> merged;
        for (auto& e : entries) {
            if (!merged.empty() && merged.back().first == e.first)
                merged.back().second += e.second;
            else
                merged.push_back(std::move(e));
        }
        return merged;
    }

    std::vector<Entry> entries_;
};

template <typename T>
Distribution<T> dirac(T outcome) {
    return Distribution<T>::dirac(std::move(outcome));
}

/// Product distribution over pairs: (d1 * d2)(a, b) = d1(a) * d2(b).
template <typename A, typename B>
Distribution<std::pair<A, B>> product(const Distribution<A>& d1, const Distribution<B>& d2) {
    std::vector<typename Distribution<std::pair<A, B>>::Entry> out;
    out.reserve(d1.size() * d2.size());
    for (const auto& [a, p] : d1.support())
        for (const auto& [b, q] : d2.support()) out.emplace_back(std::make_pair(a, b), p * q);
    return Distribution<std::pair<A, B>>(std::move(out));
}

} // namespace featcheck
