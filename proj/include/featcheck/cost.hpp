#pragma once

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace featcheck {

/// Map from cost-type name to a natural number. Zero entries are dropped,
/// so a missing type is identically a zero cost and equality is canonical.
class CostVector {
public:
    using Entry = std::pair<std::string, std::uint64_t>;

    CostVector() = default;
    CostVector(std::initializer_list<Entry> entries) {
        for (const auto& e : entries) add(e.first, e.second);
    }

    void add(std::string_view type, std::uint64_t amount) {
        if (amount == 0) return;
        auto it = find(type);
        if (it != entries_.end() && it->first == type)
            it->second += amount;
        else
            entries_.insert(it, Entry(std::string(type), amount));
    }

    std::uint64_t get(std::string_view type) const {
        auto it = find(type);
        if (it != entries_.end() && it->first == type) return it->second;
        return 0;
    }

    bool zero() const { return entries_.empty(); }
    const std::vector<Entry>& entries() const { return entries_; }

    CostVector operator+(const CostVector& o) const {
        CostVector sum = *this;
        for (const auto& [type, amount] : o.entries_) sum.add(type, amount);
        return sum;
    }

    friend bool operator==(const CostVector& a, const CostVector& b) { return a.entries_ == b.entries_; }
    friend bool operator<(const CostVector& a, const CostVector& b) { return a.entries_ < b.entries_; }

    /// "energy:3,money:2"; "-" when all types are zero.
    std::string to_string() const {
        if (entries_.empty()) return "-";
        std::string s;
        for (const auto& [type, amount] : entries_) {
            if (!s.empty()) s += ",";
            s += type + ":" + std::to_string(amount);
        }
        return s;
    }

private:
    std::vector<Entry>::iterator find(std::string_view type) {
        return std::lower_bound(entries_.begin(), entries_.end(), type,
                                [](const Entry& e, std::string_view k) { return e.first < k; });
    }
    std::vector<Entry>::const_iterator find(std::string_view type) const {
        return std::lower_bound(entries_.begin(), entries_.end(), type,
                                [](const Entry& e, std::string_view k) { return e.first < k; });
    }

    std::vector<Entry> entries_;
};

} // namespace featcheck
