#pragma once

#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "featcheck/rational.hpp"
#include "featcheck/vardsl/vardsl.hpp"

namespace featcheck::ebond {

struct NicPower {
    std::uint32_t idle_mw = 0;
    std::uint32_t load_mw = 0;
};

/// Parameters of the eBond+ dynamic SPL generator. Power figures for the
/// fast card and all purchase prices are configuration inputs, not
/// normative values; the slow-card bounds are the published 1.78 W idle
/// and 1.92 W full-load figures.
struct EbondParams {
    std::int64_t max_bandwidth_mbit = 2400;   // the sweep variable b
    std::int64_t horizon_minutes = 720;
    std::int64_t reconfig_delay_min = 20;
    std::int64_t operating_phase_min = 5;
    std::int64_t cooldown_min = 30;
    std::int64_t hysteresis_pct = 10;
    Rational nic_fail_prob = Rational(1, 1000);
    std::int64_t bandwidth_step_mbit = 100;
    std::uint64_t sla_cost_money = 200;
    NicPower fast_power{8500, 13400};   // X520-class card, non-normative
    NicPower slow_power{1780, 1920};
    std::uint64_t price_fast = 500;
    std::uint64_t price_slow = 30;
    std::uint64_t price_bundle_std = 100;
    std::uint64_t price_bundle_pro = 200;
    std::int64_t env_prob_floor_pct = 5;  // clamp floor of the demand walk

    static constexpr std::int64_t fast_capacity_mbit = 10000;
    static constexpr std::int64_t slow_capacity_mbit = 1000;

    std::vector<std::string> validate() const {
        std::vector<std::string> out;
        if (bandwidth_step_mbit <= 0) out.push_back("bandwidth step must be positive");
        if (max_bandwidth_mbit <= 0) out.push_back("maximal bandwidth must be positive");
        if (bandwidth_step_mbit > 0 && max_bandwidth_mbit > 0) {
            if (max_bandwidth_mbit % bandwidth_step_mbit != 0)
                out.push_back("bandwidth step must divide the maximal bandwidth");
            if (fast_capacity_mbit % bandwidth_step_mbit != 0 ||
                slow_capacity_mbit % bandwidth_step_mbit != 0)
                out.push_back("bandwidth step must divide the NIC capacities");
        }
        if (operating_phase_min <= 0) {
            out.push_back("operating phase must be positive");
        } else {
            if (horizon_minutes <= 0 || horizon_minutes % operating_phase_min != 0)
                out.push_back("horizon must be a positive multiple of the operating phase");
            if (reconfig_delay_min % operating_phase_min != 0)
                out.push_back("reconfiguration delay must be a multiple of the operating phase");
            if (cooldown_min % operating_phase_min != 0)
                out.push_back("cooldown must be a multiple of the operating phase");
        }
        if (nic_fail_prob < 0 || nic_fail_prob >= 1)
            out.push_back("NIC failure probability must lie in [0, 1)");
        if (env_prob_floor_pct < 0 || 2 * env_prob_floor_pct >= 100)
            out.push_back("environment probability floor must lie in [0, 50) percent");
        if (hysteresis_pct < 0) out.push_back("hysteresis must be nonnegative");
        return out;
    }

    std::int64_t bandwidth_units() const { return max_bandwidth_mbit / bandwidth_step_mbit; }
    std::int64_t fast_capacity_units() const { return fast_capacity_mbit / bandwidth_step_mbit; }
    std::int64_t slow_capacity_units() const { return slow_capacity_mbit / bandwidth_step_mbit; }
    std::int64_t cycles() const { return horizon_minutes / operating_phase_min; }

    std::uint64_t energy_idle_fast() const { return std::uint64_t(fast_power.idle_mw) * operating_phase_min; }
    std::uint64_t energy_load_fast() const { return std::uint64_t(fast_power.load_mw) * operating_phase_min; }
    std::uint64_t energy_idle_slow() const { return std::uint64_t(slow_power.idle_mw) * operating_phase_min; }
    std::uint64_t energy_load_slow() const { return std::uint64_t(slow_power.load_mw) * operating_phase_min; }
};

/// One initial configuration "XY_B_A": X fast NICs, Y slow NICs, bundle
/// S or P, coordination algorithm A, H or B.
struct EbondConfig {
    int fast = 1;
    int slow = 0;
    char bundle = 'S';
    char alg = 'A';

    static EbondConfig parse(std::string_view text) {
        if (text.size() != 6 || text[2] != '_' || text[4] != '_')
            throw ModelError("bad configuration '" + std::string(text) + "', expected XY_B_A");
        EbondConfig c;
        c.fast = text[0] - '0';
        c.slow = text[1] - '0';
        c.bundle = text[3];
        c.alg = text[5];
        if (c.fast < 0 || c.fast > 1 || c.slow < 0 || c.slow > 2 ||
            (c.bundle != 'S' && c.bundle != 'P') ||
            (c.alg != 'A' && c.alg != 'H' && c.alg != 'B') || !c.valid())
            throw ModelError("invalid configuration '" + std::string(text) + "'");
        return c;
    }

    bool valid() const {
        if (fast < 0 || fast > 1 || slow < 0 || slow > 2) return false;
        if (fast + slow < 1) return false;
        if (bundle == 'S' && fast + slow > 2) return false;  // standard bundle: two slots
        return true;
    }

    std::string to_string() const {
        std::string s;
        s += char('0' + fast);
        s += char('0' + slow);
        s += '_';
        s += bundle;
        s += '_';
        s += alg;
        return s;
    }

    friend bool operator<(const EbondConfig& a, const EbondConfig& b) {
        return a.to_string() < b.to_string();
    }
    friend bool operator==(const EbondConfig& a, const EbondConfig& b) {
        return a.fast == b.fast && a.slow == b.slow && a.bundle == b.bundle && a.alg == b.alg;
    }
};

/// All 27 sellable configurations.
inline std::vector<EbondConfig> all_valid_configs() {
    std::vector<EbondConfig> out;
    for (char bundle : {'S', 'P'})
        for (char alg : {'A', 'H', 'B'})
            for (int fast = 0; fast <= 1; ++fast)
                for (int slow = 0; slow <= 2; ++slow) {
                    EbondConfig c{fast, slow, bundle, alg};
                    if (c.valid()) out.push_back(c);
                }
    std::sort(out.begin(), out.end());
    return out;
}

/// The four strategy synthesis queries of the case study.
struct EbondQuery {
    std::string name;
    QueryKind kind;
    std::string cost_type;
};

inline std::vector<EbondQuery> ebond_queries() {
    return {
        {"phi_p", QueryKind::PmaxUntil, ""},
        {"phi_e", QueryKind::EminReach, "energy"},
        {"phi_m", QueryKind::EminReach, "money"},
        {"phi_s", QueryKind::EminReach, "slavio"},
    };
}

namespace detail {

inline std::string config_combination_text(const EbondConfig& c) {
    std::string s = "{";
    bool first = true;
    auto add = [&](const char* f) {
        if (!first) s += ", ";
        s += f;
        first = false;
    };
    if (c.fast >= 1) add("fast");
    if (c.slow >= 1) add("slow1");
    if (c.slow >= 2) add("slow2");
    add(c.bundle == 'S' ? "std" : "pro");
    add(c.alg == 'A' ? "alg_a" : (c.alg == 'H' ? "alg_h" : "alg_b"));
    s += "}";
    return s;
}

/// Feature-expression literal pinning every feature of the signature.
inline std::string exact_pattern(const EbondConfig& c) {
    auto lit = [](const char* name, bool on) { return std::string(on ? "" : "!") + name; };
    std::ostringstream os;
    os << lit("fast", c.fast >= 1) << " & " << lit("slow1", c.slow >= 1) << " & "
       << lit("slow2", c.slow >= 2) << " & " << lit("std", c.bundle == 'S') << " & "
       << lit("pro", c.bundle == 'P') << " & " << lit("alg_a", c.alg == 'A') << " & "
       << lit("alg_h", c.alg == 'H') << " & " << lit("alg_b", c.alg == 'B');
    return os.str();
}

/// "clock = 20 | clock = 40 | ..." for the instants on the given grid, or
/// "false" when the horizon never reaches it.
inline std::string clock_grid(std::int64_t grid_min, std::int64_t horizon, std::int64_t phase) {
    if (grid_min <= 0) return "true";
    std::ostringstream os;
    bool first = true;
    for (std::int64_t c = phase; c <= horizon; c += phase) {
        if (c % grid_min != 0) continue;
        os << (first ? "" : " | ") << "clock = " << c;
        first = false;
    }
    return first ? std::string("false") : os.str();
}

/// Least demand (in units) whose predicted requirement exceeds the given
/// capacity; the high-saving and balanced predictors assume hysteresis_pct
/// more than the last observed bandwidth.
inline std::int64_t wake_threshold(std::int64_t capacity_units, bool hysteresis, std::int64_t hyst_pct) {
    if (!hysteresis) return capacity_units + 1;
    return (100 * capacity_units) / (100 + hyst_pct) + 1;
}

/// Per-NIC activity condition over plugged cards: a plugged card delivers
/// its capacity iff it is awake and has not failed this phase.
struct ActivityCase {
    std::string plugged;    // feature pattern over fast/slow1/slow2
    std::string condition;  // variable condition over awake/fail flags
    std::int64_t delivered; // in bandwidth units
};

inline std::vector<ActivityCase> activity_cases(std::int64_t capf, std::int64_t caps) {
    struct Card {
        const char* feature;
        const char* awake;
        const char* fail;
        std::int64_t cap;
    };
    const Card cards[3] = {{"fast", "fawake", "ffail", capf},
                           {"slow1", "s1awake", "s1fail", caps},
                           {"slow2", "s2awake", "s2fail", caps}};
    std::vector<ActivityCase> out;
    for (int plug = 0; plug < 8; ++plug) {
        std::string pattern;
        std::vector<int> plugged_cards;
        for (int i = 0; i < 3; ++i) {
            if (!pattern.empty()) pattern += " & ";
            pattern += (plug >> i) & 1 ? cards[i].feature : std::string("!") + cards[i].feature;
            if ((plug >> i) & 1) plugged_cards.push_back(i);
        }
        for (int act = 0; act < (1 << plugged_cards.size()); ++act) {
            std::string cond;
            std::int64_t delivered = 0;
            for (std::size_t k = 0; k < plugged_cards.size(); ++k) {
                const Card& card = cards[plugged_cards[k]];
                if (!cond.empty()) cond += " & ";
                if ((act >> k) & 1) {
                    cond += std::string(card.awake) + " & !" + card.fail;
                    delivered += card.cap;
                } else {
                    cond += std::string("(!") + card.awake + " | " + card.fail + ")";
                }
            }
            out.push_back({pattern, cond, delivered});
        }
    }
    return out;
}

} // namespace detail

/// Emits the parameterized eBond+ model as DSL text: NIC feature modules
/// Fast/Slow1/Slow2 with plug and unplug switch transitions, coordination
/// modules AlgA/AlgH/AlgB computing the wake target deterministically,
/// environment module Env driving the probabilistic bandwidth walk and the
/// buy/operate/account/policy/reconfigure/switch phase cycle, and the
/// feature controller with need-gated single-NIC change events carrying
/// purchase prices.
inline std::string ebond_model_text(const EbondParams& p, const std::vector<EbondConfig>& initial) {
    {
        auto problems = p.validate();
        if (!problems.empty()) throw ModelError("ebond parameters: " + problems[0]);
        if (initial.empty()) throw ModelError("ebond: no initial configuration selected");
        for (const auto& c : initial)
            if (!c.valid()) throw ModelError("ebond: invalid initial configuration " + c.to_string());
    }
    const std::int64_t bu = p.bandwidth_units();
    const std::int64_t capf = p.fast_capacity_units();
    const std::int64_t caps = p.slow_capacity_units();
    const std::string delay_grid =
        detail::clock_grid(p.reconfig_delay_min, p.horizon_minutes, p.operating_phase_min);
    const std::string cool_grid =
        detail::clock_grid(p.cooldown_min, p.horizon_minutes, p.operating_phase_min);
    const std::string pfail = rational_to_string(p.nic_fail_prob);
    const std::string pok = rational_to_string(Rational(1) - p.nic_fail_prob);
    const bool can_fail = p.nic_fail_prob > 0;

    std::ostringstream os;
    os << "// eBond+ dynamic product line, generated model\n";
    os << "// bandwidth bound " << p.max_bandwidth_mbit << " MBit/s, horizon " << p.horizon_minutes
       << " min, " << p.operating_phase_min << " min operating phases\n\n";
    os << "const b = " << p.max_bandwidth_mbit << ";\n";
    os << "const step = " << p.bandwidth_step_mbit << ";\n";
    os << "const bu = b / step;\n";
    os << "const horizon = " << p.horizon_minutes << ";\n";
    os << "const phase = " << p.operating_phase_min << ";\n";
    os << "const sla_money = " << p.sla_cost_money << ";\n\n";

    os << "signature {\n  features fast, slow1, slow2, std, pro, alg_a, alg_h, alg_b;\n  valid\n";
    auto all = all_valid_configs();
    for (std::size_t i = 0; i < all.size(); ++i)
        os << "    " << detail::config_combination_text(all[i]) << (i + 1 < all.size() ? "," : ";")
           << "\n";
    os << "}\n\n";

    // ---- NIC modules ----------------------------------------------------
    struct Nic {
        const char* name;
        const char* feature;
        const char* reconf;
        const char* awake;
        const char* fail;
        const char* done;
        bool is_fast;
        std::uint64_t idle_e, load_e;
    };
    const Nic nics[3] = {
        {"Fast", "fast", "rcf", "fawake", "ffail", "fdone", true, p.energy_idle_fast(),
         p.energy_load_fast()},
        {"Slow1", "slow1", "rc1", "s1awake", "s1fail", "s1done", false, p.energy_idle_slow(),
         p.energy_load_slow()},
        {"Slow2", "slow2", "rc2", "s2awake", "s2fail", "s2done", false, p.energy_idle_slow(),
         p.energy_load_slow()},
    };
    // One NIC change per controller step: a change latches the module's
    // done flag, which blocks every further change until the next
    // reconfiguration clears it. Together with the delay grid this keeps
    // consecutive changes at least the reconfiguration delay apart.
    const std::string no_pending_change = "!fdone & !s1done & !s2done";
    struct Alg {
        const char* module;
        const char* feature;
        const char* tau;
        bool hysteresis;
        bool cooldown;
    };
    const Alg algs[3] = {
        {"AlgA", "alg_a", "tau_a", false, false},
        {"AlgH", "alg_h", "tau_h", true, false},
        {"AlgB", "alg_b", "tau_b", true, true},
    };

    for (const Nic& nic : nics) {
        os << "module " << nic.name << " owns(" << nic.feature << ") uses(";
        bool first = true;
        for (const Nic& other : nics)
            if (other.feature != nic.feature) {
                os << (first ? "" : ", ") << other.feature;
                first = false;
            }
        os << ", alg_a, alg_h, alg_b) {\n";
        os << "  var " << nic.awake << " : bool init true;\n";
        os << "  var " << nic.fail << " : bool init false;\n";
        os << "  var " << nic.done << " : bool init false;\n";

        // The reconfigure step charges the ending phase's energy from the
        // pre-state flags and demand, then applies the active algorithm's
        // wake target and samples the next phase's failure branch.
        struct EnergyCase {
            std::string cond;
            std::uint64_t cost;
        };
        const EnergyCase energy_cases[3] = {
            {std::string("!") + nic.awake, nic.idle_e},
            {std::string(nic.awake) + " & (" + nic.fail + " | demand = 0)", nic.idle_e},
            {std::string(nic.awake) + " & !" + nic.fail + " & demand > 0", nic.load_e},
        };
        auto wake_update = [&]() {
            std::ostringstream u;
            if (can_fail)
                u << pok << ": (" << nic.awake << "' = true, " << nic.fail << "' = false, " << nic.done
                  << "' = false) + " << pfail << ": (" << nic.awake << "' = true, " << nic.fail
                  << "' = true, " << nic.done << "' = false)";
            else
                u << "(" << nic.awake << "' = true, " << nic.fail << "' = false, " << nic.done
                  << "' = false)";
            return u.str();
        };
        auto sleep_update = [&]() {
            return std::string("(") + nic.awake + "' = false, " + nic.fail + "' = false, " + nic.done +
                   "' = false)";
        };
        auto emit_reconf = [&](const std::string& feats, const std::string& vguard, bool wake,
                               std::uint64_t energy) {
            os << "  [" << nic.reconf << "] feat(" << feats << ")";
            if (!vguard.empty()) os << " & " << vguard;
            os << " -> " << (wake ? wake_update() : sleep_update());
            if (energy > 0) os << " cost energy " << energy;
            os << ";\n";
        };

        emit_reconf(std::string("!") + nic.feature, "", false, 0);
        for (const Alg& alg : algs) {
            const std::string base = std::string(nic.feature) + " & " + alg.feature;
            for (const EnergyCase& en : energy_cases) {
                if (nic.is_fast) {
                    emit_reconf(base, std::string(alg.tau) + " = 2 & " + en.cond, true, en.cost);
                    emit_reconf(base, std::string(alg.tau) + " <= 1 & " + en.cond, false, en.cost);
                } else if (std::string(nic.feature) == "slow1") {
                    emit_reconf(base, std::string(alg.tau) + " <= 1 & " + en.cond, true, en.cost);
                    emit_reconf(base + " & fast", std::string(alg.tau) + " = 2 & " + en.cond, false,
                                en.cost);
                    emit_reconf(base + " & !fast", std::string(alg.tau) + " = 2 & " + en.cond, true,
                                en.cost);
                } else {
                    emit_reconf(base, std::string(alg.tau) + " = 1 & " + en.cond, true, en.cost);
                    emit_reconf(base, std::string(alg.tau) + " = 0 & " + en.cond, false, en.cost);
                    emit_reconf(base + " & fast", std::string(alg.tau) + " = 2 & " + en.cond, false,
                                en.cost);
                    emit_reconf(base + " & !fast", std::string(alg.tau) + " = 2 & " + en.cond, true,
                                en.cost);
                }
            }
        }

        // Plug and unplug reactions: only when there is a need (observed
        // bandwidth against plugged capacity), only during the controller
        // phase, and only on the reconfiguration-delay grid.
        auto emit_switch = [&](bool plug, const std::string& feats, const std::string& need) {
            os << "  [switch " << (plug ? std::string("!") + nic.feature + " & " + nic.feature + "'"
                                        : std::string(nic.feature) + " & !" + nic.feature + "'")
               << "] feat(" << feats << ") & ph = p_con & (" << delay_grid << ") & "
               << no_pending_change;
            if (!need.empty()) os << " & " << need;
            os << " -> (" << nic.awake << "' = " << (plug ? "true" : "false") << ", " << nic.fail
               << "' = false, " << nic.done << "' = true);\n";
        };
        if (nic.is_fast) {
            emit_switch(true, "!fast & slow1 & !slow2", "demand > " + std::to_string(caps));
            emit_switch(true, "!fast & slow1 & slow2", "demand > " + std::to_string(2 * caps));
            emit_switch(false, "fast & slow1 & !slow2", "demand <= " + std::to_string(caps));
            emit_switch(false, "fast & slow1 & slow2", "demand <= " + std::to_string(2 * caps));
        } else if (std::string(nic.feature) == "slow1") {
            emit_switch(true, "!slow1 & fast", "demand <= " + std::to_string(caps));
            emit_switch(false, "slow1 & fast & !slow2", "");
        } else {
            emit_switch(true, "!slow2 & slow1 & !fast", "demand > " + std::to_string(caps));
            emit_switch(true, "!slow2 & slow1 & fast", "demand <= " + std::to_string(2 * caps));
            emit_switch(false, "slow2 & fast", "");
            emit_switch(false, "slow2 & !fast & slow1", "demand <= " + std::to_string(caps));
        }
        os << "}\n\n";
    }

    // ---- coordination modules -------------------------------------------
    for (const Alg& alg : algs) {
        const std::int64_t t1 = detail::wake_threshold(caps, alg.hysteresis, p.hysteresis_pct);
        const std::int64_t t2 = detail::wake_threshold(2 * caps, alg.hysteresis, p.hysteresis_pct);
        os << "module " << alg.module << " owns(" << alg.feature << ") uses(fast, slow1, slow2) {\n";
        os << "  var " << alg.tau << " : [0..2] init 2;\n";
        os << "  [policy] feat(!" << alg.feature << ") -> (" << alg.tau << "' = " << alg.tau << ");\n";
        std::string gate;
        if (alg.cooldown) {
            // The balanced predictor retargets only every cooldown period.
            os << "  [policy] feat(" << alg.feature << ") & !(" << cool_grid << ") -> (" << alg.tau
               << "' = " << alg.tau << ");\n";
            gate = " & (" + cool_grid + ")";
        }
        const std::string active(alg.feature);
        os << "  [policy] feat(" << active << " & !slow1)" << gate << " -> (" << alg.tau << "' = 2);\n";
        os << "  [policy] feat(" << active << " & slow1 & !slow2)" << gate << " & demand < " << t1
           << " -> (" << alg.tau << "' = 0);\n";
        os << "  [policy] feat(" << active << " & slow1 & !slow2)" << gate << " & demand >= " << t1
           << " -> (" << alg.tau << "' = 2);\n";
        os << "  [policy] feat(" << active << " & slow1 & slow2)" << gate << " & demand < " << t1
           << " -> (" << alg.tau << "' = 0);\n";
        os << "  [policy] feat(" << active << " & slow1 & slow2)" << gate << " & demand >= " << t1
           << " & demand < " << t2 << " -> (" << alg.tau << "' = 1);\n";
        os << "  [policy] feat(" << active << " & slow1 & slow2)" << gate << " & demand >= " << t2
           << " -> (" << alg.tau << "' = 2);\n";
        os << "}\n\n";
    }

    // ---- environment ------------------------------------------------------
    os << "module Env uses(fast, slow1, slow2, std, pro, alg_a, alg_h, alg_b) {\n";
    os << "  var demand : [0..bu] init 0;\n";
    os << "  var clock : [0..horizon] init 0;\n";
    os << "  var ph : {p_init, p_op, p_acc, p_pol, p_rcf, p_rc1, p_rc2, p_con} init p_init;\n";

    // Initial purchase: bundle plus the shipped NICs.
    for (const EbondConfig& c : all) {
        std::uint64_t price = (c.bundle == 'S' ? p.price_bundle_std : p.price_bundle_pro) +
                              std::uint64_t(c.fast) * p.price_fast + std::uint64_t(c.slow) * p.price_slow;
        os << "  [buy] feat(" << detail::exact_pattern(c) << ") & ph = p_init -> (ph' = p_op)"
           << " cost money " << price << ";\n";
    }

    // Demand walk: the farther below b/2 the current level, the likelier a
    // rise (and symmetrically); probabilities clamped away from 0 and 1.
    const Rational floor_prob(p.env_prob_floor_pct, 100);
    const Rational ceil_prob = Rational(1) - floor_prob;
    for (std::int64_t k = 0; k <= bu; ++k) {
        Rational up(bu - k, bu);
        if (up < floor_prob) up = floor_prob;
        if (up > ceil_prob) up = ceil_prob;
        Rational down = Rational(1) - up;
        std::int64_t knext = std::min(k + 1, bu);
        std::int64_t kprev = std::max(k - 1, std::int64_t{0});
        os << "  [tick] ph = p_op & clock < horizon & demand = " << k << " -> "
           << rational_to_string(up) << ": (demand' = " << knext
           << ", ph' = p_acc, clock' = clock + phase) + " << rational_to_string(down)
           << ": (demand' = " << kprev << ", ph' = p_acc, clock' = clock + phase);\n";
    }

    // Accounting: an SLA violation happens when the phase's demand exceeds
    // the delivered capacity of the awake, unfailed, plugged cards.
    auto cases = detail::activity_cases(capf, caps);
    for (const auto& ac : cases) {
        std::string guard = "ph = p_acc";
        if (!ac.condition.empty()) guard += " & " + ac.condition;
        os << "  [account] feat(" << ac.plugged << ") & " << guard << " & demand > " << ac.delivered
           << " -> (ph' = p_pol) cost slavio 1, money sla_money;\n";
        os << "  [account] feat(" << ac.plugged << ") & " << guard << " & demand <= " << ac.delivered
           << " -> (ph' = p_pol);\n";
    }

    os << "  [policy] ph = p_pol -> (ph' = p_rcf);\n";
    os << "  [rcf] ph = p_rcf -> (ph' = p_rc1);\n";
    os << "  [rc1] ph = p_rc1 -> (ph' = p_rc2);\n";
    os << "  [rc2] ph = p_rc2 -> (ph' = p_con);\n";
    os << "  [advance] ph = p_con -> (ph' = p_op);\n";
    os << "}\n\n";

    // ---- controller -------------------------------------------------------
    os << "controller {\n  init\n";
    std::vector<EbondConfig> sorted_initial = initial;
    std::sort(sorted_initial.begin(), sorted_initial.end());
    for (std::size_t i = 0; i < sorted_initial.size(); ++i)
        os << "    " << detail::config_combination_text(sorted_initial[i])
           << (i + 1 < sorted_initial.size() ? "," : ";") << "\n";
    for (const EbondConfig& c : all) {
        auto emit_event = [&](const EbondConfig& to, std::uint64_t price) {
            if (!to.valid()) return;
            os << "  event " << detail::config_combination_text(c) << " -> "
               << detail::config_combination_text(to);
            if (price > 0) os << " cost money " << price;
            os << ";\n";
        };
        EbondConfig plug_fast = c;
        plug_fast.fast = c.fast + 1;
        emit_event(plug_fast, p.price_fast);
        EbondConfig unplug_fast = c;
        unplug_fast.fast = c.fast - 1;
        emit_event(unplug_fast, 0);
        EbondConfig plug_slow = c;
        plug_slow.slow = c.slow + 1;
        emit_event(plug_slow, p.price_slow);
        EbondConfig unplug_slow = c;
        unplug_slow.slow = c.slow - 1;
        emit_event(unplug_slow, 0);
    }
    os << "}\n\n";

    // ---- labels and queries -------------------------------------------------
    os << "label target = clock = horizon & ph = p_op;\n";
    os << "label sla = ph = p_acc & (";
    bool first = true;
    for (const auto& ac : cases) {
        os << (first ? "" : " | ") << "(feat(" << ac.plugged << ")";
        if (!ac.condition.empty()) os << " & " << ac.condition;
        os << " & demand > " << ac.delivered << ")";
        first = false;
    }
    os << ");\n\n";

    os << "query phi_p : Pmax [ !sla U target ];\n";
    os << "query phi_e : Emin(energy) [ F target ];\n";
    os << "query phi_m : Emin(money) [ F target ];\n";
    os << "query phi_s : Emin(slavio) [ F target ];\n";
    return os.str();
}

/// Generates and parses the model; parsing re-validates every invariant.
inline vardsl::ModelFile build_ebond(const EbondParams& p, const std::vector<EbondConfig>& initial) {
    return vardsl::parse_model(ebond_model_text(p, initial));
}

inline vardsl::ModelFile build_ebond_family(const EbondParams& p) {
    return build_ebond(p, all_valid_configs());
}

/// Encoding of a state's feature combination back to "XY_B_A".
inline std::string combination_config_text(Combination c, const FeatureSignature& sig) {
    EbondConfig cfg;
    cfg.fast = c.contains(sig.index_of("fast")) ? 1 : 0;
    cfg.slow = (c.contains(sig.index_of("slow1")) ? 1 : 0) + (c.contains(sig.index_of("slow2")) ? 1 : 0);
    cfg.bundle = c.contains(sig.index_of("std")) ? 'S' : 'P';
    cfg.alg = c.contains(sig.index_of("alg_a")) ? 'A' : (c.contains(sig.index_of("alg_h")) ? 'H' : 'B');
    return cfg.to_string();
}

} // namespace featcheck::ebond
