// Acceptance suite: one check per shipped criterion, one PASS/FAIL line
// each, nonzero exit when anything fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "featcheck/ebond_sweep.hpp"
#include "featcheck/oracle.hpp"
#include "featcheck/vardsl/vardsl.hpp"
#include "helpers.hpp"

using namespace featcheck;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int index, const std::string& name, bool pass, const std::string& detail = "") {
    std::printf("%s criterion %d: %s%s%s\n", pass ? "PASS" : "FAIL", index, name.c_str(),
                detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// --- criterion 1: oracle equivalence ---------------------------------------

void criterion_oracle_equivalence() {
    auto start = std::chrono::steady_clock::now();
    testgen::Rng rng(90210);
    EngineOptions engine;
    engine.epsilon = 1e-13;
    engine.cost_epsilon = 1e-12;
    engine.max_iterations = 10000000;

    const int runs = 1000;
    long checked = 0;
    std::string failure;
    for (int iter = 0; iter < runs && failure.empty(); ++iter) {
        std::vector<char> target, constraint;
        ExplicitMdp m = testgen::random_mdp(rng, 8, 3, &target, &constraint);
        OracleAllResult oracle;
        try {
            oracle = brute_force_oracle_all(m, "c", target, constraint);
        } catch (const OracleRefusal&) {
            --iter;  // resample within the oracle's bounds
            continue;
        }
        auto check_prob = [&](const OracleResult& o, const AnalysisResult& e, const char* kind) {
            for (std::int32_t s = 0; s < m.num_states() && failure.empty(); ++s) {
                ++checked;
                if (std::abs(e.values[s] - o.values[s].as_double()) > 1e-9)
                    failure = std::string(kind) + " mismatch at iteration " + std::to_string(iter);
            }
        };
        auto check_cost = [&](const OracleResult& o, const AnalysisResult& e, const char* kind) {
            for (std::int32_t s = 0; s < m.num_states() && failure.empty(); ++s) {
                ++checked;
                if (o.values[s].infinite != std::isinf(e.values[s])) {
                    failure = std::string(kind) + " infinity classification mismatch at iteration " +
                              std::to_string(iter);
                } else if (!o.values[s].infinite) {
                    double expect = o.values[s].as_double();
                    if (std::abs(e.values[s] - expect) > 1e-6 * std::max(1.0, std::abs(expect)))
                        failure = std::string(kind) + " mismatch at iteration " + std::to_string(iter);
                }
            }
        };
        check_prob(oracle.pmax_reach, reach_opt(m, target, Opt::Max, engine), "Pmax");
        check_prob(oracle.pmin_reach, reach_opt(m, target, Opt::Min, engine), "Pmin");
        check_prob(oracle.pmax_until, until_opt(m, constraint, target, Opt::Max, engine), "PmaxU");
        check_prob(oracle.pmin_until, until_opt(m, constraint, target, Opt::Min, engine), "PminU");
        check_cost(oracle.emin, expected_cost_opt(m, "c", target, Opt::Min, engine), "Emin");
        check_cost(oracle.emax, expected_cost_opt(m, "c", target, Opt::Max, engine), "Emax");
    }
    std::ostringstream detail;
    detail << runs << " MDPs, " << checked << " state values, " << std::fixed << std::setprecision(1)
           << seconds_since(start) << " s";
    if (!failure.empty()) detail << "; " << failure;
    report(1, "value iteration matches the exact scheduler-enumeration oracle", failure.empty(),
           detail.str());
}

// --- criterion 2: composition laws ------------------------------------------

void criterion_composition_laws() {
    auto start = std::chrono::steady_clock::now();
    testgen::Rng rng(777);
    auto key2 = [](const std::pair<int, int>& p) {
        return std::to_string(p.first) + "," + std::to_string(p.second);
    };
    auto key2swap = [](const std::pair<int, int>& p) {
        return std::to_string(p.second) + "," + std::to_string(p.first);
    };
    auto key3l = [](const std::pair<std::pair<int, int>, int>& p) {
        return std::to_string(p.first.first) + "," + std::to_string(p.first.second) + "," +
               std::to_string(p.second);
    };
    auto key3r = [](const std::pair<int, std::pair<int, int>>& p) {
        return std::to_string(p.first) + "," + std::to_string(p.second.first) + "," +
               std::to_string(p.second.second);
    };
    bool ok = true;
    const int runs = 500;
    for (int i = 0; i < runs && ok; ++i) {
        auto m1 = testgen::random_module(rng, Combination::of({0}), Combination::of({3}), {"a", "s"});
        auto m2 = testgen::random_module(rng, Combination::of({1}), Combination::of({0}), {"b", "s"});
        auto m3 = testgen::random_module(rng, Combination::of({2}), Combination::of({1}), {"c", "s"});
        ok = ok && testgen::modules_isomorphic(compose(m1, m2), compose(m2, m1), 4, key2, key2swap);
        ok = ok && testgen::modules_isomorphic(compose(compose(m1, m2), m3),
                                               compose(m1, compose(m2, m3)), 4, key3l, key3r);
    }
    std::ostringstream detail;
    detail << runs << " module pairs and triples, " << std::fixed << std::setprecision(1)
           << seconds_since(start) << " s";
    report(2, "parallel composition is commutative and associative", ok, detail.str());
}

// --- criterion 3: join-rule conformance --------------------------------------

void criterion_join_rules() {
    bool ok = true;
    std::string what;
    auto expect = [&](bool cond, const char* msg) {
        if (!cond && ok) {
            ok = false;
            what = msg;
        }
    };

    constexpr FeatureId f = 0, g = 1;
    FeatureSignature sig;
    sig.features = {"f", "g"};
    sig.valid = {Combination::of({}), Combination::of({f}), Combination::of({g}),
                 Combination::of({f, g})};

    // The paper's R_rho example: rho = (x1 | x3') & !x2.
    {
        BoolExpr rho = (BoolExpr::atom(0) || BoolExpr::primed_atom(2)) && !BoolExpr::atom(1);
        expect(switch_holds(rho, Combination::of({0}), Combination::of({})), "R_rho (Y={x1})");
        expect(!switch_holds(rho, Combination::of({1}), Combination::of({2})), "R_rho (Y={x2})");
        expect(switch_holds(rho, Combination::of({}), Combination::of({2})), "R_rho (Z={x3})");
        expect(!switch_holds(rho, Combination::of({}), Combination::of({})), "R_rho (empty)");
    }

    // R1: an enabled action transition freezes the combination.
    {
        FeatureModule<int> m;
        m.locations = {0, 1};
        m.initial = {0};
        m.interface = {Combination::of({f}), Combination()};
        m.actions = {"a"};
        m.tr_act.push_back({0, BoolExpr::atom(f), "a", CostVector{{"energy", 2}},
                            Distribution<int>({{0, Rational(1, 3)}, {1, Rational(2, 3)}})});
        Controller con = static_controller(sig);
        auto r = join(m, con, {.reachable_only = false});
        std::int32_t sat = r.index_of(0, Combination::of({f}));
        std::int32_t unsat = r.index_of(0, Combination::of({}));
        expect(r.mdp.moves_of(unsat) == 0, "R1 guard-false state has a move");
        expect(r.mdp.moves_of(sat) == 1, "R1 guard-true state lacks its move");
        std::int32_t mv = r.mdp.move_begin(sat);
        expect(r.mdp.move_cost(mv).get("energy") == 2, "R1 cost");
        expect(r.mdp.num_branches(mv) == 2, "R1 branching");
        for (std::int32_t b = r.mdp.branch_begin(mv); b < r.mdp.branch_end(mv); ++b)
            expect(r.states[r.mdp.branch_target(b)].second == Combination::of({f}),
                   "R1 changed the combination");
    }

    // R2: own-feature agreement on every target; the location freezes.
    {
        FeatureModule<int> m;
        m.locations = {0};
        m.initial = {0};
        m.interface = {Combination::of({f}), Combination::of({g})};
        Controller con = static_controller(sig);
        con.initial = {Combination::of({f})};
        con.events.push_back({Combination::of({f}), CostVector{{"money", 3}},
                              Distribution<Combination>({{Combination::of({f}), Rational(1, 2)},
                                                         {Combination::of({f, g}), Rational(1, 2)}})});
        auto r = join(m, con);
        std::int32_t s = r.index_of(0, Combination::of({f}));
        expect(r.mdp.moves_of(s) == 1, "R2 move missing");
        std::int32_t mv = r.mdp.move_begin(s);
        expect(r.mdp.move_cost(mv).get("money") == 3, "R2 cost");
        for (std::int32_t b = r.mdp.branch_begin(mv); b < r.mdp.branch_end(mv); ++b)
            expect(r.states[r.mdp.branch_target(b)].first == 0, "R2 moved the location");

        // Violated agreement: one target drops the own feature f, and the
        // module offers no switch transition, so no move arises at all.
        Controller con2 = static_controller(sig);
        con2.initial = {Combination::of({f})};
        con2.events.push_back({Combination::of({f}), CostVector{},
                               Distribution<Combination>({{Combination::of({f}), Rational(1, 2)},
                                                          {Combination::of({}), Rational(1, 2)}})});
        auto r2 = join(m, con2);
        expect(r2.mdp.moves_of(r2.index_of(0, Combination::of({f}))) == 0,
               "R2 fired despite an own-feature change");
    }

    // R3: existential own-change plus universal R_rho admission.
    {
        FeatureModule<int> m;
        m.locations = {0, 1};
        m.initial = {0};
        m.interface = {Combination::of({f}), Combination()};
        m.tr_sw.push_back({0, BoolExpr::tru(), !BoolExpr::atom(f) && BoolExpr::primed_atom(f),
                           CostVector{{"energy", 1}},
                           Distribution<int>({{0, Rational(1, 4)}, {1, Rational(3, 4)}})});
        Controller con = static_controller(sig);
        con.initial = {Combination::of({})};
        auto gamma = Distribution<Combination>({{Combination::of({f}), Rational(1, 2)},
                                                {Combination::of({f, g}), Rational(1, 2)}});
        con.events.push_back({Combination::of({}), CostVector{{"money", 10}}, gamma});
        auto r = join(m, con);
        std::int32_t s = r.index_of(0, Combination::of({}));
        expect(r.mdp.moves_of(s) == 1, "R3 move missing");
        std::int32_t mv = r.mdp.move_begin(s);
        expect(r.mdp.move_cost(mv).get("energy") == 1 && r.mdp.move_cost(mv).get("money") == 10,
               "R3 cost is not c+d");
        expect(r.mdp.num_branches(mv) == 4, "R3 distribution is not the product");
        for (std::int32_t b = r.mdp.branch_begin(mv); b < r.mdp.branch_end(mv); ++b)
            expect(r.mdp.branch_prob(b) == Rational(1, 8) || r.mdp.branch_prob(b) == Rational(3, 8),
                   "R3 product probabilities");

        // One target violating rho suppresses the move entirely.
        Controller con2 = static_controller(sig);
        con2.initial = {Combination::of({})};
        con2.events.push_back({Combination::of({}), CostVector{},
                               Distribution<Combination>({{Combination::of({f}), Rational(1, 2)},
                                                          {Combination::of({g}), Rational(1, 2)}})});
        auto r2 = join(m, con2);
        expect(r2.mdp.moves_of(r2.index_of(0, Combination::of({}))) == 0,
               "R3 fired despite a rho violation");

        // A false feature guard suppresses the move.
        FeatureModule<int> mg = m;
        mg.interface.ext = Combination::of({g});
        mg.tr_sw[0].guard = BoolExpr::atom(g);
        auto r3 = join(mg, con);
        expect(r3.mdp.moves_of(r3.index_of(0, Combination::of({}))) == 0,
               "R3 fired despite a false feature guard");
    }

    report(3, "join moves arise exactly from the three product rules", ok, what);
}

// --- criterion 4: erasure equivalence ---------------------------------------

void criterion_erasure_equivalence() {
    auto start = std::chrono::steady_clock::now();
    testgen::Rng rng(808808);
    bool ok = true;
    std::string what;
    const int runs = 200;
    for (int iter = 0; iter < runs && ok; ++iter) {
        Controller con = testgen::random_controller(rng, 3);
        Combination own = Combination::of({rng.range(0, 2)});
        Combination ext = con.signature.universe().minus(own);

        vardsl::VarFeatureModule vm;
        vm.name = "M";
        vm.own = own;
        vm.ext = ext;
        FeatureModule<int> fm;
        fm.locations = {0};
        fm.initial = {0};
        fm.interface = {own, ext};
        fm.actions = {"a", "b"};

        int ntrans = rng.range(0, 4);
        for (int i = 0; i < ntrans; ++i) {
            BoolExpr fguard = testgen::random_expr_over(rng, own | ext, 2, false);
            CostVector cost = testgen::random_cost(rng);
            vardsl::SymbolicTransition t;
            t.feature_guard = fguard;
            t.cost = cost;
            t.update.branches.push_back({Rational(1), vardsl::Update{}});
            if (rng.chance(0.4)) {
                BoolExpr rho = testgen::random_expr_over(rng, own, 2, true);
                t.is_switch = true;
                t.rho = rho;
                fm.tr_sw.push_back({0, fguard, rho, cost, dirac(0)});
            } else {
                t.action = rng.chance(0.5) ? "a" : "b";
                fm.tr_act.push_back({0, fguard, t.action, cost, dirac(0)});
            }
            vm.transitions.push_back(std::move(t));
        }

        auto rv = vardsl::join_var(vm, con, {}, {});
        auto rf = join(fm, con, {});
        if (rv.mdp.num_states() != rf.mdp.num_states()) {
            ok = false;
            what = "state count differs at iteration " + std::to_string(iter);
            break;
        }
        std::map<Combination, std::int32_t> fv, ff;
        for (std::int32_t s = 0; s < rv.mdp.num_states(); ++s) fv[rv.state_comb(s)] = s;
        for (std::int32_t s = 0; s < rf.mdp.num_states(); ++s) ff[rf.states[s].second] = s;
        for (const auto& [comb, sv] : fv) {
            auto it = ff.find(comb);
            if (it == ff.end()) {
                ok = false;
                what = "state sets differ";
                break;
            }
            std::int32_t sf = it->second;
            if (rv.mdp.moves_of(sv) != rf.mdp.moves_of(sf)) {
                ok = false;
                what = "move counts differ";
                break;
            }
            for (std::int32_t k = 0; k < rv.mdp.moves_of(sv) && ok; ++k) {
                std::int32_t mv = rv.mdp.move_begin(sv) + k;
                std::int32_t mf = rf.mdp.move_begin(sf) + k;
                if (!(rv.mdp.move_cost(mv) == rf.mdp.move_cost(mf)) ||
                    rv.mdp.num_branches(mv) != rf.mdp.num_branches(mf)) {
                    ok = false;
                    what = "move shapes differ";
                    break;
                }
                for (std::int32_t b = 0; b < rv.mdp.num_branches(mv); ++b) {
                    std::int32_t bv = rv.mdp.branch_begin(mv) + b;
                    std::int32_t bf = rf.mdp.branch_begin(mf) + b;
                    if (!(rv.mdp.branch_prob(bv) == rf.mdp.branch_prob(bf)) ||
                        !(rv.state_comb(rv.mdp.branch_target(bv)) ==
                          rf.states[rf.mdp.branch_target(bf)].second)) {
                        ok = false;
                        what = "branches differ";
                        break;
                    }
                }
            }
            if (!ok) break;
        }
    }
    std::ostringstream detail;
    detail << runs << " variable-free modules, " << std::fixed << std::setprecision(1)
           << seconds_since(start) << " s";
    if (!what.empty()) detail << "; " << what;
    report(4, "the symbolic join agrees with the data-abstract join", ok, detail.str());
}

// --- criterion 5: eBond+ desk-scale sweep ------------------------------------

void criterion_ebond_sweep() {
    auto start = std::chrono::steady_clock::now();
    bool ok = true;
    std::string what;
    auto expect = [&](bool cond, const std::string& msg) {
        if (!cond && ok) {
            ok = false;
            what = msg;
        }
    };

    ebond::EbondParams params;
    params.horizon_minutes = 60;
    const std::vector<std::int64_t> bandwidths{200, 1000, 2000, 4000};

    ebond::SweepOptions opts;
    opts.mode = ebond::SweepMode::Both;
    opts.workers = 1;
    auto result = ebond::sweep(params, bandwidths, ebond::all_valid_configs(), opts);
    expect(result.converged, "engine did not converge");

    // phi_p in [0,1], nonincreasing in the bandwidth bound per config.
    std::map<std::string, std::map<std::int64_t, double>> phi_p;
    for (const auto& row : result.rows) {
        if (row.query != "phi_p") continue;
        expect(row.value >= -1e-12 && row.value <= 1.0 + 1e-12,
               "phi_p outside [0,1] for " + row.config);
        phi_p[row.config][row.bandwidth_mbit] = row.value;
    }
    expect(phi_p.size() == 27, "expected 27 configurations");
    for (const auto& [config, by_bw] : phi_p) {
        double prev = 2.0;
        for (std::int64_t b : bandwidths) {
            auto it = by_bw.find(b);
            expect(it != by_bw.end(), "missing row for " + config);
            if (it == by_bw.end()) break;
            expect(it->second <= prev + 1e-9,
                   "phi_p increased with the bandwidth bound for " + config);
            prev = it->second;
        }
    }

    // Emin-energy finite wherever the horizon is reached almost surely.
    for (const auto& row : result.rows)
        if (row.query == "phi_e")
            expect(!std::isinf(row.value), "infinite expected energy for " + row.config);

    // Family-based state count strictly below the one-by-one sum.
    for (const auto& st : result.stats)
        expect(st.family_states < st.onebyone_states,
               "family state count not below one-by-one at b=" + std::to_string(st.bandwidth_mbit));

    // Zero-failure fast-NIC configuration avoids SLA violations surely.
    ebond::EbondParams nofail = params;
    nofail.nic_fail_prob = Rational(0);
    ebond::SweepOptions single;
    single.mode = ebond::SweepMode::OneByOne;
    auto fast = ebond::sweep(nofail, bandwidths, {ebond::EbondConfig::parse("10_S_A")}, single);
    for (const auto& row : fast.rows)
        if (row.query == "phi_p")
            expect(std::abs(row.value - 1.0) <= 1e-9,
                   "phi_p != 1 for the zero-failure fast configuration at b=" +
                       std::to_string(row.bandwidth_mbit));

    std::ostringstream detail;
    detail << "4 bandwidths x 27 configurations, " << std::fixed << std::setprecision(1)
           << seconds_since(start) << " s";
    if (!what.empty()) detail << "; " << what;
    report(5, "eBond+ desk-scale sweep invariants", ok, detail.str());
}

// --- criterion 6: productivity one-step fixture -------------------------------

void criterion_productivity_step() {
    bool ok = true;
    std::string what;
    try {
        std::ifstream in(fs::path(FEATCHECK_MODELS_DIR) / "productivity_step.fdsl");
        std::stringstream buffer;
        buffer << in.rdbuf();
        auto model = vardsl::parse_model(buffer.str());
        auto joined = vardsl::build_mdp(model);
        const auto* q = model.find_query("buy_cost");
        if (!q) throw ModelError("missing buy_cost query");
        auto res = expected_cost_opt(joined.mdp, q->cost_type, joined.eval_mask(q->target), Opt::Min);
        double expected = to_double(Rational(3, 20) * 269);  // 40.35
        double got = res.values[joined.mdp.initial_states().at(0)];
        ok = std::abs(got - expected) <= 1e-9;
        if (!ok) what = "expected 40.35, got " + std::to_string(got);
    } catch (const std::exception& e) {
        ok = false;
        what = e.what();
    }
    report(6, "one-step purchase fixture yields expected cost 40.35", ok, what);
}

// --- criterion 7: DSL round-trip ----------------------------------------------

void criterion_roundtrip() {
    bool ok = true;
    std::string what;
    auto check = [&](const std::string& name, const std::string& text) {
        if (!ok) return;
        try {
            vardsl::ModelFile first = vardsl::parse_model(text);
            std::string printed = vardsl::pretty_print(first);
            vardsl::ModelFile second = vardsl::parse_model(printed);
            if (!(first == second)) {
                ok = false;
                what = name + ": reparse differs";
            } else if (vardsl::pretty_print(second) != printed) {
                ok = false;
                what = name + ": printing is not stable";
            }
        } catch (const std::exception& e) {
            ok = false;
            what = name + ": " + e.what();
        }
    };
    int corpus = 0;
    for (const auto& entry : fs::directory_iterator(FEATCHECK_MODELS_DIR)) {
        if (entry.path().extension() != ".fdsl") continue;
        std::ifstream in(entry.path());
        std::stringstream buffer;
        buffer << in.rdbuf();
        check(entry.path().filename().string(), buffer.str());
        ++corpus;
    }
    ebond::EbondParams params;
    params.horizon_minutes = 60;
    for (std::int64_t b : {200, 1000, 2000, 4000}) {
        params.max_bandwidth_mbit = b;
        check("ebond_b" + std::to_string(b), ebond::ebond_model_text(params, ebond::all_valid_configs()));
        ++corpus;
    }
    report(7, "parse o pretty-print o parse is the identity on the corpus", ok,
           ok ? std::to_string(corpus) + " model files" : what);
}

// --- criterion 8: CLI determinism ----------------------------------------------

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void criterion_cli_determinism() {
    bool ok = true;
    std::string what;
    fs::path base = fs::temp_directory_path() / "featcheck_acceptance";
    fs::remove_all(base);
    fs::create_directories(base);
    auto run = [&](const std::string& out, int workers) {
        std::string cmd = std::string(FEATCHECK_CLI_PATH) +
                          " ebond --bandwidth 200,1000 --configs ALL --mode both --horizon 20"
                          " --delay 10 --cooldown 10 --seed 7 --workers " +
                          std::to_string(workers) + " --out " + (base / out).string() +
                          " 2>/dev/null";
        return std::system(cmd.c_str());
    };
    if (run("a", 1) != 0 || run("b", 4) != 0) {
        ok = false;
        what = "CLI run failed";
    } else {
        for (const char* file : {"ebond_results.csv", "ebond_stats.csv", "ebond_b200.fdsl",
                                 "ebond_b1000.fdsl"}) {
            if (slurp(base / "a" / file) != slurp(base / "b" / file) ||
                slurp(base / "a" / file).empty()) {
                ok = false;
                what = std::string(file) + " differs between runs";
                break;
            }
        }
    }
    report(8, "cmd_ebond output is byte-identical across runs and worker counts", ok, what);
}

} // namespace

int main() {
    criterion_oracle_equivalence();
    criterion_composition_laws();
    criterion_join_rules();
    criterion_erasure_equivalence();
    criterion_ebond_sweep();
    criterion_productivity_step();
    criterion_roundtrip();
    criterion_cli_determinism();
    if (g_failures == 0)
        std::printf("acceptance: all criteria passed\n");
    else
        std::printf("acceptance: %d criterion(s) FAILED\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
