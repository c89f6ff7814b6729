#include <catch2/catch_amalgamated.hpp>

#include "featcheck/vardsl/vardsl.hpp"
#include "helpers.hpp"

using namespace featcheck;
using namespace featcheck::vardsl;

namespace {

const char* kCounterModel = R"(
const N = 2;

signature {
  features f, g;
  valid {}, {f}, {g}, {f, g};
}

module Counter owns(f) {
  var x : [0..N] init 0;
  [step] feat(f) & x < N -> 1/2: (x' = x + 1) + 1/2: (x' = 0) cost energy 3;
  [switch f' & !f] true -> (x' = 0) cost energy 1;
}

module Watcher uses(f) {
  var seen : bool init false;
  [mark] x > 0 -> (seen' = true);
}

controller {
  init {}, {f};
  event {} -> {f} cost money 10;
}

label xtop = x = N;

query q1 : Pmax [ F xtop ];
query q2 : Emin(energy) [ F x = N ];
query q3 : Pmin [ !seen U x = 1 ];
)";

} // namespace

TEST_CASE("parsing a small model") {
    ModelFile m = parse_model(kCounterModel);
    CHECK(m.constants.size() == 1);
    CHECK(m.constants[0].value == 2);
    CHECK(m.signature.features.size() == 2);
    CHECK(m.signature.valid.size() == 4);
    REQUIRE(m.modules.size() == 2);
    CHECK(m.modules[0].name == "Counter");
    CHECK(m.modules[0].own == Combination::of({0}));
    CHECK(m.modules[0].vars.size() == 1);
    CHECK(m.modules[0].transitions.size() == 2);
    CHECK(m.modules[0].transitions[1].is_switch);
    CHECK(m.has_controller);
    CHECK(m.controller.events.size() == 1);
    CHECK(m.controller.events[0].cost.get("money") == 10);
    CHECK(m.labels.size() == 1);
    REQUIRE(m.queries.size() == 3);
    CHECK(m.queries[0].kind == QueryKind::PmaxReach);
    CHECK(m.queries[1].kind == QueryKind::EminReach);
    CHECK(m.queries[1].cost_type == "energy");
    CHECK(m.queries[2].kind == QueryKind::PminUntil);
}

TEST_CASE("minimal model defaults to the static controller") {
    ModelFile m = parse_model(R"(
signature { features f; valid {f}; }
module M { var x : bool init false; [a] true -> (x' = true); }
)");
    REQUIRE(m.modules.size() == 1);
    CHECK_FALSE(m.has_controller);
    Controller con = m.build_controller();
    CHECK(con.events.empty());
    CHECK(con.initial == m.signature.valid);
}

TEST_CASE("parse errors carry positions and reasons") {
    SECTION("syntax error") {
        CHECK_THROWS_AS(parse_model("signature { features ; }"), ParseError);
    }
    SECTION("unknown identifier") {
        CHECK_THROWS_WITH(parse_model(R"(
signature { features f; valid {f}; }
module M { var x : bool init false; [a] y > 0 -> (x' = true); }
)"),
                          Catch::Matchers::ContainsSubstring("unknown identifier"));
    }
    SECTION("writing another module's local variable") {
        CHECK_THROWS_WITH(parse_model(R"(
signature { features f, g; valid {f}, {g}; }
module A owns(f) { var x : bool init false; }
module B owns(g) { [a] true -> (x' = true); }
)"),
                          Catch::Matchers::ContainsSubstring("local to another module"));
    }
    SECTION("unnormalized probabilistic update") {
        CHECK_THROWS_WITH(parse_model(R"(
signature { features f; valid {f}; }
module M { var x : [0..2] init 0; [a] true -> 0.5: (x' = 1) + 0.4: (x' = 2); }
)"),
                          Catch::Matchers::ContainsSubstring("sum to"));
    }
    SECTION("type error") {
        CHECK_THROWS_WITH(parse_model(R"(
signature { features f; valid {f}; }
module M { var x : [0..2] init 0; var c : {red, green} init red; [a] true -> (x' = green); }
)"),
                          Catch::Matchers::ContainsSubstring("non-integer"));
    }
    SECTION("feature outside owns/uses") {
        CHECK_THROWS_WITH(parse_model(R"(
signature { features f, g; valid {f}; }
module M owns(f) { [a] feat(g) -> (); }
)"),
                          Catch::Matchers::ContainsSubstring("outside owns/uses"));
    }
    SECTION("rho over non-own features") {
        CHECK_THROWS_WITH(parse_model(R"(
signature { features f, g; valid {f}; }
module M owns(f) uses(g) { [switch g'] true -> (); }
)"),
                          Catch::Matchers::ContainsSubstring("non-own"));
    }
    SECTION("unsatisfiable initial condition") {
        CHECK_THROWS_WITH(parse_model(R"(
signature { features f; valid {f}; }
module M { var x : [0..2]; init x > 5; }
)"),
                          Catch::Matchers::ContainsSubstring("unsatisfiable"));
    }
    SECTION("primed feature atom outside switch heads") {
        CHECK_THROWS_AS(parse_model(R"(
signature { features f; valid {f}; }
module M owns(f) { [a] feat(f') -> (); }
)"),
                        ParseError);
    }
}

TEST_CASE("predicate evaluation") {
    ModelFile m = parse_model(R"(
signature { features f; valid {}, {f}; }
module M {
  var x : [0..3] init 2;
  var y : [0..3] init 3;
  var z : {red, green, blue} init green;
}
label cond = x < y & y > 2;
label notgreen = z != green;
label feature_on = feat(f);
)");
    Valuation v{2, 3, 1};
    CHECK(eval_pred(m.labels[0].cond, v, Combination()));
    CHECK_FALSE(eval_pred(m.labels[1].cond, v, Combination()));
    CHECK(eval_pred(m.labels[1].cond, {2, 3, 0}, Combination()));
    CHECK(eval_pred(make_bool(true), v, Combination()));
    CHECK(eval_pred(m.labels[2].cond, v, Combination::of({0})));
    CHECK_FALSE(eval_pred(m.labels[2].cond, v, Combination()));

    Valuation too_short{1};
    CHECK_THROWS_AS(eval_pred(m.labels[0].cond, too_short, Combination()), ContractViolation);
}

TEST_CASE("probabilistic updates") {
    ModelFile m = parse_model(R"(
signature { features f; valid {f}; }
module M {
  var x : [0..5] init 0;
  [ident] true -> (x' = x);
  [merge] true -> 0.5: (x' = 1) + 0.5: (x' = 1);
  [split] true -> 0.3: (x' = x + 1) + 0.7: (x' = 0);
  [escape] true -> (x' = x + 1);
}
)");
    auto vartab = m.var_table();
    const auto& ts = m.modules[0].transitions;

    auto d0 = apply_prob_update(ts[0].update, {5}, vartab);
    CHECK(d0.size() == 1);
    CHECK(d0.prob({5}) == 1);

    auto d1 = apply_prob_update(ts[1].update, {0}, vartab);
    CHECK(d1.size() == 1);
    CHECK(d1.prob({1}) == 1);

    auto d2 = apply_prob_update(ts[2].update, {1}, vartab);
    CHECK(d2.prob({2}) == Rational(3, 10));
    CHECK(d2.prob({0}) == Rational(7, 10));
    CHECK(d2.total_mass() == 1);

    CHECK_THROWS_WITH(apply_prob_update(ts[3].update, {5}, vartab, "transition at line 8"),
                      Catch::Matchers::ContainsSubstring("outside the domain"));
}

TEST_CASE("variable module composition") {
    ModelFile m = parse_model(R"(
signature { features f, g; valid {f}, {f, g}; }
module A owns(f) {
  var x : [0..3] init 0;
  [solo_a] true -> (x' = 1);
  [shared] x < 3 -> 0.5: (x' = 1) + 0.5: (x' = 2) cost energy 1;
  [switch f & !f'] true -> (x' = 0) cost energy 2;
}
module B owns(g) {
  var y : [0..3] init 0;
  [solo_b] true -> (y' = 1);
  [shared] feat(g) -> 0.5: (y' = 1) + 0.5: (y' = 3) cost energy 1;
}
)");
    auto c = compose_var(m.modules[0], m.modules[1]);
    CHECK(c.own == Combination::of({0, 1}));
    CHECK(c.vars.size() == 2);

    int solo = 0, shared = 0, switches = 0;
    for (const auto& t : c.transitions) {
        if (t.is_switch) {
            ++switches;
            // Frame condition freezes g.
            CHECK(switch_holds(t.rho, Combination::of({0}), Combination::of({})));
            CHECK_FALSE(switch_holds(t.rho, Combination::of({0, 1}), Combination::of({})));
            continue;
        }
        if (t.action == "shared") {
            ++shared;
            CHECK(t.cost.get("energy") == 2);
            CHECK(t.update.branches.size() == 4);
            for (const auto& br : t.update.branches) CHECK(br.prob == Rational(1, 4));
        } else {
            ++solo;
        }
    }
    CHECK(solo == 2);
    CHECK(shared == 1);
    CHECK(switches == 1);

    CHECK_THROWS_AS(compose_var(m.modules[0], m.modules[0]), ComposeError);
}

TEST_CASE("join_var basics") {
    SECTION("bounded counter chain") {
        ModelFile m = parse_model(R"(
signature { features f; valid {f}; }
module M {
  var x : [0..2] init 0;
  [a] x < 2 -> (x' = x + 1);
}
)");
        auto r = build_mdp(m);
        CHECK(r.mdp.num_states() == 3);
        CHECK(r.mdp.num_moves() == 2);
        CHECK(terminal_states(r.mdp).size() == 1);
    }
    SECTION("unsatisfiable guard yields no moves") {
        ModelFile m = parse_model(R"(
signature { features f; valid {f}; }
module M {
  var x : [0..2] init 0;
  [a] x < 0 -> (x' = 0);
}
)");
        auto r = build_mdp(m);
        CHECK(r.mdp.num_states() == 1);
        CHECK(r.mdp.num_moves() == 0);
    }
    SECTION("switch rule accumulates module and controller costs") {
        ModelFile m = parse_model(R"(
signature { features f; valid {}, {f}; }
module M owns(f) {
  var x : [0..1] init 0;
  [switch f' & !f] true -> (x' = 1) cost energy 1;
}
controller {
  init {};
  event {} -> {f} cost money 10;
}
)");
        auto r = build_mdp(m);
        REQUIRE(r.mdp.num_states() == 2);
        std::int32_t s0 = r.mdp.initial_states()[0];
        REQUIRE(r.mdp.moves_of(s0) == 1);
        std::int32_t mv = r.mdp.move_begin(s0);
        CHECK(r.mdp.move_cost(mv).get("energy") == 1);
        CHECK(r.mdp.move_cost(mv).get("money") == 10);
        std::int32_t target = r.mdp.branch_target(r.mdp.branch_begin(mv));
        CHECK(r.state_comb(target) == Combination::of({0}));
        CHECK(r.state_valuation(target) == Valuation{1});
    }
    SECTION("uncomposed external variables are rejected") {
        ModelFile m = parse_model(R"(
signature { features f, g; valid {f}; }
module A owns(f) { var x : bool init false; }
module B owns(g) { [a] x -> (); }
)");
        CHECK_THROWS_WITH(join_var(m.modules[1], m.build_controller(), m.var_table()),
                          Catch::Matchers::ContainsSubstring("compose the modules first"));
    }
}

TEST_CASE("erasure equivalence with the data-abstract join") {
    // A variable-free module joins to an MDP isomorphic to the
    // data-abstract join of the single-location feature module.
    testgen::Rng rng(808);
    for (int iter = 0; iter < 40; ++iter) {
        Controller con = testgen::random_controller(rng, 3);
        Combination own = Combination::of({rng.range(0, 2)});
        Combination ext = con.signature.universe().minus(own);

        VarFeatureModule vm;
        vm.name = "M";
        vm.own = own;
        vm.ext = ext;
        FeatureModule<int> fm;
        fm.locations = {0};
        fm.initial = {0};
        fm.interface = {own, ext};
        fm.actions = {"a", "b"};

        int ntrans = rng.range(0, 3);
        for (int i = 0; i < ntrans; ++i) {
            bool is_switch = rng.chance(0.4);
            BoolExpr fguard = testgen::random_expr_over(rng, own | ext, 2, false);
            CostVector cost = testgen::random_cost(rng);
            if (is_switch) {
                BoolExpr rho = testgen::random_expr_over(rng, own, 2, true);
                SymbolicTransition t;
                t.is_switch = true;
                t.rho = rho;
                t.feature_guard = fguard;
                t.cost = cost;
                t.update.branches.push_back({Rational(1), Update{}});
                vm.transitions.push_back(t);
                fm.tr_sw.push_back({0, fguard, rho, cost, dirac(0)});
            } else {
                std::string act = rng.chance(0.5) ? "a" : "b";
                SymbolicTransition t;
                t.action = act;
                t.feature_guard = fguard;
                t.cost = cost;
                t.update.branches.push_back({Rational(1), Update{}});
                vm.transitions.push_back(t);
                fm.tr_act.push_back({0, fguard, act, cost, dirac(0)});
            }
        }

        auto rv = join_var(vm, con, {}, {});
        auto rf = join(fm, con, {});
        REQUIRE(rv.mdp.num_states() == rf.mdp.num_states());

        // Match states by combination (the location/valuation is unique).
        std::map<Combination, std::int32_t> fv, ff;
        for (std::int32_t s = 0; s < rv.mdp.num_states(); ++s) fv[rv.state_comb(s)] = s;
        for (std::int32_t s = 0; s < rf.mdp.num_states(); ++s) ff[rf.states[s].second] = s;
        REQUIRE(fv.size() == ff.size());
        for (const auto& [comb, sv] : fv) {
            REQUIRE(ff.count(comb));
            std::int32_t sf = ff[comb];
            REQUIRE(rv.mdp.moves_of(sv) == rf.mdp.moves_of(sf));
            for (std::int32_t k = 0; k < rv.mdp.moves_of(sv); ++k) {
                std::int32_t mv = rv.mdp.move_begin(sv) + k;
                std::int32_t mf = rf.mdp.move_begin(sf) + k;
                CHECK(rv.mdp.move_cost(mv) == rf.mdp.move_cost(mf));
                REQUIRE(rv.mdp.num_branches(mv) == rf.mdp.num_branches(mf));
                for (std::int32_t b = 0; b < rv.mdp.num_branches(mv); ++b) {
                    std::int32_t bv = rv.mdp.branch_begin(mv) + b;
                    std::int32_t bf = rf.mdp.branch_begin(mf) + b;
                    CHECK(rv.mdp.branch_prob(bv) == rf.mdp.branch_prob(bf));
                    CHECK(rv.state_comb(rv.mdp.branch_target(bv)) ==
                          rf.states[rf.mdp.branch_target(bf)].second);
                }
            }
        }
    }
}

TEST_CASE("round trip is a fixpoint on ASTs") {
    auto check_roundtrip = [](const char* text) {
        ModelFile first = parse_model(text);
        std::string printed = pretty_print(first);
        ModelFile second = parse_model(printed);
        CHECK(first == second);
        CHECK(pretty_print(second) == printed);
    };
    check_roundtrip(kCounterModel);
    check_roundtrip(R"(
signature { features f; valid {f}; }
module M {
  var x : [0..5] init 0;
  var e : {red, green} init green;
  init x = 0 | x = 1;
  [a] (x < 2 | x > 4) & e = red -> 0.15: (x' = min(x + 1, 5), e' = green) + 0.85: ();
  [b] !(x = 3) & x * 2 <= 8 - 1 -> (x' = max(x - 1, 0));
}
label l1 = feat(f) & x < 3;
query q : Pmax [ l1 U x = 5 ];
)");
}

TEST_CASE("query masks over the joined state space") {
    ModelFile m = parse_model(R"(
signature { features f; valid {f}; }
module M {
  var x : [0..2] init 0;
  [a] x < 2 -> 1/2: (x' = x + 1) + 1/2: (x' = x);
}
label top = x = 2;
query q : Pmax [ F top ];
)");
    auto r = build_mdp(m);
    auto mask = r.eval_mask(m.queries[0].target);
    int count = 0;
    for (std::int32_t s = 0; s < r.mdp.num_states(); ++s)
        if (mask[s]) ++count;
    CHECK(count == 1);
    auto res = reach_opt(r.mdp, mask, Opt::Max);
    CHECK(res.values[r.mdp.initial_states()[0]] == 1.0);
}

TEST_CASE("prism export is generated for every structure") {
    ModelFile m = parse_model(kCounterModel);
    std::ostringstream prism;
    write_prism(prism, m);
    std::string text = prism.str();
    CHECK(text.find("mdp") != std::string::npos);
    CHECK(text.find("module Counter") != std::string::npos);
    CHECK(text.find("module Watcher") != std::string::npos);
    CHECK(text.find("module controller") != std::string::npos);
    CHECK(text.find("rewards \"energy\"") != std::string::npos);
    CHECK(text.find("rewards \"money\"") != std::string::npos);
    CHECK(text.find("[ev_0]") != std::string::npos);
    CHECK(text.find("init") != std::string::npos);

    std::ostringstream props;
    write_prism_props(props, m);
    CHECK(props.str().find("Pmax=?") != std::string::npos);
    CHECK(props.str().find("R{\"energy\"}min=?") != std::string::npos);
}

TEST_CASE("constant overrides") {
    ModelFile m = parse_model(R"(
const N = 2;
signature { features f; valid {f}; }
module M { var x : [0..N] init 0; [a] x < N -> (x' = x + 1); }
)",
                              {{"N", 4}});
    CHECK(m.constants[0].value == 4);
    auto r = build_mdp(m);
    CHECK(r.mdp.num_states() == 5);
}
