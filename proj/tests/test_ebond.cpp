#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "featcheck/ebond_sweep.hpp"

using namespace featcheck;
using namespace featcheck::ebond;

namespace {

EbondParams desk_params() {
    EbondParams p;
    p.max_bandwidth_mbit = 200;
    p.horizon_minutes = 20;
    p.reconfig_delay_min = 10;
    p.cooldown_min = 10;
    return p;
}

} // namespace

TEST_CASE("configuration encoding") {
    CHECK(all_valid_configs().size() == 27);
    EbondConfig c = EbondConfig::parse("10_S_A");
    CHECK(c.fast == 1);
    CHECK(c.slow == 0);
    CHECK(c.to_string() == "10_S_A");
    CHECK_THROWS_AS(EbondConfig::parse("12_S_A"), ModelError);  // three cards in the standard bundle
    CHECK_THROWS_AS(EbondConfig::parse("00_P_A"), ModelError);  // no card at all
    CHECK(EbondConfig::parse("12_P_B").valid());
}

TEST_CASE("parameter validation") {
    EbondParams p = desk_params();
    CHECK(p.validate().empty());
    p.max_bandwidth_mbit = 250;
    CHECK_FALSE(p.validate().empty());
    p = desk_params();
    p.horizon_minutes = 13;
    CHECK_FALSE(p.validate().empty());
    p = desk_params();
    p.nic_fail_prob = Rational(2);
    CHECK_FALSE(p.validate().empty());
}

TEST_CASE("the generated model parses from its own text") {
    EbondParams p = desk_params();
    std::string text = ebond_model_text(p, all_valid_configs());
    vardsl::ModelFile model = vardsl::parse_model(text);
    CHECK(model.signature.valid.size() == 27);
    CHECK(model.modules.size() == 7);
    CHECK(model.queries.size() == 4);
    CHECK(model.controller.initial.size() == 27);
    CHECK(vardsl::validate_model(model).empty());

    // 10_S_A has the fast card and no slow card.
    Combination first_config = model.controller.initial.front();
    (void)first_config;
    auto cfg10 = EbondConfig::parse("10_S_A");
    FeatureSignature& sig = model.signature;
    bool found = false;
    for (Combination comb : model.signature.valid) {
        if (combination_config_text(comb, sig) == "10_S_A") {
            found = true;
            CHECK(comb.contains(sig.index_of("fast")));
            CHECK_FALSE(comb.contains(sig.index_of("slow1")));
            CHECK_FALSE(comb.contains(sig.index_of("slow2")));
        }
    }
    CHECK(found);
    (void)cfg10;
}

TEST_CASE("query list shape") {
    auto queries = ebond_queries();
    REQUIRE(queries.size() == 4);
    CHECK(queries[0].name == "phi_p");
    CHECK(queries[0].kind == QueryKind::PmaxUntil);
    CHECK(queries[1].cost_type == "energy");
    CHECK(queries[3].cost_type == "slavio");
}

TEST_CASE("clock discretization follows the horizon") {
    EbondParams p = desk_params();
    p.horizon_minutes = 10;
    vardsl::ModelFile model = build_ebond(p, {EbondConfig::parse("10_S_A")});
    // clock 0, 5, 10 reachable; the domain bound equals the horizon.
    const auto& env = model.modules.back();
    bool found = false;
    for (const auto& v : env.vars)
        if (v.name == "clock") {
            found = true;
            CHECK(std::get<vardsl::RangeType>(v.type).hi == 10);
        }
    CHECK(found);

    auto joined = vardsl::build_mdp(model);
    std::set<std::int32_t> clocks;
    int clock_id = -1;
    for (const auto* d : model.var_table())
        if (d && d->name == "clock") clock_id = d->id;
    REQUIRE(clock_id >= 0);
    for (std::int32_t s = 0; s < joined.mdp.num_states(); ++s)
        clocks.insert(joined.state_valuation(s)[clock_id]);
    CHECK(clocks == std::set<std::int32_t>{0, 5, 10});
}

TEST_CASE("family analysis of the desk-scale model") {
    EbondParams p = desk_params();
    vardsl::ModelFile model = build_ebond_family(p);
    auto joined = vardsl::build_mdp(model);
    REQUIRE(joined.mdp.initial_states().size() == 27);

    // phi_p values lie in [0,1]; the horizon is reached almost surely, so
    // expected costs are finite everywhere.
    const auto* phi_p = model.find_query("phi_p");
    REQUIRE(phi_p);
    Query q;
    q.kind = phi_p->kind;
    q.target = joined.eval_mask(phi_p->target);
    q.constraint = joined.eval_mask(phi_p->constraint);
    auto res = until_opt(joined.mdp, q.constraint, q.target, Opt::Max);
    for (std::int32_t s : joined.mdp.initial_states()) {
        CHECK(res.values[s] >= 0.0);
        CHECK(res.values[s] <= 1.0);
    }

    auto reach = reach_opt(joined.mdp, joined.eval_mask(model.find_label("target")->cond), Opt::Min);
    for (std::int32_t s : joined.mdp.initial_states()) CHECK(res.values[s] <= 1.0);
    for (std::int32_t s : joined.mdp.initial_states())
        CHECK(std::abs(reach.values[s] - 1.0) < 1e-9);

    const auto* phi_e = model.find_query("phi_e");
    auto energy = expected_cost_opt(joined.mdp, "energy", joined.eval_mask(phi_e->target), Opt::Min);
    for (std::int32_t s : joined.mdp.initial_states()) CHECK_FALSE(std::isinf(energy.values[s]));
}

TEST_CASE("a zero-failure fast configuration never violates the SLA") {
    EbondParams p = desk_params();
    p.nic_fail_prob = Rational(0);
    vardsl::ModelFile model = build_ebond(p, {EbondConfig::parse("10_S_A")});
    auto joined = vardsl::build_mdp(model);
    const auto* phi_p = model.find_query("phi_p");
    auto res = until_opt(joined.mdp, joined.eval_mask(phi_p->constraint), joined.eval_mask(phi_p->target),
                         Opt::Max);
    REQUIRE(joined.mdp.initial_states().size() == 1);
    CHECK(res.values[joined.mdp.initial_states()[0]] == 1.0);
}

TEST_CASE("slow-card energy costs stay within the idle/load bounds") {
    EbondParams p = desk_params();
    vardsl::ModelFile model = build_ebond(p, {EbondConfig::parse("01_S_A")});
    const std::uint64_t idle = p.energy_idle_slow();
    const std::uint64_t load = p.energy_load_slow();
    bool any = false;
    for (const auto& m : model.modules) {
        if (m.name != "Slow1" && m.name != "Slow2") continue;
        for (const auto& t : m.transitions) {
            std::uint64_t e = t.cost.get("energy");
            if (e == 0) continue;
            any = true;
            CHECK(e >= idle);
            CHECK(e <= load);
        }
    }
    CHECK(any);
}

TEST_CASE("without reachable violations the money cost is the purchase price") {
    EbondParams p = desk_params();
    p.nic_fail_prob = Rational(0);
    vardsl::ModelFile model = build_ebond(p, {EbondConfig::parse("10_S_A")});
    auto joined = vardsl::build_mdp(model);
    const auto* q = model.find_query("phi_m");
    auto res = expected_cost_opt(joined.mdp, q->cost_type, joined.eval_mask(q->target), Opt::Min);
    double purchase = double(p.price_bundle_std + p.price_fast);
    CHECK(std::abs(res.values[joined.mdp.initial_states()[0]] - purchase) <= 1e-9 * purchase);
}

TEST_CASE("sweep rows and determinism") {
    EbondParams p = desk_params();
    SweepOptions opts;
    opts.mode = SweepMode::Both;
    opts.workers = 3;

    auto result = sweep(p, {200}, all_valid_configs(), opts);
    // Family rows: 27 configs x 4 queries.
    CHECK(result.rows.size() == 27 * 4);
    REQUIRE(result.stats.size() == 1);
    CHECK(result.stats[0].family_states < result.stats[0].onebyone_states);
    CHECK(result.converged);

    std::ostringstream csv1, csv2;
    write_sweep_csv(csv1, result.rows);
    SweepOptions opts1 = opts;
    opts1.workers = 1;
    auto result2 = sweep(p, {200}, all_valid_configs(), opts1);
    write_sweep_csv(csv2, result2.rows);
    CHECK(csv1.str() == csv2.str());

    auto single = sweep(p, {200}, {EbondConfig::parse("01_S_A")},
                        SweepOptions{SweepMode::OneByOne, 1, false, {}});
    CHECK(single.rows.size() == 4);
}
