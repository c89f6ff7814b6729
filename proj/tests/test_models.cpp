#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "featcheck/vardsl/vardsl.hpp"

using namespace featcheck;
namespace fs = std::filesystem;

namespace {

std::string read_model(const char* name) {
    std::ifstream in(fs::path(FEATCHECK_MODELS_DIR) / name);
    REQUIRE(in.good());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

} // namespace

TEST_CASE("bundled productivity controller") {
    auto model = vardsl::parse_model(read_model("productivity.fdsl"));
    CHECK(model.signature.valid.size() == 11);
    CHECK(model.controller.initial.size() == 3);

    // Every switch event's distribution carries the implicit self-loop
    // remainder explicitly and sums to exactly 1.
    REQUIRE(model.controller.events.size() == 3);
    for (const auto& e : model.controller.events) {
        CHECK(e.to.total_mass() == 1);
        CHECK(e.to.prob(e.from) > 0);
    }

    // The documented upgrade step: sor buys the business office feature for
    // 269 with probability 3/20.
    const auto& sig = model.signature;
    Combination sor = Combination::of({sig.index_of("s"), sig.index_of("o"), sig.index_of("r")});
    Combination sorfb = sor.with(sig.index_of("f")).with(sig.index_of("b"));
    bool found = false;
    for (const auto& e : model.controller.events)
        if (e.from == sor && e.to.prob(sorfb) == Rational(3, 20)) {
            found = true;
            CHECK(e.cost.get("money") == 269);
            CHECK(e.to.prob(sor) == Rational(17, 20));
        }
    CHECK(found);

    CHECK(validate_controller(model.build_controller()).empty());
    auto joined = vardsl::build_mdp(model);
    CHECK(joined.mdp.num_states() > 0);
}

TEST_CASE("bundled fixtures validate and analyze") {
    for (const char* name : {"productivity.fdsl", "productivity_step.fdsl", "counter.fdsl"}) {
        INFO(name);
        auto model = vardsl::parse_model(read_model(name));
        CHECK(vardsl::validate_model(model).empty());
        auto joined = vardsl::build_mdp(model);
        CHECK(joined.mdp.num_states() > 0);
        CHECK_FALSE(model.queries.empty());
    }
}

TEST_CASE("purchase fixture computes 3/20 of 269") {
    auto model = vardsl::parse_model(read_model("productivity_step.fdsl"));
    auto joined = vardsl::build_mdp(model);
    const auto* q = model.find_query("buy_cost");
    REQUIRE(q);
    auto res = expected_cost_opt(joined.mdp, q->cost_type, joined.eval_mask(q->target), Opt::Min);
    double expected = to_double(Rational(3, 20) * 269);
    for (std::int32_t s : joined.mdp.initial_states())
        CHECK(std::abs(res.values[s] - expected) <= 1e-9);
    auto chance = reach_opt(joined.mdp, joined.eval_mask(model.find_query("buy_chance")->target),
                            Opt::Max);
    for (std::int32_t s : joined.mdp.initial_states()) CHECK(chance.values[s] == 1.0);
}
