#include <catch2/catch_amalgamated.hpp>

#include "featcheck/controller.hpp"
#include "helpers.hpp"

using namespace featcheck;

namespace {

FeatureSignature two_feature_sig() {
    FeatureSignature sig;
    sig.features = {"a", "b"};
    sig.valid = {Combination::of({}), Combination::of({0}), Combination::of({1}), Combination::of({0, 1})};
    return sig;
}

} // namespace

TEST_CASE("static controller") {
    FeatureSignature sig;
    sig.features = {"s", "o", "e"};
    sig.valid = {Combination::of({0, 1, 2})};
    Controller c = static_controller(sig);
    CHECK(c.initial.size() == 1);
    CHECK(c.events.empty());
    CHECK(c.initial == sig.valid);
    CHECK(validate_controller(c).empty());
}

TEST_CASE("validate_controller") {
    auto sig = two_feature_sig();
    SECTION("support outside the valid set") {
        FeatureSignature narrow = sig;
        narrow.valid = {Combination::of({}), Combination::of({0})};
        Controller c = static_controller(narrow);
        c.events.push_back({Combination::of({0}), CostVector{}, dirac(Combination::of({0, 1}))});
        auto violations = validate_controller(c);
        REQUIRE_FALSE(violations.empty());
        CHECK(violations[0].find("invalid target combination") != std::string::npos);
    }
    SECTION("cost determinism") {
        Controller c = static_controller(sig);
        auto gamma = Distribution<Combination>({{Combination::of({0}), Rational(1, 2)},
                                                {Combination::of({1}), Rational(1, 2)}});
        c.events.push_back({Combination::of({}), CostVector{{"money", 5}}, gamma});
        c.events.push_back({Combination::of({}), CostVector{{"money", 7}}, gamma});
        auto violations = validate_controller(c);
        REQUIRE_FALSE(violations.empty());
        CHECK(violations[0].find("cost determinism") != std::string::npos);
    }
    SECTION("simple controllers embed via Dirac targets") {
        testgen::Rng rng(5);
        for (int i = 0; i < 30; ++i) {
            Controller c = testgen::random_controller(rng, 3);
            // Rebuild every event with a Dirac on its most likely target.
            Controller simple = c;
            for (auto& e : simple.events) e.to = dirac(e.to.support().front().first);
            CHECK(validate_controller(simple).empty() == validate_controller(c).empty());
        }
    }
}

TEST_CASE("de_controller") {
    auto sig = two_feature_sig();

    SECTION("empty D and E give no events") {
        Controller c = de_controller(sig, Combination(), Combination());
        CHECK(c.events.empty());
        CHECK(c.initial == sig.valid);
    }
    SECTION("D={b} toggles b everywhere") {
        Controller c = de_controller(sig, Combination::of({1}), Combination());
        REQUIRE(c.events.size() == 4);
        for (const auto& e : c.events) {
            REQUIRE(e.to.size() == 1);
            Combination to = e.to.support().front().first;
            CHECK((e.from ^ to) == Combination::of({1}));
            CHECK(e.cost.zero());
        }
    }
    SECTION("no self events, symmetric relation") {
        testgen::Rng rng(17);
        for (int i = 0; i < 20; ++i) {
            Combination d(static_cast<std::uint64_t>(rng.range(0, 3)));
            Combination e(static_cast<std::uint64_t>(rng.range(0, 3)) & ~d.bits());
            Controller c = de_controller(sig, d, e);
            for (const auto& ev : c.events) {
                Combination to = ev.to.support().front().first;
                CHECK_FALSE(to == ev.from);
                bool reverse = false;
                for (const auto& other : c.events)
                    if (other.from == to && other.to.support().front().first == ev.from) reverse = true;
                CHECK(reverse);
            }
        }
    }
    SECTION("overlapping D and E is a contract violation") {
        CHECK_THROWS_AS(de_controller(sig, Combination::of({0}), Combination::of({0, 1})),
                        ContractViolation);
    }
}

TEST_CASE("controller_to_module") {
    auto sig = two_feature_sig();

    SECTION("static controller becomes a transition-free module") {
        auto m = controller_to_module(static_controller(sig));
        CHECK(m.locations.size() == sig.valid.size());
        CHECK(m.tr_act.empty());
        CHECK(m.tr_sw.empty());
        CHECK(m.interface.own.empty());
        CHECK(m.interface.ext == sig.universe());
        CHECK(validate_module(m).empty());
    }
    SECTION("one event becomes one trivially guarded transition") {
        Controller c = static_controller(sig);
        c.events.push_back({Combination::of({0}), CostVector{{"money", 269}}, dirac(Combination::of({0, 1}))});
        auto m = controller_to_module(c);
        REQUIRE(m.tr_act.size() == 1);
        CHECK(m.tr_act[0].guard == BoolExpr::tru());
        CHECK(m.tr_act[0].cost.get("money") == 269);
        CHECK(m.tr_act[0].source == Combination::of({0}));
    }
    SECTION("action names are pairwise distinct") {
        testgen::Rng rng(23);
        Controller c = testgen::random_controller(rng, 3);
        while (c.events.size() < 4) c.events.push_back({c.signature.valid[0], CostVector{}, dirac(c.signature.valid[0])});
        auto m = controller_to_module(c);
        std::set<std::string> names;
        for (const auto& t : m.tr_act) names.insert(t.action);
        CHECK(names.size() == m.tr_act.size());
    }
}
