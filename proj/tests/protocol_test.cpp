#include <doctest.h>

#include <set>

#include "popsim/protocol.hpp"

using namespace popsim;

TEST_CASE("is_contender follows the sign") {
    const LeaderMinion lm(8);
    CHECK(is_contender(1));
    CHECK_FALSE(is_contender(-8));
    CHECK(is_contender(lm.m() + 1));
}

TEST_CASE("contend_priority") {
    const LeaderMinion lm(8);
    CHECK(lm.contend_priority(5, 3) == 6);
    CHECK(lm.contend_priority(9, 2) == 8);
    CHECK(lm.contend_priority(1, 1) == 2);
    CHECK(lm.contend_priority(2, -7) == 8);
}

TEST_CASE("minion_priority") {
    const LeaderMinion lm(8);
    CHECK(lm.minion_priority(4, -2) == -4);
    CHECK(lm.minion_priority(9, -3) == -8);
    CHECK(lm.minion_priority(-1, -1) == -1);
}

TEST_CASE("lm transition examples") {
    const LeaderMinion lm(8);
    CHECK(lm.transition(5, 3) == StatePair{6, -5});
    CHECK(lm.transition(4, -7) == StatePair{-7, -7});
    CHECK(lm.transition(8, 8) == StatePair{9, 9});
    CHECK(lm.transition(9, 8) == StatePair{8, -8});
    CHECK(lm.transition(-3, -5) == StatePair{-5, -5});
    CHECK(lm.transition(9, 9) == StatePair{8, 8});
}

TEST_CASE("lm output") {
    const LeaderMinion lm(8);
    CHECK(lm.output(7) == Output::Win);
    CHECK(lm.output(-2) == Output::Lose);
    CHECK(lm.output(9) == Output::Win);
}

TEST_CASE("contender count is not preserved by a single interaction") {
    const LeaderMinion lm(8);
    const auto [a, b] = lm.transition(4, -7);
    CHECK(is_contender(4));
    CHECK_FALSE(is_contender(a));
    CHECK_FALSE(is_contender(b));
}

TEST_CASE("m below one is rejected") {
    CHECK_THROWS_AS(LeaderMinion(0), std::invalid_argument);
    CHECK_THROWS_AS(LeaderMinion(-3), std::invalid_argument);
}

TEST_CASE("lm state space") {
    for (const std::int32_t m : {1, 2, 5}) {
        const LeaderMinion lm(m);
        const auto states = lm.states();
        REQUIRE(states.size() == static_cast<std::size_t>(2 * m + 1));
        CHECK(states.front() == -m);
        CHECK(states.back() == m + 1);
        CHECK(std::find(states.begin(), states.end(), 0) == states.end());
        CHECK_FALSE(lm.is_valid(-(m + 1)));
        CHECK_FALSE(lm.is_valid(0));
        CHECK_FALSE(lm.is_valid(m + 2));
    }
}

TEST_CASE("lm transition properties over the full grid") {
    for (const std::int32_t m : {1, 2, 3, 8, 64}) {
        CAPTURE(m);
        const LeaderMinion lm(m);
        const auto states = lm.states();
        for (const auto x : states) {
            for (const auto y : states) {
                CAPTURE(x);
                CAPTURE(y);
                const auto [a, b] = lm.transition(x, y);
                const auto [c, d] = lm.transition(y, x);
                // Symmetry.
                REQUIRE(a == d);
                REQUIRE(b == c);
                // Closure; in particular -(m+1) is never produced.
                REQUIRE(lm.is_valid(a));
                REQUIRE(lm.is_valid(b));
                REQUIRE(a != -(m + 1));
                // Minions stay minions.
                if (!is_contender(x)) REQUIRE_FALSE(is_contender(a));
                if (!is_contender(y)) REQUIRE_FALSE(is_contender(b));
                // Magnitudes only fall from m+1 to m.
                if (std::max(abs_value(x), abs_value(y)) <= m) {
                    REQUIRE(abs_value(a) >= abs_value(x));
                    REQUIRE(abs_value(b) >= abs_value(y));
                }
                if (abs_value(a) < abs_value(x)) {
                    REQUIRE(abs_value(x) == m + 1);
                    REQUIRE(abs_value(a) == m);
                }
            }
        }
    }
}

TEST_CASE("tabulated spec agrees with computed transitions") {
    for (const std::int32_t m : {1, 2, 3, 8}) {
        const LeaderMinion lm(m);
        const auto table = ProtocolSpec::tabulated(lm);
        const auto direct = ProtocolSpec::from(lm);
        CHECK(table.num_states() == lm.num_states());
        CHECK(table.symmetric());
        for (const auto x : lm.states())
            for (const auto y : lm.states()) {
                REQUIRE(table.transition(x, y) == lm.transition(x, y));
                REQUIRE(direct.transition(x, y) == lm.transition(x, y));
            }
        CHECK_THROWS(table.transition(-(m + 1), 1));
    }
}

TEST_CASE("spec index lookup") {
    const auto spec = ProtocolSpec::from(LeaderMinion(3));
    CHECK(spec.index_of(-3) == 0);
    CHECK(spec.index_of(-1) == 2);
    CHECK(spec.index_of(1) == 3);
    CHECK(spec.index_of(4) == 6);
    CHECK(spec.index_of(0) == ProtocolSpec::npos);
    CHECK(spec.index_of(5) == ProtocolSpec::npos);
    CHECK(spec.index_of(-100) == ProtocolSpec::npos);
    CHECK_THROWS_AS(ProtocolSpec("dup", 1, {1, 1}, {}, true), std::invalid_argument);
    CHECK_THROWS_AS(ProtocolSpec("bad-init", 2, {1, -1}, {}, true), std::invalid_argument);
}

TEST_CASE("baseline update") {
    using S = BaselineState;
    CHECK(Baseline::update(S::Leader, S::Leader) == std::pair{S::Leader, S::Follower});
    CHECK(Baseline::update(S::Leader, S::Follower) == std::pair{S::Leader, S::Follower});
    CHECK(Baseline::update(S::Follower, S::Leader) == std::pair{S::Follower, S::Leader});
    CHECK(Baseline::update(S::Follower, S::Follower) == std::pair{S::Follower, S::Follower});

    // The integer encoding agrees with the enum form.
    const Baseline b;
    for (const auto x : {S::Leader, S::Follower})
        for (const auto y : {S::Leader, S::Follower}) {
            const auto [ex, ey] = Baseline::update(x, y);
            CHECK(b.transition(static_cast<StateValue>(x), static_cast<StateValue>(y)) ==
                  StatePair{static_cast<StateValue>(ex), static_cast<StateValue>(ey)});
        }
    CHECK_FALSE(b.symmetric());
    CHECK(b.initial_state() == static_cast<StateValue>(S::Leader));
}
