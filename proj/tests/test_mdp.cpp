#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gapcore/domains.hpp"
#include "gapcore/mdp.hpp"
#include "gapcore/rng.hpp"

#include <cmath>
#include <limits>

using namespace gapcore;

TEST_CASE("cake MDP passes validation") {
    FiniteMdp cake = make_cake_mdp({0.5, 0.1});
    CHECK(validate_mdp(cake).empty());
}

TEST_CASE("validation reports a bad transition row") {
    FiniteMdp mdp(2, 2, 0.9);
    for (int x = 0; x < 2; ++x)
        for (int a = 0; a < 2; ++a) mdp.p(x, a, x) = 1.0;
    mdp.p(1, 0, 1) = 0.9; // row sums to 0.9
    auto report = validate_mdp(mdp);
    REQUIRE(report.size() == 1);
    CHECK(report[0].state == 1);
    CHECK(report[0].action == 0);
    CHECK(report[0].message.find("0.9") != std::string::npos);
}

TEST_CASE("validation rejects discount = 1") {
    FiniteMdp mdp(1, 1, 1.0);
    mdp.p(0, 0, 0) = 1.0;
    auto report = validate_mdp(mdp);
    REQUIRE(report.size() == 1);
    CHECK(report[0].message.find("discount must be < 1") != std::string::npos);
}

TEST_CASE("state values") {
    SUBCASE("all zeros") {
        QTable q(3, 2);
        for (double v : state_values(q)) CHECK(v == 0.0);
    }
    SUBCASE("cake optimal Q") {
        QTable q(2, 2);
        q(0, 0) = -0.1;
        q(0, 1) = 0.0;
        q(1, 0) = q(1, 1) = -4.4;
        numvec v = state_values(q);
        CHECK(v[0] == 0.0);
        CHECK(v[1] == -4.4);
    }
    SUBCASE("single state") {
        QTable q(1, 2);
        q(0, 0) = 3.0;
        q(0, 1) = 7.0;
        CHECK(state_values(q)[0] == 7.0);
    }
}

TEST_CASE("greedy policy and tie-breaking") {
    QTable q(3, 3);
    // row 0: all equal -> action 0
    q(1, 0) = 1.0; q(1, 1) = 2.0; q(1, 2) = 3.0; // -> action 2
    q(2, 0) = -0.1; q(2, 1) = 0.0; q(2, 2) = -1.0; // cake-like -> action 1
    DeterministicPolicy pi = greedy_policy(q);
    CHECK(pi.action_of[0] == 0);
    CHECK(pi.action_of[1] == 2);
    CHECK(pi.action_of[2] == 1);
}

TEST_CASE("greedy policy is invariant under per-row shifts") {
    Rng rng(42);
    for (int trial = 0; trial < 50; ++trial) {
        QTable q(4, 3);
        for (double& v : q.values) v = rng.uniform(-5.0, 5.0);
        QTable shifted = q;
        for (int x = 0; x < 4; ++x) {
            double c = rng.uniform(-100.0, 100.0);
            for (int a = 0; a < 3; ++a) shifted(x, a) += c;
        }
        // Exact-shift rounding can reorder ties, so only check when the
        // shifted argmax is strict.
        DeterministicPolicy p1 = greedy_policy(q);
        DeterministicPolicy p2 = greedy_policy(shifted);
        for (int x = 0; x < 4; ++x) {
            if (action_gap(shifted, x) > 1e-9) CHECK(p1.action_of[x] == p2.action_of[x]);
        }
    }
}

TEST_CASE("action gap") {
    SUBCASE("cake optimal gap is epsilon") {
        QTable q(2, 2);
        q(0, 0) = -0.1;
        q(0, 1) = 0.0;
        q(1, 0) = q(1, 1) = -4.4;
        CHECK(action_gap(q, 0) == doctest::Approx(0.1));
        CHECK(action_gap(q, 1) == 0.0); // tied maximum
    }
    SUBCASE("uniform row") {
        QTable q(1, 4, 2.5);
        CHECK(action_gap(q, 0) == 0.0);
    }
    SUBCASE("single action is a sentinel") {
        QTable q(1, 1, 1.0);
        CHECK(std::isinf(action_gap(q, 0)));
    }
    SUBCASE("consistent fixed-point gap") {
        // -eps/(1 - gamma/2) at gamma = 0.5, eps = 0.1
        QTable q(2, 2);
        q(0, 0) = -0.1 / 0.75;
        q(0, 1) = 0.0;
        q(1, 0) = q(1, 1) = -4.4;
        CHECK(action_gap(q, 0) == doctest::Approx(0.13333333333).epsilon(1e-8));
    }
}

TEST_CASE("gap properties on random tables") {
    Rng rng(9);
    for (int trial = 0; trial < 100; ++trial) {
        QTable q(5, 4);
        for (double& v : q.values) v = rng.uniform(-3.0, 3.0);
        numvec v = state_values(q);
        for (int x = 0; x < 5; ++x) {
            CHECK(action_gap(q, x) >= 0.0);
            for (int a = 0; a < 4; ++a) CHECK(v[x] >= q(x, a));
        }
    }
}
