#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gapcore/domains.hpp"
#include "gapcore/oracle.hpp"
#include "gapcore/solver.hpp"

#include <cmath>

using namespace gapcore;

namespace {

RandomMdpParams small_corpus(int i, int n_states = 5, int n_actions = 3) {
    RandomMdpParams p;
    p.n_states = n_states;
    p.n_actions = n_actions;
    p.gamma = 0.9;
    p.self_loop_bias = 0.25 * (i % 3);
    p.branching = 1 + i % n_states;
    p.seed = 4000 + i;
    return p;
}

} // namespace

TEST_CASE("exact policy evaluation on the cake MDP") {
    FiniteMdp cake = make_cake_mdp({0.5, 0.1});
    DeterministicPolicy abstain;
    abstain.action_of = {1, 0};
    QTable q = exact_policy_evaluation(cake, abstain);
    CHECK(q(0, 1) == doctest::Approx(0.0).epsilon(1e-12)); // V^pi(x1) = 0
    CHECK(q(0, 0) == doctest::Approx(-0.1).epsilon(1e-10));

    DeterministicPolicy eat;
    eat.action_of = {0, 0};
    q = exact_policy_evaluation(cake, eat);
    CHECK(q(0, 0) == doctest::Approx(-0.4 / 3.0).epsilon(1e-12));
}

TEST_CASE("policy evaluation validates its policy") {
    FiniteMdp cake = make_cake_mdp({0.5, 0.1});
    DeterministicPolicy bad;
    bad.action_of = {0, 5};
    CHECK_THROWS_AS(exact_policy_evaluation(cake, bad), std::invalid_argument);
}

TEST_CASE("exhaustive search recovers the cake ground truth") {
    FiniteMdp cake = make_cake_mdp({0.5, 0.1});
    GroundTruth gt = exhaustive_policy_search(cake);
    CHECK(gt.method == GroundTruth::Method::policy_enumeration);
    CHECK(std::fabs(gt.q_star(0, 0) - (-0.1)) <= 1e-10);
    CHECK(std::fabs(gt.q_star(0, 1)) <= 1e-10);
    CHECK(gt.optimal_policy.action_of[0] == 1);
    CHECK(std::fabs(gt.v_star[0] - gt.q_star(0, 1)) <= 1e-12);
}

TEST_CASE("single-state two-action ground truth by hand") {
    FiniteMdp mdp(1, 2, 0.5);
    mdp.p(0, 0, 0) = mdp.p(0, 1, 0) = 1.0;
    mdp.r(0, 0) = 0.0;
    mdp.r(0, 1) = 1.0;
    GroundTruth gt = exhaustive_policy_search(mdp);
    CHECK(gt.v_star[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(gt.q_star(0, 0) == doctest::Approx(1.0).epsilon(1e-12)); // 0 + gamma V*
    CHECK(gt.gaps[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("enumeration refuses oversized instances") {
    RandomMdpParams p = small_corpus(0, 20, 3); // 3^20 policies
    FiniteMdp mdp = make_random_mdp(p);
    CHECK_THROWS_AS(exhaustive_policy_search(mdp), std::invalid_argument);
}

TEST_CASE("the two oracles agree") {
    for (int i = 0; i < 10; ++i) {
        FiniteMdp mdp = make_random_mdp(small_corpus(i, 6, 3));
        GroundTruth a = exhaustive_policy_search(mdp);
        GroundTruth b = high_precision_vi(mdp, 1e-10);
        for (std::size_t j = 0; j < a.q_star.values.size(); ++j)
            CHECK(std::fabs(a.q_star.values[j] - b.q_star.values[j]) <= 1e-8);
        CHECK(a.optimal_policy.action_of == b.optimal_policy.action_of);
    }
}

TEST_CASE("high precision VI with zero discount returns rewards") {
    RandomMdpParams p = small_corpus(1);
    p.gamma = 0.0;
    FiniteMdp mdp = make_random_mdp(p);
    GroundTruth gt = high_precision_vi(mdp, 1e-12);
    for (int x = 0; x < mdp.n_states; ++x)
        for (int a = 0; a < mdp.n_actions; ++a)
            CHECK(gt.q_star(x, a) == doctest::Approx(mdp.r(x, a)).epsilon(1e-12));
}

TEST_CASE("ground truth is internally consistent") {
    for (int i = 0; i < 10; ++i) {
        FiniteMdp mdp = make_random_mdp(small_corpus(i));
        GroundTruth gt = exhaustive_policy_search(mdp);
        QTable once = bellman_backup(mdp, gt.q_star);
        for (std::size_t j = 0; j < once.values.size(); ++j)
            CHECK(std::fabs(once.values[j] - gt.q_star.values[j]) <= 1e-9);
        numvec v = state_values(gt.q_star);
        for (int x = 0; x < mdp.n_states; ++x) CHECK(v[x] == gt.v_star[x]);
    }
}

TEST_CASE("optimality preservation check passes for the consistent operator") {
    for (int i = 0; i < 20; ++i) {
        FiniteMdp mdp = make_random_mdp(small_corpus(i));
        CheckReport rep = check_optimality_preserving(
            mdp, {OperatorKind::consistent, 0, 1, 0}, 3, 1500, 17L + i);
        CHECK(rep.passed());
        CHECK(rep.bound_excess <= 0.0);
    }
}

TEST_CASE("advantage learning scales converged gaps by 1/(1-alpha)") {
    const double alpha = 0.7;
    for (int i = 0; i < 10; ++i) {
        FiniteMdp mdp = make_random_mdp(small_corpus(i));
        GroundTruth gt = exhaustive_policy_search(mdp);
        CheckReport rep = check_optimality_preserving(
            mdp, {OperatorKind::advantage_learning, alpha, 1, 0}, 2, 2000, 23L + i, &gt);
        CHECK(rep.passed());

        SolveResult res = value_iteration(
            make_tabular_backup(mdp, {OperatorKind::advantage_learning, alpha, 1, 0}),
            QTable(mdp.n_states, mdp.n_actions), 2000, 1e-300);
        numvec v = state_values(res.q);
        for (int x = 0; x < mdp.n_states; ++x)
            for (int a = 0; a < mdp.n_actions; ++a) {
                double expected = (gt.v_star[x] - gt.q_star(x, a)) / (1.0 - alpha);
                CHECK(std::fabs((v[x] - res.q(x, a)) - expected) <= 1e-5);
            }
    }
}

TEST_CASE("gap increase check is strict for the consistent operator on the cake MDP") {
    FiniteMdp cake = make_cake_mdp({0.5, 0.1});
    GapReport rep =
        check_gap_increasing(cake, {OperatorKind::consistent, 0, 1, 0}, 3, 2000, 31);
    CHECK(rep.passed());
    CHECK(rep.strict_pairs > 0); // 0.1333 vs 0.1 at (x1, a1)

    GapReport bell = check_gap_increasing(cake, {OperatorKind::bellman, 0, 1, 0}, 3, 2000, 31);
    CHECK(bell.passed());
    CHECK(bell.strict_pairs == 0); // equality everywhere for T
}

TEST_CASE("contraction ratios stay below gamma") {
    FiniteMdp cake = make_cake_mdp({0.5, 0.1});
    double ratio = check_contraction(cake, {OperatorKind::consistent, 0, 1, 0}, 1000, 41);
    CHECK(ratio <= 0.5 + 1e-9);
    CHECK(ratio > 0.0);

    for (int i = 0; i < 5; ++i) {
        FiniteMdp mdp = make_random_mdp(small_corpus(i));
        CHECK(check_contraction(mdp, {OperatorKind::bellman, 0, 1, 0}, 200, 43L + i) <=
              mdp.discount + 1e-9);
    }
    CHECK_THROWS_AS(check_contraction(cake, {OperatorKind::lazy, 0.5, 1, 0}, 10, 1),
                    std::invalid_argument);
}

TEST_CASE("lazy operator admits multiple fixed points on the cake MDP") {
    FiniteMdp cake = make_cake_mdp({0.5, 0.1});
    GroundTruth gt = exhaustive_policy_search(cake);
    const double alpha = 0.5;

    QTable fix1 = lazy_backup(cake, gt.q_star, alpha);
    for (std::size_t j = 0; j < fix1.values.size(); ++j)
        CHECK(std::fabs(fix1.values[j] - gt.q_star.values[j]) <= 1e-12);

    QTable q2 = gt.q_star;
    q2(0, 0) -= 0.05; // deeper devaluation, still inside both guards
    QTable fix2 = lazy_backup(cake, q2, alpha);
    for (std::size_t j = 0; j < fix2.values.size(); ++j)
        CHECK(std::fabs(fix2.values[j] - q2.values[j]) <= 1e-12);
}
