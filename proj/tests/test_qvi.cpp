#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gapcore/domains.hpp"
#include "gapcore/parallel.hpp"
#include "gapcore/qvi.hpp"
#include "gapcore/rng.hpp"

#include <cmath>
#include <cstring>

using namespace gapcore;

namespace {

// Indicator-form consistent backup, duplicated here as the cross-module
// reference for the identity-embedding checks.
QTable consistent_indicator_form(const FiniteMdp& mdp, const QTable& q) {
    numvec v = state_values(q);
    QTable out(mdp.n_states, mdp.n_actions);
    for (int x = 0; x < mdp.n_states; ++x)
        for (int a = 0; a < mdp.n_actions; ++a) {
            double ev = 0.0;
            for (int y = 0; y < mdp.n_states; ++y)
                ev += mdp.p(x, a, y) * (y == x ? q(x, a) : v[y]);
            out(x, a) = mdp.r(x, a) + mdp.discount * ev;
        }
    return out;
}

// Deterministic +-1 walk on a 1-d node grid, landing exactly on nodes.
SamplerHandle walk_sampler(const GridScheme& grid) {
    SamplerHandle s;
    s.sample_count = 1;
    s.step = [&grid](std::span<const double> x, int action, int, Rng&,
                     std::span<double> next, double& reward, bool& terminal) {
        double h = grid.step(0);
        double target = x[0] + (action == 0 ? -h : h);
        if (target < grid.lower[0]) target = grid.lower[0];
        if (target > grid.upper[0]) target = grid.upper[0];
        next[0] = target;
        reward = 0.1 * x[0] + action;
        terminal = false;
    };
    return s;
}

} // namespace

TEST_CASE("zero discount returns observed rewards exactly") {
    GridScheme grid({0.0}, {4.0}, {5});
    QTable qz(5, 2, 3.0);
    QTable out = qvi_backup(grid, qz, walk_sampler(grid), 0.0);
    for (int z = 0; z < 5; ++z)
        for (int a = 0; a < 2; ++a)
            CHECK(out(z, a) == 0.1 * grid.node_point(z)[0] + a);
}

TEST_CASE("on-node deterministic sampler matches the induced tabular backup") {
    GridScheme grid({0.0}, {4.0}, {5});
    auto step = [&grid](std::span<const double> x, int action, std::span<double> next,
                        double& reward) {
        double h = grid.step(0);
        double target = x[0] + (action == 0 ? -h : h);
        if (target < grid.lower[0]) target = grid.lower[0];
        if (target > grid.upper[0]) target = grid.upper[0];
        next[0] = target;
        reward = 0.1 * x[0] + action;
    };
    FiniteMdp induced = induced_mdp(grid, 2, 0.9, step);
    CHECK(validate_mdp(induced).empty());

    // Hand-built reference: the walk is deterministic, so P' is a 0/1 table.
    FiniteMdp reference(5, 2, 0.9);
    for (int z = 0; z < 5; ++z)
        for (int a = 0; a < 2; ++a) {
            int target = a == 0 ? std::max(0, z - 1) : std::min(4, z + 1);
            reference.p(z, a, target) = 1.0;
            reference.r(z, a) = 0.1 * grid.node_point(z)[0] + a;
        }
    CHECK(std::memcmp(induced.transition.data(), reference.transition.data(),
                      induced.transition.size() * sizeof(double)) == 0);

    Rng rng(3);
    QTable qz(5, 2);
    for (double& v : qz.values) v = rng.uniform(-2.0, 2.0);
    QTable via_samples = qvi_backup(grid, qz, walk_sampler(grid), 0.9);
    QTable via_tabular = bellman_backup(induced, qz);
    for (std::size_t j = 0; j < via_samples.values.size(); ++j)
        CHECK(std::fabs(via_samples.values[j] - via_tabular.values[j]) <= 1e-12);
}

TEST_CASE("aggregated backup orders and reduces correctly") {
    GridScheme grid({0.0}, {4.0}, {5});
    auto step = [&grid](std::span<const double> x, int action, std::span<double> next,
                        double& reward) {
        // midpoint moves exercise genuine interpolation in P'
        next[0] = x[0] + (action == 0 ? -0.5 : 0.5) * grid.step(0);
        if (next[0] < grid.lower[0]) next[0] = grid.lower[0];
        if (next[0] > grid.upper[0]) next[0] = grid.upper[0];
        reward = action == 0 ? -0.2 : 0.3;
    };
    FiniteMdp induced = induced_mdp(grid, 2, 0.9, step);
    CHECK(validate_mdp(induced).empty());

    Rng rng(7);
    QTable qz(5, 2);
    for (double& v : qz.values) v = rng.uniform(-1.0, 1.0);
    QTable plain = aggregated_backup(induced, qz, false);
    QTable consistent = aggregated_backup(induced, qz, true);
    QTable reference = bellman_backup(induced, qz);
    for (std::size_t j = 0; j < plain.values.size(); ++j) {
        CHECK(plain.values[j] == reference.values[j]);
        CHECK(consistent.values[j] <= plain.values[j] + 1e-12);
    }
}

TEST_CASE("interpolated backup never exceeds the induced tabular backup") {
    // Convexity of the max: max_b sum_w Q <= sum_w max_b Q pointwise, so
    // Q-value interpolation lower-bounds the aggregation backup whenever the
    // samples reproduce the exact expectation (deterministic dynamics here).
    GridScheme grid({0.0}, {4.0}, {5});
    auto step = [&grid](std::span<const double> x, int action, std::span<double> next,
                        double& reward) {
        next[0] = x[0] + (action == 0 ? -0.7 : 0.7) * grid.step(0);
        if (next[0] < grid.lower[0]) next[0] = grid.lower[0];
        if (next[0] > grid.upper[0]) next[0] = grid.upper[0];
        reward = 0.05 * action;
    };
    FiniteMdp induced = induced_mdp(grid, 2, 0.9, step);
    SamplerHandle sampler;
    sampler.sample_count = 1;
    sampler.step = [&step](std::span<const double> x, int action, int, Rng&,
                           std::span<double> next, double& reward, bool& terminal) {
        step(x, action, next, reward);
        terminal = false;
    };
    Rng rng(37);
    for (int trial = 0; trial < 20; ++trial) {
        QTable qz(5, 2);
        for (double& v : qz.values) v = rng.uniform(-3.0, 3.0);
        QTable via_interp = qvi_backup(grid, qz, sampler, 0.9);
        QTable via_tabular = bellman_backup(induced, qz);
        for (std::size_t j = 0; j < via_interp.values.size(); ++j)
            CHECK(via_interp.values[j] <= via_tabular.values[j] + 1e-12);
    }
}

TEST_CASE("fixed seed gives bit-identical tables across runs and thread counts") {
    GridScheme grid({0.0}, {1.0}, {3000});
    SamplerHandle noisy;
    noisy.sample_count = 4;
    noisy.seed = 99;
    noisy.step = [](std::span<const double> x, int, int, Rng& rng, std::span<double> next,
                    double& reward, bool& terminal) {
        next[0] = x[0] + rng.uniform(-0.1, 0.1);
        reward = rng.uniform(-1.0, 1.0);
        terminal = rng.next_double() < 0.05;
    };
    QTable qz(3000, 2);
    Rng rng(1);
    for (double& v : qz.values) v = rng.uniform(-1.0, 1.0);

    set_max_threads(1);
    QTable serial = cqvi_backup(grid, qz, noisy, 0.9, 3);
    QTable again = cqvi_backup(grid, qz, noisy, 0.9, 3);
    set_max_threads(2);
    QTable parallel = cqvi_backup(grid, qz, noisy, 0.9, 3);
    set_max_threads(0);

    CHECK(std::memcmp(serial.values.data(), again.values.data(),
                      serial.values.size() * sizeof(double)) == 0);
    CHECK(std::memcmp(serial.values.data(), parallel.values.data(),
                      serial.values.size() * sizeof(double)) == 0);

    // Different sweep indices draw different streams.
    QTable other_sweep = cqvi_backup(grid, qz, noisy, 0.9, 4);
    CHECK(std::memcmp(serial.values.data(), other_sweep.values.data(),
                      serial.values.size() * sizeof(double)) != 0);
}

TEST_CASE("consistent term reduces to the plain backup when A(z|x') = 0") {
    GridScheme grid({0.0}, {4.0}, {5});
    // Jump two cells away: the source node never appears among the corners.
    SamplerHandle far;
    far.sample_count = 1;
    far.step = [&grid](std::span<const double> x, int, int, Rng&, std::span<double> next,
                       double& reward, bool& terminal) {
        next[0] = x[0] >= 2.0 ? x[0] - 2.0 : x[0] + 2.0;
        reward = 0.5;
        terminal = false;
    };
    Rng rng(11);
    QTable qz(5, 2);
    for (double& v : qz.values) v = rng.uniform(-2.0, 2.0);
    QTable plain = qvi_backup(grid, qz, far, 0.9);
    QTable cons = qvi_consistent_term(grid, qz, far, 0.9);
    for (std::size_t j = 0; j < plain.values.size(); ++j)
        CHECK(plain.values[j] == cons.values[j]);
}

TEST_CASE("self-loop sampler reduces the consistent term to the tabular form") {
    GridScheme grid({0.0}, {1.0}, {2});
    SamplerHandle loop;
    loop.sample_count = 1;
    loop.step = [](std::span<const double> x, int, int, Rng&, std::span<double> next,
                   double& reward, bool& terminal) {
        next[0] = x[0]; // A(z|x') = 1 at the source node
        reward = 1.0;
        terminal = false;
    };
    Rng rng(13);
    QTable qz(2, 3);
    for (double& v : qz.values) v = rng.uniform(-2.0, 2.0);
    QTable cons = qvi_consistent_term(grid, qz, loop, 0.9);
    for (int z = 0; z < 2; ++z)
        for (int a = 0; a < 3; ++a)
            CHECK(cons(z, a) == doctest::Approx(1.0 + 0.9 * qz(z, a)).epsilon(1e-14));
}

TEST_CASE("cqvi never exceeds qvi and terminal draws keep rewards only") {
    GridScheme grid({0.0, 0.0}, {1.0, 1.0}, {4, 4});
    SamplerHandle s;
    s.sample_count = 3;
    s.seed = 5;
    s.step = [](std::span<const double> x, int a, int, Rng& rng, std::span<double> next,
                double& reward, bool& terminal) {
        next[0] = x[0] + rng.uniform(-0.3, 0.3);
        next[1] = x[1] + rng.uniform(-0.3, 0.3);
        reward = 0.1 * a;
        terminal = rng.next_double() < 0.5;
    };
    Rng rng(17);
    QTable qz(16, 2);
    for (double& v : qz.values) v = rng.uniform(-3.0, 3.0);
    QTable plain = qvi_backup(grid, qz, s, 0.9);
    QTable combined = cqvi_backup(grid, qz, s, 0.9);
    for (std::size_t j = 0; j < plain.values.size(); ++j)
        CHECK(combined.values[j] <= plain.values[j]);

    SamplerHandle always_terminal;
    always_terminal.sample_count = 2;
    always_terminal.step = [](std::span<const double> x, int, int, Rng&,
                              std::span<double> next, double& reward, bool& terminal) {
        next[0] = x[0];
        next[1] = x[1];
        reward = 2.0;
        terminal = true;
    };
    QTable t = qvi_backup(grid, qz, always_terminal, 0.9);
    for (double v : t.values) CHECK(v == 2.0);
}

TEST_CASE("identity-weight cake embedding matches the tabular operators") {
    FiniteMdp cake = make_cake_mdp({0.5, 0.1});
    GridScheme grid({0.0}, {1.0}, {2}); // node z = state z

    // Enumerating sampler: two equal-mass draws reproduce the exact
    // transition expectations of the cake MDP.
    SamplerHandle enumerate;
    enumerate.sample_count = 2;
    enumerate.step = [&cake](std::span<const double> x, int a, int draw, Rng&,
                             std::span<double> next, double& reward, bool& terminal) {
        int z = x[0] > 0.5 ? 1 : 0;
        reward = cake.r(z, a);
        terminal = false;
        if (z == 0 && a == 0) {
            next[0] = draw == 0 ? 0.0 : 1.0; // half to x1, half to x2
        } else {
            next[0] = static_cast<double>(z); // deterministic self-loop
        }
    };

    Rng rng(19);
    QTable qz(2, 2);
    for (double& v : qz.values) v = rng.uniform(-5.0, 5.0);

    QTable qvi = qvi_backup(grid, qz, enumerate, cake.discount);
    QTable qvi_cons = qvi_consistent_term(grid, qz, enumerate, cake.discount);
    QTable combined = cqvi_backup(grid, qz, enumerate, cake.discount);

    QTable bellman = bellman_backup(cake, qz);
    QTable consistent = consistent_indicator_form(cake, qz);

    for (std::size_t j = 0; j < qvi.values.size(); ++j) {
        CHECK(std::fabs(qvi.values[j] - bellman.values[j]) <= 1e-12);
        CHECK(std::fabs(qvi_cons.values[j] - consistent.values[j]) <= 1e-12);
        CHECK(std::fabs(combined.values[j] -
                        std::min(bellman.values[j], consistent.values[j])) <= 1e-12);
    }
}

TEST_CASE("grid AL and PAL keep the optimality-preservation ordering") {
    GridScheme grid({0.0}, {1.0}, {8});
    SamplerHandle s;
    s.sample_count = 2;
    s.seed = 23;
    s.step = [](std::span<const double> x, int a, int, Rng& rng, std::span<double> next,
                double& reward, bool& terminal) {
        next[0] = x[0] + rng.uniform(-0.2, 0.2);
        reward = a == 0 ? 0.0 : 0.05;
        terminal = false;
    };
    Rng rng(29);
    QTable qz(8, 3);
    for (double& v : qz.values) v = rng.uniform(-1.0, 1.0);

    QTable reference = qvi_backup(grid, qz, s, 0.95);
    QTable al = qvi_al_backup(grid, qz, s, 0.95, 0.4);
    QTable pal = qvi_pal_backup(grid, qz, s, 0.95, 0.4);
    for (std::size_t j = 0; j < reference.values.size(); ++j) {
        CHECK(al.values[j] <= reference.values[j]);
        CHECK(pal.values[j] <= reference.values[j]);
        CHECK(pal.values[j] >= al.values[j]);
    }
}
