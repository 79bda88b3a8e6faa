#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gapcore/grid.hpp"
#include "gapcore/rng.hpp"

#include <array>
#include <cmath>
#include <map>

using namespace gapcore;

TEST_CASE("grid construction and node enumeration") {
    GridScheme grid({0.0, -1.0}, {2.0, 1.0}, {3, 5});
    CHECK(grid.node_count == 15);
    CHECK(grid.step(0) == 1.0);
    CHECK(grid.step(1) == 0.5);
    numvec p = grid.node_point(0);
    CHECK(p[0] == 0.0);
    CHECK(p[1] == -1.0);
    p = grid.node_point(grid.node_count - 1);
    CHECK(p[0] == 2.0);
    CHECK(p[1] == 1.0);

    CHECK_THROWS_AS(GridScheme({0.0}, {0.0}, {2}), std::invalid_argument);
    CHECK_THROWS_AS(GridScheme({0.0}, {1.0}, {1}), std::invalid_argument);
}

TEST_CASE("weights at a node collapse to a single entry") {
    GridScheme grid({-1.0, 0.0, 3.0}, {1.0, 10.0, 4.5}, {4, 3, 7});
    for (int64_t z = 0; z < grid.node_count; ++z) {
        auto w = interpolation_weights(grid, grid.node_point(z));
        REQUIRE(w.size() == 1);
        CHECK(w[0].node == z);
        CHECK(w[0].weight == 1.0);
    }
}

TEST_CASE("cell-centre weights in 2d are all one quarter") {
    GridScheme grid({0.0, 0.0}, {1.0, 1.0}, {2, 2});
    std::array<double, 2> x{0.5, 0.5};
    auto w = interpolation_weights(grid, x);
    REQUIRE(w.size() == 4);
    for (const auto& e : w) CHECK(e.weight == 0.25);
}

TEST_CASE("2d unit-cell weights at (0.25, 0.75)") {
    GridScheme grid({0.0, 0.0}, {1.0, 1.0}, {2, 2});
    std::array<double, 2> x{0.25, 0.75};
    auto w = interpolation_weights(grid, x);
    REQUIRE(w.size() == 4);
    // Corner order follows node indices: (0,0), (0,1), (1,0), (1,1) with the
    // second dimension fastest.
    std::map<int64_t, double> by_node;
    for (const auto& e : w) by_node[e.node] = e.weight;
    CHECK(by_node[0] == doctest::Approx(0.1875).epsilon(1e-15)); // (1-a)(1-b)
    CHECK(by_node[1] == doctest::Approx(0.5625).epsilon(1e-15)); // (1-a) b
    CHECK(by_node[2] == doctest::Approx(0.0625).epsilon(1e-15)); // a (1-b)
    CHECK(by_node[3] == doctest::Approx(0.1875).epsilon(1e-15)); // a b
}

TEST_CASE("points outside the bounds are clamped") {
    GridScheme grid({0.0}, {1.0}, {3});
    auto w = interpolation_weights(grid, std::array<double, 1>{7.0});
    REQUIRE(w.size() == 1);
    CHECK(w[0].node == 2);
    CHECK(w[0].weight == 1.0);
    w = interpolation_weights(grid, std::array<double, 1>{-3.0});
    REQUIRE(w.size() == 1);
    CHECK(w[0].node == 0);
}

TEST_CASE("partition of unity and nonnegativity over random points") {
    // 1e5 points per configuration, including far outside the bounds.
    std::vector<GridScheme> grids;
    grids.emplace_back(numvec{0.0}, numvec{1.0}, indvec{5});
    grids.emplace_back(numvec{-2.0, 1.0}, numvec{3.0, 9.0}, indvec{4, 6});
    grids.emplace_back(numvec{-1.0, -1.0, -1.0, -1.0}, numvec{1.0, 1.0, 1.0, 1.0},
                       indvec{3, 3, 3, 3});
    Rng rng(71);
    std::vector<WeightEntry> w;
    for (const auto& grid : grids) {
        for (int i = 0; i < 100000; ++i) {
            numvec x(grid.dims);
            for (int d = 0; d < grid.dims; ++d)
                x[d] = rng.uniform(grid.lower[d] - 1.0, grid.upper[d] + 1.0);
            interpolation_weights(grid, x, w);
            CHECK(w.size() <= (1u << grid.dims));
            double sum = 0.0;
            for (const auto& e : w) {
                CHECK(e.weight > 0.0);
                sum += e.weight;
            }
            if (std::fabs(sum - 1.0) > 1e-12) {
                CAPTURE(grid.dims);
                REQUIRE(std::fabs(sum - 1.0) <= 1e-12);
            }
        }
    }
}

TEST_CASE("q_interpolate") {
    GridScheme grid({0.0}, {1.0}, {2});
    QTable qz(2, 2);
    qz(0, 0) = 0.0;
    qz(1, 0) = 10.0;
    qz(0, 1) = -1.0;
    qz(1, 1) = -1.0;

    SUBCASE("reproduces node values") {
        CHECK(q_interpolate(grid, qz, grid.node_point(1), 0) == 10.0);
    }
    SUBCASE("linear in 1d") {
        CHECK(q_interpolate(grid, qz, std::array<double, 1>{0.3}, 0) ==
              doctest::Approx(3.0).epsilon(1e-15));
    }
    SUBCASE("constant tables interpolate to the constant") {
        Rng rng(5);
        for (int i = 0; i < 100; ++i) {
            double x = rng.uniform(-0.5, 1.5);
            CHECK(q_interpolate(grid, qz, std::array<double, 1>{x}, 1) ==
                  doctest::Approx(-1.0).epsilon(1e-15));
        }
    }
    SUBCASE("node count mismatch throws") {
        QTable wrong(3, 2);
        CHECK_THROWS_AS(q_interpolate(grid, wrong, std::array<double, 1>{0.5}, 0),
                        std::invalid_argument);
    }
}
