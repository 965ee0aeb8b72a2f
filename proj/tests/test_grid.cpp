#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fracvar/grid.hpp"

using namespace fracvar;

TEST_CASE("uniform-in-t grid with rho=1", "[grid]") {
    GridPtr g = make_grid(1.0, 2.0, 2, 1.0, Spacing::UniformInT);
    REQUIRE(g->nodes.size() == 3);
    CHECK(g->nodes[0] == 1.0);
    CHECK(g->nodes[1] == Catch::Approx(1.5).margin(1e-15));
    CHECK(g->nodes[2] == 2.0);
    CHECK(g->s_nodes[1] == Catch::Approx(1.5).margin(1e-14));
    CHECK(g->uniform_s);
}

TEST_CASE("uniform-in-s grid spaces the transformed nodes evenly", "[grid]") {
    GridPtr g = make_grid(1.0, 2.0, 2, 2.0, Spacing::UniformInS);
    CHECK(g->s_nodes[0] == Catch::Approx(1.0).margin(1e-14));
    CHECK(g->s_nodes[1] == Catch::Approx(2.5).margin(1e-14));
    CHECK(g->s_nodes[2] == Catch::Approx(4.0).margin(1e-14));
    CHECK(g->nodes[1] == Catch::Approx(std::sqrt(2.5)).margin(1e-14));
    CHECK(g->nodes[2] == 2.0);
}

TEST_CASE("grid rejects invalid parameters", "[grid]") {
    CHECK_THROWS_AS(make_grid(0.0, 1.0, 8, 0.5), DomainError);
    CHECK_THROWS_AS(make_grid(-1.0, 1.0, 8, 1.0), DomainError);
    CHECK_THROWS_AS(make_grid(2.0, 1.0, 8, 1.0), DomainError);
    CHECK_THROWS_AS(make_grid(1.0, 2.0, 1, 1.0), DomainError);
    CHECK_THROWS_AS(make_grid(1.0, 2.0, 8, 0.0), DomainError);
    CHECK_THROWS_AS(make_grid(1.0, 2.0, 8, -2.0), DomainError);
}

TEST_CASE("s_nodes equal nodes^rho to working precision", "[grid]") {
    for (double rho : {0.3, 1.0, 2.5}) {
        GridPtr g = make_grid(1.0, 3.0, 64, rho, Spacing::UniformInS);
        for (std::size_t k = 0; k <= g->n; ++k) {
            const double expect = std::pow(g->nodes[k], rho);
            CHECK(g->s_nodes[k] == Catch::Approx(expect).epsilon(1e-13));
            if (k > 0) CHECK(g->nodes[k] > g->nodes[k - 1]);
        }
    }
}

TEST_CASE("rho=1 makes both spacings coincide", "[grid]") {
    GridPtr gt = make_grid(1.0, 2.0, 16, 1.0, Spacing::UniformInT);
    GridPtr gs = make_grid(1.0, 2.0, 16, 1.0, Spacing::UniformInS);
    for (std::size_t k = 0; k <= 16; ++k)
        CHECK(gt->nodes[k] == Catch::Approx(gs->nodes[k]).margin(1e-15));
}

TEST_CASE("trapezoid rule basics", "[grid]") {
    GridPtr g = make_grid(1.0, 2.0, 4, 1.0, Spacing::UniformInT);

    std::vector<double> ones(5, 1.0);
    CHECK(quad_trapezoid(ones, *g) == Catch::Approx(1.0).margin(1e-15));

    std::vector<double> lin(5);
    for (std::size_t k = 0; k <= 4; ++k) lin[k] = g->nodes[k];
    CHECK(quad_trapezoid(lin, *g) == Catch::Approx(1.5).margin(1e-15));

    std::vector<double> bad(4, 0.0);
    CHECK_THROWS_AS(quad_trapezoid(bad, *g), DomainError);
}

TEST_CASE("trapezoid quadratic convergence against antiderivative", "[grid]") {
    auto value = [](std::size_t n) {
        GridPtr g = make_grid(1.0, 2.0, n, 1.0, Spacing::UniformInT);
        std::vector<double> f(n + 1);
        for (std::size_t k = 0; k <= n; ++k) f[k] = g->nodes[k] * g->nodes[k];
        return quad_trapezoid(f, *g);
    };
    const double exact = 7.0 / 3.0;
    CHECK(std::abs(value(128) - exact) < 1e-4);
    const double e1 = std::abs(value(64) - exact);
    const double e2 = std::abs(value(128) - exact);
    CHECK(e1 / e2 == Catch::Approx(4.0).epsilon(0.05));
}

TEST_CASE("refinement consistency on a non-uniform-in-t grid", "[grid]") {
    auto value = [](std::size_t n) {
        GridPtr g = make_grid(1.0, 2.0, n, 2.0, Spacing::UniformInS);
        std::vector<double> f(n + 1);
        for (std::size_t k = 0; k <= n; ++k) f[k] = std::sin(g->nodes[k]);
        return quad_trapezoid(f, *g);
    };
    const double d1 = std::abs(value(64) - value(128));
    const double d2 = std::abs(value(128) - value(256));
    CHECK(d1 / d2 == Catch::Approx(4.0).epsilon(0.1));
}

TEST_CASE("sampled function layout", "[grid]") {
    GridPtr g = make_grid(1.0, 2.0, 4, 1.0);
    SampledFunction f(g, 2);
    REQUIRE(f.values.size() == 10);
    f.at(1, 3) = 7.0;
    CHECK(f.comp(1)[3] == 7.0);
    CHECK(f.comp(0)[3] == 0.0);
}
