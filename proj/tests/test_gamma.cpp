#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fracvar/gamma.hpp"



TEST_CASE("gamma at integers and half-integers", "[gamma]") {
    CHECK(fracvar::gamma(1.0) == Catch::Approx(1.0).epsilon(1e-14));
    CHECK(fracvar::gamma(2.0) == Catch::Approx(1.0).epsilon(1e-14));
    CHECK(fracvar::gamma(5.0) == Catch::Approx(24.0).epsilon(1e-13));
    CHECK(fracvar::gamma(0.5) == Catch::Approx(std::sqrt(M_PI)).epsilon(1e-13));
    // 2.5 -> 1.5 * 0.5 * sqrt(pi)
    CHECK(fracvar::gamma(2.5) == Catch::Approx(1.3293403881791370).epsilon(1e-13));
}

TEST_CASE("gamma rejects non-positive arguments", "[gamma]") {
    CHECK_THROWS_AS(fracvar::gamma(0.0), fracvar::DomainError);
    CHECK_THROWS_AS(fracvar::gamma(-1.5), fracvar::DomainError);
}

TEST_CASE("gamma recurrence on (0,30]", "[gamma]") {
    for (double z = 0.07; z < 29.0; z += 0.231) {
        const double lhs = fracvar::gamma(z + 1.0);
        const double rhs = z * fracvar::gamma(z);
        CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(lhs));
    }
}

TEST_CASE("gamma matches libm tgamma", "[gamma]") {
    for (double z = 0.05; z < 30.0; z += 0.173) {
        const double ref = std::tgamma(z);
        CHECK(std::abs(fracvar::gamma(z) - ref) <= 1e-12 * std::abs(ref));
    }
}
