#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "maxstable/normal.hpp"
#include "maxstable/quadrature.hpp"

using namespace maxstable;

TEST_CASE("Phi at the center") {
    REQUIRE(std_normal_cdf(0.0) == Catch::Approx(0.5));
    REQUIRE(inv_std_normal_cdf(0.5) == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("theta = 2 Phi(sqrt(gamma)/2) equals 1 at gamma = 0") {
    REQUIRE(2.0 * std_normal_cdf(0.0) == Catch::Approx(1.0));
}

TEST_CASE("Phi matches quadrature of the density") {
    // independent oracle: integrate the density from -10 to x
    for (double x : {-4.0, -2.5, -1.0, -0.3, 0.0, 0.7, 1.5, 3.0, 5.0}) {
        double oracle = adaptive_simpson([](double t) { return normal_pdf(t); }, -10.0, x, 1e-13);
        REQUIRE(std_normal_cdf(x) == Catch::Approx(oracle).margin(1e-10));
    }
}

TEST_CASE("quantile round trip on [-6,6]") {
    for (double x = -6.0; x <= 6.0; x += 0.01) {
        double p = std_normal_cdf(x);
        REQUIRE(inv_std_normal_cdf(p) == Catch::Approx(x).margin(1e-6));
    }
}

TEST_CASE("forward round trip |Phi(Phi^-1(p)) - p| stays below 1e-9") {
    for (double lp = -8.0; lp <= -0.31; lp += 0.07) {
        double p = std::pow(10.0, lp);
        REQUIRE(std::abs(std_normal_cdf(inv_std_normal_cdf(p)) - p) < 1e-9);
        REQUIRE(std::abs(std_normal_cdf(inv_std_normal_cdf(1.0 - p)) - (1.0 - p)) < 1e-9);
    }
}

TEST_CASE("quantile rejects p outside (0,1)") {
    REQUIRE_THROWS_AS(inv_std_normal_cdf(0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(inv_std_normal_cdf(1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(inv_std_normal_cdf(-0.5), std::invalid_argument);
}
