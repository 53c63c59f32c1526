#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "maxstable/rng.hpp"
#include "maxstable/stats.hpp"

using namespace maxstable;

TEST_CASE("interpolated quantile convention") {
    std::vector<double> values;
    for (int i = 1; i <= 100; ++i) values.push_back(static_cast<double>(i));
    REQUIRE(empirical_quantile(values, 0.95) == Catch::Approx(95.05));
    REQUIRE(empirical_quantile(values, 0.0) == Catch::Approx(1.0));
    REQUIRE(empirical_quantile(values, 1.0) == Catch::Approx(100.0));
}

TEST_CASE("ks distance of uniforms against the uniform CDF is small") {
    RngStream rng(17, 0);
    std::vector<double> sample;
    for (int i = 0; i < 50000; ++i) sample.push_back(rng.uniform());
    double d = ks_distance(sample, [](double x) { return std::clamp(x, 0.0, 1.0); });
    REQUIRE(d < 0.01);
}

TEST_CASE("ks distance flags a wrong distribution") {
    RngStream rng(18, 0);
    std::vector<double> sample;
    for (int i = 0; i < 20000; ++i) sample.push_back(rng.uniform() * rng.uniform());
    double d = ks_distance(sample, [](double x) { return std::clamp(x, 0.0, 1.0); });
    REQUIRE(d > 0.1);
}

TEST_CASE("two-sample ks distance") {
    RngStream rng(19, 0);
    std::vector<double> a, b;
    for (int i = 0; i < 20000; ++i) {
        a.push_back(rng.uniform());
        b.push_back(rng.uniform());
    }
    REQUIRE(ks_distance_two_sample(a, b) < 0.02);
}

TEST_CASE("spearman rho catches monotone association and independence") {
    RngStream rng(20, 0);
    std::vector<double> x, y_dep, y_ind;
    for (int i = 0; i < 20000; ++i) {
        double u = rng.uniform();
        x.push_back(u);
        y_dep.push_back(u * u);
        y_ind.push_back(rng.uniform());
    }
    REQUIRE(spearman_rho(x, y_dep) == Catch::Approx(1.0));
    REQUIRE(std::abs(spearman_rho(x, y_ind)) < 0.03);
}

TEST_CASE("pairwise sum is deterministic and accurate") {
    std::vector<double> v(100001, 0.1);
    double s = pairwise_sum(v);
    REQUIRE(s == Catch::Approx(10000.1).epsilon(1e-12));
    REQUIRE(pairwise_sum(v) == s);
}
