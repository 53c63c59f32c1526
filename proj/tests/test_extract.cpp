#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "maxstable/extract.hpp"
#include "maxstable/simulate.hpp"
#include "maxstable/stats.hpp"

using namespace maxstable;

TEST_CASE("threshold policies") {
    REQUIRE(choose_threshold_power(10000, 0.5) == Catch::Approx(100.0));
    std::vector<double> stats;
    for (int i = 1; i <= 100; ++i) stats.push_back(static_cast<double>(i));
    REQUIRE(choose_threshold_quantile(stats, 0.95) == Catch::Approx(95.05));
    REQUIRE_THROWS_AS(choose_threshold_power(100, 1.5), std::invalid_argument);
    // n / a(n) = n^(1-rho) grows without bound
    REQUIRE(10000.0 / choose_threshold_power(10000, 0.5) == Catch::Approx(100.0));
}

namespace {
std::vector<Field> make_replicates(const Grid& g, const std::vector<std::vector<double>>& rows) {
    std::vector<Field> reps;
    for (const auto& row : rows) {
        Field f(g);
        f.values = row;
        reps.push_back(std::move(f));
    }
    return reps;
}
}

TEST_CASE("increments selection is strict at the threshold and self-normalized") {
    Grid g = Grid::line(0.0, 2.0, 1.0);
    auto reps = make_replicates(g, {{5.0, 2.0, 1.0},    // selected
                                    {4.0, 1.0, 8.0},    // boundary: equals a_n, not selected
                                    {3.0, 9.0, 2.0},    // below threshold at t0
                                    {16.0, 4.0, 2.0}}); // selected
    ExtremeEventSet set = extract_increments(reps, {0, 0}, 4.0);
    REQUIRE(set.selection == std::vector<std::size_t>{0, 3});
    for (const Field& s : set.samples) REQUIRE(s.at({0, 0}) == 1.0);
    REQUIRE(set.samples[0].values[1] == Catch::Approx(0.4));
    REQUIRE(set.exceedances[0] == Catch::Approx(1.25));
    REQUIRE(set.exceedances[1] == Catch::Approx(4.0));
}

TEST_CASE("raising the threshold shrinks the selection monotonically") {
    Grid g = Grid::line(0.0, 1.0, 1.0);
    std::vector<Field> reps;
    for (int rep = 0; rep < 2000; ++rep) {
        RngStream rng(500, static_cast<std::uint64_t>(rep));
        Field f(g);
        f.values = {1.0 / rng.exponential(), 1.0 / rng.exponential()};
        reps.push_back(std::move(f));
    }
    ExtremeEventSet low = extract_increments(reps, {0, 0}, 5.0);
    ExtremeEventSet high = extract_increments(reps, {0, 0}, 20.0);
    REQUIRE(high.selection.size() < low.selection.size());
    for (std::size_t idx : high.selection)
        REQUIRE(std::find(low.selection.begin(), low.selection.end(), idx) != low.selection.end());
}

TEST_CASE("increment exceedances of a Frechet statistic are Pareto") {
    Grid g = Grid::line(0.0, 1.0, 1.0);
    std::vector<Field> reps;
    const int n = 50000;
    for (int rep = 0; rep < n; ++rep) {
        RngStream rng(501, static_cast<std::uint64_t>(rep));
        double xi0 = 1.0 / rng.exponential();
        Field f(g);
        f.values = {xi0, xi0 * rng.uniform()};
        reps.push_back(std::move(f));
    }
    std::vector<double> stats;
    for (const Field& f : reps) stats.push_back(f.values[0]);
    double a_n = choose_threshold_quantile(stats, 0.95);
    ExtremeEventSet set = extract_increments(reps, {0, 0}, a_n);
    REQUIRE(set.selection.size() > 2000);
    int above2 = 0;
    for (double z : set.exceedances) {
        REQUIRE(z >= 1.0);
        if (z > 2.0) ++above2;
    }
    REQUIRE(above2 / static_cast<double>(set.exceedances.size()) ==
            Catch::Approx(0.5).margin(0.03));
}

TEST_CASE("single-storm field recovers the normalized shape exactly") {
    Grid g = Grid::line(-5.0, 5.0, 0.25);
    ShapeModel shape = ShapeModel::gaussian(1.0);
    const double u = 7.0;
    const double center = 0.75;  // on-lattice
    Field f(g);
    for (std::size_t i = 0; i < g.size(); ++i)
        f.values[i] = u * shape.eval(g.coord(g.unflatten(i))[0] - center);
    IndexBox Q{{12, 0}, {28, 0}};
    IndexBox L = IndexBox::radius(8);
    IndexBox K = IndexBox::radius(8);
    ExtremeEventSet set = extract_shapes({f}, Q, L, K, 1.0);
    REQUIRE(set.selection.size() == 1);
    const Field& sample = set.samples[0];
    REQUIRE(sample.grid.npts[0] == 17);
    for (int k = -8; k <= 8; ++k) {
        double expected = quantize_sample_value(shape.eval(0.25 * k) / shape.lambda());
        REQUIRE(sample.at({k + 8, 0}) == expected);
    }
    REQUIRE(sample.at({8, 0}) == 1.0);
}

TEST_CASE("replicates whose maximum escapes Q are rejected") {
    Grid g = Grid::line(0.0, 10.0, 1.0);
    Field f(g, 0.1);
    f.at({9, 0}) = 50.0;  // max lives in (Q + L) \ Q
    IndexBox Q{{3, 0}, {6, 0}};
    IndexBox L = IndexBox::radius(3);
    ExtremeEventSet set = extract_shapes({f}, Q, L, IndexBox::radius(1), 1.0);
    REQUIRE(set.selection.empty());
}

TEST_CASE("boundary replicates are dropped and counted") {
    Grid g = Grid::line(0.0, 10.0, 1.0);
    Field f(g, 0.1);
    f.at({1, 0}) = 50.0;
    IndexBox Q{{1, 0}, {9, 0}};
    IndexBox L{{-1, 0}, {1, 0}};
    ExtremeEventSet set = extract_shapes({f}, Q, L, IndexBox::radius(3), 1.0);
    REQUIRE(set.selection.empty());
    REQUIRE(set.dropped_boundary == 1);
}

TEST_CASE("shapes samples equal one at their shifted origin and obey the local-max event") {
    Grid g = Grid::line(-4.0, 4.0, 0.5);
    ShapeDistribution shapes{ShapeModel::gaussian(1.0)};
    SimConfig cfg;
    cfg.seed = 321;
    std::vector<Field> reps;
    for (int rep = 0; rep < 2000; ++rep) {
        cfg.stream_id = static_cast<std::uint64_t>(rep);
        reps.push_back(simulate_m3(shapes, g, 3.0, cfg).field);
    }
    IndexBox Q{{4, 0}, {12, 0}};
    IndexBox L = IndexBox::radius(4);
    IndexBox K = IndexBox::radius(4);
    ExtremeEventSet set = extract_shapes(reps, Q, L, K, 1.0);
    REQUIRE(set.selection.size() > 50);
    for (const Field& s : set.samples) {
        REQUIRE(s.at({4, 0}) == 1.0);
        for (double v : s.values) REQUIRE(v <= 1.0);
    }
}

TEST_CASE("discrete extraction keeps local maxima with ratios at most one inside L") {
    Grid g = Grid::lattice({0, 0}, {12, 0}, 1);
    std::vector<Field> reps;
    for (int rep = 0; rep < 500; ++rep) {
        RngStream rng(777, static_cast<std::uint64_t>(rep));
        Field f(g);
        for (double& v : f.values) v = 1.0 / rng.exponential();
        reps.push_back(std::move(f));
    }
    GridIndex t0{6, 0};
    IndexBox L = IndexBox::radius(2);
    IndexBox K = IndexBox::radius(2);
    ExtremeEventSet set = extract_shapes_discrete(reps, t0, L, K, 2.0);
    REQUIRE(!set.selection.empty());
    for (const Field& s : set.samples) {
        REQUIRE(s.at({2, 0}) == 1.0);
        for (double v : s.values) REQUIRE(v <= 1.0);
    }
    // one-site shape: ratios vanish away from the anchor
    LatticeShape site = LatticeShape::from_values(1, IndexBox{{0, 0}, {0, 0}}, {1.0});
    LatticeShapeDistribution dist(site);
    SimConfig cfg;
    cfg.seed = 778;
    std::vector<Field> lattice_reps;
    for (int rep = 0; rep < 3000; ++rep) {
        cfg.stream_id = static_cast<std::uint64_t>(rep);
        lattice_reps.push_back(simulate_m3_discrete(dist, IndexBox{{0, 0}, {12, 0}}, 1, cfg).field);
    }
    ExtremeEventSet sparse = extract_shapes_discrete(lattice_reps, t0, L, K, 3.0);
    REQUIRE(!sparse.selection.empty());
    for (const Field& s : sparse.samples)
        for (std::size_t i = 0; i < s.values.size(); ++i)
            if (i != 2) REQUIRE(s.values[i] < 1.0);
}

TEST_CASE("scaling replicates and threshold by 3 leaves extraction outputs bitwise unchanged") {
    Grid g = Grid::line(-4.0, 4.0, 0.5);
    ShapeDistribution shapes{ShapeModel::gaussian(1.0)};
    SimConfig cfg;
    cfg.seed = 911;
    std::vector<Field> reps, scaled;
    for (int rep = 0; rep < 1000; ++rep) {
        cfg.stream_id = static_cast<std::uint64_t>(rep);
        Field f = simulate_m3(shapes, g, 3.0, cfg).field;
        Field f3 = f;
        for (double& v : f3.values) v *= 3.0;
        reps.push_back(std::move(f));
        scaled.push_back(std::move(f3));
    }
    const double a_n = 2.0;

    ExtremeEventSet base_inc = extract_increments(reps, {8, 0}, a_n);
    ExtremeEventSet scaled_inc = extract_increments(scaled, {8, 0}, 3.0 * a_n);
    REQUIRE(base_inc.selection == scaled_inc.selection);
    REQUIRE(base_inc.samples.size() == scaled_inc.samples.size());
    for (std::size_t i = 0; i < base_inc.samples.size(); ++i)
        REQUIRE(base_inc.samples[i].values == scaled_inc.samples[i].values);
    REQUIRE(base_inc.exceedances == scaled_inc.exceedances);

    IndexBox Q{{4, 0}, {12, 0}};
    ExtremeEventSet base_sh = extract_shapes(reps, Q, IndexBox::radius(4), IndexBox::radius(4), a_n);
    ExtremeEventSet scaled_sh =
        extract_shapes(scaled, Q, IndexBox::radius(4), IndexBox::radius(4), 3.0 * a_n);
    REQUIRE(base_sh.selection == scaled_sh.selection);
    for (std::size_t i = 0; i < base_sh.samples.size(); ++i)
        REQUIRE(base_sh.samples[i].values == scaled_sh.samples[i].values);
}
