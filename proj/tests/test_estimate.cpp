#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "maxstable/estimate.hpp"
#include "maxstable/extract.hpp"
#include "maxstable/quadrature.hpp"
#include "maxstable/simulate.hpp"

using namespace maxstable;

TEST_CASE("logistic increment CDF closed-form values") {
    REQUIRE(logistic_increment_cdf({1.0}, 2.0) == Catch::Approx(std::pow(2.0, -0.5)));
    REQUIRE(logistic_increment_cdf({1e9}, 2.0) == Catch::Approx(1.0).margin(1e-6));
    REQUIRE(logistic_increment_cdf({1.0, 1.0}, 2.0) == Catch::Approx(std::pow(3.0, -0.5)));
    REQUIRE_THROWS_AS(logistic_increment_cdf({1.0}, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(logistic_increment_cdf({-1.0}, 2.0), std::invalid_argument);
}

TEST_CASE("logistic increment density value and finite-difference consistency") {
    // k=1 density (q-1) s^(-q-1) (1+s^-q)^(1/q-2); at s=1, q=2: 2^(-3/2)
    REQUIRE(logistic_increment_density({1.0}, 2.0) == Catch::Approx(std::pow(2.0, -1.5)));
    const double h = 1e-6;
    for (double q : {1.5, 2.0, 3.0}) {
        for (double s : {0.4, 1.0, 2.5}) {
            double fd = (logistic_increment_cdf({s + h}, q) - logistic_increment_cdf({s - h}, q)) /
                        (2.0 * h);
            REQUIRE(logistic_increment_density({s}, q) == Catch::Approx(fd).margin(1e-5));
        }
    }
    // k=2 mixed second derivative
    const double q = 2.0, s1 = 1.2, s2 = 0.8;
    auto cdf = [&](double a, double b) { return logistic_increment_cdf({a, b}, q); };
    double fd2 = (cdf(s1 + h, s2 + h) - cdf(s1 + h, s2 - h) - cdf(s1 - h, s2 + h) +
                  cdf(s1 - h, s2 - h)) /
                 (4.0 * h * h);
    REQUIRE(logistic_increment_density({s1, s2}, q) == Catch::Approx(fd2).margin(1e-4));
}

TEST_CASE("logistic increment density integrates to one for k = 1") {
    for (double q : {1.7, 2.0, 4.0}) {
        double mass = adaptive_simpson(
            [&](double s) { return logistic_increment_density({s}, q); }, 1e-9, 1.0, 1e-10);
        // tail over s > 1 via the CDF: 1 - F(1)
        mass += 1.0 - logistic_increment_cdf({1.0}, q);
        REQUIRE(mass == Catch::Approx(1.0).margin(1e-3));
    }
}

namespace {
ExtremeEventSet increments_set_from_ratios(const std::vector<double>& ratios) {
    Grid g = Grid::line(0.0, 1.0, 1.0);
    ExtremeEventSet set;
    set.kind = ExtremeEventSet::Kind::increments;
    set.anchor = {0, 0};
    set.threshold = 1.0;
    for (std::size_t i = 0; i < ratios.size(); ++i) {
        Field f(g);
        f.values = {1.0, ratios[i]};
        set.samples.push_back(std::move(f));
        set.exceedances.push_back(1.0);
        set.selection.push_back(i);
    }
    return set;
}
}

TEST_CASE("single-sample MLE sits at a stationary point of the likelihood") {
    ExtremeEventSet set = increments_set_from_ratios({0.8});
    EstimateResult r = logistic_mle(set, 1.1, 8.0);
    double h = 1e-4;
    double up = logistic_increment_density({0.8}, r.estimate + h);
    double down = logistic_increment_density({0.8}, r.estimate - h);
    double at = logistic_increment_density({0.8}, r.estimate);
    REQUIRE(up <= at * (1.0 + 1e-6));
    REQUIRE(down <= at * (1.0 + 1e-6));
}

TEST_CASE("logistic MLE recovers q = 2 from extracted increments") {
    RngStream rng(404, 0);
    const int n = 50000;
    Grid g = Grid::line(0.0, 1.0, 1.0);
    std::vector<Field> reps;
    reps.reserve(n);
    for (int i = 0; i < n; ++i) {
        std::vector<double> xi = simulate_logistic_vector(2.0, 1, rng, 500);
        Field f(g);
        f.values = {xi[0], xi[1]};
        reps.push_back(std::move(f));
    }
    std::vector<double> stats;
    for (const Field& f : reps) stats.push_back(f.values[0]);
    double a_n = choose_threshold_quantile(stats, 0.95);
    ExtremeEventSet events = extract_increments(reps, {0, 0}, a_n);
    REQUIRE(events.samples.size() > 2000);

    EstimateResult wide = logistic_mle(events, 1.1, 8.0);
    REQUIRE(std::abs(wide.estimate - 2.0) < 0.15);

    // with tight bounds around the truth the optimum stays interior
    EstimateResult tight = logistic_mle(events, 1.9, 2.1);
    REQUIRE(tight.estimate > 1.9 + 1e-4);
    REQUIRE(tight.estimate < 2.1 - 1e-4);
}

TEST_CASE("logistic MLE input validation") {
    ExtremeEventSet empty;
    empty.kind = ExtremeEventSet::Kind::increments;
    REQUIRE_THROWS_AS(logistic_mle(empty, 1.5, 3.0), std::invalid_argument);
    ExtremeEventSet bad = increments_set_from_ratios({0.5});
    bad.samples[0].values[1] = 0.0;
    REQUIRE_THROWS_AS(logistic_mle(bad, 1.5, 3.0), std::runtime_error);
}

namespace {
ExtremeEventSet shapes_set_from_profiles(const std::vector<std::vector<double>>& profiles,
                                         int radius, double step) {
    Grid g;
    g.dim = 1;
    g.origin = {-radius * step, 0.0};
    g.step = {step, 0.0};
    g.npts = {2 * radius + 1, 1};
    ExtremeEventSet set;
    set.kind = ExtremeEventSet::Kind::shapes;
    set.threshold = 1.0;
    set.output_window = IndexBox::radius(radius);
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        Field f(g);
        f.values = profiles[i];
        set.samples.push_back(std::move(f));
        set.exceedances.push_back(1.0);
        set.selection.push_back(i);
    }
    return set;
}
}

TEST_CASE("mean shape identities") {
    std::vector<double> profile{0.2, 0.7, 1.0, 0.7, 0.2};
    ExtremeEventSet set = shapes_set_from_profiles({profile, profile, profile}, 2, 0.5);
    Field mean = mean_shape(set);
    for (std::size_t i = 0; i < profile.size(); ++i)
        REQUIRE(mean.values[i] == Catch::Approx(profile[i]).margin(1e-15));
    REQUIRE(mean.at({2, 0}) == 1.0);
}

TEST_CASE("mean shape is invariant to sample order") {
    std::vector<std::vector<double>> profiles;
    RngStream rng(3131, 0);
    for (int i = 0; i < 33; ++i) {
        std::vector<double> p(5);
        for (double& v : p) v = rng.uniform();
        p[2] = 1.0;
        profiles.push_back(std::move(p));
    }
    ExtremeEventSet forward = shapes_set_from_profiles(profiles, 2, 0.5);
    std::vector<std::vector<double>> reversed(profiles.rbegin(), profiles.rend());
    ExtremeEventSet backward = shapes_set_from_profiles(reversed, 2, 0.5);
    // selection indices identify the replicates; reverse them to match
    for (std::size_t i = 0; i < backward.selection.size(); ++i)
        backward.selection[i] = backward.selection.size() - 1 - i;
    Field a = mean_shape(forward);
    Field b = mean_shape(backward);
    REQUIRE(a.values == b.values);
}

TEST_CASE("beta fits are exact on noiseless profiles") {
    Grid g;
    g.dim = 1;
    g.origin = {-3.0, 0.0};
    g.step = {0.25, 0.0};
    g.npts = {25, 1};

    Field gauss(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
        double t = g.coord(g.unflatten(i))[0];
        gauss.values[i] = std::exp(-0.5 * t * t);  // beta = 1
    }
    EstimateResult r1 = fit_shape_beta(gauss, ShapeModel::Family::gaussian);
    REQUIRE(r1.estimate == Catch::Approx(1.0).margin(1e-10));
    REQUIRE(r1.diagnostics.at("r_squared") == Catch::Approx(1.0).margin(1e-10));

    Field expo(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
        double t = g.coord(g.unflatten(i))[0];
        expo.values[i] = std::exp(-2.0 * std::abs(t));  // beta = 2
    }
    EstimateResult r2 = fit_shape_beta(expo, ShapeModel::Family::exponential);
    REQUIRE(r2.estimate == Catch::Approx(2.0).margin(1e-10));

    Field stud(g);
    const double beta = 1.4, nu = 3.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        double t = g.coord(g.unflatten(i))[0];
        stud.values[i] = std::pow(1.0 + beta * beta * t * t / nu, -0.5 * (nu + 1.0));
    }
    EstimateResult r3 = fit_shape_beta(stud, ShapeModel::Family::student, nu);
    REQUIRE(r3.estimate == Catch::Approx(beta).margin(1e-6));
}

TEST_CASE("beta fit drops nonpositive locations and errors when none remain") {
    Grid g;
    g.dim = 1;
    g.origin = {-1.0, 0.0};
    g.step = {1.0, 0.0};
    g.npts = {3, 1};
    Field partial(g);
    partial.values = {0.0, 1.0, 0.6};
    EstimateResult r = fit_shape_beta(partial, ShapeModel::Family::gaussian);
    REQUIRE(r.diagnostics.at("dropped_locations") == 1.0);
    Field dead(g);
    dead.values = {0.0, 1.0, 0.0};
    REQUIRE_THROWS_AS(fit_shape_beta(dead, ShapeModel::Family::gaussian), std::runtime_error);
}

TEST_CASE("extremal coefficient boundary values") {
    // two unit spikes at offsets -2 and 0; at lag 1 the shifted copies stay
    // disjoint from the originals, so the max integrates to the sum
    std::vector<double> spikes{0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0};
    ExtremeEventSet set = shapes_set_from_profiles({spikes}, 4, 1.0);
    ThetaEstimate at0 = extremal_coefficient_from_shapes(set, {0, 0}, IndexBox{{-4, 0}, {1, 0}});
    REQUIRE(at0.theta == 1.0);
    REQUIRE(!at0.clamped);
    ThetaEstimate at1 = extremal_coefficient_from_shapes(set, {1, 0}, IndexBox{{-4, 0}, {1, 0}});
    REQUIRE(at1.raw == Catch::Approx(2.0));
    REQUIRE_THROWS_AS(
        extremal_coefficient_from_shapes(set, {6, 0}, IndexBox{{-4, 0}, {1, 0}}),
        std::invalid_argument);
}

TEST_CASE("extremal coefficient numerator is symmetric on matched windows") {
    RngStream rng(717, 0);
    std::vector<std::vector<double>> profiles;
    for (int i = 0; i < 20; ++i) {
        std::vector<double> p(9);
        for (double& v : p) v = rng.uniform();
        p[4] = 1.0;
        profiles.push_back(std::move(p));
    }
    ExtremeEventSet set = shapes_set_from_profiles(profiles, 4, 0.5);
    GridIndex h{2, 0};
    IndexBox kt{{-2, 0}, {1, 0}};
    IndexBox kt_shift{{kt.lo[0] + h[0], 0}, {kt.hi[0] + h[0], 0}};
    ThetaEstimate forward = extremal_coefficient_from_shapes(set, h, kt);
    ThetaEstimate backward = extremal_coefficient_from_shapes(set, {-h[0], 0}, kt_shift);
    REQUIRE(forward.numerator == backward.numerator);
}

TEST_CASE("variogram from theta: boundary cases and the inversion identity") {
    std::vector<double> flat{1.0, 1.0, 1.0, 1.0, 1.0};
    ExtremeEventSet set = shapes_set_from_profiles({flat}, 2, 1.0);
    VariogramEstimate zero = variogram_from_shapes(set, {1, 0}, IndexBox{{-1, 0}, {0, 0}});
    REQUIRE(zero.gamma == 0.0);
    REQUIRE(zero.boundary == VariogramEstimate::Boundary::full_dependence);

    std::vector<double> spike{1.0, 0.0, 1.0, 0.0, 1.0};
    // theta = 2 at lag 1 with this comb: max(f, f(+1)) integrates to the sum
    ExtremeEventSet comb = shapes_set_from_profiles({spike}, 2, 1.0);
    VariogramEstimate indep = variogram_from_shapes(comb, {1, 0}, IndexBox{{-1, 0}, {0, 0}});
    REQUIRE(indep.boundary == VariogramEstimate::Boundary::independence);
    REQUIRE(std::isnan(indep.gamma));
}

TEST_CASE("gamma to theta round trip is exact to 1e-9") {
    for (double log_gamma = std::log(1e-6); log_gamma <= std::log(25.0) + 1e-12;
         log_gamma += (std::log(25.0) - std::log(1e-6)) / 200.0) {
        double gamma = std::exp(log_gamma);
        double theta = 2.0 * std_normal_cdf(0.5 * std::sqrt(gamma));
        double z = 2.0 * inv_std_normal_cdf(0.5 * theta);
        REQUIRE(z * z == Catch::Approx(gamma).epsilon(1e-9));
    }
}

TEST_CASE("unit mean diagnostic flags scaled samples") {
    Grid g = Grid::line(0.0, 2.0, 1.0);
    std::vector<Field> ones(100, Field(g, 1.0));
    UnitMeanReport clean = unit_mean_diagnostic(ones);
    for (double v : clean.abs_deviation.values) REQUIRE(v == 0.0);

    std::vector<Field> doubled(100, Field(g, 2.0));
    UnitMeanReport flagged = unit_mean_diagnostic(doubled);
    for (double v : flagged.abs_deviation.values) REQUIRE(v == Catch::Approx(1.0));

    WSampler w = brown_resnick_w_sampler(VariogramModel::fbm(1.0, 1.0), Grid::line(-1.0, 1.0, 0.5),
                                         {2, 0});
    std::vector<Field> br;
    for (int i = 0; i < 20000; ++i) {
        RngStream rng(888, static_cast<std::uint64_t>(i));
        br.push_back(w.draw(rng));
    }
    UnitMeanReport report = unit_mean_diagnostic(br);
    for (std::size_t p = 0; p < report.abs_deviation.values.size(); ++p) {
        double dev = report.abs_deviation.values[p];
        double se = report.standard_error.values[p];
        if (se > 0.0) REQUIRE(dev < 3.0 * se);
    }
}
