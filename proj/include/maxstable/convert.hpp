#ifndef MAXSTABLE_CONVERT_HPP
#define MAXSTABLE_CONVERT_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "maxstable/grid.hpp"
#include "maxstable/rng.hpp"
#include "maxstable/shape.hpp"
#include "maxstable/simulate.hpp"

namespace maxstable {

namespace detail {

/// Solves int_0^w (a + (b-a) xi) dxi = r for w in [0,1], r in [0,(a+b)/2].
inline double invert_linear_cdf(double a, double b, double r) {
    double d = b - a;
    if (std::abs(d) <= 1e-14 * (std::abs(a) + std::abs(b))) {
        return a > 0.0 ? std::min(1.0, r / a) : 0.0;
    }
    double disc = a * a + 2.0 * d * r;
    if (disc < 0.0) disc = 0.0;
    double w = (std::sqrt(disc) - a) / d;
    return std::clamp(w, 0.0, 1.0);
}

} // namespace detail

/// Samples from the piecewise-(bi)linear density interpolating non-negative
/// values on a regular grid: discrete inverse CDF over cells, exact inversion
/// of the linear density inside a cell. density() evaluates the normalized
/// interpolated density, consistent with what sample() draws from.
class TabulatedDensitySampler {
public:
    TabulatedDensitySampler(Field values, bool require_positive = false)
        : table_(std::move(values)) {
        const Grid& g = table_.grid;
        if (g.npts[0] < 2 || (g.dim == 2 && g.npts[1] < 2))
            throw std::invalid_argument("TabulatedDensitySampler: need at least 2 points per dimension");
        for (double v : table_.values) {
            if (!(v >= 0.0)) throw std::invalid_argument("TabulatedDensitySampler: negative density value");
            if (require_positive && !(v > 0.0))
                throw std::invalid_argument("TabulatedDensitySampler: density must be strictly positive on the grid");
        }
        const int nc0 = g.npts[0] - 1;
        const int nc1 = g.dim == 2 ? g.npts[1] - 1 : 1;
        cell_cdf_.reserve(static_cast<std::size_t>(nc0) * nc1);
        double acc = 0.0;
        for (int i = 0; i < nc0; ++i) {
            for (int j = 0; j < nc1; ++j) {
                double mass;
                if (g.dim == 1) {
                    mass = 0.5 * (table_.at({i, 0}) + table_.at({i + 1, 0})) * g.step[0];
                } else {
                    mass = 0.25 *
                           (table_.at({i, j}) + table_.at({i + 1, j}) + table_.at({i, j + 1}) +
                            table_.at({i + 1, j + 1})) *
                           g.step[0] * g.step[1];
                }
                acc += mass;
                cell_cdf_.push_back(acc);
            }
        }
        total_ = acc;
        if (!(total_ > 0.0)) throw std::invalid_argument("TabulatedDensitySampler: zero total mass");
    }

    double total_mass() const { return total_; }

    /// Normalized density at a point (0 outside the grid).
    double density(const Point& t) const {
        return detail::interpolate(table_, t) / total_;
    }

    /// Smallest normalized node density (the exact lower bound of the
    /// piecewise-linear density on the grid box).
    double min_density() const {
        double m = table_.values[0];
        for (double v : table_.values) m = std::min(m, v);
        return m / total_;
    }

    Point sample(RngStream& rng) const {
        const Grid& g = table_.grid;
        double u = rng.uniform() * total_;
        std::size_t lo = 0, hi = cell_cdf_.size() - 1;
        while (lo < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (cell_cdf_[mid] < u) lo = mid + 1; else hi = mid;
        }
        double into_cell = u - (lo == 0 ? 0.0 : cell_cdf_[lo - 1]);
        const int nc1 = g.dim == 2 ? g.npts[1] - 1 : 1;
        int ci = static_cast<int>(lo) / nc1;
        int cj = static_cast<int>(lo) % nc1;

        if (g.dim == 1) {
            double a = table_.at({ci, 0});
            double b = table_.at({ci + 1, 0});
            double r = into_cell / g.step[0];  // cell mass in unit coordinates
            double w = detail::invert_linear_cdf(a, b, std::min(r, 0.5 * (a + b)));
            return {g.origin[0] + (ci + w) * g.step[0], 0.0};
        }

        double v00 = table_.at({ci, cj}), v01 = table_.at({ci, cj + 1});
        double v10 = table_.at({ci + 1, cj}), v11 = table_.at({ci + 1, cj + 1});
        // marginal along the first axis is linear between the edge means
        double a = 0.5 * (v00 + v01);
        double b = 0.5 * (v10 + v11);
        double r = into_cell / (g.step[0] * g.step[1]);
        double wu = detail::invert_linear_cdf(a, b, std::min(r, 0.5 * (a + b)));
        double c = (1.0 - wu) * v00 + wu * v10;
        double d = (1.0 - wu) * v01 + wu * v11;
        double r2 = rng.uniform() * 0.5 * (c + d);
        double wv = detail::invert_linear_cdf(c, d, r2);
        return {g.origin[0] + (ci + wu) * g.step[0], g.origin[1] + (cj + wv) * g.step[1]};
    }

private:
    Field table_;
    std::vector<double> cell_cdf_;
    double total_ = 0.0;
};

/// Draws samples of the incremental process W of an M3 process with strictly
/// positive shapes: pick the size-biased shape G, shift S with density
/// proportional to G(-.), return W(.) = G(. - S)/G(-S). W(0) = 1 exactly.
class M3IncrementalSampler {
public:
    M3IncrementalSampler(const ShapeDistribution& shapes, const Grid& grid)
        : shapes_(shapes), grid_(grid) {
        for (std::size_t i = 0; i < shapes.size(); ++i) {
            const ShapeModel& shape = shapes.component(i);
            Field reflected(grid);
            for (std::size_t p = 0; p < grid.size(); ++p) {
                Point t = grid.coord(grid.unflatten(p));
                double v = shape.eval(Point{-t[0], -t[1]});
                if (!(v > 0.0))
                    throw std::invalid_argument(
                        "m3_to_incremental_sample: shape has zeros on the grid; "
                        "use m3_to_v_representation instead");
                reflected.values[p] = v;
            }
            shift_samplers_.emplace_back(std::move(reflected));
            // size-biased component weight: P_G(df) = (int f) P_F(df)
            size_biased_weights_.push_back(shapes.weight(i) * shape.total_integral());
        }
        double acc = 0.0;
        for (double& w : size_biased_weights_) {
            acc += w;
            w = acc;
        }
    }

    Field sample(RngStream& rng) const {
        std::size_t idx = 0;
        if (shapes_.size() > 1) {
            double u = rng.uniform() * size_biased_weights_.back();
            while (idx + 1 < size_biased_weights_.size() && size_biased_weights_[idx] < u) ++idx;
        }
        const ShapeModel& g = shapes_.component(idx);
        Point s = shift_samplers_[idx].sample(rng);
        double denom = g.eval(Point{-s[0], -s[1]});
        Field w(grid_);
        for (std::size_t p = 0; p < grid_.size(); ++p) {
            Point t = grid_.coord(grid_.unflatten(p));
            w.values[p] = g.eval(Point{t[0] - s[0], t[1] - s[1]}) / denom;
        }
        return w;
    }

private:
    ShapeDistribution shapes_;
    Grid grid_;
    std::vector<TabulatedDensitySampler> shift_samplers_;
    std::vector<double> size_biased_weights_;
};

inline Field m3_to_incremental_sample(const ShapeDistribution& shapes, const Grid& grid, RngStream& rng) {
    return M3IncrementalSampler(shapes, grid).sample(rng);
}

/// Spectral process V of the weaker representation for general non-negative
/// shapes: V(.) = F(. - R)/g(R) with R drawn from a strictly positive density
/// g tabulated on the grid. Valid for any choice of g.
class VRepresentationSampler {
public:
    VRepresentationSampler(const ShapeDistribution& shapes, Field g_values, const Grid& grid)
        : shapes_(shapes), grid_(grid), g_sampler_(std::move(g_values), /*require_positive=*/true) {}

    Field sample(RngStream& rng) const {
        Point r = g_sampler_.sample(rng);
        double g_at_r = g_sampler_.density(r);
        const ShapeModel& f = shapes_.sample(rng);
        Field v(grid_);
        for (std::size_t p = 0; p < grid_.size(); ++p) {
            Point t = grid_.coord(grid_.unflatten(p));
            v.values[p] = f.eval(Point{t[0] - r[0], t[1] - r[1]}) / g_at_r;
        }
        return v;
    }

    /// Exact a.s. bound sup V <= lambda_max / min g, enabling exact stopping.
    WSampler as_w_sampler() const {
        WSampler w;
        w.sup_bound = shapes_.lambda_max() / g_sampler_.min_density();
        w.draw = [this](RngStream& rng) { return sample(rng); };
        return w;
    }

private:
    ShapeDistribution shapes_;
    Grid grid_;
    TabulatedDensitySampler g_sampler_;
};

inline Field m3_to_v_representation(const ShapeDistribution& shapes, const Field& g_values,
                                    RngStream& rng) {
    return VRepresentationSampler(shapes, g_values, g_values.grid).sample(rng);
}

/// Empirical law of the conditional increments of an M3 process with a
/// deterministic shape: draw T with density f, emit (f(t_l + T)/f(T))_l.
/// Values outside a tabulated support are 0 by convention.
inline std::vector<std::vector<double>> conditional_increment_law_m3(
    const ShapeModel& shape, const Grid& support_grid, const std::vector<Point>& test_points,
    RngStream& rng, std::size_t nsamples) {
    if (test_points.empty()) throw std::invalid_argument("conditional_increment_law_m3: no test points");
    Field density(support_grid);
    for (std::size_t p = 0; p < support_grid.size(); ++p)
        density.values[p] = shape.eval(support_grid.coord(support_grid.unflatten(p)));
    TabulatedDensitySampler sampler(std::move(density));
    std::vector<std::vector<double>> draws;
    draws.reserve(nsamples);
    for (std::size_t i = 0; i < nsamples; ++i) {
        Point t = sampler.sample(rng);
        double ft = shape.eval(t);
        std::vector<double> ratios(test_points.size());
        for (std::size_t l = 0; l < test_points.size(); ++l) {
            Point shifted{test_points[l][0] + t[0], test_points[l][1] + t[1]};
            ratios[l] = shape.eval(shifted) / ft;
        }
        draws.push_back(std::move(ratios));
    }
    return draws;
}

/// One re-centered storm extracted from an incremental sample: the peak-1
/// profile, its pre-normalization supremum gamma, the peak location tau, and
/// the size-biasing weight (= gamma).
struct WeightedShapeSample {
    Field profile;
    double gamma = 0.0;
    Point tau{0.0, 0.0};
    double weight = 0.0;
};

struct IncToM3Result {
    std::vector<WeightedShapeSample> samples;
    double c_hat = 0.0;
    std::size_t total_draws = 0;
    std::size_t dropped_edge_max = 0;   ///< argmax on the grid boundary
    std::size_t dropped_outside_k = 0;  ///< argmax outside the reference set K
    double max_boundary_ratio = 0.0;    ///< proxy for lim_{|t|->inf} W(t) = 0
    bool drop_warning = false;          ///< drop fraction exceeded 20%
};

/// M3 representation of an incremental construction: per sample take
/// gamma = sup W, tau = lexicographic argmax, keep samples with tau in K,
/// weight them by gamma; c-hat normalizes the weighted mean profile integral
/// to one, so shapes c-hat * profile satisfy E int F = 1.
inline IncToM3Result incremental_to_m3(const std::function<Field(RngStream&)>& w_draw,
                                       const Grid& grid, std::size_t nsamples, RngStream& rng,
                                       const IndexBox& keep_region, const IndexBox& profile_window) {
    IndexBox probe = keep_region.dilate(profile_window);
    if (!keep_region.inside(grid) || !probe.inside(grid))
        throw std::invalid_argument("incremental_to_m3: K (+) profile window must lie inside the grid");
    if (nsamples == 0) throw std::invalid_argument("incremental_to_m3: nsamples must be >= 1");

    Grid profile_grid;
    profile_grid.dim = grid.dim;
    for (int d = 0; d < grid.dim; ++d) {
        profile_grid.origin[d] = profile_window.lo[d] * grid.step[d];
        profile_grid.step[d] = grid.step[d];
        profile_grid.npts[d] = profile_window.count(d);
    }
    if (grid.dim == 1) profile_grid.npts[1] = 1;

    IncToM3Result result;
    result.total_draws = nsamples;
    double weight_sum = 0.0, weighted_integral_sum = 0.0;
    for (std::size_t i = 0; i < nsamples; ++i) {
        Field w = w_draw(rng);
        GridIndex tau = argmax_lexicographic(w, IndexBox::full(grid));
        double gamma = w.at(tau);
        bool on_edge = false;
        for (int d = 0; d < grid.dim; ++d)
            if (tau[d] == 0 || tau[d] == grid.npts[d] - 1) on_edge = true;
        if (on_edge) {
            ++result.dropped_edge_max;
            continue;
        }
        if (!keep_region.contains(tau, grid.dim)) {
            ++result.dropped_outside_k;
            continue;
        }
        if (!(gamma > 0.0)) {
            ++result.dropped_edge_max;
            continue;
        }
        double boundary_max = 0.0;
        for (int d = 0; d < grid.dim; ++d) {
            IndexBox lo_face = IndexBox::full(grid);
            lo_face.hi[d] = 0;
            IndexBox hi_face = IndexBox::full(grid);
            hi_face.lo[d] = grid.npts[d] - 1;
            boundary_max = std::max({boundary_max, max_over(w, lo_face), max_over(w, hi_face)});
        }
        result.max_boundary_ratio = std::max(result.max_boundary_ratio, boundary_max / gamma);

        WeightedShapeSample sample;
        sample.gamma = gamma;
        sample.weight = gamma;
        sample.tau = grid.coord(tau);
        sample.profile = Field(profile_grid);
        std::size_t out = 0;
        IndexBox shifted{{tau[0] + profile_window.lo[0], tau[1] + profile_window.lo[1]},
                         {tau[0] + profile_window.hi[0], tau[1] + profile_window.hi[1]}};
        shifted.for_each(grid.dim, [&](GridIndex idx) {
            sample.profile.values[out++] = w.at(idx) / gamma;
        });
        weight_sum += gamma;
        weighted_integral_sum += gamma * grid_integral(sample.profile);
        result.samples.push_back(std::move(sample));
    }
    if (result.samples.empty())
        throw std::runtime_error("incremental_to_m3: no samples kept (no interior maxima in K)");
    result.c_hat = weight_sum / weighted_integral_sum;
    std::size_t dropped = result.dropped_edge_max + result.dropped_outside_k;
    result.drop_warning = dropped > nsamples / 5;
    return result;
}

/// Central 50% of the grid as the default reference set K, with the widest
/// profile window that fits all shifts.
inline IncToM3Result incremental_to_m3(const std::function<Field(RngStream&)>& w_draw,
                                       const Grid& grid, std::size_t nsamples, RngStream& rng) {
    IndexBox keep, profile;
    for (int d = 0; d < grid.dim; ++d) {
        int quarter = grid.npts[d] / 4;
        if (quarter < 1) throw std::invalid_argument("incremental_to_m3: grid too small for the default K");
        keep.lo[d] = quarter;
        keep.hi[d] = grid.npts[d] - 1 - quarter;
        profile.lo[d] = -quarter;
        profile.hi[d] = quarter;
    }
    if (grid.dim == 1) {
        keep.lo[1] = keep.hi[1] = 0;
        profile.lo[1] = profile.hi[1] = 0;
    }
    return incremental_to_m3(w_draw, grid, nsamples, rng, keep, profile);
}

/// Shape distribution of the recovered M3 representation: profiles scaled by
/// c-hat, weighted by gamma. Satisfies E int F = 1 by construction.
inline ShapeDistribution shape_distribution_from_m3(const IncToM3Result& conversion) {
    ShapeDistribution dist;
    for (const WeightedShapeSample& s : conversion.samples) {
        Field scaled = s.profile;
        for (double& v : scaled.values) v *= conversion.c_hat;
        dist.add(ShapeModel::tabulated_scaled(std::move(scaled)), s.weight);
    }
    return dist;
}

/// Exponent-measure density of the (k+1)-variate symmetric logistic law.
inline std::function<double(const std::vector<double>&)> logistic_exponent_density(double q) {
    if (!(q > 1.0)) throw std::invalid_argument("logistic_exponent_density: q must be > 1");
    return [q](const std::vector<double>& x) {
        const double kp1 = static_cast<double>(x.size());
        double a = 0.0, log_prod = 0.0;
        for (double v : x) {
            a += std::pow(v, -q);
            log_prod += std::log(v);
        }
        double log_dens = (1.0 / q - kp1) * std::log(a) - (q + 1.0) * log_prod;
        for (std::size_t i = 1; i < x.size(); ++i) log_dens += std::log(i * q - 1.0);
        return std::exp(log_dens);
    };
}

namespace detail {

template <typename F>
double composite_simpson(F&& f, double a, double b, int n) {
    // n subintervals, even
    double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    return s * h / 3.0;
}

} // namespace detail

/// mu(B_s cap A) = integral of the exponent density over
/// {x0 > 1, x_j <= x0 s_j}, via the substitution x0 = 1/v, x_j = r_j/v.
/// Refines a composite Simpson rule until the relative change drops below
/// rel_tol; reports non-convergence otherwise. k = s.size() <= 2.
inline double increment_cdf_from_exponent_measure(
    const std::function<double(const std::vector<double>&)>& exponent_density,
    const std::vector<double>& s, double rel_tol = 1e-4) {
    const std::size_t k = s.size();
    if (k < 1 || k > 2) throw std::invalid_argument("increment_cdf_from_exponent_measure: k must be 1 or 2");
    for (double v : s)
        if (!(v >= 0.0)) throw std::invalid_argument("increment_cdf_from_exponent_measure: s must be >= 0");
    for (double v : s)
        if (v == 0.0) return 0.0;

    const double v_lo = 1e-9;   // x0 cutoff 1e9; mass above it is far below rel_tol
    const double r_lo_frac = 1e-9;  // keeps axis singularities of the density out of the rule

    auto integrand = [&](double v, double r1, double r2) {
        std::vector<double> x(k + 1);
        x[0] = 1.0 / v;
        x[1] = r1 / v;
        if (k == 2) x[2] = r2 / v;
        return exponent_density(x) * std::pow(v, -static_cast<double>(k + 2));
    };

    double previous = 0.0;
    for (int n = 16; n <= 1024; n *= 2) {
        double value;
        if (k == 1) {
            value = detail::composite_simpson(
                [&](double v) {
                    return detail::composite_simpson(
                        [&](double r1) { return integrand(v, r1, 0.0); }, r_lo_frac * s[0], s[0], n);
                },
                v_lo, 1.0, n);
        } else {
            value = detail::composite_simpson(
                [&](double v) {
                    return detail::composite_simpson(
                        [&](double r1) {
                            return detail::composite_simpson(
                                [&](double r2) { return integrand(v, r1, r2); }, r_lo_frac * s[1], s[1], n);
                        },
                        r_lo_frac * s[0], s[0], n);
                },
                v_lo, 1.0, n);
        }
        if (n > 16 && std::abs(value - previous) <= rel_tol * std::max(std::abs(value), 1e-30))
            return value;
        previous = value;
    }
    throw std::runtime_error("increment_cdf_from_exponent_measure: quadrature did not converge");
}

/// CDF table of the incremental process W over a list of s-points.
inline std::vector<double> increment_law_from_exponent_measure(
    const std::function<double(const std::vector<double>&)>& exponent_density,
    const std::vector<std::vector<double>>& s_points, double rel_tol = 1e-4) {
    std::vector<double> table;
    table.reserve(s_points.size());
    for (const auto& s : s_points)
        table.push_back(increment_cdf_from_exponent_measure(exponent_density, s, rel_tol));
    return table;
}

/// Direct quadrature of the exponent density over an axis-aligned box in
/// (k+1)-space; the oracle for the homogeneity check c^-1 mu(B) = mu(cB).
inline double exponent_measure_box(const std::function<double(const std::vector<double>&)>& exponent_density,
                                   const std::vector<double>& lo, const std::vector<double>& hi,
                                   double rel_tol = 1e-4) {
    const std::size_t dim = lo.size();
    if (dim < 2 || dim > 3 || hi.size() != dim)
        throw std::invalid_argument("exponent_measure_box: dimension must be 2 or 3");
    for (std::size_t d = 0; d < dim; ++d)
        if (!(lo[d] > 0.0 && hi[d] > lo[d]))
            throw std::invalid_argument("exponent_measure_box: need 0 < lo < hi (axes excluded)");

    double previous = 0.0;
    for (int n = 16; n <= 1024; n *= 2) {
        double value;
        if (dim == 2) {
            value = detail::composite_simpson(
                [&](double x0) {
                    return detail::composite_simpson(
                        [&](double x1) {
                            return exponent_density(std::vector<double>{x0, x1});
                        },
                        lo[1], hi[1], n);
                },
                lo[0], hi[0], n);
        } else {
            value = detail::composite_simpson(
                [&](double x0) {
                    return detail::composite_simpson(
                        [&](double x1) {
                            return detail::composite_simpson(
                                [&](double x2) {
                                    return exponent_density(std::vector<double>{x0, x1, x2});
                                },
                                lo[2], hi[2], n);
                        },
                        lo[1], hi[1], n);
                },
                lo[0], hi[0], n);
        }
        if (n > 16 && std::abs(value - previous) <= rel_tol * std::max(std::abs(value), 1e-30))
            return value;
        previous = value;
    }
    throw std::runtime_error("exponent_measure_box: quadrature did not converge");
}

} // namespace maxstable

#endif
