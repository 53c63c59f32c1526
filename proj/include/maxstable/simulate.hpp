#ifndef MAXSTABLE_SIMULATE_HPP
#define MAXSTABLE_SIMULATE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "maxstable/gaussian.hpp"
#include "maxstable/grid.hpp"
#include "maxstable/rng.hpp"
#include "maxstable/shape.hpp"
#include "maxstable/variogram.hpp"

namespace maxstable {

struct SimConfig {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
    int atom_budget = 1000;
};

/// One atom of the M3 point process: storm strength, center, shape reference.
struct StormEvent {
    double u = 0.0;
    Point center{0.0, 0.0};
    std::size_t shape_index = 0;
};

/// Sampler for the spectral/incremental process W (or V) on a fixed grid.
/// sup_bound, when set, is an a.s. bound on sup_t W(t) enabling exact stopping.
struct WSampler {
    std::function<Field(RngStream&)> draw;
    std::optional<double> sup_bound;
};

/// Deterministic W must equal 1 everywhere (E W(t) = 1 has no other
/// deterministic solution); anything else is rejected at construction.
inline WSampler deterministic_w_sampler(Field w) {
    for (double v : w.values)
        if (v != 1.0)
            throw std::invalid_argument("deterministic_w_sampler: deterministic W must be constant 1 (E W(t) = 1)");
    WSampler sampler;
    sampler.sup_bound = 1.0;
    sampler.draw = [w = std::move(w)](RngStream&) { return w; };
    return sampler;
}

/// Log-Gaussian spectral process of the Brown-Resnick construction:
/// W(t) = exp(Y(t) - sigma^2(t)/2) with Y pinned to zero at t0.
inline WSampler brown_resnick_w_sampler(const VariogramModel& variogram, const Grid& grid, GridIndex t0) {
    CovMatrix cov = cov_from_variogram(variogram, grid, t0);
    std::vector<double> half_var(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) half_var[i] = 0.5 * cov.at(i, i);
    CholeskyFactor factor = cholesky_psd(cov);
    WSampler sampler;
    sampler.draw = [factor = std::move(factor), half_var = std::move(half_var), grid](RngStream& rng) {
        Field y = simulate_gaussian_field(factor, grid, rng);
        for (std::size_t i = 0; i < y.values.size(); ++i)
            y.values[i] = std::exp(y.values[i] - half_var[i]);
        return y;
    };
    return sampler;
}

/// Spectral process of the extremal Gaussian construction:
/// V(t) = sqrt(2 pi) max(0, Y(t)) for a unit-variance Gaussian field Y.
inline WSampler extremal_gaussian_spectral_sampler(const CovMatrix& cov, const Grid& grid) {
    if (cov.n != grid.size()) throw std::invalid_argument("extremal gaussian: cov size mismatch");
    for (std::size_t i = 0; i < cov.n; ++i)
        if (std::abs(cov.at(i, i) - 1.0) > 1e-9)
            throw std::invalid_argument("extremal gaussian: covariance must have unit diagonal");
    static const double sqrt_2pi = 2.506628274631000502415765;
    CholeskyFactor factor = cholesky_psd(cov);
    WSampler sampler;
    sampler.draw = [factor = std::move(factor), grid](RngStream& rng) {
        Field y = simulate_gaussian_field(factor, grid, rng);
        for (double& v : y.values) v = sqrt_2pi * std::max(0.0, v);
        return y;
    };
    return sampler;
}

struct IncrementalSimResult {
    Field field;
    bool exact = false;   ///< exact stopping reached (needs sup_bound)
    int atoms_used = 0;
    double residual = 0.0;  ///< last atom's U * (grid max of its W); truncation diagnostic
};

/// xi(t) = max_i U_i W_i(t). With a declared sup bound the generation stops
/// exactly once no further atom can alter the field; otherwise exactly
/// atom_budget atoms are used and the result is flagged approximate.
inline IncrementalSimResult simulate_incremental(const WSampler& sampler, const Grid& grid,
                                                 const SimConfig& cfg) {
    if (cfg.atom_budget < 1) throw std::invalid_argument("simulate_incremental: atom_budget must be >= 1");
    RngStream rng(cfg.seed, cfg.stream_id);
    IncrementalSimResult result;
    result.field = Field(grid, 0.0);
    double gamma = 0.0;
    double field_min = 0.0;
    double last_u = 0.0, last_w_max = 0.0;
    for (;;) {
        gamma += rng.exponential();
        double u = 1.0 / gamma;
        if (sampler.sup_bound && u * (*sampler.sup_bound) < field_min) {
            result.exact = true;
            break;
        }
        if (result.atoms_used >= cfg.atom_budget) {
            result.exact = false;
            result.residual = last_u * last_w_max;
            break;
        }
        Field w = sampler.draw(rng);
        if (w.values.size() != result.field.values.size())
            throw std::runtime_error("simulate_incremental: sampler grid mismatch");
        double w_max = 0.0;
        field_min = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < w.values.size(); ++i) {
            double v = u * w.values[i];
            if (v > result.field.values[i]) result.field.values[i] = v;
            field_min = std::min(field_min, result.field.values[i]);
            w_max = std::max(w_max, w.values[i]);
        }
        last_u = u;
        last_w_max = w_max;
        ++result.atoms_used;
    }
    return result;
}

/// Brown-Resnick field via the incremental construction (unbounded W, so the
/// atom budget applies and the result is flagged approximate).
inline IncrementalSimResult simulate_brown_resnick(const VariogramModel& variogram, const Grid& grid,
                                                   GridIndex t0, const SimConfig& cfg) {
    return simulate_incremental(brown_resnick_w_sampler(variogram, grid, t0), grid, cfg);
}

/// Extremal Gaussian field (Schlather construction); cov must have unit diagonal.
inline IncrementalSimResult simulate_extremal_gaussian(const CovMatrix& cov, const Grid& grid,
                                                       const SimConfig& cfg) {
    return simulate_incremental(extremal_gaussian_spectral_sampler(cov, grid), grid, cfg);
}

namespace detail {

/// Conditional CDF of the m-th coordinate of the symmetric-logistic
/// incremental vector given the previous ones, A = 1 + sum_{j<m} s_j^-q:
/// H(s) = (1 + s^-q / A)^(1/q - m).
inline double logistic_conditional_cdf(double s, double A, double q, int m) {
    if (s <= 0.0) return 0.0;
    return std::pow(1.0 + std::pow(s, -q) / A, 1.0 / q - m);
}

inline double invert_logistic_conditional(double v, double A, double q, int m) {
    if (m == 1) {
        // analytic inverse of the marginal (1 + s^-q)^(1/q - 1)
        double base = std::pow(v, q / (1.0 - q));
        return std::pow(base - 1.0, -1.0 / q);
    }
    double lo = 1e-8;
    while (logistic_conditional_cdf(lo, A, q, m) > v && lo > 1e-290) lo *= 0.5;
    double hi = 1.0;
    while (logistic_conditional_cdf(hi, A, q, m) < v && hi < 1e290) hi *= 2.0;
    for (int iter = 0; iter < 200; ++iter) {
        double mid = 0.5 * (lo + hi);
        if (logistic_conditional_cdf(mid, A, q, m) < v) lo = mid; else hi = mid;
        if (hi - lo <= 1e-10 * std::max(1.0, std::abs(hi))) break;
    }
    return 0.5 * (lo + hi);
}

} // namespace detail

/// One draw of the symmetric-logistic incremental vector W in R^k,
/// P(W <= s) = (1 + sum s_i^-q)^(1/q - 1), by sequential conditional inversion.
inline std::vector<double> sample_logistic_w(double q, int k, RngStream& rng) {
    std::vector<double> w(static_cast<std::size_t>(k));
    double A = 1.0;
    for (int m = 1; m <= k; ++m) {
        double v = rng.uniform();
        double s = detail::invert_logistic_conditional(v, A, q, m);
        w[static_cast<std::size_t>(m - 1)] = s;
        A += std::pow(s, -q);
    }
    return w;
}

/// Max-stable symmetric-logistic vector of length k+1 built as
/// max_i U_i (1, W_i); the first coordinate is anchored at 1.
inline std::vector<double> simulate_logistic_vector(double q, int k, RngStream& rng,
                                                    int atom_budget = 1000) {
    if (!(q > 1.0)) throw std::invalid_argument("simulate_logistic_vector: q must be > 1");
    if (k < 1) throw std::invalid_argument("simulate_logistic_vector: k must be >= 1");
    if (atom_budget < 1) throw std::invalid_argument("simulate_logistic_vector: atom_budget must be >= 1");
    std::vector<double> xi(static_cast<std::size_t>(k) + 1, 0.0);
    double gamma = 0.0;
    for (int atom = 0; atom < atom_budget; ++atom) {
        gamma += rng.exponential();
        double u = 1.0 / gamma;
        xi[0] = std::max(xi[0], u);
        std::vector<double> w = sample_logistic_w(q, k, rng);
        for (int m = 1; m <= k; ++m)
            xi[static_cast<std::size_t>(m)] = std::max(xi[static_cast<std::size_t>(m)], u * w[static_cast<std::size_t>(m - 1)]);
    }
    return xi;
}

struct M3SimResult {
    Field field;
    std::vector<StormEvent> events;  ///< atoms that own at least one grid point
    bool exact = false;
    int atoms_used = 0;
    double window_volume = 0.0;
};

/// Mixed moving maxima field on the grid. Storm centers are uniform on the
/// grid box enlarged by `margin` per dimension; generation stops exactly when
/// U_i * lambda_max drops below the pointwise minimum of the running maximum.
inline M3SimResult simulate_m3(const ShapeDistribution& shapes, const Grid& grid, double margin,
                               const SimConfig& cfg) {
    if (margin < 0.0) throw std::invalid_argument("simulate_m3: margin must be >= 0");
    if (cfg.atom_budget < 1) throw std::invalid_argument("simulate_m3: atom_budget must be >= 1");
    if (shapes.dim() != grid.dim) throw std::invalid_argument("simulate_m3: dimension mismatch");
    if (std::abs(shapes.mean_total_integral() - 1.0) > 1e-4)
        throw std::invalid_argument("simulate_m3: shapes must satisfy E int F = 1");
    RngStream rng(cfg.seed, cfg.stream_id);
    const double lambda_max = shapes.lambda_max();

    double volume = 1.0;
    Point window_lo{0.0, 0.0}, window_extent{0.0, 0.0};
    for (int d = 0; d < grid.dim; ++d) {
        window_lo[d] = grid.origin[d] - margin;
        window_extent[d] = grid.extent(d) + 2.0 * margin;
        volume *= window_extent[d];
    }
    if (!(volume > 0.0)) throw std::invalid_argument("simulate_m3: window has zero volume");

    M3SimResult result;
    result.window_volume = volume;
    result.field = Field(grid, 0.0);
    std::vector<std::ptrdiff_t> owner(grid.size(), -1);
    std::vector<StormEvent> atoms;

    double gamma = 0.0;
    double field_min = 0.0;
    for (;;) {
        gamma += rng.exponential();
        double u = volume / gamma;
        if (u * lambda_max < field_min) {
            result.exact = true;
            break;
        }
        if (result.atoms_used >= cfg.atom_budget) {
            result.exact = false;
            break;
        }
        StormEvent ev;
        ev.u = u;
        for (int d = 0; d < grid.dim; ++d) ev.center[d] = window_lo[d] + window_extent[d] * rng.uniform();
        ev.shape_index = shapes.sample_index(rng);
        const ShapeModel& shape = shapes.component(ev.shape_index);
        std::ptrdiff_t atom_id = static_cast<std::ptrdiff_t>(atoms.size());
        field_min = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < result.field.values.size(); ++i) {
            Point p = grid.coord(grid.unflatten(i));
            double v = u * shape.eval(Point{p[0] - ev.center[0], p[1] - ev.center[1]});
            if (v > result.field.values[i]) {
                result.field.values[i] = v;
                owner[i] = atom_id;
            }
            field_min = std::min(field_min, result.field.values[i]);
        }
        atoms.push_back(ev);
        ++result.atoms_used;
    }

    std::vector<bool> contributes(atoms.size(), false);
    for (std::ptrdiff_t id : owner)
        if (id >= 0) contributes[static_cast<std::size_t>(id)] = true;
    for (std::size_t i = 0; i < atoms.size(); ++i)
        if (contributes[i]) result.events.push_back(atoms[i]);
    return result;
}

/// Shape on the integer lattice with finite support (offsets around 0).
struct LatticeShape {
    int dim = 1;
    IndexBox support;
    std::vector<double> values;  // row-major over the support box

    static LatticeShape from_values(int dim, IndexBox support, std::vector<double> vals) {
        LatticeShape s;
        s.dim = dim;
        s.support = support;
        if (vals.size() != support.size(dim))
            throw std::invalid_argument("LatticeShape: value count does not match support box");
        for (double v : vals)
            if (!(v >= 0.0)) throw std::invalid_argument("LatticeShape: values must be non-negative");
        s.values = std::move(vals);
        return s;
    }

    std::size_t flatten(GridIndex off) const {
        std::size_t i = static_cast<std::size_t>(off[0] - support.lo[0]);
        if (dim == 1) return i;
        return i * support.count(1) + static_cast<std::size_t>(off[1] - support.lo[1]);
    }

    double at_offset(GridIndex off) const {
        if (!support.contains(off, dim)) return 0.0;
        return values[flatten(off)];
    }

    double total() const {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    double max_value() const {
        double m = 0.0;
        for (double v : values) m = std::max(m, v);
        return m;
    }
};

class LatticeShapeDistribution {
public:
    LatticeShapeDistribution() = default;
    explicit LatticeShapeDistribution(LatticeShape s) { add(std::move(s), 1.0); }

    void add(LatticeShape s, double weight) {
        if (!(weight > 0.0)) throw std::invalid_argument("LatticeShapeDistribution: weight must be positive");
        if (!components_.empty() && components_.front().dim != s.dim)
            throw std::invalid_argument("LatticeShapeDistribution: mixed dimensions");
        components_.push_back(std::move(s));
        weights_.push_back(weight);
    }

    std::size_t size() const { return components_.size(); }
    const LatticeShape& component(std::size_t i) const { return components_[i]; }
    int dim() const { return components_.front().dim; }

    double mean_total() const {
        double wsum = 0.0, s = 0.0;
        for (std::size_t i = 0; i < components_.size(); ++i) {
            wsum += weights_[i];
            s += weights_[i] * components_[i].total();
        }
        return s / wsum;
    }

    double max_value() const {
        double m = 0.0;
        for (const auto& c : components_) m = std::max(m, c.max_value());
        return m;
    }

    std::size_t sample_index(RngStream& rng) const {
        if (components_.size() == 1) return 0;
        double wsum = 0.0;
        for (double w : weights_) wsum += w;
        double u = rng.uniform() * wsum;
        double acc = 0.0;
        for (std::size_t i = 0; i < components_.size(); ++i) {
            acc += weights_[i];
            if (u <= acc) return i;
        }
        return components_.size() - 1;
    }

private:
    std::vector<LatticeShape> components_;
    std::vector<double> weights_;
};

struct M3DiscreteResult {
    Field field;  ///< lattice grid (unit step, integer coordinates)
    bool exact = false;
    int atoms_used = 0;
};

/// Discrete M3 on Z^d: storm centers on lattice sites of `window`, counting
/// measure, shapes with sum_t E F(t) = 1.
inline M3DiscreteResult simulate_m3_discrete(const LatticeShapeDistribution& shapes,
                                             const IndexBox& window, int dim, const SimConfig& cfg) {
    if (cfg.atom_budget < 1) throw std::invalid_argument("simulate_m3_discrete: atom_budget must be >= 1");
    if (shapes.dim() != dim) throw std::invalid_argument("simulate_m3_discrete: dimension mismatch");
    if (std::abs(shapes.mean_total() - 1.0) > 1e-9)
        throw std::invalid_argument("simulate_m3_discrete: shapes must satisfy sum_t E F(t) = 1");
    RngStream rng(cfg.seed, cfg.stream_id);
    Grid grid = Grid::lattice(window.lo, window.hi, dim);
    const double mass = static_cast<double>(grid.size());
    const double fmax = shapes.max_value();

    M3DiscreteResult result;
    result.field = Field(grid, 0.0);
    double gamma = 0.0;
    double field_min = 0.0;
    for (;;) {
        gamma += rng.exponential();
        double u = mass / gamma;
        if (u * fmax < field_min) {
            result.exact = true;
            break;
        }
        if (result.atoms_used >= cfg.atom_budget) break;
        std::size_t site = std::min(static_cast<std::size_t>(rng.uniform() * mass), grid.size() - 1);
        GridIndex center = grid.unflatten(site);
        const LatticeShape& shape = shapes.component(shapes.sample_index(rng));
        IndexBox reach{{center[0] + shape.support.lo[0], center[1] + shape.support.lo[1]},
                       {center[0] + shape.support.hi[0], center[1] + shape.support.hi[1]}};
        reach.lo[0] = std::max(reach.lo[0], 0);
        reach.lo[1] = std::max(reach.lo[1], 0);
        reach.hi[0] = std::min(reach.hi[0], grid.npts[0] - 1);
        reach.hi[1] = std::min(reach.hi[1], dim == 2 ? grid.npts[1] - 1 : 0);
        if (reach.lo[0] <= reach.hi[0] && reach.lo[1] <= reach.hi[1]) {
            reach.for_each(dim, [&](GridIndex idx) {
                double v = u * shape.at_offset({idx[0] - center[0], idx[1] - center[1]});
                double& cell = result.field.at(idx);
                if (v > cell) cell = v;
            });
        }
        field_min = result.field.min_value();
        ++result.atoms_used;
    }
    return result;
}

/// One eta-sample of the truncated storm process M~_{c,eps,kappa}:
/// Poisson(c |window| / eps) storms with P(U > u) = eps/u, floored at kappa.
/// This is the canonical MDA input for the POT experiments.
inline Field simulate_mda_sample(double c, double eps, double kappa,
                                 const ShapeDistribution& shapes, const Grid& grid, double margin,
                                 RngStream& rng) {
    if (!(c > 0.0) || !(eps > 0.0) || !(kappa > 0.0))
        throw std::invalid_argument("simulate_mda_sample: c, eps, kappa must be positive");
    if (shapes.dim() != grid.dim) throw std::invalid_argument("simulate_mda_sample: dimension mismatch");

    double volume = 1.0;
    Point window_lo{0.0, 0.0}, window_extent{0.0, 0.0};
    for (int d = 0; d < grid.dim; ++d) {
        window_lo[d] = grid.origin[d] - margin;
        window_extent[d] = grid.extent(d) + 2.0 * margin;
        volume *= window_extent[d];
    }
    const double mean_count = c * volume / eps;

    Field field(grid, kappa);
    // Poisson count as unit-rate arrivals on [0, mean_count]
    double t = rng.exponential();
    while (t <= mean_count) {
        double u = eps / rng.uniform();
        Point center;
        for (int d = 0; d < grid.dim; ++d) center[d] = window_lo[d] + window_extent[d] * rng.uniform();
        const ShapeModel& shape = shapes.sample(rng);
        for (std::size_t i = 0; i < field.values.size(); ++i) {
            Point p = grid.coord(grid.unflatten(i));
            double v = u * shape.eval(Point{p[0] - center[0], p[1] - center[1]});
            if (v > field.values[i]) field.values[i] = v;
        }
        t += rng.exponential();
    }
    return field;
}

} // namespace maxstable

#endif
