#ifndef MAXSTABLE_SHAPE_HPP
#define MAXSTABLE_SHAPE_HPP

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "maxstable/grid.hpp"
#include "maxstable/quadrature.hpp"
#include "maxstable/rng.hpp"
#include "maxstable/variogram.hpp"

namespace maxstable {

namespace detail {

/// Multilinear interpolation of a Field at a real point; 0 outside the grid.
inline double interpolate(const Field& f, const Point& t) {
    const Grid& g = f.grid;
    double x0 = (t[0] - g.origin[0]) / g.step[0];
    if (x0 < 0.0 || x0 > g.npts[0] - 1) return 0.0;
    int i0 = std::min(static_cast<int>(x0), g.npts[0] - 2);
    if (g.npts[0] == 1) i0 = 0;
    double u = g.npts[0] == 1 ? 0.0 : x0 - i0;
    if (g.dim == 1) {
        double lo = f.at({i0, 0});
        double hi = g.npts[0] == 1 ? lo : f.at({i0 + 1, 0});
        return lo + u * (hi - lo);
    }
    double x1 = (t[1] - g.origin[1]) / g.step[1];
    if (x1 < 0.0 || x1 > g.npts[1] - 1) return 0.0;
    int i1 = std::min(static_cast<int>(x1), g.npts[1] - 2);
    if (g.npts[1] == 1) i1 = 0;
    double v = g.npts[1] == 1 ? 0.0 : x1 - i1;
    double v00 = f.at({i0, i1});
    double v01 = f.at({i0, std::min(i1 + 1, g.npts[1] - 1)});
    double v10 = f.at({std::min(i0 + 1, g.npts[0] - 1), i1});
    double v11 = f.at({std::min(i0 + 1, g.npts[0] - 1), std::min(i1 + 1, g.npts[1] - 1)});
    return (1 - u) * ((1 - v) * v00 + v * v01) + u * ((1 - v) * v10 + v * v11);
}

} // namespace detail

/// Storm shape F, normalized so that its total integral is 1. eval() returns
/// F = lambda * F1 where the profile F1 peaks at 1 in the origin; lambda is
/// the peak height that makes the integral one.
class ShapeModel {
public:
    enum class Family { gaussian, exponential, student, tabulated };

    /// exp(-beta^2 t^2 / 2) profile, lambda = beta / sqrt(2 pi). 1-D.
    static ShapeModel gaussian(double beta) {
        require_positive(beta, "gaussian shape: beta");
        return gaussian_sigma(SpdMatrix::from_rows(1, {{{1.0 / (beta * beta), 0.0}, {0.0, 1.0}}}));
    }

    /// Gaussian-density shape with covariance Sigma (the Smith shape).
    static ShapeModel gaussian_sigma(const SpdMatrix& sigma) {
        ShapeModel m;
        m.family_ = Family::gaussian;
        m.dim_ = sigma.dim;
        m.sigma_ = sigma;
        m.sigma_inv_ = sigma.inverse();
        double norm = std::pow(2.0 * M_PI, -0.5 * sigma.dim) / std::sqrt(sigma.det());
        m.lambda_ = norm;
        m.profile_integral_ = 1.0 / norm;
        return m;
    }

    /// exp(-beta |t|) profile, lambda = beta / 2. 1-D.
    static ShapeModel exponential(double beta) {
        require_positive(beta, "exponential shape: beta");
        ShapeModel m;
        m.family_ = Family::exponential;
        m.dim_ = 1;
        m.beta_ = beta;
        m.lambda_ = beta / 2.0;
        m.profile_integral_ = 2.0 / beta;
        return m;
    }

    /// (1 + beta^2 t^2 / nu)^(-(nu+1)/2) profile,
    /// lambda = beta Gamma((nu+1)/2) / (sqrt(pi nu) Gamma(nu/2)). 1-D.
    static ShapeModel student(double beta, double nu) {
        require_positive(beta, "student shape: beta");
        require_positive(nu, "student shape: nu");
        ShapeModel m;
        m.family_ = Family::student;
        m.dim_ = 1;
        m.beta_ = beta;
        m.nu_ = nu;
        m.lambda_ = beta * std::exp(std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu)) /
                    std::sqrt(M_PI * nu);
        m.profile_integral_ = m.student_profile_integral();
        return m;
    }

    /// Tabulated shape; the raw table is normalized to unit total integral.
    /// The origin must lie on the table grid and carry a positive value.
    static ShapeModel tabulated(Field raw) {
        ShapeModel m = tabulated_raw(std::move(raw), /*normalize=*/true);
        return m;
    }

    /// Tabulated shape used as-is (no renormalization); the caller owns the
    /// aggregate E int F = 1 guarantee. Needed for converted shape pools.
    static ShapeModel tabulated_scaled(Field raw) {
        return tabulated_raw(std::move(raw), /*normalize=*/false);
    }

    Family family() const { return family_; }
    int dim() const { return dim_; }
    double beta() const { return beta_; }
    double nu() const { return nu_; }
    const SpdMatrix& sigma() const { return sigma_; }
    const Field& table() const { return table_; }

    /// Peak value of the normalized shape, F(0) = sup F.
    double lambda() const { return lambda_; }

    /// Integral of the peak-1 profile F1 (equals 1/lambda).
    double profile_integral() const { return profile_integral_; }

    /// Total integral of the normalized shape (1 up to table quadrature).
    double total_integral() const { return lambda_ * profile_integral_; }

    /// Normalized shape F(t) = lambda * F1(t).
    double eval(const Point& t) const { return lambda_ * eval_profile(t); }
    double eval(double t) const { return eval(Point{t, 0.0}); }

    /// Peak-1 profile F1(t).
    double eval_profile(const Point& t) const {
        switch (family_) {
            case Family::gaussian:
                return std::exp(-0.5 * sigma_inv_.quadratic_form(t));
            case Family::exponential:
                return std::exp(-beta_ * std::abs(t[0]));
            case Family::student: {
                double z = beta_ * t[0];
                return std::pow(1.0 + z * z / nu_, -0.5 * (nu_ + 1.0));
            }
            case Family::tabulated:
                return detail::interpolate(table_, t) / table_peak_;
        }
        return 0.0;
    }
    double eval_profile(double t) const { return eval_profile(Point{t, 0.0}); }

    bool strictly_positive_everywhere() const {
        return family_ == Family::gaussian || family_ == Family::exponential ||
               family_ == Family::student;
    }

private:
    static void require_positive(double v, const char* what) {
        if (!(v > 0.0)) throw std::invalid_argument(std::string(what) + " must be positive");
    }

    static ShapeModel tabulated_raw(Field raw, bool normalize) {
        if (raw.values.empty()) throw std::invalid_argument("tabulated shape: empty table");
        for (double v : raw.values)
            if (!(v >= 0.0) || !std::isfinite(v))
                throw std::invalid_argument("tabulated shape: values must be finite and non-negative");
        const Grid& g = raw.grid;
        GridIndex origin_idx{};
        for (int d = 0; d < g.dim; ++d) {
            double pos = -g.origin[d] / g.step[d];
            int i = static_cast<int>(std::lround(pos));
            if (std::abs(pos - i) > 1e-9 || i < 0 || i >= g.npts[d])
                throw std::invalid_argument("tabulated shape: origin must lie on the table grid");
            origin_idx[d] = i;
        }
        double peak = raw.at(origin_idx);
        if (!(peak > 0.0)) throw std::invalid_argument("tabulated shape: value at the origin must be positive");
        double integral = grid_integral(raw);
        if (!(integral > 0.0)) throw std::invalid_argument("tabulated shape: zero total integral");
        ShapeModel m;
        m.family_ = Family::tabulated;
        m.dim_ = g.dim;
        if (normalize) {
            for (double& v : raw.values) v /= integral;
            peak /= integral;
            integral = 1.0;
        }
        m.table_ = std::move(raw);
        m.table_peak_ = peak;
        m.lambda_ = peak;
        m.profile_integral_ = integral / peak;
        return m;
    }

    double student_profile_integral() const {
        // adaptive quadrature out to where the power tail takes over, plus
        // the analytic tail of (beta^2 t^2 / nu)^(-(nu+1)/2)
        double T = 1000.0 * std::sqrt(nu_) / beta_;
        double body = adaptive_simpson(
            [this](double t) { return eval_profile(t); }, 0.0, T, 1e-10);
        double tail = std::pow(beta_ / std::sqrt(nu_), -(nu_ + 1.0)) * std::pow(T, -nu_) / nu_;
        return 2.0 * (body + tail);
    }

    Family family_ = Family::gaussian;
    int dim_ = 1;
    double beta_ = 1.0;
    double nu_ = 1.0;
    SpdMatrix sigma_;
    SpdMatrix sigma_inv_;
    Field table_;
    double table_peak_ = 1.0;
    double lambda_ = 1.0;
    double profile_integral_ = 1.0;
};

/// Discrete mixture over shape models; deterministic shapes are the
/// single-component case.
class ShapeDistribution {
public:
    ShapeDistribution() = default;

    explicit ShapeDistribution(ShapeModel m) { add(std::move(m), 1.0); }

    void add(ShapeModel m, double weight) {
        if (!(weight > 0.0)) throw std::invalid_argument("ShapeDistribution: weight must be positive");
        if (!components_.empty() && components_.front().dim() != m.dim())
            throw std::invalid_argument("ShapeDistribution: mixed dimensions");
        components_.push_back(std::move(m));
        weights_.push_back(weight);
        cumulative_.clear();
    }

    std::size_t size() const { return components_.size(); }
    const ShapeModel& component(std::size_t i) const { return components_[i]; }
    double weight(std::size_t i) const { return weights_[i]; }
    int dim() const { return components_.front().dim(); }

    /// Almost-sure bound on sup F across the mixture.
    double lambda_max() const {
        double m = 0.0;
        for (const auto& c : components_) m = std::max(m, c.lambda());
        return m;
    }

    /// Weighted mean of total integrals; the M3 normalization E int F.
    double mean_total_integral() const {
        double wsum = 0.0, s = 0.0;
        for (std::size_t i = 0; i < components_.size(); ++i) {
            wsum += weights_[i];
            s += weights_[i] * components_[i].total_integral();
        }
        return s / wsum;
    }

    std::size_t sample_index(RngStream& rng) const {
        if (components_.empty()) throw std::runtime_error("ShapeDistribution: empty");
        if (components_.size() == 1) return 0;
        build_cumulative();
        double u = rng.uniform() * cumulative_.back();
        std::size_t lo = 0, hi = cumulative_.size() - 1;
        while (lo < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (cumulative_[mid] < u) lo = mid + 1; else hi = mid;
        }
        return lo;
    }

    const ShapeModel& sample(RngStream& rng) const { return components_[sample_index(rng)]; }

private:
    void build_cumulative() const {
        if (!cumulative_.empty()) return;
        cumulative_.reserve(weights_.size());
        double acc = 0.0;
        for (double w : weights_) {
            acc += w;
            cumulative_.push_back(acc);
        }
    }

    std::vector<ShapeModel> components_;
    std::vector<double> weights_;
    mutable std::vector<double> cumulative_;
};

/// Shape validity report: unique peak at the origin plus the mass the shape
/// keeps outside a ball of radius R (drives the simulation-window margin).
struct ShapeValidationReport {
    bool unique_max_at_origin = false;
    std::vector<Point> violations;
    double tail_mass = 0.0;
};

/// Checks eq-style shape conditions on the window lattice: strict unique
/// maximum at the origin, and the tail mass int_{|s| >= R} F(s) ds.
inline ShapeValidationReport validate_shape(const ShapeModel& model, const Grid& window, double R) {
    ShapeValidationReport report;
    GridIndex origin_idx{};
    for (int d = 0; d < window.dim; ++d) {
        double pos = -window.origin[d] / window.step[d];
        int i = static_cast<int>(std::lround(pos));
        if (std::abs(pos - i) > 1e-9 || i < 0 || i >= window.npts[d])
            throw std::invalid_argument("validate_shape: window must contain the origin");
        origin_idx[d] = i;
    }
    double peak = model.eval(window.coord(origin_idx));
    report.unique_max_at_origin = true;
    IndexBox::full(window).for_each(window.dim, [&](GridIndex idx) {
        if (idx == origin_idx) return;
        Point p = window.coord(idx);
        double v = model.eval(p);
        if (v >= peak) {
            report.unique_max_at_origin = false;
            report.violations.push_back(p);
        }
    });
    double tail = 0.0;
    IndexBox::full(window).for_each(window.dim, [&](GridIndex idx) {
        Point p = window.coord(idx);
        double norm = window.dim == 1 ? std::abs(p[0]) : std::hypot(p[0], p[1]);
        if (norm < R) return;
        double w = 1.0;
        for (int d = 0; d < window.dim; ++d)
            w *= detail::trapezoid_weight_1d(idx[d], window.npts[d], window.step[d]);
        tail += model.eval(p) * w;
    });
    report.tail_mass = tail;
    return report;
}

} // namespace maxstable

#endif
