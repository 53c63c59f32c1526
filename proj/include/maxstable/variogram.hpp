#ifndef MAXSTABLE_VARIOGRAM_HPP
#define MAXSTABLE_VARIOGRAM_HPP

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "maxstable/grid.hpp"

namespace maxstable {

/// Symmetric positive definite d x d matrix, d in {1,2}.
struct SpdMatrix {
    int dim = 1;
    std::array<std::array<double, 2>, 2> a{{{1.0, 0.0}, {0.0, 1.0}}};

    static SpdMatrix identity(int dim) {
        SpdMatrix m;
        m.dim = dim;
        return m;
    }

    static SpdMatrix from_rows(int dim, std::array<std::array<double, 2>, 2> rows) {
        SpdMatrix m;
        m.dim = dim;
        m.a = rows;
        if (dim == 1) {
            if (!(rows[0][0] > 0.0)) throw std::invalid_argument("SpdMatrix: not positive definite");
        } else {
            if (std::abs(rows[0][1] - rows[1][0]) > 1e-12 * (std::abs(rows[0][1]) + 1.0))
                throw std::invalid_argument("SpdMatrix: not symmetric");
            if (!(rows[0][0] > 0.0) || !(rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0] > 0.0))
                throw std::invalid_argument("SpdMatrix: not positive definite");
        }
        return m;
    }

    double det() const {
        return dim == 1 ? a[0][0] : a[0][0] * a[1][1] - a[0][1] * a[1][0];
    }

    SpdMatrix inverse() const {
        SpdMatrix inv;
        inv.dim = dim;
        if (dim == 1) {
            inv.a[0][0] = 1.0 / a[0][0];
        } else {
            double d = det();
            inv.a = {{{a[1][1] / d, -a[0][1] / d}, {-a[1][0] / d, a[0][0] / d}}};
        }
        return inv;
    }

    /// h^T M h.
    double quadratic_form(const Point& h) const {
        if (dim == 1) return a[0][0] * h[0] * h[0];
        return h[0] * (a[0][0] * h[0] + a[0][1] * h[1]) + h[1] * (a[1][0] * h[0] + a[1][1] * h[1]);
    }
};

/// Parametric variogram family: fractional-Brownian gamma(h) = (|h|/s)^alpha,
/// or the Smith form gamma(h) = h^T Sigma^-1 h.
class VariogramModel {
public:
    enum class Kind { fbm, smith };

    static VariogramModel fbm(double scale, double alpha, int dim = 1) {
        if (!(scale > 0.0)) throw std::invalid_argument("fbm variogram: scale must be positive");
        if (!(alpha > 0.0 && alpha <= 2.0)) throw std::invalid_argument("fbm variogram: alpha must be in (0,2]");
        VariogramModel m;
        m.kind_ = Kind::fbm;
        m.dim_ = dim;
        m.scale_ = scale;
        m.alpha_ = alpha;
        return m;
    }

    static VariogramModel smith(const SpdMatrix& sigma) {
        VariogramModel m;
        m.kind_ = Kind::smith;
        m.dim_ = sigma.dim;
        m.sigma_ = sigma;
        m.sigma_inv_ = sigma.inverse();
        return m;
    }

    Kind kind() const { return kind_; }
    int dim() const { return dim_; }
    double fbm_scale() const { return scale_; }
    double fbm_alpha() const { return alpha_; }
    const SpdMatrix& smith_sigma() const { return sigma_; }

    double operator()(const Point& h) const {
        if (kind_ == Kind::smith) return sigma_inv_.quadratic_form(h);
        double norm = dim_ == 1 ? std::abs(h[0]) : std::hypot(h[0], h[1]);
        if (norm == 0.0) return 0.0;
        return std::pow(norm / scale_, alpha_);
    }

    double operator()(double h) const { return (*this)(Point{h, 0.0}); }

private:
    Kind kind_ = Kind::fbm;
    int dim_ = 1;
    double scale_ = 1.0;
    double alpha_ = 1.0;
    SpdMatrix sigma_;
    SpdMatrix sigma_inv_;
};

/// Dense symmetric matrix in row-major storage.
struct CovMatrix {
    std::size_t n = 0;
    std::vector<double> data;

    explicit CovMatrix(std::size_t size = 0) : n(size), data(size * size, 0.0) {}
    double& at(std::size_t i, std::size_t j) { return data[i * n + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * n + j]; }
};

/// Covariance of the increment process pinned at t0:
/// C(s,t) = (gamma(s - t0) + gamma(t - t0) - gamma(s - t)) / 2.
inline CovMatrix cov_from_variogram(const VariogramModel& model, const Grid& grid, GridIndex t0) {
    if (!grid.contains(t0)) throw std::invalid_argument("cov_from_variogram: t0 not on grid");
    const std::size_t n = grid.size();
    std::vector<double> gamma_to_t0(n);
    Point p0 = grid.coord(t0);
    for (std::size_t i = 0; i < n; ++i) {
        Point p = grid.coord(grid.unflatten(i));
        gamma_to_t0[i] = model(Point{p[0] - p0[0], p[1] - p0[1]});
    }
    CovMatrix cov(n);
    for (std::size_t i = 0; i < n; ++i) {
        Point pi = grid.coord(grid.unflatten(i));
        for (std::size_t j = i; j < n; ++j) {
            Point pj = grid.coord(grid.unflatten(j));
            double gij = model(Point{pi[0] - pj[0], pi[1] - pj[1]});
            double c = 0.5 * (gamma_to_t0[i] + gamma_to_t0[j] - gij);
            cov.at(i, j) = c;
            cov.at(j, i) = c;
        }
    }
    // Pin the anchor row/column to exact zero.
    std::size_t k0 = grid.flatten(t0);
    for (std::size_t i = 0; i < n; ++i) {
        cov.at(i, k0) = 0.0;
        cov.at(k0, i) = 0.0;
    }
    return cov;
}

} // namespace maxstable

#endif
