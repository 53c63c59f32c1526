#ifndef MAXSTABLE_GAUSSIAN_HPP
#define MAXSTABLE_GAUSSIAN_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "maxstable/grid.hpp"
#include "maxstable/rng.hpp"
#include "maxstable/variogram.hpp"

namespace maxstable {

/// Lower-triangular factor of a PSD matrix, with the jitter that was needed.
struct CholeskyFactor {
    std::size_t n = 0;
    std::vector<double> lower;  // row-major, upper part zero
    double jitter = 0.0;

    /// y = L z.
    std::vector<double> apply(const std::vector<double>& z) const {
        if (z.size() != n) throw std::invalid_argument("CholeskyFactor::apply: size mismatch");
        std::vector<double> y(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            const double* row = lower.data() + i * n;
            for (std::size_t j = 0; j <= i; ++j) s += row[j] * z[j];
            y[i] = s;
        }
        return y;
    }
};

namespace detail {

/// Semidefinite-tolerant Cholesky. Zero pivots (up to a relative tolerance)
/// produce zero rows instead of failing, so exactly singular covariances
/// (pinned anchor row, rank-deficient fBm with alpha = 2) factor cleanly.
inline bool try_cholesky(const CovMatrix& a, double jitter, CholeskyFactor& out) {
    const std::size_t n = a.n;
    out.n = n;
    out.lower.assign(n * n, 0.0);
    out.jitter = jitter;
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(a.at(i, i)));
    if (scale == 0.0) scale = 1.0;
    const double tol = 1e-10 * scale;
    for (std::size_t j = 0; j < n; ++j) {
        double pivot = a.at(j, j) + jitter;
        const double* lj = out.lower.data() + j * n;
        for (std::size_t k = 0; k < j; ++k) pivot -= lj[k] * lj[k];
        if (pivot < -tol) return false;
        if (pivot <= tol) {
            // treat the column as exactly dependent
            out.lower[j * n + j] = 0.0;
            continue;
        }
        double ljj = std::sqrt(pivot);
        out.lower[j * n + j] = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a.at(i, j);
            const double* li = out.lower.data() + i * n;
            for (std::size_t k = 0; k < j; ++k) s -= li[k] * lj[k];
            out.lower[i * n + j] = s / ljj;
        }
    }
    return true;
}

} // namespace detail

/// Factor a symmetric PSD matrix, escalating diagonal jitter
/// 0 -> 1e-12 -> 1e-10 -> 1e-8 before giving up.
inline CholeskyFactor cholesky_psd(const CovMatrix& cov) {
    static const double ladder[] = {0.0, 1e-12, 1e-10, 1e-8};
    CholeskyFactor factor;
    for (double jitter : ladder)
        if (detail::try_cholesky(cov, jitter, factor)) return factor;
    throw std::runtime_error("cholesky_psd: matrix not PSD within jitter cap 1e-8");
}

/// Zero-mean Gaussian vector with the given covariance, laid out on the grid.
inline Field simulate_gaussian_field(const CholeskyFactor& factor, const Grid& grid, RngStream& rng) {
    if (factor.n != grid.size()) throw std::invalid_argument("simulate_gaussian_field: size mismatch");
    std::vector<double> z(factor.n);
    for (double& v : z) v = rng.normal();
    Field f(grid);
    f.values = factor.apply(z);
    return f;
}

inline Field simulate_gaussian_field(const CovMatrix& cov, const Grid& grid, RngStream& rng) {
    return simulate_gaussian_field(cholesky_psd(cov), grid, rng);
}

} // namespace maxstable

#endif
