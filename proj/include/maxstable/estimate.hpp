#ifndef MAXSTABLE_ESTIMATE_HPP
#define MAXSTABLE_ESTIMATE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "maxstable/extract.hpp"
#include "maxstable/grid.hpp"
#include "maxstable/normal.hpp"
#include "maxstable/shape.hpp"
#include "maxstable/stats.hpp"

namespace maxstable {

struct EstimateResult {
    std::string parameter;
    double estimate = 0.0;
    double objective = 0.0;
    int iterations = 0;
    std::size_t sample_size = 0;
    std::map<std::string, double> diagnostics;
};

struct ScalarSearchResult {
    double x = 0.0;
    double value = 0.0;
    int iterations = 0;
};

/// Maximize a scalar function: coarse scan (unimodality is not assumed),
/// then golden-section inside the best bracket.
template <typename F>
ScalarSearchResult golden_section_max(F&& f, double lo, double hi, double tol, int coarse_points = 32) {
    if (!(hi > lo)) throw std::invalid_argument("golden_section_max: need hi > lo");
    ScalarSearchResult result;
    int best = 0;
    std::vector<double> xs(coarse_points), fs(coarse_points);
    for (int i = 0; i < coarse_points; ++i) {
        xs[i] = lo + (hi - lo) * i / (coarse_points - 1);
        fs[i] = f(xs[i]);
        if (fs[i] > fs[best]) best = i;
    }
    double a = xs[std::max(0, best - 1)];
    double b = xs[std::min(coarse_points - 1, best + 1)];
    static const double inv_phi = 0.6180339887498948482;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    int iter = coarse_points;
    while (b - a > tol) {
        if (f1 < f2) {
            a = x1;
            x1 = x2; f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1; f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
        if (++iter > 500) break;
    }
    result.x = 0.5 * (a + b);
    result.value = f(result.x);
    result.iterations = iter;
    return result;
}

/// CDF of the symmetric-logistic incremental vector W:
/// P(W <= s) = (1 + sum_i s_i^-q)^(1/q - 1).
inline double logistic_increment_cdf(const std::vector<double>& s, double q) {
    if (!(q > 1.0)) throw std::invalid_argument("logistic_increment_cdf: q must be > 1");
    if (s.empty()) throw std::invalid_argument("logistic_increment_cdf: empty argument");
    double a = 1.0;
    for (double v : s) {
        if (!(v > 0.0)) throw std::invalid_argument("logistic_increment_cdf: s must be positive");
        a += std::pow(v, -q);
    }
    return std::pow(a, 1.0 / q - 1.0);
}

/// Density of W, the mixed derivative of the CDF above:
/// (1 + sum s_i^-q)^(1/q - (k+1)) * prod_{i=1..k} (iq - 1) * prod s_i^(-q-1).
inline double logistic_increment_density(const std::vector<double>& s, double q) {
    if (!(q > 1.0)) throw std::invalid_argument("logistic_increment_density: q must be > 1");
    if (s.empty()) throw std::invalid_argument("logistic_increment_density: empty argument");
    const double k = static_cast<double>(s.size());
    double a = 1.0, log_s_sum = 0.0;
    for (double v : s) {
        if (!(v > 0.0)) throw std::invalid_argument("logistic_increment_density: s must be positive");
        a += std::pow(v, -q);
        log_s_sum += std::log(v);
    }
    double log_density = (1.0 / q - (k + 1.0)) * std::log(a) - (q + 1.0) * log_s_sum;
    for (std::size_t i = 1; i <= s.size(); ++i) log_density += std::log(i * q - 1.0);
    return std::exp(log_density);
}

namespace detail {

inline double logistic_log_likelihood(const std::vector<std::vector<double>>& samples, double q) {
    double total = 0.0;
    const double k = samples.empty() ? 0.0 : static_cast<double>(samples.front().size());
    double log_coeff = 0.0;
    for (std::size_t i = 1; i <= static_cast<std::size_t>(k); ++i) log_coeff += std::log(i * q - 1.0);
    for (const auto& s : samples) {
        double a = 1.0, log_s_sum = 0.0;
        for (double v : s) {
            a += std::pow(v, -q);
            log_s_sum += std::log(v);
        }
        total += (1.0 / q - (k + 1.0)) * std::log(a) - (q + 1.0) * log_s_sum + log_coeff;
    }
    return total;
}

} // namespace detail

/// Maximum-likelihood estimate of the logistic dependence parameter q from
/// extracted increment samples; coarse scan plus golden section on q.
inline EstimateResult logistic_mle(const ExtremeEventSet& events, double q_lo, double q_hi) {
    if (events.kind != ExtremeEventSet::Kind::increments)
        throw std::invalid_argument("logistic_mle: needs an increments event set");
    if (events.samples.empty()) throw std::invalid_argument("logistic_mle: empty event set");
    q_lo = std::max(q_lo, 1.0 + 1e-6);
    if (!(q_hi > q_lo)) throw std::invalid_argument("logistic_mle: empty q interval");

    const Grid& grid = events.samples.front().grid;
    std::size_t anchor_flat = grid.flatten(events.anchor);
    std::vector<std::vector<double>> samples;
    samples.reserve(events.samples.size());
    for (std::size_t i = 0; i < events.samples.size(); ++i) {
        const Field& f = events.samples[i];
        std::vector<double> s;
        s.reserve(f.values.size() - 1);
        for (std::size_t j = 0; j < f.values.size(); ++j) {
            if (j == anchor_flat) continue;
            if (!(f.values[j] > 0.0))
                throw std::runtime_error("logistic_mle: non-finite log-likelihood at sample " +
                                         std::to_string(i) + " (non-positive ratio entry)");
            s.push_back(f.values[j]);
        }
        samples.push_back(std::move(s));
    }

    auto loglik = [&](double q) { return detail::logistic_log_likelihood(samples, q); };
    ScalarSearchResult search = golden_section_max(loglik, q_lo, q_hi, 1e-8);
    if (!std::isfinite(search.value))
        throw std::runtime_error("logistic_mle: non-finite log-likelihood at optimum");

    EstimateResult result;
    result.parameter = "q";
    result.estimate = search.x;
    result.objective = search.value;
    result.iterations = search.iterations;
    result.sample_size = events.samples.size();
    result.diagnostics["q_lower"] = q_lo;
    result.diagnostics["q_upper"] = q_hi;
    return result;
}

/// Pointwise arithmetic mean of the extracted profiles, F-hat_1. Samples are
/// combined in ascending selection order with pairwise summation, so the
/// result does not depend on the order the event set was assembled in.
inline Field mean_shape(const ExtremeEventSet& events) {
    if (events.kind != ExtremeEventSet::Kind::shapes)
        throw std::invalid_argument("mean_shape: needs a shapes event set");
    if (events.samples.empty()) throw std::invalid_argument("mean_shape: empty event set");
    const Grid& grid = events.samples.front().grid;
    for (const Field& f : events.samples)
        if (!f.grid.same_layout(grid)) throw std::invalid_argument("mean_shape: mismatched windows");

    std::vector<std::size_t> order(events.samples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (events.selection.size() == events.samples.size())
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return events.selection[a] < events.selection[b];
        });

    Field mean(grid);
    std::vector<double> scratch(events.samples.size());
    for (std::size_t p = 0; p < grid.size(); ++p) {
        for (std::size_t i = 0; i < order.size(); ++i) scratch[i] = events.samples[order[i]].values[p];
        mean.values[p] = pairwise_sum(scratch) / static_cast<double>(scratch.size());
    }
    return mean;
}

/// Least-squares fit of beta to a mean profile. Gaussian and exponential
/// families regress log F-hat on -t^2/2 and -|t| through the origin; the
/// student family is a 1-D scalar least-squares over beta.
inline EstimateResult fit_shape_beta(const Field& meanshape, ShapeModel::Family family,
                                     double nu = 3.0) {
    if (meanshape.grid.dim != 1)
        throw std::invalid_argument("fit_shape_beta: profile fitting is one-dimensional");
    EstimateResult result;
    result.parameter = "beta";

    std::vector<double> ts, values;
    for (std::size_t i = 0; i < meanshape.values.size(); ++i) {
        double t = meanshape.grid.coord(meanshape.grid.unflatten(i))[0];
        if (t == 0.0) continue;
        ts.push_back(t);
        values.push_back(meanshape.values[i]);
    }
    if (ts.empty()) throw std::invalid_argument("fit_shape_beta: no fit locations besides the origin");

    if (family == ShapeModel::Family::gaussian || family == ShapeModel::Family::exponential) {
        double sxy = 0.0, sxx = 0.0;
        std::size_t dropped = 0, used = 0;
        std::vector<double> xs, ys;
        for (std::size_t i = 0; i < ts.size(); ++i) {
            if (!(values[i] > 0.0)) {
                ++dropped;
                continue;
            }
            double x = family == ShapeModel::Family::gaussian ? -0.5 * ts[i] * ts[i] : -std::abs(ts[i]);
            double y = std::log(values[i]);
            sxy += x * y;
            sxx += x * x;
            xs.push_back(x);
            ys.push_back(y);
            ++used;
        }
        if (used == 0) throw std::runtime_error("fit_shape_beta: all fit locations dropped (non-positive mean shape)");
        double slope = sxy / sxx;
        if (!(slope > 0.0)) throw std::runtime_error("fit_shape_beta: non-positive slope, profile does not decay");
        double beta = family == ShapeModel::Family::gaussian ? std::sqrt(slope) : slope;
        double ss_res = 0.0, ss_tot = 0.0;
        double ymean = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
        for (std::size_t i = 0; i < xs.size(); ++i) {
            double r = ys[i] - slope * xs[i];
            ss_res += r * r;
            ss_tot += (ys[i] - ymean) * (ys[i] - ymean);
        }
        result.estimate = beta;
        result.objective = ss_res;
        result.iterations = 0;
        result.sample_size = used;
        result.diagnostics["dropped_locations"] = static_cast<double>(dropped);
        result.diagnostics["r_squared"] = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
        return result;
    }

    if (family != ShapeModel::Family::student)
        throw std::invalid_argument("fit_shape_beta: family must be gaussian, exponential or student");
    if (!(nu > 0.0)) throw std::invalid_argument("fit_shape_beta: nu must be positive");
    auto sse = [&](double beta) {
        double s = 0.0;
        for (std::size_t i = 0; i < ts.size(); ++i) {
            double z = beta * ts[i];
            double model = std::pow(1.0 + z * z / nu, -0.5 * (nu + 1.0));
            double r = values[i] - model;
            s += r * r;
        }
        return -s;
    };
    ScalarSearchResult search = golden_section_max(sse, 1e-3, 100.0, 1e-10, 64);
    result.estimate = search.x;
    result.objective = -search.value;
    result.iterations = search.iterations;
    result.sample_size = ts.size();
    result.diagnostics["nu"] = nu;
    return result;
}

struct ThetaEstimate {
    double theta = 1.0;
    bool clamped = false;
    double raw = 1.0;
    double numerator = 0.0;
    double denominator = 0.0;
};

/// Extremal coefficient from extracted profiles:
/// theta(h) = sum_i int_K~ max(F_i(t), F_i(t+h)) dt / sum_i int_K~ F_i(t) dt,
/// clamped to [1,2]. h and K~ are in lattice offsets of the profile window.
inline ThetaEstimate extremal_coefficient_from_shapes(const ExtremeEventSet& events, GridIndex h,
                                                      const IndexBox& Ktilde) {
    if (events.kind != ExtremeEventSet::Kind::shapes)
        throw std::invalid_argument("extremal_coefficient_from_shapes: needs a shapes event set");
    if (events.samples.empty()) throw std::invalid_argument("extremal_coefficient_from_shapes: empty event set");
    const Grid& grid = events.samples.front().grid;
    const IndexBox K = events.output_window;
    for (int d = 0; d < grid.dim; ++d) {
        if (Ktilde.lo[d] < K.lo[d] || Ktilde.hi[d] > K.hi[d] ||
            Ktilde.lo[d] + h[d] < K.lo[d] || Ktilde.hi[d] + h[d] > K.hi[d])
            throw std::invalid_argument("extremal_coefficient_from_shapes: K~ and K~+h must lie inside K");
    }

    double num = 0.0, den = 0.0;
    const int n0 = Ktilde.count(0);
    const int n1 = grid.dim == 2 ? Ktilde.count(1) : 1;
    for (const Field& f : events.samples) {
        Ktilde.for_each(grid.dim, [&](GridIndex off) {
            double w = detail::trapezoid_weight_1d(off[0] - Ktilde.lo[0], n0, grid.step[0]);
            if (grid.dim == 2) w *= detail::trapezoid_weight_1d(off[1] - Ktilde.lo[1], n1, grid.step[1]);
            GridIndex idx{off[0] - K.lo[0], grid.dim == 2 ? off[1] - K.lo[1] : 0};
            GridIndex idx_h{idx[0] + h[0], grid.dim == 2 ? idx[1] + h[1] : 0};
            double v = f.at(idx);
            double vh = f.at(idx_h);
            num += w * std::max(v, vh);
            den += w * v;
        });
    }
    if (!(den > 0.0)) throw std::runtime_error("extremal_coefficient_from_shapes: zero denominator");

    ThetaEstimate est;
    est.numerator = num;
    est.denominator = den;
    est.raw = num / den;
    est.theta = std::clamp(est.raw, 1.0, 2.0);
    est.clamped = est.theta != est.raw;
    return est;
}

struct VariogramEstimate {
    enum class Boundary { none, full_dependence, independence };
    double gamma = 0.0;
    Boundary boundary = Boundary::none;
    ThetaEstimate theta;
};

/// Variogram through the extremal coefficient: gamma(h) = {2 Phi^-1(theta/2)}^2.
/// theta = 1 surfaces as an exact zero, theta = 2 as a boundary diagnostic.
inline VariogramEstimate variogram_from_shapes(const ExtremeEventSet& events, GridIndex h,
                                               const IndexBox& Ktilde) {
    VariogramEstimate est;
    est.theta = extremal_coefficient_from_shapes(events, h, Ktilde);
    if (est.theta.theta == 1.0) {
        est.gamma = 0.0;
        est.boundary = VariogramEstimate::Boundary::full_dependence;
        return est;
    }
    if (est.theta.theta == 2.0) {
        est.gamma = std::numeric_limits<double>::quiet_NaN();
        est.boundary = VariogramEstimate::Boundary::independence;
        return est;
    }
    double z = 2.0 * inv_std_normal_cdf(0.5 * est.theta.theta);
    est.gamma = z * z;
    return est;
}

struct UnitMeanReport {
    Field abs_deviation;   ///< |sample mean - 1| per grid point
    Field standard_error;  ///< Monte-Carlo standard error per grid point
    std::size_t sample_count = 0;
};

/// Pointwise check of the spectral normalization E V(t) = 1.
inline UnitMeanReport unit_mean_diagnostic(const std::vector<Field>& w_samples) {
    if (w_samples.empty()) throw std::invalid_argument("unit_mean_diagnostic: empty sample list");
    const Grid& grid = w_samples.front().grid;
    for (const Field& f : w_samples)
        if (!f.grid.same_layout(grid)) throw std::invalid_argument("unit_mean_diagnostic: mismatched grids");
    const std::size_t n = w_samples.size();
    UnitMeanReport report;
    report.sample_count = n;
    report.abs_deviation = Field(grid);
    report.standard_error = Field(grid);
    std::vector<double> scratch(n);
    for (std::size_t p = 0; p < grid.size(); ++p) {
        for (std::size_t i = 0; i < n; ++i) scratch[i] = w_samples[i].values[p];
        double m = pairwise_sum(scratch) / static_cast<double>(n);
        report.abs_deviation.values[p] = std::abs(m - 1.0);
        if (n > 1) {
            double ss = 0.0;
            for (double v : scratch) ss += (v - m) * (v - m);
            report.standard_error.values[p] = std::sqrt(ss / (n - 1) / static_cast<double>(n));
        }
    }
    return report;
}

} // namespace maxstable

#endif
