#ifndef MAXSTABLE_EXTRACT_HPP
#define MAXSTABLE_EXTRACT_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "maxstable/grid.hpp"
#include "maxstable/stats.hpp"

namespace maxstable {

/// Threshold a_n = n^rho: a(n) -> infinity while a(n)/n -> 0 for rho in (0,1).
inline double choose_threshold_power(std::size_t n, double rho) {
    if (n < 1) throw std::invalid_argument("choose_threshold_power: n must be >= 1");
    if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("choose_threshold_power: rho must be in (0,1)");
    return std::pow(static_cast<double>(n), rho);
}

/// Empirical p-quantile of the conditioning statistic.
inline double choose_threshold_quantile(const std::vector<double>& statistics, double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("choose_threshold_quantile: p must be in (0,1)");
    return empirical_quantile(statistics, p);
}

/// Stored sample values are rounded to 32-bit float precision. The ratios are
/// statistical artifacts (all downstream tolerances are >= 1e-2); keeping
/// sub-float bits would make the stored sets depend on the arbitrary common
/// scale of the input replicates through IEEE rounding, breaking the
/// multiplication invariance of the selection events.
inline double quantize_sample_value(double v) {
    return static_cast<double>(static_cast<float>(v));
}

/// Extracted, normalized single-event samples with selection metadata.
struct ExtremeEventSet {
    enum class Kind { increments, shapes };

    Kind kind = Kind::increments;
    std::vector<Field> samples;        ///< normalized fields (increments: 1 at t0; shapes: 1 at origin)
    std::vector<double> exceedances;   ///< eta(t0)/a_n or max/a_n, aligned with samples
    std::vector<std::size_t> selection;  ///< replicate indices, ascending
    double threshold = 0.0;

    GridIndex anchor{0, 0};       ///< t0 (increments / discrete shapes)
    IndexBox inner_region;        ///< Q (shapes)
    IndexBox dilation;            ///< L offsets (shapes)
    IndexBox output_window;       ///< K offsets (shapes)

    std::size_t dropped_boundary = 0;  ///< tau + K left the grid
    std::size_t excluded_zero = 0;     ///< zero at the anchor
};

/// I1 selection: replicates with eta(t0) > a_n, stored as eta(.)/eta(t0).
inline ExtremeEventSet extract_increments(const std::vector<Field>& replicates, GridIndex t0,
                                          double a_n) {
    if (replicates.empty()) throw std::invalid_argument("extract_increments: no replicates");
    if (!(a_n > 0.0)) throw std::invalid_argument("extract_increments: threshold must be positive");
    const Grid& grid = replicates.front().grid;
    if (!grid.contains(t0)) throw std::invalid_argument("extract_increments: t0 not on grid");

    ExtremeEventSet set;
    set.kind = ExtremeEventSet::Kind::increments;
    set.threshold = a_n;
    set.anchor = t0;
    for (std::size_t r = 0; r < replicates.size(); ++r) {
        const Field& eta = replicates[r];
        if (!eta.grid.same_layout(grid))
            throw std::invalid_argument("extract_increments: replicate grids differ");
        double anchor_value = eta.at(t0);
        if (!(anchor_value > a_n)) continue;  // strict exceedance
        if (anchor_value == 0.0) {
            ++set.excluded_zero;
            continue;
        }
        Field sample(grid);
        for (std::size_t i = 0; i < eta.values.size(); ++i)
            sample.values[i] = quantize_sample_value(eta.values[i] / anchor_value);
        set.samples.push_back(std::move(sample));
        set.exceedances.push_back(quantize_sample_value(anchor_value / a_n));
        set.selection.push_back(r);
    }
    return set;
}

/// I2 selection: replicates whose maximum over Q equals the maximum over
/// Q (+) L and reaches a_n; stores eta(tau + .)/eta(tau) on the window K.
inline ExtremeEventSet extract_shapes(const std::vector<Field>& replicates, const IndexBox& Q,
                                      const IndexBox& L_offsets, const IndexBox& K_offsets,
                                      double a_n) {
    if (replicates.empty()) throw std::invalid_argument("extract_shapes: no replicates");
    if (!(a_n > 0.0)) throw std::invalid_argument("extract_shapes: threshold must be positive");
    const Grid& grid = replicates.front().grid;
    IndexBox QL = Q.dilate(L_offsets);
    if (!Q.inside(grid) || !QL.inside(grid))
        throw std::invalid_argument("extract_shapes: Q (+) L must lie inside the grid");

    ExtremeEventSet set;
    set.kind = ExtremeEventSet::Kind::shapes;
    set.threshold = a_n;
    set.inner_region = Q;
    set.dilation = L_offsets;
    set.output_window = K_offsets;

    Grid profile_grid;
    profile_grid.dim = grid.dim;
    for (int d = 0; d < grid.dim; ++d) {
        profile_grid.origin[d] = K_offsets.lo[d] * grid.step[d];
        profile_grid.step[d] = grid.step[d];
        profile_grid.npts[d] = K_offsets.count(d);
    }
    if (grid.dim == 1) profile_grid.npts[1] = 1;

    for (std::size_t r = 0; r < replicates.size(); ++r) {
        const Field& eta = replicates[r];
        if (!eta.grid.same_layout(grid))
            throw std::invalid_argument("extract_shapes: replicate grids differ");
        double max_q = max_over(eta, Q);
        double max_ql = max_over(eta, QL);
        // the local-max event compares values computed from the same array
        if (!(max_q == max_ql && max_q >= a_n)) continue;
        GridIndex tau = argmax_lexicographic(eta, Q);
        IndexBox shifted{{tau[0] + K_offsets.lo[0], tau[1] + K_offsets.lo[1]},
                         {tau[0] + K_offsets.hi[0], tau[1] + K_offsets.hi[1]}};
        if (!shifted.inside(grid)) {
            ++set.dropped_boundary;
            continue;
        }
        double peak = eta.at(tau);
        if (peak == 0.0) {
            ++set.excluded_zero;
            continue;
        }
        Field sample(profile_grid);
        std::size_t out = 0;
        shifted.for_each(grid.dim, [&](GridIndex idx) {
            sample.values[out++] = quantize_sample_value(eta.at(idx) / peak);
        });
        set.samples.push_back(std::move(sample));
        set.exceedances.push_back(quantize_sample_value(max_q / a_n));
        set.selection.push_back(r);
    }
    return set;
}

/// Discrete analogue: conditioning event eta(t0) = max_{t in L} eta(t0 + t),
/// eta(t0) >= a_n on the lattice; stores the ratio profile on t0 + K.
inline ExtremeEventSet extract_shapes_discrete(const std::vector<Field>& replicates, GridIndex t0,
                                               const IndexBox& L_offsets, const IndexBox& K_offsets,
                                               double a_n) {
    if (replicates.empty()) throw std::invalid_argument("extract_shapes_discrete: no replicates");
    if (!(a_n > 0.0)) throw std::invalid_argument("extract_shapes_discrete: threshold must be positive");
    const Grid& grid = replicates.front().grid;
    IndexBox local{{t0[0] + L_offsets.lo[0], t0[1] + L_offsets.lo[1]},
                   {t0[0] + L_offsets.hi[0], t0[1] + L_offsets.hi[1]}};
    if (!grid.contains(t0) || !local.inside(grid))
        throw std::invalid_argument("extract_shapes_discrete: t0 + L must lie on the lattice");
    if (!L_offsets.contains({0, 0}, grid.dim))
        throw std::invalid_argument("extract_shapes_discrete: L must contain the origin");

    ExtremeEventSet set;
    set.kind = ExtremeEventSet::Kind::shapes;
    set.threshold = a_n;
    set.anchor = t0;
    set.dilation = L_offsets;
    set.output_window = K_offsets;

    Grid profile_grid;
    profile_grid.dim = grid.dim;
    for (int d = 0; d < grid.dim; ++d) {
        profile_grid.origin[d] = K_offsets.lo[d] * grid.step[d];
        profile_grid.step[d] = grid.step[d];
        profile_grid.npts[d] = K_offsets.count(d);
    }
    if (grid.dim == 1) profile_grid.npts[1] = 1;

    for (std::size_t r = 0; r < replicates.size(); ++r) {
        const Field& eta = replicates[r];
        if (!eta.grid.same_layout(grid))
            throw std::invalid_argument("extract_shapes_discrete: replicate grids differ");
        double center = eta.at(t0);
        double local_max = max_over(eta, local);
        if (!(center == local_max && center >= a_n)) continue;
        IndexBox shifted{{t0[0] + K_offsets.lo[0], t0[1] + K_offsets.lo[1]},
                         {t0[0] + K_offsets.hi[0], t0[1] + K_offsets.hi[1]}};
        if (!shifted.inside(grid)) {
            ++set.dropped_boundary;
            continue;
        }
        if (center == 0.0) {
            ++set.excluded_zero;
            continue;
        }
        Field sample(profile_grid);
        std::size_t out = 0;
        shifted.for_each(grid.dim, [&](GridIndex idx) {
            sample.values[out++] = quantize_sample_value(eta.at(idx) / center);
        });
        set.samples.push_back(std::move(sample));
        set.exceedances.push_back(quantize_sample_value(center / a_n));
        set.selection.push_back(r);
    }
    return set;
}

} // namespace maxstable

#endif
