#ifndef MAXSTABLE_GRID_HPP
#define MAXSTABLE_GRID_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace maxstable {

using GridIndex = std::array<int, 2>;
using Point = std::array<double, 2>;

/// Regular lattice in R^d, d in {1,2}. Points are origin + i*step per
/// dimension; flat storage is row-major (last dimension fastest).
struct Grid {
    int dim = 1;
    Point origin{0.0, 0.0};
    Point step{1.0, 0.0};
    GridIndex npts{0, 1};

    static Grid line(double min, double max, double step_size) {
        Grid g;
        g.dim = 1;
        g.origin = {min, 0.0};
        g.step = {step_size, 0.0};
        g.npts = {count_points(min, max, step_size), 1};
        return g;
    }

    static Grid plane(double min0, double max0, double step0,
                      double min1, double max1, double step1) {
        Grid g;
        g.dim = 2;
        g.origin = {min0, min1};
        g.step = {step0, step1};
        g.npts = {count_points(min0, max0, step0), count_points(min1, max1, step1)};
        return g;
    }

    /// Lattice of integer sites (step 1), for processes on Z^d.
    static Grid lattice(GridIndex lo, GridIndex hi, int dim) {
        Grid g;
        g.dim = dim;
        for (int d = 0; d < dim; ++d) {
            if (hi[d] < lo[d]) throw std::invalid_argument("Grid::lattice: empty range");
            g.origin[d] = static_cast<double>(lo[d]);
            g.step[d] = 1.0;
            g.npts[d] = hi[d] - lo[d] + 1;
        }
        if (dim == 1) g.npts[1] = 1;
        return g;
    }

    std::size_t size() const {
        return static_cast<std::size_t>(npts[0]) * static_cast<std::size_t>(dim == 2 ? npts[1] : 1);
    }

    std::size_t flatten(GridIndex idx) const {
        if (dim == 1) return static_cast<std::size_t>(idx[0]);
        return static_cast<std::size_t>(idx[0]) * npts[1] + idx[1];
    }

    GridIndex unflatten(std::size_t flat) const {
        if (dim == 1) return {static_cast<int>(flat), 0};
        return {static_cast<int>(flat / npts[1]), static_cast<int>(flat % npts[1])};
    }

    Point coord(GridIndex idx) const {
        Point p{0.0, 0.0};
        for (int d = 0; d < dim; ++d) p[d] = origin[d] + idx[d] * step[d];
        return p;
    }

    bool contains(GridIndex idx) const {
        for (int d = 0; d < dim; ++d)
            if (idx[d] < 0 || idx[d] >= npts[d]) return false;
        return true;
    }

    double max_coord(int d) const { return origin[d] + (npts[d] - 1) * step[d]; }

    /// Box extent per dimension, (npts-1)*step.
    double extent(int d) const { return (npts[d] - 1) * step[d]; }

    bool same_layout(const Grid& other) const {
        if (dim != other.dim) return false;
        for (int d = 0; d < dim; ++d) {
            if (npts[d] != other.npts[d]) return false;
            if (origin[d] != other.origin[d] || step[d] != other.step[d]) return false;
        }
        return true;
    }

private:
    static int count_points(double min, double max, double step_size) {
        if (!(step_size > 0.0) || !(max > min))
            throw std::invalid_argument("Grid: need max > min and step > 0");
        double n = (max - min) / step_size;
        int npts = static_cast<int>(std::lround(n)) + 1;
        if (std::abs((npts - 1) * step_size - (max - min)) > 1e-9 * std::max(1.0, std::abs(max - min)))
            throw std::invalid_argument("Grid: (max - min) must be a multiple of step");
        return npts;
    }
};

/// Real-valued function sampled on a Grid.
struct Field {
    Grid grid;
    std::vector<double> values;

    Field() = default;
    explicit Field(const Grid& g, double fill = 0.0) : grid(g), values(g.size(), fill) {}

    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
    double at(GridIndex idx) const { return values[grid.flatten(idx)]; }
    double& at(GridIndex idx) { return values[grid.flatten(idx)]; }

    double max_value() const {
        if (values.empty()) throw std::runtime_error("Field: empty");
        double m = values[0];
        for (double v : values) m = std::max(m, v);
        return m;
    }
    double min_value() const {
        if (values.empty()) throw std::runtime_error("Field: empty");
        double m = values[0];
        for (double v : values) m = std::min(m, v);
        return m;
    }
};

/// Inclusive index box; doubles as an offset box around a lattice point.
struct IndexBox {
    GridIndex lo{0, 0};
    GridIndex hi{0, 0};

    static IndexBox full(const Grid& g) {
        IndexBox b;
        b.lo = {0, 0};
        b.hi = {g.npts[0] - 1, g.dim == 2 ? g.npts[1] - 1 : 0};
        return b;
    }

    /// Symmetric offset box of the given radius per dimension.
    static IndexBox radius(int r0, int r1 = 0) {
        return IndexBox{{-r0, -r1}, {r0, r1}};
    }

    int count(int d) const { return hi[d] - lo[d] + 1; }
    std::size_t size(int dim) const {
        return static_cast<std::size_t>(count(0)) * (dim == 2 ? count(1) : 1);
    }
    bool contains(GridIndex idx, int dim) const {
        for (int d = 0; d < dim; ++d)
            if (idx[d] < lo[d] || idx[d] > hi[d]) return false;
        return true;
    }
    /// Minkowski sum with another box.
    IndexBox dilate(const IndexBox& other) const {
        return IndexBox{{lo[0] + other.lo[0], lo[1] + other.lo[1]},
                        {hi[0] + other.hi[0], hi[1] + other.hi[1]}};
    }
    bool inside(const Grid& g) const {
        for (int d = 0; d < g.dim; ++d)
            if (lo[d] < 0 || hi[d] >= g.npts[d]) return false;
        return true;
    }
    /// Applies fn(GridIndex) over the box in lexicographic order.
    template <typename Fn>
    void for_each(int dim, Fn&& fn) const {
        if (dim == 1) {
            for (int i = lo[0]; i <= hi[0]; ++i) fn(GridIndex{i, 0});
        } else {
            for (int i = lo[0]; i <= hi[0]; ++i)
                for (int j = lo[1]; j <= hi[1]; ++j) fn(GridIndex{i, j});
        }
    }
};

namespace detail {
inline double trapezoid_weight_1d(int i, int n, double step) {
    if (n < 2) throw std::invalid_argument("grid_integral: need at least 2 points per dimension");
    return (i == 0 || i == n - 1) ? 0.5 * step : step;
}
} // namespace detail

/// Trapezoid-cell quadrature over a sub-box of the field's grid:
/// each lattice point carries the volume of its cell clipped to the box.
inline double grid_integral_over(const Field& f, const IndexBox& box) {
    if (f.values.empty()) throw std::invalid_argument("grid_integral: empty field");
    const Grid& g = f.grid;
    double total = 0.0;
    if (g.dim == 1) {
        int n = box.count(0);
        for (int i = box.lo[0]; i <= box.hi[0]; ++i)
            total += f.at({i, 0}) * detail::trapezoid_weight_1d(i - box.lo[0], n, g.step[0]);
    } else {
        int n0 = box.count(0), n1 = box.count(1);
        for (int i = box.lo[0]; i <= box.hi[0]; ++i) {
            double w0 = detail::trapezoid_weight_1d(i - box.lo[0], n0, g.step[0]);
            double row = 0.0;
            for (int j = box.lo[1]; j <= box.hi[1]; ++j)
                row += f.at({i, j}) * detail::trapezoid_weight_1d(j - box.lo[1], n1, g.step[1]);
            total += w0 * row;
        }
    }
    return total;
}

inline double grid_integral(const Field& f) {
    return grid_integral_over(f, IndexBox::full(f.grid));
}

/// Lexicographically smallest maximizer of the field over the region.
inline GridIndex argmax_lexicographic(const Field& f, const IndexBox& region) {
    const Grid& g = f.grid;
    if (!region.inside(g)) throw std::invalid_argument("argmax_lexicographic: region outside grid");
    GridIndex best{region.lo[0], g.dim == 2 ? region.lo[1] : 0};
    double best_value = f.at(best);
    region.for_each(g.dim, [&](GridIndex idx) {
        double v = f.at(idx);
        if (v > best_value) {
            best_value = v;
            best = idx;
        }
    });
    return best;
}

/// Max of the field over a region (same scan as argmax_lexicographic).
inline double max_over(const Field& f, const IndexBox& region) {
    return f.at(argmax_lexicographic(f, region));
}

} // namespace maxstable

#endif
