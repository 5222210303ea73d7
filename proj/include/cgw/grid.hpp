// Discretization: a product grid T^4 x (truncated R^4).  Base axes are
// periodic and uniform on [0, 2*pi); fiber axes are bounded, symmetric about
// the origin and optionally graded toward it (node y = sign(u) R |u|^g).
//
// Any axis may be collapsed to a single point.  Every operator in the code
// base acts through per-axis stencils or pointwise, so data constant along an
// axis stays constant; a collapsed axis therefore reproduces the full-grid
// computation exactly whenever the data does not vary along it.  This is what
// makes 8-dimensional product fields affordable.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cgw {

struct Axis {
    bool periodic = false;
    std::vector<double> x;  // node coordinates, strictly increasing
    std::vector<double> qw; // 1-d quadrature weights (trapezoid / cell width)

    // first-derivative stencil rows: three (index, coefficient) pairs each
    struct Row {
        std::array<int, 3> idx{0, 0, 0};
        std::array<double, 3> c{0, 0, 0};
    };
    std::vector<Row> d1;
    // transpose of d1 with respect to the qw-weighted inner product
    std::vector<std::vector<std::pair<int, double>>> d1t;

    int n() const { return int(x.size()); }

    void build_transpose() {
        d1t.assign(x.size(), {});
        for (size_t i = 0; i < d1.size(); ++i)
            for (int t = 0; t < 3; ++t) {
                double c = d1[i].c[t];
                if (c == 0.0) continue;
                int j = d1[i].idx[t];
                d1t[j].push_back({int(i), qw[i] * c / qw[j]});
            }
    }
};

inline Axis make_base_axis(int n) {
    if (n < 1) throw std::invalid_argument("base axis: n must be positive");
    Axis a;
    a.periodic = true;
    double h = 2.0 * M_PI / n;
    a.x.resize(n);
    a.qw.assign(n, h);
    for (int i = 0; i < n; ++i) a.x[i] = i * h;
    a.d1.resize(n);
    if (n >= 3) {
        for (int i = 0; i < n; ++i) {
            a.d1[i].idx = {(i + 1) % n, (i + n - 1) % n, i};
            a.d1[i].c = {1.0 / (2 * h), -1.0 / (2 * h), 0.0};
        }
    } // n == 1 or 2: periodic central difference vanishes identically
    a.build_transpose();
    return a;
}

// m nodes at y_i = sign(u_i) R |u_i|^g, u_i = -1 + 2i/(m-1).  m even keeps the
// origin strictly inside a cell; g = 1 gives a uniform axis.
inline Axis make_fiber_axis(int m, double R, double g) {
    if (m < 2) throw std::invalid_argument("fiber axis: need at least 2 nodes");
    if (R <= 0 || g < 1) throw std::invalid_argument("fiber axis: bad R or grading");
    Axis a;
    a.periodic = false;
    a.x.resize(m);
    for (int i = 0; i < m; ++i) {
        double u = -1.0 + 2.0 * i / (m - 1);
        a.x[i] = (u < 0 ? -1.0 : 1.0) * R * std::pow(std::abs(u), g);
    }
    a.qw.resize(m);
    for (int i = 0; i < m; ++i) {
        double lo = (i == 0) ? a.x[0] : 0.5 * (a.x[i - 1] + a.x[i]);
        double hi = (i == m - 1) ? a.x[m - 1] : 0.5 * (a.x[i] + a.x[i + 1]);
        a.qw[i] = hi - lo;
    }
    a.d1.resize(m);
    auto three_point = [&](int i, int j0, int j1, int j2) {
        // exact-for-quadratics derivative at x[i] from nodes j0,j1,j2
        double x0 = a.x[j0], x1 = a.x[j1], x2 = a.x[j2], xi = a.x[i];
        double c0 = (2 * xi - x1 - x2) / ((x0 - x1) * (x0 - x2));
        double c1 = (2 * xi - x0 - x2) / ((x1 - x0) * (x1 - x2));
        double c2 = (2 * xi - x0 - x1) / ((x2 - x0) * (x2 - x1));
        a.d1[i].idx = {j0, j1, j2};
        a.d1[i].c = {c0, c1, c2};
    };
    if (m == 2) {
        double h = a.x[1] - a.x[0];
        a.d1[0].idx = {0, 1, 0};
        a.d1[0].c = {-1 / h, 1 / h, 0};
        a.d1[1] = a.d1[0];
    } else {
        for (int i = 0; i < m; ++i) {
            int j = (i == 0) ? 0 : (i == m - 1 ? m - 3 : i - 1);
            three_point(i, j, j + 1, j + 2);
        }
    }
    a.build_transpose();
    return a;
}

struct ProductGrid {
    std::array<Axis, 8> ax;        // 0..3 base, 4..7 fiber
    std::array<int, 8> dims{};
    std::array<std::int64_t, 8> stride{};
    std::int64_t npoints = 0;
    std::vector<double> cellw;     // per-point quadrature weight (product)

    void finalize() {
        npoints = 1; // row-major, axis 0 slowest
        for (int a = 7; a >= 0; --a) {
            dims[a] = ax[a].n();
            stride[a] = npoints;
            npoints *= dims[a];
        }
        cellw.resize(size_t(npoints));
        std::array<int, 8> ix{};
        for (std::int64_t p = 0; p < npoints; ++p) {
            double w = 1;
            for (int a = 0; a < 8; ++a) w *= ax[a].qw[ix[a]];
            cellw[size_t(p)] = w;
            for (int a = 7; a >= 0; --a) {
                if (++ix[a] < dims[a]) break;
                ix[a] = 0;
            }
        }
    }

    std::int64_t index(const std::array<int, 8>& ix) const {
        std::int64_t p = 0;
        for (int a = 0; a < 8; ++a) p += stride[a] * ix[a];
        return p;
    }
    std::array<int, 8> unindex(std::int64_t p) const {
        std::array<int, 8> ix{};
        for (int a = 0; a < 8; ++a) {
            ix[a] = int(p / stride[a]);
            p %= stride[a];
        }
        return ix;
    }
    double coord(int axis, int i) const { return ax[axis].x[i]; }
    std::array<double, 8> point(const std::array<int, 8>& ix) const {
        std::array<double, 8> q{};
        for (int a = 0; a < 8; ++a) q[a] = ax[a].x[ix[a]];
        return q;
    }
    // distance to the core submanifold {y = 0}
    double fiber_abs(const std::array<int, 8>& ix) const {
        double s = 0;
        for (int a = 4; a < 8; ++a) s += ax[a].x[ix[a]] * ax[a].x[ix[a]];
        return std::sqrt(s);
    }
    bool fiber_boundary(const std::array<int, 8>& ix) const {
        for (int a = 4; a < 8; ++a)
            if (dims[a] > 1 && (ix[a] == 0 || ix[a] == dims[a] - 1)) return true;
        return false;
    }
    // distance between grid points: sum of the base-block (torus) and
    // fiber-block Euclidean norms, matching the pair constraint convention
    double dist(const std::array<int, 8>& p, const std::array<int, 8>& q) const {
        double sb = 0, sf = 0;
        for (int a = 0; a < 4; ++a) {
            double d = std::abs(ax[a].x[p[a]] - ax[a].x[q[a]]);
            if (ax[a].periodic) d = std::min(d, 2 * M_PI - d);
            sb += d * d;
        }
        for (int a = 4; a < 8; ++a) {
            double d = ax[a].x[p[a]] - ax[a].x[q[a]];
            sf += d * d;
        }
        return std::sqrt(sb) + std::sqrt(sf);
    }
};

// Base dims may be 1 (collapsed); fiber dims likewise (base-only grids).
inline ProductGrid make_product_grid(const std::array<int, 4>& nbase, int m, double R, double g) {
    ProductGrid grid;
    for (int a = 0; a < 4; ++a) grid.ax[a] = make_base_axis(nbase[a]);
    for (int a = 4; a < 8; ++a)
        grid.ax[a] = (m <= 1) ? make_base_axis(1) : make_fiber_axis(m, R, g);
    if (m <= 1)
        for (int a = 4; a < 8; ++a) {
            grid.ax[a].periodic = false;
            grid.ax[a].x = {0.0};
            grid.ax[a].qw = {1.0};
            grid.ax[a].d1.assign(1, {});
            grid.ax[a].build_transpose();
        }
    grid.finalize();
    return grid;
}

inline ProductGrid make_base_grid(const std::array<int, 4>& nbase) {
    return make_product_grid(nbase, 0, 1.0, 1.0);
}

inline ProductGrid make_fiber_grid(int m, double R, double g) {
    return make_product_grid({1, 1, 1, 1}, m, R, g);
}

// Flat multi-component field over a grid (point-major layout).
struct Field {
    const ProductGrid* g = nullptr;
    int nc = 0;
    std::vector<double> v;

    Field() = default;
    Field(const ProductGrid& grid, int ncomp) : g(&grid), nc(ncomp), v(size_t(grid.npoints) * ncomp, 0.0) {}

    double* at(std::int64_t p) { return v.data() + size_t(p) * nc; }
    const double* at(std::int64_t p) const { return v.data() + size_t(p) * nc; }
    double& operator()(std::int64_t p, int c) { return v[size_t(p) * nc + c]; }
    double operator()(std::int64_t p, int c) const { return v[size_t(p) * nc + c]; }

    void set_zero() { std::fill(v.begin(), v.end(), 0.0); }
};

inline void check_same_shape(const Field& a, const Field& b, const char* who) {
    if (a.g != b.g || a.nc != b.nc) throw std::invalid_argument(std::string(who) + ": field shape mismatch");
}

// y = y + s*x
inline void axpy(double s, const Field& x, Field& y) {
    check_same_shape(x, y, "axpy");
    const size_t n = x.v.size();
    for (size_t i = 0; i < n; ++i) y.v[i] += s * x.v[i];
}

// cell-volume weighted inner product over all points and components
inline double dot_w(const Field& a, const Field& b) {
    check_same_shape(a, b, "dot_w");
    const std::int64_t np = a.g->npoints;
    double acc = 0;
    for (std::int64_t p = 0; p < np; ++p) {
        double s = 0;
        const double* pa = a.at(p);
        const double* pb = b.at(p);
        for (int c = 0; c < a.nc; ++c) s += pa[c] * pb[c];
        acc += a.g->cellw[size_t(p)] * s;
    }
    return acc;
}

// Partial derivative along one axis (2nd order stencils, periodic on base
// axes, one-sided at fiber truncation boundaries).  Collapsed axes give 0.
inline Field fd_partial(const Field& f, int axis) {
    const ProductGrid& g = *f.g;
    Field out(g, f.nc);
    if (g.dims[axis] == 1) return out;
    const Axis& A = g.ax[axis];
    const std::int64_t st = g.stride[axis];
    std::array<int, 8> ix{};
    for (std::int64_t p = 0; p < g.npoints; ++p) {
        const Axis::Row& row = A.d1[ix[axis]];
        const std::int64_t base = p - std::int64_t(ix[axis]) * st;
        double* po = out.at(p);
        for (int t = 0; t < 3; ++t) {
            if (row.c[t] == 0.0) continue;
            const double* pi = f.at(base + std::int64_t(row.idx[t]) * st);
            for (int c = 0; c < f.nc; ++c) po[c] += row.c[t] * pi[c];
        }
        for (int a = 7; a >= 0; --a) {
            if (++ix[a] < g.dims[a]) break;
            ix[a] = 0;
        }
    }
    return out;
}

// Exact adjoint of fd_partial with respect to dot_w.
inline Field fd_partial_transpose(const Field& f, int axis) {
    const ProductGrid& g = *f.g;
    Field out(g, f.nc);
    if (g.dims[axis] == 1) return out;
    const Axis& A = g.ax[axis];
    const std::int64_t st = g.stride[axis];
    std::array<int, 8> ix{};
    for (std::int64_t p = 0; p < g.npoints; ++p) {
        const std::int64_t base = p - std::int64_t(ix[axis]) * st;
        double* po = out.at(p);
        for (auto& [i, c] : A.d1t[ix[axis]]) {
            const double* pi = f.at(base + std::int64_t(i) * st);
            for (int comp = 0; comp < f.nc; ++comp) po[comp] += c * pi[comp];
        }
        for (int a = 7; a >= 0; --a) {
            if (++ix[a] < g.dims[a]) break;
            ix[a] = 0;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Binary field snapshots: magic, dims, ncomp, raw little-endian doubles.
// ---------------------------------------------------------------------------

inline void save_field(const Field& f, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_field: cannot open " + path);
    const char magic[8] = {'C', 'G', 'W', 'F', 'L', 'D', '0', '1'};
    os.write(magic, 8);
    std::int32_t dims[9];
    for (int a = 0; a < 8; ++a) dims[a] = f.g->dims[a];
    dims[8] = f.nc;
    os.write(reinterpret_cast<const char*>(dims), sizeof dims);
    os.write(reinterpret_cast<const char*>(f.v.data()), std::streamsize(f.v.size() * sizeof(double)));
}

inline Field load_field(const ProductGrid& g, const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_field: cannot open " + path);
    char magic[8];
    is.read(magic, 8);
    if (std::memcmp(magic, "CGWFLD01", 8) != 0) throw std::runtime_error("load_field: bad magic");
    std::int32_t dims[9];
    is.read(reinterpret_cast<char*>(dims), sizeof dims);
    for (int a = 0; a < 8; ++a)
        if (dims[a] != g.dims[a]) throw std::runtime_error("load_field: grid shape mismatch");
    Field f(g, dims[8]);
    is.read(reinterpret_cast<char*>(f.v.data()), std::streamsize(f.v.size() * sizeof(double)));
    if (!is) throw std::runtime_error("load_field: truncated file");
    return f;
}

} // namespace cgw
