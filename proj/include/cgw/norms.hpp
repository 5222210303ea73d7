// Weighted sup / Hoelder norms on product grids.  The weight is
// (eps + dist(p, core))^nu with core = {y = 0}.  The Hoelder seminorm takes
// the sup of weighted difference quotients over (a) all backward axis-neighbor
// pairs in index space (stencil radius 1) and (b) a seeded sample of
// long-range pairs, both restricted by the admissibility constraint
//   4 dist(p1,p2) <= eps + dist(p1,core) + dist(p2,core).
//
// Values are consumed through an evaluator callback so that enormous product
// grids can be swept without materializing the field; neighbor values are
// kept in a rolling float window sized by the largest active stride.
#pragma once

#include <cstdint>
#include <functional>

#include "cgw/grid.hpp"

namespace cgw {

inline std::uint64_t splitmix64(std::uint64_t& s) {
    s += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

constexpr std::uint64_t kDefaultNormSeed = 0x5EED;

struct HolderResult {
    double sup = 0;       // weighted sup norm
    double semi = 0;      // weighted Hoelder seminorm
    std::int64_t pairs_stencil = 0;
    std::int64_t pairs_long = 0;
    double total() const { return sup + semi; }
};

// Evaluator contract: eval(p, ix, out) writes ncomp doubles for grid point p
// with multi-index ix.  Must be pure (same p -> same value, any order).
using PointEval = std::function<void(std::int64_t, const std::array<int, 8>&, double*)>;

inline double weighted_sup_norm(const ProductGrid& g, int ncomp, const PointEval& eval,
                                double nu, double eps) {
    std::vector<double> buf(ncomp);
    std::array<int, 8> ix{};
    double best = 0;
    for (std::int64_t p = 0; p < g.npoints; ++p) {
        eval(p, ix, buf.data());
        double s = 0;
        for (int c = 0; c < ncomp; ++c) s += buf[c] * buf[c];
        double w = std::pow(eps + g.fiber_abs(ix), nu);
        s = w * std::sqrt(s);
        if (s > best) best = s;
        for (int a = 7; a >= 0; --a) {
            if (++ix[a] < g.dims[a]) break;
            ix[a] = 0;
        }
    }
    return best;
}

inline HolderResult weighted_holder_norm(const ProductGrid& g, int ncomp, const PointEval& eval,
                                         double nu, double gamma, double eps,
                                         std::uint64_t seed = kDefaultNormSeed,
                                         std::int64_t want_long_pairs = 100000) {
    HolderResult r;
    // rolling window over the largest active stride
    std::int64_t win = 1;
    for (int a = 0; a < 8; ++a)
        if (g.dims[a] > 1 && g.stride[a] > win) win = g.stride[a];
    win += 1;
    if (win > g.npoints) win = g.npoints;
    std::vector<float> window(size_t(win) * ncomp);
    std::vector<double> buf(ncomp);

    std::array<int, 8> ix{};
    for (std::int64_t p = 0; p < g.npoints; ++p) {
        eval(p, ix, buf.data());
        float* slot = window.data() + size_t(p % win) * ncomp;
        for (int c = 0; c < ncomp; ++c) slot[c] = float(buf[c]);

        const double yp = g.fiber_abs(ix);
        double s = 0;
        for (int c = 0; c < ncomp; ++c) s += buf[c] * buf[c];
        s = std::pow(eps + yp, nu) * std::sqrt(s);
        if (s > r.sup) r.sup = s;

        for (int a = 0; a < 8; ++a) {
            if (g.dims[a] == 1 || ix[a] == 0) continue;
            std::int64_t q = p - g.stride[a];
            const float* qs = window.data() + size_t(q % win) * ncomp;
            double d = g.ax[a].x[ix[a]] - g.ax[a].x[ix[a] - 1];
            double yq = yp;
            if (a >= 4) {
                double y2 = 0;
                for (int b = 4; b < 8; ++b) {
                    double yb = g.ax[b].x[ix[b] - (b == a ? 1 : 0)];
                    y2 += yb * yb;
                }
                yq = std::sqrt(y2);
            }
            if (4 * d > eps + yp + yq) continue;
            double diff2 = 0;
            for (int c = 0; c < ncomp; ++c) {
                double dd = double(slot[c]) - double(qs[c]);
                diff2 += dd * dd;
            }
            double quot = std::pow(eps + yp + yq, nu + gamma) * std::sqrt(diff2) / std::pow(d, gamma);
            if (quot > r.semi) r.semi = quot;
            ++r.pairs_stencil;
        }
        for (int a = 7; a >= 0; --a) {
            if (++ix[a] < g.dims[a]) break;
            ix[a] = 0;
        }
    }

    // seeded long-range pairs
    std::uint64_t st = seed;
    std::vector<double> b1(ncomp), b2(ncomp);
    std::int64_t accepted = 0, attempts = 0;
    const std::int64_t max_attempts = want_long_pairs * 64 + 1024;
    while (accepted < want_long_pairs && attempts < max_attempts) {
        ++attempts;
        std::int64_t p1 = std::int64_t(splitmix64(st) % std::uint64_t(g.npoints));
        std::int64_t p2 = std::int64_t(splitmix64(st) % std::uint64_t(g.npoints));
        if (p1 == p2) continue;
        auto i1 = g.unindex(p1), i2 = g.unindex(p2);
        double y1 = g.fiber_abs(i1), y2 = g.fiber_abs(i2);
        double d = g.dist(i1, i2);
        if (4 * d > eps + y1 + y2 || d == 0.0) continue;
        ++accepted;
        eval(p1, i1, b1.data());
        eval(p2, i2, b2.data());
        double diff2 = 0;
        for (int c = 0; c < ncomp; ++c) {
            double dd = b1[c] - b2[c];
            diff2 += dd * dd;
        }
        double quot = std::pow(eps + y1 + y2, nu + gamma) * std::sqrt(diff2) / std::pow(d, gamma);
        if (quot > r.semi) r.semi = quot;
    }
    r.pairs_long = accepted;
    return r;
}

inline PointEval field_eval(const Field& f) {
    return [&f](std::int64_t p, const std::array<int, 8>&, double* out) {
        const double* src = f.at(p);
        for (int c = 0; c < f.nc; ++c) out[c] = src[c];
    };
}

// C^{k,gamma}_nu norm of a stored field: sum over l <= k of the weighted
// Hoelder norm of the l-th gradient with weight index nu + l.
inline double holder_norm(const Field& f, int k, double gamma, double nu, double eps,
                          std::uint64_t seed = kDefaultNormSeed,
                          std::int64_t long_pairs = 100000) {
    if (k < 0 || k > 2) throw std::invalid_argument("holder_norm: k must be 0, 1 or 2");
    double total = 0;
    std::vector<Field> level{f};
    for (int l = 0; l <= k; ++l) {
        const Field& u = level.back();
        auto res = weighted_holder_norm(*u.g, u.nc, field_eval(u), nu + l, gamma, eps, seed, long_pairs);
        total += res.total();
        if (l < k) {
            Field grad(*u.g, u.nc * 8);
            for (int a = 0; a < 8; ++a) {
                Field d = fd_partial(u, a);
                for (std::int64_t p = 0; p < u.g->npoints; ++p)
                    for (int c = 0; c < u.nc; ++c) grad(p, a * u.nc + c) = d(p, c);
            }
            level.push_back(std::move(grad));
        }
    }
    return total;
}

} // namespace cgw
