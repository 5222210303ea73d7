#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>

#include "cgw/grid.hpp"
#include "cgw/norms.hpp"

using namespace cgw;

TEST_CASE("base axis derivative is second order on trig data") {
    for (int n : {16, 32}) {
        Axis a = make_base_axis(n);
        double worst = 0;
        for (int i = 0; i < n; ++i) {
            double d = 0;
            for (int t = 0; t < 3; ++t) d += a.d1[i].c[t] * std::sin(a.x[a.d1[i].idx[t]]);
            worst = std::max(worst, std::abs(d - std::cos(a.x[i])));
        }
        double h = 2 * M_PI / n;
        CHECK(worst < h * h);
    }
}

TEST_CASE("graded fiber axis derivative is exact on quadratics") {
    Axis a = make_fiber_axis(20, 3.0, 2.0);
    CHECK(a.x.front() == doctest::Approx(-3.0));
    CHECK(a.x.back() == doctest::Approx(3.0));
    for (int i = 0; i < a.n(); ++i) {
        double d = 0;
        for (int t = 0; t < 3; ++t) {
            double x = a.x[a.d1[i].idx[t]];
            d += a.d1[i].c[t] * (2 * x * x - 3 * x + 1);
        }
        CHECK(d == doctest::Approx(4 * a.x[i] - 3).epsilon(1e-9));
    }
    // quadrature weights integrate 1 to the full length
    double s = 0;
    for (double w : a.qw) s += w;
    CHECK(s == doctest::Approx(6.0));
}

TEST_CASE("fd_partial_transpose is the exact adjoint of fd_partial") {
    ProductGrid g = make_product_grid({4, 3, 1, 1}, 6, 2.0, 2.0);
    Field u(g, 2), w(g, 2);
    std::uint64_t st = 7;
    for (auto& x : u.v) x = 2.0 * (splitmix64(st) >> 11) * 0x1.0p-53 - 1.0;
    for (auto& x : w.v) x = 2.0 * (splitmix64(st) >> 11) * 0x1.0p-53 - 1.0;
    for (int axis : {0, 1, 4, 7}) {
        double lhs = dot_w(fd_partial(u, axis), w);
        double rhs = dot_w(u, fd_partial_transpose(w, axis));
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
    // collapsed axes differentiate to zero
    Field d2 = fd_partial(u, 2);
    for (double x : d2.v) CHECK(x == 0.0);
}

TEST_CASE("collapsed axes reproduce full-grid derivatives for constant data") {
    // data varying only along axes 0 and 4
    auto fill = [](Field& f) {
        const ProductGrid& g = *f.g;
        for (std::int64_t p = 0; p < g.npoints; ++p) {
            auto ix = g.unindex(p);
            f.at(p)[0] = std::sin(g.coord(0, ix[0])) + 0.3 * g.coord(4, ix[4]);
        }
    };
    ProductGrid gfull = make_product_grid({8, 4, 4, 1}, 6, 2.0, 1.0);
    ProductGrid gcoll = make_product_grid({8, 1, 1, 1}, 6, 2.0, 1.0);
    Field uf(gfull, 1), uc(gcoll, 1);
    fill(uf);
    fill(uc);
    for (int axis : {0, 4}) {
        Field df = fd_partial(uf, axis), dc = fd_partial(uc, axis);
        // compare on the matching slice ix[1]=ix[2]=0
        for (std::int64_t pc = 0; pc < gcoll.npoints; ++pc) {
            auto ix = gcoll.unindex(pc);
            CHECK(df.at(gfull.index(ix))[0] == doctest::Approx(dc.at(pc)[0]).epsilon(1e-13));
        }
    }
}

TEST_CASE("field save/load round trip") {
    ProductGrid g = make_product_grid({3, 1, 1, 1}, 4, 1.0, 1.0);
    Field u(g, 3);
    std::uint64_t st = 99;
    for (auto& x : u.v) x = 2.0 * (splitmix64(st) >> 11) * 0x1.0p-53 - 1.0;
    const char* path = "roundtrip.cgwfld";
    save_field(u, path);
    Field w = load_field(g, path);
    std::remove(path);
    CHECK(w.nc == 3);
    CHECK(w.v == u.v);
}

TEST_CASE("weighted sup norm matches the analytic weight") {
    ProductGrid g = make_fiber_grid(16, 2.0, 2.0);
    double eps = 0.1, nu = 3.0;
    // u = (eps + |y|)^(-nu) has weighted sup exactly 1 at every point
    PointEval ev = [&](std::int64_t, const std::array<int, 8>& ix, double* out) {
        out[0] = std::pow(eps + g.fiber_abs(ix), -nu);
    };
    CHECK(weighted_sup_norm(g, 1, ev, nu, eps) == doctest::Approx(1.0));
}

TEST_CASE("weighted Hoelder norm: constants have zero seminorm, scaling is linear") {
    ProductGrid g = make_product_grid({6, 1, 1, 1}, 8, 1.5, 2.0);
    PointEval cst = [](std::int64_t, const std::array<int, 8>&, double* out) { out[0] = 2.5; };
    auto r = weighted_holder_norm(g, 1, cst, 0.0, 0.5, 0.1, kDefaultNormSeed, 2000);
    CHECK(r.semi == doctest::Approx(0.0));
    CHECK(r.sup == doctest::Approx(2.5));
    CHECK(r.pairs_stencil > 0);

    PointEval lin = [&](std::int64_t, const std::array<int, 8>& ix, double* out) {
        out[0] = g.coord(4, ix[4]);
    };
    auto r1 = weighted_holder_norm(g, 1, lin, 0.0, 0.5, 0.1, kDefaultNormSeed, 2000);
    PointEval lin3 = [&](std::int64_t p, const std::array<int, 8>& ix, double* out) {
        lin(p, ix, out);
        out[0] *= 3.0;
    };
    auto r3 = weighted_holder_norm(g, 1, lin3, 0.0, 0.5, 0.1, kDefaultNormSeed, 2000);
    CHECK(r3.total() == doctest::Approx(3.0 * r1.total()).epsilon(1e-12));
    CHECK(r1.semi > 0.0);
}

TEST_CASE("derivative-graded norm adds gradient layers") {
    ProductGrid g = make_fiber_grid(12, 2.0, 1.0);
    Field u(g, 1);
    for (std::int64_t p = 0; p < g.npoints; ++p) {
        auto ix = g.unindex(p);
        u.at(p)[0] = g.coord(4, ix[4]);
    }
    double n0 = holder_norm(u, 0, 0.5, 0.0, 0.1, kDefaultNormSeed, 500);
    double n1 = holder_norm(u, 1, 0.5, 0.0, 0.1, kDefaultNormSeed, 500);
    CHECK(n1 > n0);
}

TEST_CASE("grid distance: torus wraparound on base, euclidean on fiber") {
    ProductGrid g = make_product_grid({8, 1, 1, 1}, 4, 1.0, 1.0);
    std::array<int, 8> p{}, q{};
    q[0] = 7; // one step back around the torus
    CHECK(g.dist(p, q) == doctest::Approx(2 * M_PI / 8));
    q[0] = 0;
    q[4] = 1;
    CHECK(g.dist(p, q) == doctest::Approx(std::abs(g.coord(4, 1) - g.coord(4, 0))));
}
