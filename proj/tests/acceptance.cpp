// Acceptance suite: ten end-to-end criteria, one PASS/FAIL line each.
//
//  1  exact algebra gate (rational arithmetic, all identically zero)
//  2  submanifold aggregate identities, 100 seeded trials + negative controls
//  3  fiber anti-self-duality of the glued connection at every grid point
//  4  closed-form curvature vs finite-difference oracle, order >= 1.9
//  5  residual weighted-Holder norm: log-log slope in [1.8, 2.2] over eps
//  6  second-order identity defect: refinement order >= 1.9, five forms
//  7  fiber model solver: manufactured recovery at O(h^2) + source reproduction
//  8  moment extraction vs leading term: strictly decreasing over an eps sweep
//  9  one Picard step contracts the off-range residual by a factor < 0.5
// 10  determinism: bit-identical reruns of the sampled pipelines
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cgw/balancing.hpp"
#include "cgw/instanton.hpp"
#include "cgw/linearized.hpp"
#include "cgw/norms.hpp"

using namespace cgw;

namespace {

int failures = 0;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(int id, const std::string& name, bool ok, const std::string& detail) {
    if (!ok) ++failures;
    std::cout << (ok ? "PASS" : "FAIL") << "  [" << id << "] " << name << "  (" << detail << ")\n";
    std::cout.flush();
}

template <class S>
S form_max_abs(const Form<S>& f) {
    S m(0);
    for (auto& [k, v] : f.c) m = std::max(m, scalar_abs(v));
    return m;
}

// Largest coefficient of the minus-projection of the bracket contraction
// (exactly zero when the curvature sample is fiber anti-self-dual).
Rational bracket_contraction_residual(const std::array<Su2<Rational>, 6>& F) {
    using S = Rational;
    auto fval = [&](int k, int l) {
        static const int pidx[4][4] = {{-1, 0, 1, 2}, {0, -1, 3, 4}, {1, 3, -1, 5}, {2, 4, 5, -1}};
        Su2<S> v = F[pidx[k][l]];
        return k < l ? v : -v;
    };
    S worst(0);
    for (const auto& phi0 : plus_basis<S>()) {
        for (int axis = 0; axis < 3; ++axis) {
            LieForm<S> phi(2);
            Su2<S> unit;
            unit.c[axis] = S(1);
            for (auto& [m, coef] : phi0.c) phi.add(m, unit * coef);
            LieForm<S> acc(2);
            for (int k = 0; k < 4; ++k)
                for (int l = 0; l < 4; ++l) {
                    if (k == l) continue;
                    Vector8<S> el{};
                    el[4 + l] = S(1);
                    Form<S> ek(1);
                    ek.add(Mask(1u << (4 + k)), S(1));
                    LieForm<S> il = interior(el, phi);
                    LieForm<S> term(1);
                    for (auto& [m, val] : il.c) term.add(m, bracket(fval(k, l), val));
                    acc += wedge(ek, term);
                }
            for (auto& [m, val] : project_minus(acc).c)
                for (auto& c : val.c) worst = std::max(worst, scalar_abs(c));
        }
    }
    return worst;
}

// C^4 compactly supported fiber bump times low-order polynomials.
template <class Fn>
void for_points(const ProductGrid& g, Fn&& fn) {
    std::array<int, 8> ix{};
    for (std::int64_t p = 0; p < g.npoints; ++p) {
        fn(p, ix);
        for (int a = 7; a >= 0; --a) {
            if (++ix[a] < g.dims[a]) break;
            ix[a] = 0;
        }
    }
}

Field smooth_compact_field(const ProductGrid& g, int nc, double r0, std::uint64_t seed) {
    std::uint64_t s = seed;
    std::vector<std::array<double, 5>> coef(nc);
    for (int c = 0; c < nc; ++c)
        for (int k = 0; k < 5; ++k)
            coef[c][k] = 2.0 * (double(splitmix64(s)) / 18446744073709551616.0) - 1.0;
    Field f(g, nc);
    for_points(g, [&](std::int64_t p, const std::array<int, 8>& ix) {
        double r2 = 0;
        for (int a = 4; a < 8; ++a) r2 += g.coord(a, ix[a]) * g.coord(a, ix[a]);
        double r = std::sqrt(r2);
        if (r >= r0) return;
        double u = 1 - (r / r0) * (r / r0);
        double chi = u * u * u * u * u;
        double y[4];
        for (int a = 0; a < 4; ++a) y[a] = g.coord(4 + a, ix[4 + a]);
        double* pf = f.at(p);
        for (int c = 0; c < nc; ++c)
            pf[c] = chi * (coef[c][0] + coef[c][1] * y[0] + coef[c][2] * y[1] + coef[c][3] * y[2] +
                           coef[c][4] * y[3]);
    });
    return f;
}

double interior_l2(const Field& u, double frac) {
    const ProductGrid& g = *u.g;
    std::array<double, 8> cut{};
    for (int a = 4; a < 8; ++a) {
        double mx = 0;
        for (int i = 0; i < g.dims[a]; ++i) mx = std::max(mx, std::abs(g.coord(a, i)));
        cut[a] = frac * mx;
    }
    double acc = 0;
    for_points(g, [&](std::int64_t p, const std::array<int, 8>& ix) {
        for (int a = 4; a < 8; ++a)
            if (g.dims[a] > 1 && std::abs(g.coord(a, ix[a])) > cut[a]) return;
        double s = 0;
        const double* pu = u.at(p);
        for (int c = 0; c < u.nc; ++c) s += pu[c] * pu[c];
        acc += g.cellw[size_t(p)] * s;
    });
    return std::sqrt(acc);
}

// ---------------------------------------------------------------------------

void criterion_1_exact_algebra() {
    using S = Rational;
    auto t0 = std::chrono::steady_clock::now();
    S worst(0);

    const Form<S>& O = omega0<S>();
    worst = std::max(worst, form_max_abs(hodge(O) - O));
    worst = std::max(worst, scalar_abs(inner(O, O) - S(14)));

    if (plus_basis<S>().size() != 7 || minus_basis<S>().size() != 21) worst = std::max(worst, S(1));
    for (auto& [mu, nu] : pair_table()) {
        Form<S> m(2);
        m.add(Mask((1u << mu) | (1u << nu)), S(1));
        Form<S> p = project_plus(m), q = project_minus(m);
        worst = std::max(worst, form_max_abs(p + q - m));
        worst = std::max(worst, form_max_abs(project_plus(p) - p));
        worst = std::max(worst, form_max_abs(project_plus(q)));
        worst = std::max(worst, form_max_abs(hodge(wedge(O, p)) - p * S(3)));
        worst = std::max(worst, form_max_abs(hodge(wedge(O, q)) + q));
    }

    worst = std::max(worst, S(check_symmetrized_plus_projection<S>()));

    BasicParams<S> b{S(1) / S(2), {S(1) / S(3), S(0), S(-1) / S(4), S(1)}};
    std::array<std::array<S, 4>, 2> pts = {
        {{S(1), S(0), S(-1) / S(2), S(2)}, {S(-1) / S(3), S(1) / S(5), S(0), S(1)}}};
    for (auto& y : pts)
        worst = std::max(worst, bracket_contraction_residual(basic_curvature(b, y)));

    const auto& VB = v_basis<S>();
    const auto& WB = w_basis<S>();
    for (int a = 0; a < 4; ++a)
        for (int c = 0; c < 4; ++c) {
            S dv(0), dw(0);
            for (int i = 0; i < 4; ++i)
                for (int k = 0; k < 4; ++k) {
                    dv += VB[a][i][k] * VB[c][i][k];
                    for (int l = 0; l < 4; ++l) dw += WB[a][i][k][l] * WB[c][i][k][l];
                }
            worst = std::max(worst, scalar_abs(dv - (a == c ? S(4) : S(0))));
            worst = std::max(worst, scalar_abs(dw - (a == c ? S(16) : S(0))));
        }

    double dt = seconds_since(t0);
    std::ostringstream os;
    os << "max residual " << (worst == 0 ? "0" : "NONZERO") << ", " << dt << " s";
    report(1, "exact algebra gate", worst == S(0) && dt < 10.0, os.str());
}

void criterion_2_aggregate_identities() {
    auto t0 = std::chrono::steady_clock::now();
    Rational worst(0);
    for (std::uint64_t s = 1; s <= 100; ++s) {
        auto h = random_cayley_h(s);
        for (auto& fam : cayley_constraint_residual(h))
            for (auto& v : fam) worst = std::max(worst, scalar_abs(v));
        auto R = random_minus_curvature(s + 7919);
        worst = std::max(worst, curvature_invariant_residual(R));
        for (auto& v : aggregate_identity_residual(h, R)) worst = std::max(worst, scalar_abs(v));
    }
    bool dims = cayley_kernel_dimension() == 24 && minus_curvature_dimension() == 168;

    // negative controls: a non-kernel second fundamental form violates the
    // constraints; a positive-eigenspace curvature shifts every aggregate
    // display by exactly -4/3.
    SecondFundamentalForm<Rational> hbad{};
    hbad.h[1][1][1] = 1;
    Rational bad1(0);
    for (auto& fam : cayley_constraint_residual(hbad))
        for (auto& v : fam) bad1 = std::max(bad1, scalar_abs(v));
    auto agg = aggregate_identity_residual(random_cayley_h(3), plus_violating_curvature(0));
    Rational bad2(0);
    for (auto& v : agg) bad2 = std::max(bad2, scalar_abs(v));
    bool controls = bad1 > 0 && bad2 > 0 && agg[0] == Rational(-4) / 3;

    double dt = seconds_since(t0);
    std::ostringstream os;
    os << "100 trials, max residual " << (worst == 0 ? "0" : "NONZERO")
       << ", negative controls nonzero, " << dt << " s";
    report(2, "aggregate identity suite", worst == Rational(0) && dims && controls && dt < 30.0,
           os.str());
}

void criterion_3_fiber_asd() {
    // The three fiber anti-self-duality combinations of the glued curvature
    // (F_12 + F_34, F_13 - F_24, F_14 + F_23 on the normal 4-plane) vanish at
    // every grid point for every template.
    double worst = 0;
    std::string at;
    for (const char* name : {"const", "sin-v", "exp-lambda", "theta-const", "random-fourier"}) {
        GluingTemplate t = make_template(name, 0.3, 42);
        std::array<int, 4> nb{1, 1, 1, 1};
        for (int a = 0; a < 4; ++a) nb[a] = t.varies[a] ? 4 : 1;
        ProductGrid base = make_base_grid(nb);
        GluingData gd = GluingData::sample(t, base, 0.1);
        ProductGrid grid = make_product_grid(nb, 8, 1.0, 2.0);
        for (std::int64_t bi = 0; bi < base.npoints; ++bi) {
            BasePointData d = base_point_data(gd, bi);
            std::array<int, 8> ix{};
            ProductGrid fib = make_fiber_grid(8, 1.0, 2.0);
            for (std::int64_t p = 0; p < fib.npoints; ++p) {
                std::array<double, 4> y;
                for (int a = 0; a < 4; ++a) y[a] = fib.coord(4 + a, ix[4 + a]);
                auto F = glued_curvature(d, y);
                for (int c = 0; c < 3; ++c) {
                    double v = std::max({std::abs((F.Fff[0] + F.Fff[5]).c[c]),
                                         std::abs((F.Fff[1] - F.Fff[4]).c[c]),
                                         std::abs((F.Fff[2] + F.Fff[3]).c[c])});
                    if (v > worst) {
                        worst = v;
                        at = name;
                    }
                }
                for (int a = 7; a >= 0; --a) {
                    if (++ix[a] < fib.dims[a]) break;
                    ix[a] = 0;
                }
            }
        }
    }
    std::ostringstream os;
    os << "max violation " << worst << " (template " << at << "), all templates, every grid point";
    report(3, "fiber anti-self-duality of the glued connection", worst <= 1e-10, os.str());
}

void criterion_4_curvature_oracle() {
    std::array<double, 4> x{0.7, 2.1, 4.0, 1.3};
    std::array<double, 4> y{0.25, -0.15, 0.05, 0.35};
    struct Inst {
        const char* name;
        std::uint64_t seed;
    };
    // five instances; theta-const and random-fourier carry nonzero theta
    std::array<Inst, 5> inst = {{{"sin-v", 1}, {"exp-lambda", 2}, {"theta-const", 3},
                                 {"random-fourier", 4}, {"random-fourier", 5}}};
    bool all = true;
    double worst_order = 1e9;
    for (auto& in : inst) {
        GluingTemplate t = make_template(in.name, 0.3, in.seed);
        BasePointData d = base_point_data(t, 0.1, x);
        GluedCurvature Fc = glued_curvature(d, y);
        double e1 = curvature_max_abs_diff(Fc, glued_curvature_fd(t, 0.1, x, y, 2e-2));
        double e2 = curvature_max_abs_diff(Fc, glued_curvature_fd(t, 0.1, x, y, 1e-2));
        double order = std::log2(e1 / e2);
        worst_order = std::min(worst_order, order);
        all = all && order >= 1.9;
    }
    std::ostringstream os;
    os << "5 instances, min observed order " << worst_order;
    report(4, "curvature closed form vs finite-difference oracle", all, os.str());
}

void criterion_5_residual_rate() {
    // Intended grid is n = 16, m = 64, R = 6.4; the rolling pair window of the
    // Holder seminorm would need ~5.6 GB at m = 64, beyond this host's memory,
    // so the fiber resolution is m = 40 with stronger core grading (g = 3) and
    // n, R unchanged.
    auto t0 = std::chrono::steady_clock::now();
    GluingTemplate t = make_template("sin-v", 0.3);
    ProductGrid grid = make_product_grid({16, 1, 1, 1}, 40, 6.4, 3.0);
    std::vector<double> eps{0.2, 0.1, 0.05};
    auto rows = residual_sweep(t, grid, eps, 3.0, 0.5, kDefaultNormSeed, 4000);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto& r : rows) {
        double xv = std::log(r.eps), yv = std::log(r.norm.total());
        sx += xv;
        sy += yv;
        sxx += xv * xv;
        sxy += xv * yv;
    }
    double n = double(rows.size());
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    std::ostringstream os;
    os << "slope " << slope << " over eps {0.2, 0.1, 0.05}, grid 16x40^4 R=6.4 g=3, "
       << seconds_since(t0) << " s";
    report(5, "residual norm scaling rate", slope >= 1.8 && slope <= 2.2, os.str());
}

void criterion_6_weitzenbock() {
    BasicParams<double> b{0.6, {0, 0, 0, 0}};
    bool all = true;
    double worst_order = 1e9;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto defect = [&](int m) {
            ProductGrid g = make_fiber_grid(m, 1.0, 1.0);
            Field phi = smooth_compact_field(g, kPlusComps, 0.5, seed);
            return weitzenbock_residual(phi, b);
        };
        double order = std::log2(defect(16) / defect(32));
        worst_order = std::min(worst_order, order);
        all = all && order >= 1.9;
    }
    std::ostringstream os;
    os << "5 forms, min observed order " << worst_order;
    report(6, "second-order identity refinement order", all, os.str());
}

void criterion_7_model_solve() {
    BasicParams<double> b{0.6, {0, 0, 0, 0}};
    // manufactured recovery + source reproduction on one grid
    ProductGrid g = make_fiber_grid(14, 1.0, 1.0);
    Field gauge = make_basic_gauge(g, b);
    Field phi_true = smooth_compact_field(g, kPlusComps, 0.5, 7);
    Field psi = apply_LB(apply_LB_star(phi_true, gauge), gauge);
    FiberSolveReport rep;
    Field phi = solve_model_from_plus(psi, b, rep, 1e-8, 8000);
    Field d = phi;
    axpy(-1.0, phi_true, d);
    double rel = interior_l2(d, 0.85) / interior_l2(phi_true, 0.85);
    Field psi2 = apply_LB(apply_LB_star(phi, gauge), gauge);
    axpy(-1.0, psi, psi2);
    double srcrel = interior_l2(psi2, 0.85) / interior_l2(psi, 0.85);
    // O(h^2): the defect between the explicit model operator and the discrete
    // composition shrinks by >= 3x under mesh doubling
    auto defect = [&](int m) {
        ProductGrid gg = make_fiber_grid(m, 1.0, 1.0);
        Field gg_gauge = make_basic_gauge(gg, b);
        Field f = smooth_compact_field(gg, kPlusComps, 0.5, 99);
        Field lhs = apply_LB(apply_LB_star(f, gg_gauge), gg_gauge);
        return weitzenbock_residual(f, b) / std::max(interior_l2(lhs, 0.85), 1e-300);
    };
    double ratio = defect(10) / defect(20);
    bool ok = rep.converged && rel < 1e-4 && srcrel < 1e-4 && ratio >= 3.0;
    std::ostringstream os;
    os << "recovery rel err " << rel << ", source rel err " << srcrel << ", refinement ratio "
       << ratio;
    report(7, "fiber model solver pipeline", ok, os.str());
}

void criterion_8_balancing() {
    std::vector<double> eps{0.2, 0.1, 0.05};
    bool all = true;
    std::ostringstream os;
    for (auto [name, m] : {std::pair<const char*, int>{"sin-v", 16}, {"exp-lambda", 20}}) {
        GluingTemplate t = make_template(name, 0.3);
        std::array<int, 4> nb{1, 1, 1, 1};
        for (int a = 0; a < 4; ++a) nb[a] = t.varies[a] ? 6 : 1;
        ProductGrid base = make_base_grid(nb);
        ProductGrid grid = make_product_grid(nb, m, 1.2, 2.0);
        std::vector<double> dist;
        for (double e : eps) {
            GluingData gd = GluingData::sample(t, base, e);
            dist.push_back(moment_pair_distance(xi_epsilon(gd, grid), leading_term(gd)));
        }
        bool mono = dist[1] < dist[0] && dist[2] < dist[1];
        all = all && mono;
        os << name << " {" << dist[0] << ", " << dist[1] << ", " << dist[2] << "} ";
    }
    // exactly anti-self-dual template: the extraction sits at the quadrature floor
    GluingTemplate tc = make_template("const", 0.3);
    ProductGrid base1 = make_base_grid({1, 1, 1, 1});
    ProductGrid grid1 = make_product_grid({1, 1, 1, 1}, 16, 1.2, 2.0);
    GluingData gd = GluingData::sample(tc, base1, 0.1);
    double floor_val = moment_pair_max(xi_epsilon(gd, grid1));
    all = all && floor_val <= 1e-8;
    os << "exact-ASD floor " << floor_val;
    report(8, "moment extraction vs leading term", all, os.str());
}

void criterion_9_picard() {
    ProductGrid base = make_base_grid({6, 1, 1, 1});
    GluingTemplate t = make_template("sin-v", 0.1);
    GluingData gd = GluingData::sample(t, base, 0.1);
    ProductGrid g = make_product_grid({6, 1, 1, 1}, 8, 0.8, 1.0);
    PicardOptions opt;
    opt.tol_g = 1e-3;
    opt.maxit_g = 4000;
    ContractionReport rep = picard_contraction(gd, g, opt);
    std::ostringstream os;
    os << "contraction ratio " << rep.ratio << " (before " << rep.before << ", after " << rep.after
       << ")";
    report(9, "one-step contraction", rep.before > 0 && std::isfinite(rep.ratio) && rep.ratio < 0.5,
           os.str());
}

void criterion_10_determinism() {
    GluingTemplate t = make_template("sin-v", 0.3);
    ProductGrid grid = make_product_grid({6, 1, 1, 1}, 12, 0.8, 2.0);
    auto run = [&] { return residual_sweep(t, grid, {0.1}, 3.0, 0.5, kDefaultNormSeed, 2000); };
    auto a = run(), b = run();
    bool bits = std::memcmp(&a[0].norm.sup, &b[0].norm.sup, sizeof(double)) == 0 &&
                std::memcmp(&a[0].norm.semi, &b[0].norm.semi, sizeof(double)) == 0;

    ProductGrid base = make_base_grid({6, 1, 1, 1});
    GluingData gd = GluingData::sample(t, base, 0.1);
    ProductGrid bgrid = make_product_grid({6, 1, 1, 1}, 12, 1.2, 2.0);
    auto x1 = xi_epsilon(gd, bgrid), x2 = xi_epsilon(gd, bgrid);
    bool bits2 = x1.size() == x2.size();
    for (size_t i = 0; i < x1.size() && bits2; ++i)
        bits2 = std::memcmp(&x1[i], &x2[i], sizeof(MomentPair)) == 0;

    std::ostringstream os;
    os << "reruns bit-identical (all pipelines are single-threaded)";
    report(10, "determinism", bits && bits2, os.str());
}

} // namespace

int main() {
    criterion_1_exact_algebra();
    criterion_2_aggregate_identities();
    criterion_3_fiber_asd();
    criterion_4_curvature_oracle();
    criterion_5_residual_rate();
    criterion_6_weitzenbock();
    criterion_7_model_solve();
    criterion_8_balancing();
    criterion_9_picard();
    criterion_10_determinism();
    std::cout << (failures == 0 ? "ALL CRITERIA PASSED" : "FAILURES: " + std::to_string(failures))
              << "\n";
    return failures == 0 ? 0 : 1;
}
