#include "cgw/linearized.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace cgw {

namespace {

Su2<double> su2_at(const double* p) { return {p[0], p[1], p[2]}; }
void su2_add(double* p, const Su2<double>& x, double s = 1.0) {
    p[0] += s * x.c[0];
    p[1] += s * x.c[1];
    p[2] += s * x.c[2];
}

// F(e_k-perp, e_l-perp) from the 6 stored pairs.
Su2<double> fib(const std::array<Su2<double>, 6>& F, int k, int l) {
    if (k == l) return {};
    return k < l ? F[tangent_pair(k, l)] : -F[tangent_pair(l, k)];
}

// mix_tab[a][i][j]: coefficient of the monomial e_i ^ e_{j+4} in q_a = p_a/2.
const double (&mix_tab())[7][4][4] {
    static const auto& T = []() -> const double (&)[7][4][4] {
        static double t[7][4][4] = {};
        const auto& pb = plus_basis<double>();
        for (int a = 0; a < 7; ++a)
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j)
                    t[a][i][j] = 0.5 * pb[a].coeff(Mask((1u << i) | (1u << (4 + j))));
        return t;
    }();
    return T;
}

// wb_tab[a][b][k][l] = <e_{k+4} ^ i_{e_{l+4}} q_b, q_a>, k != l; contracted
// against brackets [F(e_k-perp, e_l-perp), phi_b] in the Weitzenboeck term.
const double (&wb_tab())[7][7][4][4] {
    static const auto& T = []() -> const double (&)[7][7][4][4] {
        static double t[7][7][4][4] = {};
        const auto& pb = plus_basis<double>();
        for (int b = 0; b < 7; ++b) {
            Form<double> qb = pb[b] * 0.5;
            for (int l = 0; l < 4; ++l) {
                Vector8<double> el{};
                el[4 + l] = 1.0;
                Form<double> il = interior(el, qb);
                for (int k = 0; k < 4; ++k) {
                    if (k == l) continue;
                    Form<double> ek(1);
                    ek.add(Mask(1u << (4 + k)), 1.0);
                    Form<double> w = wedge(ek, il);
                    for (int a = 0; a < 7; ++a) t[a][b][k][l] = inner(w, pb[a] * 0.5);
                }
            }
        }
        return t;
    }();
    return T;
}

void check_nc(const Field& f, int nc, const char* who) {
    if (f.nc != nc) throw std::invalid_argument(std::string(who) + ": wrong component count");
}

// Iterate points with the running multi-index available.
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

std::array<double, 4> fiber_point(const ProductGrid& g, const std::array<int, 8>& ix) {
    return {g.coord(4, ix[4]), g.coord(5, ix[5]), g.coord(6, ix[6]), g.coord(7, ix[7])};
}

} // namespace

const std::array<std::array<PlusMonomial, 4>, 7>& plus_monomials() {
    static const auto T = [] {
        std::array<std::array<PlusMonomial, 4>, 7> t{};
        const auto& pb = plus_basis<double>();
        for (int a = 0; a < 7; ++a) {
            int n = 0;
            for (auto& [m, coef] : pb[a].c) {
                PlusMonomial pm;
                pm.mu = std::countr_zero(unsigned(m));
                pm.nu = 31 - std::countl_zero(unsigned(m));
                pm.s = coef;
                t[a][n++] = pm;
            }
            if (n != 4) throw std::logic_error("plus_monomials: bad basis element");
        }
        return t;
    }();
    return T;
}

// ---------------------------------------------------------------------------
// Gauge fields.
// ---------------------------------------------------------------------------

Field make_basic_gauge(const ProductGrid& grid, const BasicParams<double>& b) {
    Field A(grid, kOneFormComps);
    for_points(grid, [&](std::int64_t p, const std::array<int, 8>& ix) {
        auto B = basic_potential(b, fiber_point(grid, ix));
        double* pa = A.at(p);
        for (int mu = 0; mu < 4; ++mu) su2_add(pa + 3 * (4 + mu), B[mu]);
    });
    return A;
}

Field make_glued_gauge(const ProductGrid& grid, const GluingData& g) {
    for (int a = 0; a < 4; ++a)
        if (grid.dims[a] != g.base->dims[a])
            throw std::invalid_argument("make_glued_gauge: base grid shape mismatch");
    Field A(grid, kOneFormComps);
    BasePointData d;
    std::int64_t bkey = -1;
    for_points(grid, [&](std::int64_t p, const std::array<int, 8>& ix) {
        std::int64_t bk = g.base_index(ix);
        if (bk != bkey) {
            d = base_point_data(g, bk);
            bkey = bk;
        }
        GluedPotential gp = glued_potential(d, fiber_point(grid, ix));
        double* pa = A.at(p);
        for (int i = 0; i < 4; ++i) su2_add(pa + 3 * i, gp.Ab[i]);
        for (int mu = 0; mu < 4; ++mu) su2_add(pa + 3 * (4 + mu), gp.Af[mu]);
    });
    return A;
}

Field covariant_d(const Field& f, const Field& gauge) {
    check_nc(f, 3, "covariant_d");
    check_nc(gauge, kOneFormComps, "covariant_d");
    const ProductGrid& g = *f.g;
    Field out(g, kOneFormComps);
    for (int mu = 0; mu < 8; ++mu) {
        Field d = fd_partial(f, mu);
        for (std::int64_t p = 0; p < g.npoints; ++p) {
            Su2<double> val = su2_at(d.at(p)) + bracket(su2_at(gauge.at(p) + 3 * mu), su2_at(f.at(p)));
            su2_add(out.at(p) + 3 * mu, val);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// L and its adjoint.
// ---------------------------------------------------------------------------

Field apply_LB(const Field& a, const Field& gauge) {
    check_nc(a, kOneFormComps, "apply_LB");
    check_nc(gauge, kOneFormComps, "apply_LB");
    if (a.g != gauge.g) throw std::invalid_argument("apply_LB: grid mismatch");
    const ProductGrid& g = *a.g;
    const auto& tab = plus_monomials();
    Field out(g, kPlusComps);
    // derivative terms, one axis sweep at a time
    for (int mu = 0; mu < 8; ++mu) {
        if (g.dims[mu] == 1) continue;
        Field d = fd_partial(a, mu);
        for (int q = 0; q < 7; ++q)
            for (const auto& e : tab[q]) {
                if (e.mu == mu) {
                    for (std::int64_t p = 0; p < g.npoints; ++p)
                        su2_add(out.at(p) + 3 * q, su2_at(d.at(p) + 3 * e.nu), e.s);
                } else if (e.nu == mu) {
                    for (std::int64_t p = 0; p < g.npoints; ++p)
                        su2_add(out.at(p) + 3 * q, su2_at(d.at(p) + 3 * e.mu), -e.s);
                }
            }
    }
    // bracket terms, pointwise
    for (std::int64_t p = 0; p < g.npoints; ++p) {
        const double* pa = a.at(p);
        const double* pg = gauge.at(p);
        double* po = out.at(p);
        for (int q = 0; q < 7; ++q)
            for (const auto& e : tab[q]) {
                su2_add(po + 3 * q, bracket(su2_at(pg + 3 * e.mu), su2_at(pa + 3 * e.nu)), e.s);
                su2_add(po + 3 * q, bracket(su2_at(pg + 3 * e.nu), su2_at(pa + 3 * e.mu)), -e.s);
            }
    }
    return out;
}

Field apply_LB_star(const Field& phi, const Field& gauge) {
    check_nc(phi, kPlusComps, "apply_LB_star");
    check_nc(gauge, kOneFormComps, "apply_LB_star");
    const ProductGrid& g = *phi.g;
    const auto& tab = plus_monomials();
    Field out(g, kOneFormComps);
    for (int mu = 0; mu < 8; ++mu) {
        if (g.dims[mu] == 1) continue;
        Field d = fd_partial_transpose(phi, mu);
        for (int q = 0; q < 7; ++q)
            for (const auto& e : tab[q]) {
                if (e.mu == mu) {
                    for (std::int64_t p = 0; p < g.npoints; ++p)
                        su2_add(out.at(p) + 3 * e.nu, su2_at(d.at(p) + 3 * q), e.s);
                } else if (e.nu == mu) {
                    for (std::int64_t p = 0; p < g.npoints; ++p)
                        su2_add(out.at(p) + 3 * e.mu, su2_at(d.at(p) + 3 * q), -e.s);
                }
            }
    }
    // adjoint of the pointwise brackets: <[x,y],z> = -<y,[x,z]>
    for (std::int64_t p = 0; p < g.npoints; ++p) {
        const double* pf = phi.at(p);
        const double* pg = gauge.at(p);
        double* po = out.at(p);
        for (int q = 0; q < 7; ++q)
            for (const auto& e : tab[q]) {
                Su2<double> fq = su2_at(pf + 3 * q);
                su2_add(po + 3 * e.nu, bracket(su2_at(pg + 3 * e.mu), fq), -e.s);
                su2_add(po + 3 * e.mu, bracket(su2_at(pg + 3 * e.nu), fq), e.s);
            }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Weitzenboeck identity.
// ---------------------------------------------------------------------------

std::array<Su2<double>, 7> weitzenbock_bracket(const std::array<Su2<double>, 6>& F,
                                               const std::array<Su2<double>, 7>& phi) {
    const auto& W = wb_tab();
    std::array<Su2<double>, 7> out{};
    for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l) {
            if (k == l) continue;
            Su2<double> Fkl = fib(F, k, l);
            for (int b = 0; b < 7; ++b) {
                Su2<double> br = bracket(Fkl, phi[b]);
                if (br.is_zero()) continue;
                for (int a = 0; a < 7; ++a)
                    if (W[a][b][k][l] != 0) out[a] += br * (-2.0 * W[a][b][k][l]);
            }
        }
    return out;
}

double weitzenbock_residual(const Field& phi, const BasicParams<double>& b) {
    check_nc(phi, kPlusComps, "weitzenbock_residual");
    const ProductGrid& g = *phi.g;
    Field gauge = make_basic_gauge(g, b);
    Field lhs = apply_LB(apply_LB_star(phi, gauge), gauge);
    // rough Laplacian sum_mu D_mu^T D_mu acting on each su(2) block
    Field rhs(g, kPlusComps);
    for (int mu = 0; mu < 8; ++mu) {
        if (g.dims[mu] == 1) continue;
        Field u = fd_partial(phi, mu);
        for (std::int64_t p = 0; p < g.npoints; ++p) {
            Su2<double> Amu = su2_at(gauge.at(p) + 3 * mu);
            double* pu = u.at(p);
            const double* pf = phi.at(p);
            for (int q = 0; q < 7; ++q) su2_add(pu + 3 * q, bracket(Amu, su2_at(pf + 3 * q)));
        }
        Field w = fd_partial_transpose(u, mu);
        for (std::int64_t p = 0; p < g.npoints; ++p) {
            Su2<double> Amu = su2_at(gauge.at(p) + 3 * mu);
            double* pw = w.at(p);
            const double* pu = u.at(p);
            for (int q = 0; q < 7; ++q) su2_add(pw + 3 * q, bracket(Amu, su2_at(pu + 3 * q)), -1.0);
        }
        axpy(1.0, w, rhs);
    }
    // curvature term, pointwise
    for_points(g, [&](std::int64_t p, const std::array<int, 8>& ix) {
        auto F = basic_curvature_fast(b, fiber_point(g, ix));
        std::array<Su2<double>, 7> ph;
        const double* pf = phi.at(p);
        for (int q = 0; q < 7; ++q) ph[q] = su2_at(pf + 3 * q);
        auto add = weitzenbock_bracket(F, ph);
        double* pr = rhs.at(p);
        for (int q = 0; q < 7; ++q) su2_add(pr + 3 * q, add[q]);
    });
    // weighted L2 of the defect over a fixed physical interior region, so the
    // measured set is resolution independent (one-sided stencils live at the
    // truncation boundary)
    std::array<double, 8> cut{};
    for (int a = 4; a < 8; ++a) {
        double mx = 0;
        for (int i = 0; i < g.dims[a]; ++i) mx = std::max(mx, std::abs(g.coord(a, i)));
        cut[a] = 0.85 * mx;
    }
    double acc = 0;
    for_points(g, [&](std::int64_t p, const std::array<int, 8>& ix) {
        for (int a = 4; a < 8; ++a)
            if (g.dims[a] > 1 && std::abs(g.coord(a, ix[a])) > cut[a]) return;
        double s = 0;
        const double* pl = lhs.at(p);
        const double* pr = rhs.at(p);
        for (int c = 0; c < kPlusComps; ++c) {
            double d = pl[c] - pr[c];
            s += d * d;
        }
        acc += g.cellw[size_t(p)] * s;
    });
    return std::sqrt(acc);
}

// ---------------------------------------------------------------------------
// Moment projections.
// ---------------------------------------------------------------------------

double KappaProfile::operator()(double r) const {
    if (r <= r1) return 1.0;
    if (r >= r2) return 0.0;
    double s = (r - r1) / (r2 - r1);
    return 1.0 - s * s * (3.0 - 2.0 * s);
}

KappaProfile make_kappa(double eps, double R) {
    double e4 = std::pow(eps, 0.25);
    KappaProfile k;
    k.r1 = std::min(e4, R / 2);
    k.r2 = std::min(2 * e4, R);
    if (!(k.r2 > k.r1)) k.r2 = std::min(2 * k.r1, R);
    if (!(k.r2 > k.r1)) throw std::invalid_argument("make_kappa: degenerate cutoff radii");
    return k;
}

namespace {

double grid_truncation_radius(const ProductGrid& g) {
    double R = 0;
    for (int a = 4; a < 8; ++a)
        if (g.dims[a] > 1)
            for (int i = 0; i < g.dims[a]; ++i) R = std::max(R, std::abs(g.coord(a, i)));
    return R > 0 ? R : 1.0;
}

// weights u^b_ik at a relative fiber position z: V part (b = 0..3, scaled by
// eps) then W part (b = 4..7, contracted with z).  The overall orientation is
// a free choice (the projection onto the kernel span and its complement are
// orientation-invariant); it is fixed so that the moment pair of the glued
// residual matches the leading-term formula with a positive factor.
void kernel_weights(double eps, const std::array<double, 4>& z, double u[8][4][4]) {
    const auto& V = v_basis<double>();
    const auto& W = w_basis<double>();
    for (int b = 0; b < 4; ++b)
        for (int i = 0; i < 4; ++i)
            for (int k = 0; k < 4; ++k) {
                u[b][i][k] = -eps * V[b][i][k];
                double acc = 0;
                for (int l = 0; l < 4; ++l) acc -= W[b][i][k][l] * z[l];
                u[4 + b][i][k] = acc;
            }
}

void kernels_at(double eps, const BasicParams<double>& bp, const KappaProfile& kappa,
                const std::array<double, 4>& y, Su2<double> K[8][4][4], bool& nonzero) {
    std::array<double, 4> z{};
    double r2 = 0;
    for (int k = 0; k < 4; ++k) {
        z[k] = y[k] - bp.center[k];
        r2 += z[k] * z[k];
    }
    double kap = kappa(std::sqrt(r2));
    nonzero = kap != 0.0;
    if (!nonzero) return;
    auto F = basic_curvature_fast(bp, y);
    double u[8][4][4];
    kernel_weights(eps, z, u);
    for (int b = 0; b < 8; ++b)
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                Su2<double> acc;
                for (int k = 0; k < 4; ++k)
                    if (u[b][i][k] != 0 && k != j) acc += fib(F, k, j) * u[b][i][k];
                K[b][i][j] = acc * kap;
            }
}

// Moments and Gram matrix of psi against the 8 kernels at one base point.
void accumulate_moments(const Field& psi, const std::array<int, 4>& baseIx, const GluingData& g,
                        std::array<double, 8>& m, std::array<std::array<double, 8>, 8>& G) {
    const ProductGrid& gr = *psi.g;
    std::array<int, 8> ix{baseIx[0], baseIx[1], baseIx[2], baseIx[3], 0, 0, 0, 0};
    BasePointData d = base_point_data(g, g.base_index(ix));
    BasicParams<double> bp = d.basic();
    KappaProfile kappa = make_kappa(g.eps, grid_truncation_radius(gr));
    const auto& M = mix_tab();
    m = {};
    G = {};
    std::int64_t pbase = gr.index(ix);
    for (ix[4] = 0; ix[4] < gr.dims[4]; ++ix[4])
        for (ix[5] = 0; ix[5] < gr.dims[5]; ++ix[5])
            for (ix[6] = 0; ix[6] < gr.dims[6]; ++ix[6])
                for (ix[7] = 0; ix[7] < gr.dims[7]; ++ix[7]) {
                    std::int64_t p = pbase + ix[4] * gr.stride[4] + ix[5] * gr.stride[5] +
                                     ix[6] * gr.stride[6] + ix[7] * gr.stride[7];
                    Su2<double> K[8][4][4];
                    bool nz = false;
                    kernels_at(g.eps, bp, kappa, fiber_point(gr, ix), K, nz);
                    if (!nz) continue;
                    double wf = 1;
                    for (int a = 4; a < 8; ++a) wf *= gr.ax[a].qw[ix[a]];
                    // mixed components of psi from its plus coordinates
                    const double* pc = psi.at(p);
                    Su2<double> pm[4][4];
                    for (int i = 0; i < 4; ++i)
                        for (int j = 0; j < 4; ++j) {
                            Su2<double> acc;
                            for (int a = 0; a < 7; ++a)
                                if (M[a][i][j] != 0) acc += su2_at(pc + 3 * a) * M[a][i][j];
                            pm[i][j] = acc;
                        }
                    for (int b = 0; b < 8; ++b) {
                        double mb = 0;
                        for (int i = 0; i < 4; ++i)
                            for (int j = 0; j < 4; ++j) mb += inner(pm[i][j], K[b][i][j]);
                        m[b] += wf * mb;
                        for (int c = b; c < 8; ++c) {
                            double gb = 0;
                            for (int i = 0; i < 4; ++i)
                                for (int j = 0; j < 4; ++j) gb += inner(K[b][i][j], K[c][i][j]);
                            G[b][c] += wf * gb;
                        }
                    }
                }
    for (int b = 0; b < 8; ++b)
        for (int c = 0; c < b; ++c) G[b][c] = G[c][b];
}

std::array<double, 8> solve_gram(std::array<std::array<double, 8>, 8> G, std::array<double, 8> m) {
    // Cholesky with a relative pivot guard
    double dmax = 0;
    for (int i = 0; i < 8; ++i) dmax = std::max(dmax, G[i][i]);
    if (dmax <= 0) throw std::runtime_error("moment projection: singular Gram matrix");
    for (int i = 0; i < 8; ++i) {
        for (int k = 0; k < i; ++k) G[i][i] -= G[i][k] * G[i][k];
        if (G[i][i] <= 1e-13 * dmax) throw std::runtime_error("moment projection: singular Gram matrix");
        G[i][i] = std::sqrt(G[i][i]);
        for (int j = i + 1; j < 8; ++j) {
            for (int k = 0; k < i; ++k) G[j][i] -= G[j][k] * G[i][k];
            G[j][i] /= G[i][i];
        }
    }
    for (int i = 0; i < 8; ++i) {
        for (int k = 0; k < i; ++k) m[i] -= G[i][k] * m[k];
        m[i] /= G[i][i];
    }
    for (int i = 7; i >= 0; --i) {
        for (int k = i + 1; k < 8; ++k) m[i] -= G[k][i] * m[k];
        m[i] /= G[i][i];
    }
    return m;
}

} // namespace

std::array<double, 8> raw_moments(const Field& psi, const std::array<int, 4>& baseIx,
                                  const GluingData& g) {
    check_nc(psi, kPlusComps, "raw_moments");
    std::array<double, 8> m;
    std::array<std::array<double, 8>, 8> G;
    accumulate_moments(psi, baseIx, g, m, G);
    return m;
}

MomentPair moment_pair(const Field& psi, const std::array<int, 4>& baseIx, const GluingData& g) {
    check_nc(psi, kPlusComps, "moment_pair");
    std::array<double, 8> m;
    std::array<std::array<double, 8>, 8> G;
    accumulate_moments(psi, baseIx, g, m, G);
    auto c = solve_gram(G, m);
    MomentPair r;
    for (int b = 0; b < 4; ++b) {
        r.s[b] = c[b];
        r.t[b] = c[4 + b];
    }
    return r;
}

void kernel_plus_coords(const MomentPair& c, const BasePointData& d, const KappaProfile& kappa,
                        const std::array<double, 4>& y, std::array<Su2<double>, 7>& out) {
    BasicParams<double> bp = d.basic();
    Su2<double> K[8][4][4];
    bool nz = false;
    kernels_at(d.eps, bp, kappa, y, K, nz);
    out = {};
    if (!nz) return;
    const auto& M = mix_tab();
    std::array<double, 8> cb;
    for (int b = 0; b < 4; ++b) {
        cb[b] = c.s[b];
        cb[4 + b] = c.t[b];
    }
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            Su2<double> kij;
            for (int b = 0; b < 8; ++b)
                if (cb[b] != 0) kij += K[b][i][j] * cb[b];
            for (int a = 0; a < 7; ++a)
                if (M[a][i][j] != 0) out[a] += kij * M[a][i][j];
        }
}

Field project_P(const Field& psi, const GluingData& g) {
    check_nc(psi, kPlusComps, "project_P");
    const ProductGrid& gr = *psi.g;
    for (int a = 0; a < 4; ++a)
        if (gr.dims[a] != g.base->dims[a])
            throw std::invalid_argument("project_P: base grid shape mismatch");
    Field out(gr, kPlusComps);
    KappaProfile kappa = make_kappa(g.eps, grid_truncation_radius(gr));
    std::array<int, 8> ix{};
    for (ix[0] = 0; ix[0] < gr.dims[0]; ++ix[0])
        for (ix[1] = 0; ix[1] < gr.dims[1]; ++ix[1])
            for (ix[2] = 0; ix[2] < gr.dims[2]; ++ix[2])
                for (ix[3] = 0; ix[3] < gr.dims[3]; ++ix[3]) {
                    MomentPair c = moment_pair(psi, {ix[0], ix[1], ix[2], ix[3]}, g);
                    BasePointData d = base_point_data(g, g.base_index(ix));
                    std::int64_t pbase = gr.index(ix);
                    std::array<int, 8> jx = ix;
                    for (jx[4] = 0; jx[4] < gr.dims[4]; ++jx[4])
                        for (jx[5] = 0; jx[5] < gr.dims[5]; ++jx[5])
                            for (jx[6] = 0; jx[6] < gr.dims[6]; ++jx[6])
                                for (jx[7] = 0; jx[7] < gr.dims[7]; ++jx[7]) {
                                    std::int64_t p = pbase + jx[4] * gr.stride[4] +
                                                     jx[5] * gr.stride[5] + jx[6] * gr.stride[6] +
                                                     jx[7] * gr.stride[7];
                                    std::array<Su2<double>, 7> k;
                                    kernel_plus_coords(c, d, kappa, fiber_point(gr, jx), k);
                                    double* po = out.at(p);
                                    for (int a = 0; a < 7; ++a) su2_add(po + 3 * a, k[a]);
                                }
                }
    return out;
}

Field project_G(const Field& psi, const GluingData& g) {
    Field out = project_P(psi, g);
    for (size_t i = 0; i < out.v.size(); ++i) out.v[i] = psi.v[i] - out.v[i];
    return out;
}

// ---------------------------------------------------------------------------
// Fiber model solver.
// ---------------------------------------------------------------------------

namespace {

void require_fiber_grid(const ProductGrid& g, const char* who) {
    for (int a = 0; a < 4; ++a)
        if (g.dims[a] != 1) throw std::invalid_argument(std::string(who) + ": expected a fiber-only grid");
}

void mask_boundary(const ProductGrid& g, Field& f) {
    for_points(g, [&](std::int64_t p, const std::array<int, 8>& ix) {
        if (!g.fiber_boundary(ix)) return;
        double* pf = f.at(p);
        for (int c = 0; c < f.nc; ++c) pf[c] = 0;
    });
}

// Rough covariant Laplacian sum D_mu^T D_mu on nblk su(2) blocks.
Field apply_rough(const Field& u, const Field& gauge) {
    const ProductGrid& g = *u.g;
    const int nblk = u.nc / 3;
    Field r(g, u.nc);
    for (int mu = 4; mu < 8; ++mu) {
        if (g.dims[mu] == 1) continue;
        Field t = fd_partial(u, mu);
        for (std::int64_t p = 0; p < g.npoints; ++p) {
            Su2<double> Amu = su2_at(gauge.at(p) + 3 * mu);
            double* pt = t.at(p);
            const double* pu = u.at(p);
            for (int j = 0; j < nblk; ++j) su2_add(pt + 3 * j, bracket(Amu, su2_at(pu + 3 * j)));
        }
        Field w = fd_partial_transpose(t, mu);
        for (std::int64_t p = 0; p < g.npoints; ++p) {
            Su2<double> Amu = su2_at(gauge.at(p) + 3 * mu);
            double* pw = w.at(p);
            const double* pt = t.at(p);
            for (int j = 0; j < nblk; ++j) su2_add(pw + 3 * j, bracket(Amu, su2_at(pt + 3 * j)), -1.0);
        }
        axpy(1.0, w, r);
    }
    return r;
}

// Conjugate gradients on the Dirichlet-masked interior.
Field cg_solve(const Field& rhs, const std::function<Field(const Field&)>& apply,
               FiberSolveReport& rep, double tol, int maxit) {
    const ProductGrid& g = *rhs.g;
    Field b = rhs;
    mask_boundary(g, b);
    Field x(g, rhs.nc);
    Field r = b;
    Field p = r;
    double rr = dot_w(r, r);
    const double bnorm = std::sqrt(rr);
    rep = {};
    if (bnorm == 0) {
        rep.converged = true;
        return x;
    }
    for (int it = 0; it < maxit; ++it) {
        Field q = apply(p);
        mask_boundary(g, q);
        double pq = dot_w(p, q);
        if (pq <= 0) throw std::runtime_error("fiber model solve: operator not positive definite");
        double alpha = rr / pq;
        axpy(alpha, p, x);
        axpy(-alpha, q, r);
        double rr2 = dot_w(r, r);
        rep.iters = it + 1;
        rep.rel_residual = std::sqrt(rr2) / bnorm;
        if (rep.rel_residual <= tol) {
            rep.converged = true;
            return x;
        }
        double beta = rr2 / rr;
        rr = rr2;
        for (size_t i = 0; i < p.v.size(); ++i) p.v[i] = r.v[i] + beta * p.v[i];
    }
    return x;
}

} // namespace

Field solve_fiber_laplace(const Field& gtan, const BasicParams<double>& b, FiberSolveReport& rep,
                          double tol, int maxit) {
    check_nc(gtan, 12, "solve_fiber_laplace");
    require_fiber_grid(*gtan.g, "solve_fiber_laplace");
    Field gauge = make_basic_gauge(*gtan.g, b);
    auto apply = [&](const Field& u) { return apply_rough(u, gauge); };
    return cg_solve(gtan, apply, rep, tol, maxit);
}

Field solve_fiber_coupled(const Field& gperp, const BasicParams<double>& b, FiberSolveReport& rep,
                          double tol, int maxit) {
    check_nc(gperp, 12, "solve_fiber_coupled");
    require_fiber_grid(*gperp.g, "solve_fiber_coupled");
    const ProductGrid& g = *gperp.g;
    Field gauge = make_basic_gauge(g, b);
    // precompute the curvature coupling (6 fiber pairs x 3)
    Field Fc(g, 18);
    for_points(g, [&](std::int64_t p, const std::array<int, 8>& ix) {
        auto F = basic_curvature_fast(b, fiber_point(g, ix));
        double* pf = Fc.at(p);
        for (int q = 0; q < 6; ++q) su2_add(pf + 3 * q, F[q]);
    });
    auto apply = [&](const Field& u) {
        Field r = apply_rough(u, gauge);
        for (std::int64_t p = 0; p < g.npoints; ++p) {
            std::array<Su2<double>, 6> F;
            const double* pf = Fc.at(p);
            for (int q = 0; q < 6; ++q) F[q] = su2_at(pf + 3 * q);
            const double* pu = u.at(p);
            double* pr = r.at(p);
            for (int j = 0; j < 4; ++j)
                for (int k = 0; k < 4; ++k) {
                    if (k == j) continue;
                    su2_add(pr + 3 * j, bracket(fib(F, j, k), su2_at(pu + 3 * k)), -2.0);
                }
        }
        return r;
    };
    return cg_solve(gperp, apply, rep, tol, maxit);
}

Field solve_model_from_plus(const Field& psi, const BasicParams<double>& b, FiberSolveReport& rep,
                            double tol, int maxit) {
    check_nc(psi, kPlusComps, "solve_model_from_plus");
    const ProductGrid& g = *psi.g;
    require_fiber_grid(g, "solve_model_from_plus");
    Field gauge = make_basic_gauge(g, b);
    auto apply = [&](const Field& u) { return apply_LB(apply_LB_star(u, gauge), gauge); };
    return cg_solve(psi, apply, rep, tol, maxit);
}

// ---------------------------------------------------------------------------
// Picard step.
// ---------------------------------------------------------------------------

Field asd_residual_field(const GluingData& g, const ProductGrid& grid) {
    PointEval ev = residual_evaluator(g, grid);
    Field out(grid, kPlusComps);
    std::array<double, kResidualComps> buf;
    for_points(grid, [&](std::int64_t p, const std::array<int, 8>& ix) {
        ev(p, ix, buf.data());
        double* po = out.at(p);
        for (int c = 0; c < kPlusComps; ++c) po[c] = buf[c];
    });
    return out;
}

Field quad_residual_field(const Field& a) {
    check_nc(a, kOneFormComps, "quad_residual_field");
    const ProductGrid& g = *a.g;
    const auto& tab = plus_monomials();
    Field out(g, kPlusComps);
    for (std::int64_t p = 0; p < g.npoints; ++p) {
        const double* pa = a.at(p);
        double* po = out.at(p);
        for (int q = 0; q < 7; ++q)
            for (const auto& e : tab[q])
                su2_add(po + 3 * q, bracket(su2_at(pa + 3 * e.mu), su2_at(pa + 3 * e.nu)), 2.0 * e.s);
    }
    return out;
}

Field apply_G(const Field& psi, const Field& gauge, const PicardOptions& opt, int* iters) {
    check_nc(psi, kPlusComps, "apply_G");
    const ProductGrid& g = *psi.g;
    // CGLS on min ||L x - psi||_w
    Field x(g, kOneFormComps);
    Field r = psi;
    Field s = apply_LB_star(r, gauge);
    Field p = s;
    double gamma = dot_w(s, s);
    const double g0 = std::sqrt(gamma);
    if (iters) *iters = 0;
    if (g0 == 0) return x;
    for (int it = 0; it < opt.maxit_g; ++it) {
        Field q = apply_LB(p, gauge);
        double qq = dot_w(q, q);
        if (qq <= 0) break;
        double alpha = gamma / qq;
        axpy(alpha, p, x);
        axpy(-alpha, q, r);
        s = apply_LB_star(r, gauge);
        double gamma2 = dot_w(s, s);
        if (iters) *iters = it + 1;
        if (std::sqrt(gamma2) / g0 <= opt.tol_g) return x;
        double beta = gamma2 / gamma;
        gamma = gamma2;
        for (size_t i = 0; i < p.v.size(); ++i) p.v[i] = s.v[i] + beta * p.v[i];
    }
    throw std::runtime_error("apply_G: least-squares solve did not converge");
}

PicardContext make_picard_context(const GluingData& g, const ProductGrid& grid) {
    PicardContext ctx;
    ctx.grid = &grid;
    ctx.gd = &g;
    ctx.gauge = make_glued_gauge(grid, g);
    ctx.resid0 = asd_residual_field(g, grid);
    return ctx;
}

Field picard_step(const Field& a, const PicardContext& ctx, const PicardOptions& opt) {
    Field src = ctx.resid0;
    bool zero = true;
    for (double v : a.v)
        if (v != 0) {
            zero = false;
            break;
        }
    if (!zero) axpy(1.0, quad_residual_field(a), src);
    Field w = project_G(src, *ctx.gd);
    Field out = apply_G(w, ctx.gauge, opt);
    for (double& v : out.v) v *= -0.5;
    return out;
}

double weighted_l2(const Field& u, double nu, double eps) {
    const ProductGrid& g = *u.g;
    double acc = 0;
    for_points(g, [&](std::int64_t p, const std::array<int, 8>& ix) {
        double w = std::pow(eps + g.fiber_abs(ix), nu);
        double s = 0;
        const double* pu = u.at(p);
        for (int c = 0; c < u.nc; ++c) s += pu[c] * pu[c];
        acc += g.cellw[size_t(p)] * w * w * s;
    });
    return std::sqrt(acc);
}

ContractionReport picard_contraction(const GluingData& g, const ProductGrid& grid,
                                     const PicardOptions& opt) {
    PicardContext ctx = make_picard_context(g, grid);
    ContractionReport rep;
    Field src = project_G(ctx.resid0, g);
    rep.before = weighted_l2(src, opt.nu, g.eps);
    Field a1 = apply_G(src, ctx.gauge, opt, &rep.g_iters);
    for (double& v : a1.v) v *= -0.5;
    // residual of the updated connection: exact quadratic expansion
    Field resid1 = ctx.resid0;
    axpy(2.0, apply_LB(a1, ctx.gauge), resid1);
    axpy(1.0, quad_residual_field(a1), resid1);
    rep.after = weighted_l2(project_G(resid1, g), opt.nu, g.eps);
    rep.ratio = rep.before > 0 ? rep.after / rep.before : 0.0;
    return rep;
}

} // namespace cgw
