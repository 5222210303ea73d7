#include "cgw/instanton.hpp"

#include <cmath>
#include <cstring>
#include <memory>

namespace cgw {

BasePointData base_point_data(const GluingData& g, std::int64_t p) {
    BasePointData d;
    d.eps = g.eps;
    d.lambda = g.lam.at(p)[0];
    for (int k = 0; k < 4; ++k) d.v[k] = g.v.at(p)[k];
    for (int i = 0; i < 4; ++i) {
        d.dloglam[i] = g.dlam.at(p)[i] / d.lambda;
        for (int k = 0; k < 4; ++k) d.dv[i][k] = g.dv.at(p)[4 * i + k];
        for (int a = 0; a < 3; ++a) d.theta[i].c[a] = g.th.at(p)[3 * i + a];
    }
    for (int pr = 0; pr < 6; ++pr)
        for (int a = 0; a < 3; ++a) d.C[pr].c[a] = g.C.at(p)[3 * pr + a];
    return d;
}

namespace {

// Richardson-extrapolated central difference of a vector-valued callable.
template <int N>
std::array<double, N> richardson(const std::function<std::array<double, N>(double)>& f, double h) {
    auto cd = [&](double hh) {
        auto a = f(hh), b = f(-hh);
        std::array<double, N> d;
        for (int i = 0; i < N; ++i) d[i] = (a[i] - b[i]) / (2 * hh);
        return d;
    };
    auto d1 = cd(h), d2 = cd(h / 2);
    std::array<double, N> r;
    for (int i = 0; i < N; ++i) r[i] = (4 * d2[i] - d1[i]) / 3;
    return r;
}

std::array<double, 12> pack_theta(const std::array<SdRot, 4>& th) {
    std::array<double, 12> r;
    for (int i = 0; i < 4; ++i)
        for (int a = 0; a < 3; ++a) r[3 * i + a] = th[i].c[a];
    return r;
}

} // namespace

BasePointData base_point_data(const GluingTemplate& t, double eps, const std::array<double, 4>& x) {
    BasePointData d;
    d.eps = eps;
    d.lambda = t.lambda(x);
    d.v = t.v(x);
    d.dv = t.dv(x);
    auto dl = t.dlambda(x);
    for (int i = 0; i < 4; ++i) d.dloglam[i] = dl[i] / d.lambda;
    d.theta = t.theta(x);
    // dtheta by Richardson differences of the analytic theta
    std::array<std::array<SdRot, 4>, 4> dth{}; // [i][j]
    for (int i = 0; i < 4; ++i) {
        std::function<std::array<double, 12>(double)> f = [&](double s) {
            auto xs = x;
            xs[i] += s;
            return pack_theta(t.theta(xs));
        };
        auto di = richardson<12>(f, 1e-3);
        for (int j = 0; j < 4; ++j)
            for (int a = 0; a < 3; ++a) dth[i][j].c[a] = di[3 * j + a];
    }
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            d.C[tangent_pair(i, j)] = sd_bracket(d.theta[i], d.theta[j]) - (dth[i][j] - dth[j][i]);
    return d;
}

GluedPotential glued_potential(const BasePointData& d, const std::array<double, 4>& y) {
    GluedPotential A;
    BasicParams<double> b = d.basic();
    auto z = recenter(b, y);
    auto B = basic_potential(b, y);
    A.Af = B;
    for (int i = 0; i < 4; ++i) {
        A.Tb[i] = d.theta[i] * -1.0;
        std::array<double, 4> c = d.theta[i].apply(z);
        for (int k = 0; k < 4; ++k) c[k] += d.eps * d.dv[i][k] + d.dloglam[i] * z[k];
        for (int k = 0; k < 4; ++k) A.Ab[i] -= B[k] * c[k];
    }
    return A;
}

namespace {

// F(e_k-perp, e_l-perp) for any order of (k,l), from the pair array.
Su2<double> fib(const std::array<Su2<double>, 6>& F, int k, int l) {
    if (k == l) return {};
    Su2<double> v = F[tangent_pair(std::min(k, l), std::max(k, l))];
    return k < l ? v : -v;
}

} // namespace

GluedCurvature glued_curvature(const BasePointData& d, const std::array<double, 4>& y) {
    GluedCurvature F;
    BasicParams<double> b = d.basic();
    auto z = recenter(b, y);
    F.Fff = basic_curvature(b, y);
    auto B = basic_potential(b, y);

    std::array<std::array<double, 4>, 4> c{};
    for (int i = 0; i < 4; ++i) {
        c[i] = d.theta[i].apply(z);
        for (int k = 0; k < 4; ++k) c[i][k] += d.eps * d.dv[i][k] + d.dloglam[i] * z[k];
    }
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            Su2<double> m;
            for (int k = 0; k < 4; ++k)
                if (c[i][k] != 0.0) m -= fib(F.Fff, k, j) * c[i][k];
            F.Fmix[i][j] = m;
        }
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            int pr = tangent_pair(i, j);
            Su2<double> f;
            for (int k = 0; k < 4; ++k)
                for (int l = 0; l < 4; ++l)
                    if (k != l && c[i][k] != 0.0 && c[j][l] != 0.0)
                        f += fib(F.Fff, k, l) * (c[i][k] * c[j][l]);
            auto cz = d.C[pr].apply(z);
            for (int k = 0; k < 4; ++k) f += B[k] * cz[k];
            F.Fbb[pr] = f;
            F.Tbb[pr] = d.C[pr];
        }
    return F;
}

namespace {

constexpr int kPotComps = 36; // 4 x (3 + 3 + 3) packed potential values

std::array<double, kPotComps> pack_potential(const GluedPotential& A) {
    std::array<double, kPotComps> r;
    int n = 0;
    for (int i = 0; i < 4; ++i) {
        for (int a = 0; a < 3; ++a) r[n++] = A.Ab[i].c[a];
        for (int a = 0; a < 3; ++a) r[n++] = A.Tb[i].c[a];
        for (int a = 0; a < 3; ++a) r[n++] = A.Af[i].c[a];
    }
    return r;
}

struct PotSlots {
    Su2<double> Ab[4], Af[4];
    SdRot Tb[4];
};

PotSlots unpack(const std::array<double, kPotComps>& r) {
    PotSlots s;
    int n = 0;
    for (int i = 0; i < 4; ++i) {
        for (int a = 0; a < 3; ++a) s.Ab[i].c[a] = r[n++];
        for (int a = 0; a < 3; ++a) s.Tb[i].c[a] = r[n++];
        for (int a = 0; a < 3; ++a) s.Af[i].c[a] = r[n++];
    }
    return s;
}

} // namespace

GluedCurvature glued_curvature_fd(const GluingTemplate& t, double eps,
                                  const std::array<double, 4>& x, const std::array<double, 4>& y,
                                  double h) {
    auto pot_at = [&](const std::array<double, 4>& xx, const std::array<double, 4>& yy) {
        return pack_potential(glued_potential(base_point_data(t, eps, xx), yy));
    };
    PotSlots A = unpack(pot_at(x, y));
    PotSlots dA[8]; // derivatives along the 4 base then 4 fiber coordinates
    for (int i = 0; i < 4; ++i) {
        std::function<std::array<double, kPotComps>(double)> fx = [&](double s) {
            auto xs = x;
            xs[i] += s;
            return pot_at(xs, y);
        };
        dA[i] = unpack(richardson<kPotComps>(fx, h));
        std::function<std::array<double, kPotComps>(double)> fy = [&](double s) {
            auto ys = y;
            ys[i] += s;
            return pot_at(x, ys);
        };
        dA[4 + i] = unpack(richardson<kPotComps>(fy, h));
    }
    GluedCurvature F;
    for (int k = 0; k < 4; ++k)
        for (int l = k + 1; l < 4; ++l)
            F.Fff[tangent_pair(k, l)] = dA[4 + k].Af[l] - dA[4 + l].Af[k] + bracket(A.Af[k], A.Af[l]);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            F.Fmix[i][j] = dA[i].Af[j] - dA[4 + j].Ab[i] + bracket(A.Ab[i], A.Af[j]);
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            int pr = tangent_pair(i, j);
            F.Fbb[pr] = dA[i].Ab[j] - dA[j].Ab[i] + bracket(A.Ab[i], A.Ab[j]);
            F.Tbb[pr] = dA[i].Tb[j] - dA[j].Tb[i] + sd_bracket(A.Tb[i], A.Tb[j]);
        }
    return F;
}

double curvature_max_abs_diff(const GluedCurvature& a, const GluedCurvature& b) {
    double m = 0;
    auto upd3 = [&](const std::array<double, 3>& x, const std::array<double, 3>& y) {
        for (int c = 0; c < 3; ++c) m = std::max(m, std::abs(x[c] - y[c]));
    };
    for (int p = 0; p < 6; ++p) {
        upd3(a.Fff[p].c, b.Fff[p].c);
        upd3(a.Fbb[p].c, b.Fbb[p].c);
        upd3(a.Tbb[p].c, b.Tbb[p].c);
    }
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) upd3(a.Fmix[i][j].c, b.Fmix[i][j].c);
    return m;
}

// ---------------------------------------------------------------------------
// Residual extraction.
// ---------------------------------------------------------------------------

namespace {

// Decoded positive-basis monomial tables: for each basis element, four terms
// (component kind, indices, sign).
struct PlusTerm {
    int kind; // 0 = base pair, 1 = fiber pair, 2 = mixed
    int i, j; // pair index arguments
    double s;
};

const std::array<std::array<PlusTerm, 4>, 7>& plus_terms() {
    static const auto T = [] {
        std::array<std::array<PlusTerm, 4>, 7> t{};
        const auto& pb = plus_basis<double>();
        for (int a = 0; a < 7; ++a) {
            int n = 0;
            for (auto& [m, coef] : pb[a].c) {
                int lo = std::countr_zero(unsigned(m));
                int hi = 31 - std::countl_zero(unsigned(m));
                PlusTerm pt;
                pt.s = coef;
                if (hi < 4) {
                    pt.kind = 0;
                    pt.i = tangent_pair(lo, hi);
                    pt.j = 0;
                } else if (lo >= 4) {
                    pt.kind = 1;
                    pt.i = tangent_pair(lo - 4, hi - 4);
                    pt.j = 0;
                } else {
                    pt.kind = 2;
                    pt.i = lo;
                    pt.j = hi - 4;
                }
                t[a][n++] = pt;
            }
            if (n != 4) throw std::logic_error("plus_terms: basis element without 4 monomials");
        }
        return t;
    }();
    return T;
}

} // namespace

ResidualPlus asd_residual(const GluedCurvature& F) {
    ResidualPlus r;
    const auto& T = plus_terms();
    for (int a = 0; a < 7; ++a) {
        Su2<double> accA;
        SdRot accT;
        for (const auto& pt : T[a]) {
            switch (pt.kind) {
                case 0:
                    accA += F.Fbb[pt.i] * pt.s;
                    accT = accT + F.Tbb[pt.i] * pt.s;
                    break;
                case 1:
                    accA += F.Fff[pt.i] * pt.s;
                    break;
                default:
                    accA += F.Fmix[pt.i][pt.j] * pt.s;
            }
        }
        // residual coordinate against q_a = p_a/2 is 2 <F, p_a>
        r.A[a] = accA * 2.0;
        r.T[a] = accT * 2.0;
    }
    return r;
}

LieForm<double> curvature_lieform(const GluedCurvature& F) {
    LieForm<double> f(2);
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            f.add(Mask((1u << i) | (1u << j)), F.Fbb[tangent_pair(i, j)]);
            f.add(Mask((1u << (4 + i)) | (1u << (4 + j))), F.Fff[tangent_pair(i, j)]);
        }
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) f.add(Mask((1u << i) | (1u << (4 + j))), F.Fmix[i][j]);
    return f;
}

LieForm<double> asd_residual_general(const LieForm<double>& F, const Form<double>& Omega) {
    return F + hodge(wedge(Omega, F));
}

// ---------------------------------------------------------------------------
// Field-level operations.
// ---------------------------------------------------------------------------

PointEval residual_evaluator(const GluingData& g, const ProductGrid& grid) {
    for (int a = 0; a < 4; ++a)
        if (grid.dims[a] != g.base->dims[a])
            throw std::invalid_argument("residual_evaluator: base grid shape mismatch");
    struct Cache {
        std::int64_t key = -1;
        BasePointData d;
    };
    auto cache = std::make_shared<Cache>();
    const GluingData* gp = &g;
    const ProductGrid* gr = &grid;
    return [cache, gp, gr](std::int64_t, const std::array<int, 8>& ix, double* out) {
        std::int64_t bkey = gp->base_index(ix);
        if (cache->key != bkey) {
            cache->d = base_point_data(*gp, bkey);
            cache->key = bkey;
        }
        std::array<double, 4> y{};
        for (int a = 0; a < 4; ++a) y[a] = gr->ax[4 + a].x[ix[4 + a]];
        ResidualPlus r = asd_residual(glued_curvature(cache->d, y));
        int n = 0;
        for (int a = 0; a < 7; ++a)
            for (int c = 0; c < 3; ++c) out[n++] = r.A[a].c[c];
        for (int a = 0; a < 7; ++a)
            for (int c = 0; c < 3; ++c) out[n++] = r.T[a].c[c];
    };
}

std::vector<ResidualSweepResult> residual_sweep(const GluingTemplate& t, const ProductGrid& grid,
                                                const std::vector<double>& epsilons, double nu,
                                                double gamma, std::uint64_t seed, int long_pairs) {
    ProductGrid base = make_base_grid({grid.dims[0], grid.dims[1], grid.dims[2], grid.dims[3]});
    std::vector<ResidualSweepResult> out;
    for (double eps : epsilons) {
        GluingData g = GluingData::sample(t, base, eps);
        PointEval ev = residual_evaluator(g, grid);
        HolderResult n = weighted_holder_norm(grid, kResidualComps, ev, nu, gamma, eps, seed, long_pairs);
        out.push_back({eps, n});
    }
    return out;
}

double cutoff_profile(double r, double r_in, double r_out) {
    if (!(r_in > 0 && r_out > r_in)) throw std::invalid_argument("cutoff_profile: need 0 < r_in < r_out");
    if (r <= r_in) return 1.0;
    if (r >= r_out) return 0.0;
    return std::log(r_out / r) / std::log(r_out / r_in);
}

double cutoff_profile_deriv(double r, double r_in, double r_out) {
    if (!(r_in > 0 && r_out > r_in)) throw std::invalid_argument("cutoff_profile: need 0 < r_in < r_out");
    if (r <= r_in || r >= r_out) return 0.0;
    return -1.0 / (r * std::log(r_out / r_in));
}

void cutoff_extend(Field& pot, double r_in, double r_out) {
    const ProductGrid& g = *pot.g;
    std::array<int, 8> ix{};
    for (std::int64_t p = 0; p < g.npoints; ++p) {
        double eta = cutoff_profile(g.fiber_abs(ix), r_in, r_out);
        if (eta != 1.0) {
            double* pp = pot.at(p);
            for (int c = 0; c < pot.nc; ++c) pp[c] *= eta;
        }
        for (int a = 7; a >= 0; --a) {
            if (++ix[a] < g.dims[a]) break;
            ix[a] = 0;
        }
    }
}

} // namespace cgw
