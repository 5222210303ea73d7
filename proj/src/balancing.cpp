#include "cgw/balancing.hpp"

#include <cmath>
#include <stdexcept>

#include "cgw/instanton.hpp"
#include "cgw/norms.hpp" // splitmix64

namespace cgw {

namespace {

// ---------------------------------------------------------------------------
// Exact-rational kernel bases by row reduction.
// ---------------------------------------------------------------------------

using RVec = std::vector<Rational>;
using RMat = std::vector<RVec>;

// Basis of the null space of A (rows = constraints, cols = unknowns).
RMat null_space(RMat A, int ncols) {
    const int nrows = int(A.size());
    std::vector<int> pivot_col;
    int r = 0;
    for (int c = 0; c < ncols && r < nrows; ++c) {
        int sel = -1;
        for (int i = r; i < nrows; ++i)
            if (A[i][c] != 0) { sel = i; break; }
        if (sel < 0) continue;
        std::swap(A[r], A[sel]);
        Rational inv = Rational(1) / A[r][c];
        for (int j = c; j < ncols; ++j) A[r][j] *= inv;
        for (int i = 0; i < nrows; ++i) {
            if (i == r || A[i][c] == 0) continue;
            Rational f = A[i][c];
            for (int j = c; j < ncols; ++j) A[i][j] -= f * A[r][j];
        }
        pivot_col.push_back(c);
        ++r;
    }
    std::vector<bool> is_pivot(ncols, false);
    for (int c : pivot_col) is_pivot[c] = true;
    RMat basis;
    for (int c = 0; c < ncols; ++c) {
        if (is_pivot[c]) continue;
        RVec v(ncols, Rational(0));
        v[c] = 1;
        for (int i = 0; i < r; ++i) v[pivot_col[i]] = -A[i][c];
        basis.push_back(std::move(v));
    }
    return basis;
}

int rand_small(std::uint64_t& st, int bound) { // uniform in [-bound, bound]
    return int(splitmix64(st) % std::uint64_t(2 * bound + 1)) - bound;
}

// Index of the symmetric pair (k, i), k <= i, in 0..9.
int sym_index(int k, int i) {
    if (k > i) std::swap(k, i);
    static const int T[4][4] = {{0, 1, 2, 3}, {1, 4, 5, 6}, {2, 5, 7, 8}, {3, 6, 8, 9}};
    return T[k][i];
}

// Unknown layout for the Cayley kernel: 10 symmetric pairs x 4 normal indices.
int h_unknown(int k, int i, int j) { return 4 * sym_index(k, i) + j; }

// The four constraint families as signed index tables: family f is
// sum_i sgn[f][i] * h(k, i, perm[f][i]) = 0 for every k.
const int kCayleyPerm[4][4] = {{0, 1, 2, 3}, {1, 0, 3, 2}, {2, 3, 0, 1}, {3, 2, 1, 0}};
const int kCayleySgn[4][4] = {{+1, +1, +1, +1}, {+1, -1, -1, +1}, {+1, +1, -1, -1}, {+1, -1, +1, -1}};

const RMat& cayley_kernel_basis() {
    static const RMat B = [] {
        RMat A(16, RVec(40, Rational(0)));
        int row = 0;
        for (int f = 0; f < 4; ++f)
            for (int k = 0; k < 4; ++k, ++row)
                for (int i = 0; i < 4; ++i)
                    A[row][h_unknown(k, i, kCayleyPerm[f][i])] += kCayleySgn[f][i];
        return null_space(std::move(A), 40);
    }();
    return B;
}

// Pair-coefficient table of the negative eigenbasis: W[A][p] is the e-pair-p
// coefficient of the A-th basis 2-form.
const std::array<std::array<Rational, 28>, 21>& minus_pair_table() {
    static const auto W = [] {
        std::array<std::array<Rational, 28>, 21> w{};
        const auto& B = minus_basis<Rational>();
        for (int A = 0; A < 21; ++A)
            for (int p = 0; p < 28; ++p) {
                auto [mu, nu] = pair_table()[p];
                w[A][p] = B[A].coeff(Mask((1u << mu) | (1u << nu)));
            }
        return w;
    }();
    return W;
}

// Unknowns of the curvature kernel: symmetric 21 x 21 coefficient matrix
// M_{A<=B}, 231 entries.
int m_unknown(int A, int B) {
    if (A > B) std::swap(A, B);
    return A * 21 - A * (A - 1) / 2 + (B - A);
}

// Kernel of the first Bianchi identity inside the symmetric square of the
// negative eigenspace.
const RMat& minus_curvature_basis() {
    static const RMat K = [] {
        const auto& W = minus_pair_table();
        auto wp = [&](int A, int a, int b) { // signed pair coefficient, any order
            if (a == b) return Rational(0);
            return a < b ? W[A][pair_index(a, b)] : Rational(-W[A][pair_index(b, a)]);
        };
        RMat C;
        C.reserve(70);
        for (int a = 0; a < 8; ++a)
            for (int b = a + 1; b < 8; ++b)
                for (int c = b + 1; c < 8; ++c)
                    for (int d = c + 1; d < 8; ++d) {
                        RVec row(231, Rational(0));
                        for (int A = 0; A < 21; ++A)
                            for (int B = 0; B < 21; ++B) {
                                Rational coef = wp(A, a, b) * wp(B, c, d) -
                                                wp(A, a, c) * wp(B, b, d) +
                                                wp(A, a, d) * wp(B, b, c);
                                if (coef != 0) row[m_unknown(A, B)] += coef;
                            }
                        C.push_back(std::move(row));
                    }
        return null_space(std::move(C), 231);
    }();
    return K;
}

// Assembles the dense pair matrix r = W^T M W from a symmetric coefficient
// matrix over the negative eigenbasis.
AmbientCurvature<Rational> assemble_from_M(const std::array<std::array<Rational, 21>, 21>& M) {
    const auto& W = minus_pair_table();
    std::array<std::array<Rational, 28>, 21> T{}; // T = M W
    for (int A = 0; A < 21; ++A)
        for (int B = 0; B < 21; ++B) {
            if (M[A][B] == 0) continue;
            for (int p = 0; p < 28; ++p)
                if (W[B][p] != 0) T[A][p] += M[A][B] * W[B][p];
        }
    AmbientCurvature<Rational> R;
    for (int p = 0; p < 28; ++p)
        for (int A = 0; A < 21; ++A) {
            if (W[A][p] == 0) continue;
            for (int q = 0; q < 28; ++q)
                if (T[A][q] != 0) R.r[p][q] += W[A][p] * T[A][q];
        }
    return R;
}

// Six-E-term tables of the four aggregate displays (0-based indices):
// entry = {i, j, k, l} meaning E(e_i, e_j, e_k-perp, e_l-perp).
const int kAggregate[4][6][4] = {
    {{0, 1, 0, 1}, {2, 3, 0, 1}, {0, 2, 0, 2}, {3, 1, 0, 2}, {0, 3, 0, 3}, {1, 2, 0, 3}},
    {{1, 0, 1, 0}, {3, 2, 1, 0}, {2, 0, 1, 3}, {1, 3, 1, 3}, {0, 3, 1, 2}, {1, 2, 1, 2}},
    {{0, 1, 2, 3}, {2, 3, 2, 3}, {2, 0, 2, 0}, {1, 3, 2, 0}, {3, 0, 2, 1}, {2, 1, 2, 1}},
    {{1, 0, 3, 2}, {3, 2, 3, 2}, {0, 2, 3, 1}, {3, 1, 3, 1}, {3, 0, 3, 0}, {2, 1, 3, 0}},
};

void check_base_only(const Field& f, int nc, const char* who) {
    if (f.nc != nc) throw std::invalid_argument(std::string(who) + ": wrong component count");
    for (int a = 4; a < 8; ++a)
        if (f.g->dims[a] != 1)
            throw std::invalid_argument(std::string(who) + ": expected a base-only grid");
}

} // namespace

// ---------------------------------------------------------------------------
// Identity suite.
// ---------------------------------------------------------------------------

template <class S>
std::array<std::array<S, 4>, 4> cayley_constraint_residual(const SecondFundamentalForm<S>& h) {
    std::array<std::array<S, 4>, 4> out{};
    for (int f = 0; f < 4; ++f)
        for (int k = 0; k < 4; ++k) {
            S acc(0);
            for (int i = 0; i < 4; ++i)
                acc += S(kCayleySgn[f][i]) * h.h[k][i][kCayleyPerm[f][i]];
            out[f][k] = acc;
        }
    return out;
}

int cayley_kernel_dimension() { return int(cayley_kernel_basis().size()); }

SecondFundamentalForm<Rational> random_cayley_h(std::uint64_t seed) {
    const auto& B = cayley_kernel_basis();
    std::uint64_t st = seed ? seed : 0x9e3779b97f4a7c15ull;
    RVec x(40, Rational(0));
    for (const auto& b : B) {
        int c = rand_small(st, 4);
        if (c == 0) continue;
        for (int j = 0; j < 40; ++j)
            if (b[j] != 0) x[j] += c * b[j];
    }
    SecondFundamentalForm<Rational> h;
    for (int k = 0; k < 4; ++k)
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) h.h[k][i][j] = x[h_unknown(k, i, j)];
    return h;
}

int minus_curvature_dimension() { return int(minus_curvature_basis().size()); }

AmbientCurvature<Rational> random_minus_curvature(std::uint64_t seed) {
    const auto& K = minus_curvature_basis();
    std::uint64_t st = seed ? seed : 0x2545f4914f6cdd1dull;
    std::array<std::array<Rational, 21>, 21> M{};
    // sparse combination: a handful of kernel directions with small weights
    const int picks = 14;
    for (int n = 0; n < picks; ++n) {
        const RVec& b = K[splitmix64(st) % K.size()];
        int c = rand_small(st, 3);
        if (c == 0) continue;
        for (int A = 0; A < 21; ++A)
            for (int B = A; B < 21; ++B) {
                const Rational& v = b[m_unknown(A, B)];
                if (v == 0) continue;
                M[A][B] += c * v;
                if (A != B) M[B][A] += c * v;
            }
    }
    return assemble_from_M(M);
}

AmbientCurvature<Rational> plus_violating_curvature(std::uint64_t seed) {
    const auto& pb = plus_basis<Rational>();
    const Form<Rational>& phi = pb[int(seed % 7)];
    auto wp = [&](int a, int b) { // signed pair coefficient, any order
        if (a == b) return Rational(0);
        Mask m = Mask((1u << std::min(a, b)) | (1u << std::max(a, b)));
        Rational v = phi.coeff(m);
        return a < b ? v : Rational(-v);
    };
    auto R0 = [&](int a, int b, int c, int d) { return wp(a, b) * wp(c, d); };
    AmbientCurvature<Rational> R;
    for (int p = 0; p < 28; ++p)
        for (int q = 0; q < 28; ++q) {
            auto [a, b] = pair_table()[p];
            auto [c, d] = pair_table()[q];
            // subtract the totally antisymmetric part to restore Bianchi
            Rational t = (R0(a, b, c, d) + R0(a, c, d, b) + R0(a, d, b, c)) / 3;
            R.r[p][q] = R0(a, b, c, d) - t;
        }
    return R;
}

template <class S>
S curvature_invariant_residual(const AmbientCurvature<S>& R) {
    S worst(0);
    auto upd = [&](const S& v) {
        S a = scalar_abs(v);
        if (worst < a) worst = a;
    };
    // pair symmetry
    for (int p = 0; p < 28; ++p)
        for (int q = 0; q < 28; ++q) upd(R.r[p][q] - R.r[q][p]);
    // positive projection annihilates both slots
    const auto& pb = plus_basis<S>();
    for (int a = 0; a < 7; ++a)
        for (int q = 0; q < 28; ++q) {
            S acc1(0), acc2(0);
            for (int p = 0; p < 28; ++p) {
                auto [mu, nu] = pair_table()[p];
                S base = pb[a].coeff(Mask((1u << mu) | (1u << nu)));
                if (base == S(0)) continue;
                acc1 += base * R.r[p][q];
                acc2 += base * R.r[q][p];
            }
            upd(acc1);
            upd(acc2);
        }
    // first Bianchi identity
    for (int a = 0; a < 8; ++a)
        for (int b = a + 1; b < 8; ++b)
            for (int c = b + 1; c < 8; ++c)
                for (int d = c + 1; d < 8; ++d)
                    upd(R.at(a, b, c, d) + R.at(a, c, d, b) + R.at(a, d, b, c));
    return worst;
}

template <class S>
NormalCurvature<S> gauss_E(const SecondFundamentalForm<S>& h, const AmbientCurvature<S>& R) {
    NormalCurvature<S> E;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            for (int k = 0; k < 4; ++k)
                for (int l = 0; l < 4; ++l) {
                    S acc = R.at(i, j, 4 + k, 4 + l);
                    for (int m = 0; m < 4; ++m)
                        acc -= h.h[m][i][k] * h.h[m][j][l] - h.h[m][i][l] * h.h[m][j][k];
                    E.e[i][j][k][l] = acc;
                }
    return E;
}

template <class S>
std::array<S, 4> aggregate_identity_residual(const SecondFundamentalForm<S>& h,
                                             const AmbientCurvature<S>& R) {
    NormalCurvature<S> E = gauss_E(h, R);
    std::array<S, 4> out{};
    for (int k = 0; k < 4; ++k) {
        S lhs(0);
        for (int t = 0; t < 6; ++t) {
            const int* e = kAggregate[k][t];
            lhs += E.e[e[0]][e[1]][e[2]][e[3]];
        }
        S rhs(0);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) rhs += h.h[i][j][k] * h.h[i][j][k];
        for (int i = 0; i < 4; ++i) rhs += R.at(i, 4 + k, 4 + k, i);
        out[k] = lhs - rhs;
    }
    return out;
}

template std::array<std::array<Rational, 4>, 4>
cayley_constraint_residual(const SecondFundamentalForm<Rational>&);
template std::array<std::array<double, 4>, 4>
cayley_constraint_residual(const SecondFundamentalForm<double>&);
template Rational curvature_invariant_residual(const AmbientCurvature<Rational>&);
template double curvature_invariant_residual(const AmbientCurvature<double>&);
template NormalCurvature<Rational> gauss_E(const SecondFundamentalForm<Rational>&,
                                           const AmbientCurvature<Rational>&);
template NormalCurvature<double> gauss_E(const SecondFundamentalForm<double>&,
                                         const AmbientCurvature<double>&);
template std::array<Rational, 4> aggregate_identity_residual(const SecondFundamentalForm<Rational>&,
                                                             const AmbientCurvature<Rational>&);
template std::array<double, 4> aggregate_identity_residual(const SecondFundamentalForm<double>&,
                                                           const AmbientCurvature<double>&);

// ---------------------------------------------------------------------------
// Constant-coefficient consistency on the base torus.
// ---------------------------------------------------------------------------

Field first_order_v_residual(const Field& v) {
    check_base_only(v, 4, "first_order_v_residual");
    const ProductGrid& g = *v.g;
    std::array<Field, 4> D;
    for (int i = 0; i < 4; ++i) D[i] = fd_partial(v, i);
    Field out(g, 4);
    for (std::int64_t p = 0; p < g.npoints; ++p) {
        double* o = out.at(p);
        for (int f = 0; f < 4; ++f) {
            double acc = 0;
            for (int i = 0; i < 4; ++i) acc += kCayleySgn[f][i] * D[i].at(p)[kCayleyPerm[f][i]];
            o[f] = acc;
        }
    }
    return out;
}

Field jacobi_residual(const Field& v, const SecondFundamentalForm<double>& h,
                      const AmbientCurvature<double>& R) {
    check_base_only(v, 4, "jacobi_residual");
    const ProductGrid& g = *v.g;
    double M[4][4]; // zeroth-order coefficient matrix
    for (int k = 0; k < 4; ++k)
        for (int m = 0; m < 4; ++m) {
            double acc = 0;
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j) acc += h.h[i][j][k] * h.h[i][j][m];
            for (int i = 0; i < 4; ++i) acc += R.at(i, 4 + k, 4 + m, i);
            M[k][m] = acc;
        }
    Field out(g, 4);
    for (int i = 0; i < 4; ++i) {
        Field dd = fd_partial(fd_partial(v, i), i);
        for (std::int64_t p = 0; p < g.npoints; ++p)
            for (int k = 0; k < 4; ++k) out.at(p)[k] += dd.at(p)[k];
    }
    for (std::int64_t p = 0; p < g.npoints; ++p) {
        const double* vv = v.at(p);
        double* o = out.at(p);
        for (int k = 0; k < 4; ++k)
            for (int m = 0; m < 4; ++m) o[k] += M[k][m] * vv[m];
    }
    return out;
}

namespace {

SdRot th_at(const Field& th, std::int64_t p, int i) {
    return SdRot(th.at(p)[3 * i + 0], th.at(p)[3 * i + 1], th.at(p)[3 * i + 2]);
}

} // namespace

Field first_order_lambda_theta_residual(const Field& lam, const Field& th) {
    check_base_only(lam, 1, "first_order_lambda_theta_residual");
    check_base_only(th, 12, "first_order_lambda_theta_residual");
    const ProductGrid& g = *lam.g;
    std::array<Field, 4> Dl;
    for (int i = 0; i < 4; ++i) Dl[i] = fd_partial(lam, i);
    Field out(g, 4);
    for (std::int64_t p = 0; p < g.npoints; ++p) {
        double linv = 1.0 / lam.at(p)[0];
        std::array<SdRot, 4> t;
        for (int i = 0; i < 4; ++i) t[i] = th_at(th, p, i);
        // the four displays written out explicitly (0-based directions)
        double* o = out.at(p);
        auto e = [&](int i, int k, int l) { return t[i].entry(k, l); };
        o[0] = 2 * linv * Dl[0].at(p)[0] + (e(1, 1, 0) + e(1, 3, 2)) + (e(2, 2, 0) + e(2, 1, 3)) +
               (e(3, 3, 0) + e(3, 2, 1));
        o[1] = (e(0, 1, 0) + e(0, 3, 2)) - 2 * linv * Dl[1].at(p)[0] - (e(2, 3, 0) + e(2, 2, 1)) +
               (e(3, 2, 0) + e(3, 1, 3));
        o[2] = (e(0, 2, 0) + e(0, 1, 3)) + (e(1, 3, 0) + e(1, 2, 1)) - 2 * linv * Dl[2].at(p)[0] -
               (e(3, 1, 0) + e(3, 3, 2));
        o[3] = (e(0, 3, 0) + e(0, 2, 1)) - (e(1, 2, 0) + e(1, 1, 3)) + (e(2, 1, 0) + e(2, 3, 2)) -
               2 * linv * Dl[3].at(p)[0];
    }
    return out;
}

std::pair<Field, Field> lambda_theta_residuals(const Field& lam, const Field& th,
                                               const SecondFundamentalForm<double>& h,
                                               const AmbientCurvature<double>& R) {
    check_base_only(lam, 1, "lambda_theta_residuals");
    check_base_only(th, 12, "lambda_theta_residuals");
    const ProductGrid& g = *lam.g;
    double geom = 0; // sum h h + sum R
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            for (int k = 0; k < 4; ++k) geom += h.h[i][j][k] * h.h[i][j][k];
    for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 4; ++k) geom += R.at(i, 4 + k, 4 + k, i);

    Field lap(g, 1);
    for (int i = 0; i < 4; ++i) {
        Field dd = fd_partial(fd_partial(lam, i), i);
        for (std::int64_t p = 0; p < g.npoints; ++p) lap.at(p)[0] += dd.at(p)[0];
    }
    std::array<Field, 4> Dl, Dth;
    for (int i = 0; i < 4; ++i) {
        Dl[i] = fd_partial(lam, i);
        Dth[i] = fd_partial(th, i);
    }
    Field r1(g, 1), r2(g, 3);
    for (std::int64_t p = 0; p < g.npoints; ++p) {
        double linv = 1.0 / lam.at(p)[0];
        double th2 = 0;
        for (int i = 0; i < 4; ++i) th2 += th_at(th, p, i).frob2();
        r1.at(p)[0] = 4 * linv * lap.at(p)[0] - th2 + geom;
        for (int a = 0; a < 3; ++a) {
            double acc = 0;
            for (int i = 0; i < 4; ++i)
                acc += Dth[i].at(p)[3 * i + a] + 2 * linv * Dl[i].at(p)[0] * th.at(p)[3 * i + a];
            r2.at(p)[a] = acc;
        }
    }
    return {std::move(r1), std::move(r2)};
}

// ---------------------------------------------------------------------------
// Leading term and Xi.
// ---------------------------------------------------------------------------

std::vector<MomentPair> leading_term(const GluingData& g, const AlphaForm& alpha) {
    std::vector<MomentPair> out(size_t(g.base->npoints));
    for (std::int64_t p = 0; p < g.base->npoints; ++p) {
        BasePointData d = base_point_data(g, p);
        VTensor<double> Tv{};
        WTensor<double> Tw{};
        for (int i = 0; i < 4; ++i)
            for (int k = 0; k < 4; ++k) {
                double a = d.dv[i][k];
                for (int l = 0; l < 4; ++l) a += alpha.mixed(i, k, l) * d.v[l];
                Tv[i][k] = a;
                for (int l = 0; l < 4; ++l)
                    Tw[i][k][l] = d.dloglam[i] * (k == l ? 1.0 : 0.0) + d.theta[i].entry(k, l) +
                                  alpha.mixed(i, k, l);
            }
        VElem<double> s = proj_V(Tv);
        WElem<double> t = proj_W(Tw);
        MomentPair& m = out[size_t(p)];
        for (int b = 0; b < 4; ++b) {
            m.s[b] = 4 * s[b];
            m.t[b] = 4 * t[b];
        }
    }
    return out;
}

Field residual_plus_field(const GluingData& g, const ProductGrid& grid, const AlphaForm& alpha) {
    for (int a = 0; a < 4; ++a)
        if (grid.dims[a] != g.base->dims[a])
            throw std::invalid_argument("residual_plus_field: base grid shape mismatch");
    if (alpha.is_zero()) return asd_residual_field(g, grid);
    Field out(grid, kPlusComps);
    const auto& mono = plus_monomials();
    std::array<int, 8> ix{};
    for (ix[0] = 0; ix[0] < grid.dims[0]; ++ix[0])
        for (ix[1] = 0; ix[1] < grid.dims[1]; ++ix[1])
            for (ix[2] = 0; ix[2] < grid.dims[2]; ++ix[2])
                for (ix[3] = 0; ix[3] < grid.dims[3]; ++ix[3]) {
                    BasePointData d = base_point_data(g, g.base_index(ix));
                    std::array<int, 8> jx = ix;
                    for (jx[4] = 0; jx[4] < grid.dims[4]; ++jx[4])
                        for (jx[5] = 0; jx[5] < grid.dims[5]; ++jx[5])
                            for (jx[6] = 0; jx[6] < grid.dims[6]; ++jx[6])
                                for (jx[7] = 0; jx[7] < grid.dims[7]; ++jx[7]) {
                                    std::array<double, 4> y{};
                                    for (int a = 0; a < 4; ++a) y[a] = grid.coord(4 + a, jx[4 + a]);
                                    GluedCurvature F = glued_curvature(d, y);
                                    LieForm<double> Lf = curvature_lieform(F);
                                    LieForm<double> res =
                                        asd_residual_general(Lf, alpha.omega_at(y));
                                    // coordinates against the orthonormal
                                    // positive basis (the positive part; the
                                    // perturbed residual acquires an O(|y|^2)
                                    // negative part that the moment pairing
                                    // never sees)
                                    double* po = out.at(grid.index(jx));
                                    for (int a = 0; a < 7; ++a) {
                                        Su2<double> acc;
                                        for (const auto& t : mono[a]) {
                                            Mask m = Mask((1u << t.mu) | (1u << t.nu));
                                            acc += res.coeff(m) * t.s;
                                        }
                                        for (int c = 0; c < 3; ++c) po[3 * a + c] = 0.5 * acc.c[c];
                                    }
                                }
                }
    return out;
}

std::vector<MomentPair> xi_epsilon(const GluingData& g, const ProductGrid& grid,
                                   const AlphaForm& alpha) {
    Field psi = residual_plus_field(g, grid, alpha);
    std::vector<MomentPair> out(size_t(g.base->npoints));
    for (std::int64_t p = 0; p < g.base->npoints; ++p) {
        auto ix = g.base->unindex(p);
        out[size_t(p)] = moment_pair(psi, {ix[0], ix[1], ix[2], ix[3]}, g);
    }
    return out;
}

double moment_pair_distance(const std::vector<MomentPair>& a, const std::vector<MomentPair>& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("moment_pair_distance: size mismatch");
    double worst = 0;
    for (size_t p = 0; p < a.size(); ++p) {
        double s = 0;
        for (int i = 0; i < 4; ++i) {
            double ds = a[p].s[i] - b[p].s[i], dt = a[p].t[i] - b[p].t[i];
            s += ds * ds + dt * dt;
        }
        worst = std::max(worst, std::sqrt(s));
    }
    return worst;
}

double moment_pair_max(const std::vector<MomentPair>& a) {
    double worst = 0;
    for (const auto& m : a) {
        double s = 0;
        for (int i = 0; i < 4; ++i) s += m.s[i] * m.s[i] + m.t[i] * m.t[i];
        worst = std::max(worst, std::sqrt(s));
    }
    return worst;
}

} // namespace cgw
