// The flat Spin(7) structure on R^8 adapted to the Cayley coordinate plane:
// the 4-form Omega0, the 7/21 splitting of 2-forms, the calibration pairing,
// and the V / W spaces of tangent-normal tensors with their projections.
#pragma once

#include <vector>

#include "cgw/exterior.hpp"
#include "cgw/rational.hpp"

namespace cgw {

// Index of an ordered pair (mu < nu) in the 28-component layout of 2-forms.
inline int pair_index(int mu, int nu) {
    // pairs enumerated as (0,1),(0,2),...,(0,7),(1,2),...,(6,7)
    return mu * 8 - mu * (mu + 1) / 2 + (nu - mu - 1);
}

inline const std::array<std::array<int, 2>, 28>& pair_table() {
    static const auto T = [] {
        std::array<std::array<int, 2>, 28> t{};
        int n = 0;
        for (int mu = 0; mu < 8; ++mu)
            for (int nu = mu + 1; nu < 8; ++nu) t[n++] = {mu, nu};
        return t;
    }();
    return T;
}

template <class S>
const Form<S>& omega0() {
    static const Form<S> O = [] {
        Form<S> w(4);
        auto put = [&](int a, int b, int c, int d, int sgn) {
            Mask m = Mask((1u << a) | (1u << b) | (1u << c) | (1u << d));
            w.add(m, S(sgn));
        };
        // tangent axes 0..3, normal axes 4..7
        put(0, 1, 4, 5, -1); put(0, 1, 6, 7, -1); put(2, 3, 4, 5, -1); put(2, 3, 6, 7, -1);
        put(0, 2, 5, 7, +1); put(0, 2, 4, 6, -1); put(1, 3, 5, 7, -1); put(1, 3, 4, 6, +1);
        put(0, 3, 5, 6, -1); put(0, 3, 4, 7, -1); put(1, 2, 5, 6, -1); put(1, 2, 4, 7, -1);
        put(0, 1, 2, 3, +1); put(4, 5, 6, 7, +1);
        return w;
    }();
    return O;
}

// The 7 spanning 2-forms of the positive eigenspace; each has squared norm 4.
template <class S>
const std::array<Form<S>, 7>& plus_basis() {
    static const auto B = [] {
        std::array<Form<S>, 7> b;
        auto mk = [](std::initializer_list<std::array<int, 3>> terms) {
            Form<S> f(2);
            for (auto& t : terms) f.add(Mask((1u << t[0]) | (1u << t[1])), S(t[2]));
            return f;
        };
        b[0] = mk({{0, 1, +1}, {2, 3, +1}, {4, 5, -1}, {6, 7, -1}});
        b[1] = mk({{0, 2, +1}, {1, 3, -1}, {4, 6, -1}, {5, 7, +1}});
        b[2] = mk({{0, 3, +1}, {1, 2, +1}, {4, 7, -1}, {5, 6, -1}});
        b[3] = mk({{0, 4, +1}, {1, 5, +1}, {2, 6, +1}, {3, 7, +1}});
        b[4] = mk({{0, 5, +1}, {1, 4, -1}, {2, 7, -1}, {3, 6, +1}});
        b[5] = mk({{0, 6, +1}, {1, 7, +1}, {2, 4, -1}, {3, 5, -1}});
        b[6] = mk({{0, 7, +1}, {1, 6, -1}, {2, 5, +1}, {3, 4, -1}});
        return b;
    }();
    return B;
}

template <class S>
Form<S> project_plus(const Form<S>& phi) {
    if (phi.grade != 2) throw std::invalid_argument("project_plus: expects a 2-form");
    Form<S> w = hodge(wedge(omega0<S>(), phi));
    Form<S> r = phi + w;
    // 1/4 (phi + *(Omega ^ phi))
    return r * (S(1) / S(4));
}

template <class S>
Form<S> project_minus(const Form<S>& phi) {
    if (phi.grade != 2) throw std::invalid_argument("project_minus: expects a 2-form");
    Form<S> w = hodge(wedge(omega0<S>(), phi));
    Form<S> r = phi * S(3) - w;
    return r * (S(1) / S(4));
}

template <class S>
LieForm<S> project_plus(const LieForm<S>& phi) {
    if (phi.grade != 2) throw std::invalid_argument("project_plus: expects a 2-form");
    LieForm<S> w = hodge(wedge(omega0<S>(), phi));
    return (phi + w) * (S(1) / S(4));
}

template <class S>
LieForm<S> project_minus(const LieForm<S>& phi) {
    if (phi.grade != 2) throw std::invalid_argument("project_minus: expects a 2-form");
    LieForm<S> w = hodge(wedge(omega0<S>(), phi));
    return (phi * S(3) - w) * (S(1) / S(4));
}

// Orthogonal (but not normalized) basis of the 21-dimensional negative
// eigenspace, obtained by exact Gram-Schmidt on the monomials' negative parts.
template <class S>
const std::vector<Form<S>>& minus_basis() {
    static const auto B = [] {
        std::vector<Form<S>> out;
        for (auto& [mu, nu] : pair_table()) {
            Form<S> mono(2);
            mono.add(Mask((1u << mu) | (1u << nu)), S(1));
            Form<S> cand = project_minus(mono);
            for (auto& prev : out) {
                S num = inner(cand, prev), den = inner(prev, prev);
                if (!(num == S(0))) cand -= prev * (num / den);
            }
            if (!cand.is_zero()) out.push_back(cand);
        }
        if (out.size() != 21) throw std::logic_error("minus_basis: wrong dimension");
        return out;
    }();
    return B;
}

// Calibration pairing Omega0(v1,v2,v3,v4).  Arguments must be orthonormal
// within 1e-10 (checked via double conversion for either scalar kind).
template <class S>
S calibration_value(const Vector8<S>& v1, const Vector8<S>& v2, const Vector8<S>& v3,
                    const Vector8<S>& v4, bool check_frame = true) {
    const std::array<const Vector8<S>*, 4> v{&v1, &v2, &v3, &v4};
    if (check_frame) {
        for (int a = 0; a < 4; ++a)
            for (int b = a; b < 4; ++b) {
                double dot = 0;
                for (int k = 0; k < 8; ++k) dot += to_double((*v[a])[k]) * to_double((*v[b])[k]);
                double want = (a == b) ? 1.0 : 0.0;
                if (std::abs(dot - want) > 1e-10)
                    throw std::invalid_argument("calibration_value: arguments not orthonormal");
            }
    }
    Form<S> w = wedge(wedge(flat(v1), flat(v2)), wedge(flat(v3), flat(v4)));
    return inner(omega0<S>(), w);
}

// ---------------------------------------------------------------------------
// V in E (x) E^perp and W in E (x) E^perp (x) E^perp.
// VTensor[i][k] is the coefficient of e_i (x) e_k^perp; WTensor[i][k][l] that
// of e_i (x) e_k^perp (x) e_l^perp.  Components of tensors in V / W against
// their bases use the unnormalized pairing (basis norms^2 are 4 and 16).
// ---------------------------------------------------------------------------

template <class S> using VTensor = std::array<std::array<S, 4>, 4>;
template <class S> using WTensor = std::array<std::array<std::array<S, 4>, 4>, 4>;
template <class S> using VElem = std::array<S, 4>; // coordinates in v_basis
template <class S> using WElem = std::array<S, 4>; // coordinates in w_basis

// Quaternionic pattern matrices shared by the V and W bases.
// vpat[q][i][k], q = 0..3 (identity followed by the three antisymmetric ones).
inline const int (&vw_patterns())[4][4][4] {
    static const int P[4][4][4] = {
        {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}},
        {{0, 1, 0, 0}, {-1, 0, 0, 0}, {0, 0, 0, -1}, {0, 0, 1, 0}},
        {{0, 0, 1, 0}, {0, 0, 0, 1}, {-1, 0, 0, 0}, {0, -1, 0, 0}},
        {{0, 0, 0, 1}, {0, 0, -1, 0}, {0, 1, 0, 0}, {-1, 0, 0, 0}},
    };
    return P;
}

template <class S>
const std::array<VTensor<S>, 4>& v_basis() {
    static const auto B = [] {
        std::array<VTensor<S>, 4> b{};
        const auto& P = vw_patterns();
        for (int q = 0; q < 4; ++q)
            for (int i = 0; i < 4; ++i)
                for (int k = 0; k < 4; ++k) b[q][i][k] = S(P[q][i][k]);
        return b;
    }();
    return B;
}

template <class S>
const std::array<WTensor<S>, 4>& w_basis() {
    static const auto B = [] {
        std::array<WTensor<S>, 4> b{};
        const auto& P = vw_patterns();
        (void)P;
        // Normal-block patterns Q[q][k][l] (coefficient of e_k^perp (x) e_l^perp):
        // identity plus the three self-dual antisymmetric quaternion patterns
        // appearing in the displayed basis.  Note these are NOT the V patterns:
        // the V patterns pair with the opposite (anti-self-dual) factor of so(4).
        static const int Q[4][4][4] = {
            {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}},
            {{0, -1, 0, 0}, {1, 0, 0, 0}, {0, 0, 0, -1}, {0, 0, 1, 0}},
            {{0, 0, -1, 0}, {0, 0, 0, 1}, {1, 0, 0, 0}, {0, -1, 0, 0}},
            {{0, 0, 0, -1}, {0, 0, -1, 0}, {0, 1, 0, 0}, {1, 0, 0, 0}},
        };
        // Assembly table: w_row[a][i] = signed pattern index (1-based) of the
        // e_i factor of basis element a; sign carried separately.
        static const int idx[4][4] = {{0, 1, 2, 3}, {1, 0, 3, 2}, {2, 3, 0, 1}, {3, 2, 1, 0}};
        static const int sgn[4][4] = {{+1, +1, +1, +1}, {+1, -1, -1, +1}, {+1, +1, -1, -1}, {+1, -1, +1, -1}};
        for (int a = 0; a < 4; ++a)
            for (int i = 0; i < 4; ++i)
                for (int k = 0; k < 4; ++k)
                    for (int l = 0; l < 4; ++l) b[a][i][k][l] = S(sgn[a][i] * Q[idx[a][i]][k][l]);
        return b;
    }();
    return B;
}

template <class S>
VElem<S> proj_V(const VTensor<S>& T) {
    const auto& B = v_basis<S>();
    VElem<S> r{S(0), S(0), S(0), S(0)};
    for (int a = 0; a < 4; ++a) {
        S acc(0);
        for (int i = 0; i < 4; ++i)
            for (int k = 0; k < 4; ++k)
                if (!(B[a][i][k] == S(0))) acc += B[a][i][k] * T[i][k];
        r[a] = acc / S(4);
    }
    return r;
}

template <class S>
WElem<S> proj_W(const WTensor<S>& T) {
    const auto& B = w_basis<S>();
    WElem<S> r{S(0), S(0), S(0), S(0)};
    for (int a = 0; a < 4; ++a) {
        S acc(0);
        for (int i = 0; i < 4; ++i)
            for (int k = 0; k < 4; ++k)
                for (int l = 0; l < 4; ++l)
                    if (!(B[a][i][k][l] == S(0))) acc += B[a][i][k][l] * T[i][k][l];
        r[a] = acc / S(16);
    }
    return r;
}

template <class S>
VTensor<S> v_embed(const VElem<S>& c) {
    const auto& B = v_basis<S>();
    VTensor<S> T{};
    for (int a = 0; a < 4; ++a)
        for (int i = 0; i < 4; ++i)
            for (int k = 0; k < 4; ++k) T[i][k] += c[a] * B[a][i][k];
    return T;
}

template <class S>
WTensor<S> w_embed(const WElem<S>& c) {
    const auto& B = w_basis<S>();
    WTensor<S> T{};
    for (int a = 0; a < 4; ++a)
        for (int i = 0; i < 4; ++i)
            for (int k = 0; k < 4; ++k)
                for (int l = 0; l < 4; ++l) T[i][k][l] += c[a] * B[a][i][k][l];
    return T;
}

// ---------------------------------------------------------------------------
// Identity sweeps used by the exact algebra gate.
// ---------------------------------------------------------------------------

// 2 P_+ ( e_k ^ (i_{e_l} phi) + e_l ^ (i_{e_k} phi) ) = delta_{kl} phi
// for every positive basis 2-form and all 64 (k,l) pairs.  Returns the number
// of failing cases (0 when the identity holds exactly).
template <class S>
int check_symmetrized_plus_projection() {
    int bad = 0;
    for (const auto& phi : plus_basis<S>()) {
        for (int k = 0; k < 8; ++k)
            for (int l = 0; l < 8; ++l) {
                Vector8<S> ek{}, el{};
                ek[k] = S(1);
                el[l] = S(1);
                Form<S> fk(1), fl(1);
                fk.add(Mask(1u << k), S(1));
                fl.add(Mask(1u << l), S(1));
                Form<S> t = wedge(fk, interior(el, phi)) + wedge(fl, interior(ek, phi));
                Form<S> lhs = project_plus(t) * S(2);
                Form<S> rhs = (k == l) ? phi : Form<S>(2);
                if (!((lhs - rhs).is_zero())) ++bad;
            }
    }
    return bad;
}

// For a curvature sample F with only normal-normal components (F[pair(k,l)]
// with k,l in the normal block), checks that
//   sum_{k,l} e_k ^ [F(e_k,e_l), i_{e_l} phi]
// stays in the positive eigenspace for every positive basis element.
// F is passed as the 6 components F(e_k^perp,e_l^perp), k<l, in pair order
// (12),(13),(14),(23),(24),(34).  Returns the number of failing cases.
template <class S>
int check_bracket_contraction_plus(const std::array<Su2<S>, 6>& F) {
    auto fval = [&](int k, int l) { // k,l in 0..3 (normal block), any order
        static const int pidx[4][4] = {{-1, 0, 1, 2}, {0, -1, 3, 4}, {1, 3, -1, 5}, {2, 4, 5, -1}};
        Su2<S> v = F[pidx[k][l]];
        return k < l ? v : -v;
    };
    int bad = 0;
    for (const auto& phi0 : plus_basis<S>()) {
        // promote to an su(2)-valued form on each su(2) axis to exercise the bracket
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
            if (!project_minus(acc).is_zero()) ++bad;
        }
    }
    return bad;
}

// ---------------------------------------------------------------------------
// Torsion coefficients of a nearly-parallel structure: a 1-form with values
// in the positive eigenspace, stored as 8 x 7 coordinates against the
// orthonormalized positive basis (plus_basis / 2).
// ---------------------------------------------------------------------------

struct AlphaForm {
    // coeff[d][a]: component of alpha(e_d) along plus_basis()[a] / 2
    std::array<std::array<double, 7>, 8> coeff{};

    bool is_zero() const {
        for (auto& row : coeff)
            for (double v : row)
                if (v != 0.0) return false;
        return true;
    }

    // alpha_{ik,l}: mixed (e_i ^ e_k^perp) component of alpha(e_l^perp),
    // i,k,l in 0..3.  Used by the leading-term assembly.
    double mixed(int i, int k, int l) const {
        const auto& pb = plus_basis<double>();
        double r = 0;
        Mask m = Mask((1u << i) | (1u << (4 + k)));
        for (int a = 3; a < 7; ++a) { // only the mixed basis elements contribute
            double base = pb[a].coeff(m);
            if (base != 0.0) r += coeff[4 + l][a] * 0.5 * base;
        }
        return r;
    }

    // 4-form Omega0 - sum_k i_{e_k} alpha(y) ^ i_{e_k} Omega0 at normal offset y,
    // the first-order model of a structure with torsion alpha.  In our Hodge
    // conventions *(sum_k i_{e_k} a ^ i_{e_k} Omega0 ^ F) = -4 sum_k i_{e_k} a
    // ^ i_{e_k} F on anti-self-dual F; the torsion term enters the model with
    // a minus sign so that alpha appears with positive sign in the leading
    // term of the residual moments (see leading_term).
    Form<double> omega_at(const std::array<double, 4>& y) const {
        Form<double> omega = omega0<double>();
        const auto& pb = plus_basis<double>();
        Form<double> ay(2);
        for (int l = 0; l < 4; ++l)
            if (y[l] != 0.0)
                for (int a = 0; a < 7; ++a)
                    if (coeff[4 + l][a] != 0.0) ay += pb[a] * (0.5 * coeff[4 + l][a] * y[l]);
        if (ay.is_zero()) return omega;
        for (int k = 0; k < 8; ++k) {
            Vector8<double> ek{};
            ek[k] = 1.0;
            omega -= wedge(interior(ek, ay), interior(ek, omega0<double>()));
        }
        return omega;
    }
};

} // namespace cgw
