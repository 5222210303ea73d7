// Exterior algebra on R^8 with an orthonormal frame e1..e4 (tangent block,
// axes 0..3) and e1p..e4p (normal block, axes 4..7), plus the su(2) coefficient
// algebra acting on the normal block by the quaternion table.
//
// Monomials are subsets of {0..7} stored as 8-bit masks; a Form is a sparse map
// mask -> coefficient with every key of the same popcount ("grade").  The
// orientation is fixed by e1^e2^e3^e4^e1p^e2p^e3p^e4p = +vol.
#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

namespace cgw {

using Mask = std::uint8_t;

struct MultiIndex {
    Mask bits = 0;

    int grade() const { return std::popcount(unsigned(bits)); }
    bool contains(int axis) const { return (bits >> axis) & 1u; }

    static std::string axis_name(int axis) {
        static const char* names[8] = {"e1", "e2", "e3", "e4", "e1p", "e2p", "e3p", "e4p"};
        return names[axis];
    }
    std::string str() const {
        if (bits == 0) return "1";
        std::string s;
        for (int a = 0; a < 8; ++a)
            if (contains(a)) {
                if (!s.empty()) s += "^";
                s += axis_name(a);
            }
        return s;
    }
};

// Sign of e_a ^ e_b as a reordering of e_{a|b}; 0 if the masks overlap.
inline int wedge_sign(Mask a, Mask b) {
    if (a & b) return 0;
    int inv = 0;
    for (int j = 0; j < 8; ++j)
        if ((b >> j) & 1u)
            inv += std::popcount(unsigned(a) >> (j + 1)); // elements of a above j
    return (inv & 1) ? -1 : 1;
}

// Sign s with e_m ^ e_{comp(m)} = s * vol, i.e. hodge(e_m) = s * e_{comp(m)}.
inline int hodge_sign(Mask m) { return wedge_sign(m, Mask(~m)); }

template <class S>
struct Form {
    int grade = 0;
    std::map<Mask, S> c; // only nonzero entries are kept

    Form() = default;
    explicit Form(int g) : grade(g) {
        if (g < 0 || g > 8) throw std::invalid_argument("Form: grade out of range");
    }

    void add(Mask m, const S& v) {
        if (std::popcount(unsigned(m)) != grade)
            throw std::invalid_argument("Form::add: monomial grade mismatch");
        auto it = c.find(m);
        if (it == c.end()) {
            if (!(v == S(0))) c.emplace(m, v);
        } else {
            it->second += v;
            if (it->second == S(0)) c.erase(it);
        }
    }
    S coeff(Mask m) const {
        auto it = c.find(m);
        return it == c.end() ? S(0) : it->second;
    }
    bool is_zero() const { return c.empty(); }

    Form& operator+=(const Form& o) {
        if (o.grade != grade) throw std::invalid_argument("Form: grade mismatch in +");
        for (auto& [m, v] : o.c) add(m, v);
        return *this;
    }
    Form& operator-=(const Form& o) {
        if (o.grade != grade) throw std::invalid_argument("Form: grade mismatch in -");
        for (auto& [m, v] : o.c) add(m, S(-v));
        return *this;
    }
    Form operator+(const Form& o) const { Form r = *this; r += o; return r; }
    Form operator-(const Form& o) const { Form r = *this; r -= o; return r; }
    Form operator*(const S& s) const {
        Form r(grade);
        if (s == S(0)) return r;
        for (auto& [m, v] : c) r.c.emplace(m, v * s);
        return r;
    }
    Form operator-() const { return *this * S(-1); }
    bool operator==(const Form& o) const { return grade == o.grade && c == o.c; }
};

template <class S>
Form<S> wedge(const Form<S>& a, const Form<S>& b) {
    if (a.grade + b.grade > 8) {
        // wedge beyond top degree is identically zero
        return Form<S>(8);
    }
    Form<S> r(a.grade + b.grade);
    for (auto& [ma, va] : a.c)
        for (auto& [mb, vb] : b.c) {
            int s = wedge_sign(ma, mb);
            if (s) r.add(Mask(ma | mb), S(s) * va * vb);
        }
    return r;
}

template <class S>
Form<S> hodge(const Form<S>& a) {
    Form<S> r(8 - a.grade);
    for (auto& [m, v] : a.c) r.add(Mask(~m), S(hodge_sign(m)) * v);
    return r;
}

// Pointwise inner product; the monomial basis is orthonormal.
template <class S>
S inner(const Form<S>& a, const Form<S>& b) {
    if (a.grade != b.grade) throw std::invalid_argument("inner: grade mismatch");
    S acc(0);
    const auto& small = a.c.size() <= b.c.size() ? a.c : b.c;
    const auto& large = a.c.size() <= b.c.size() ? b.c : a.c;
    for (auto& [m, v] : small) {
        auto it = large.find(m);
        if (it != large.end()) acc += v * it->second;
    }
    return acc;
}

template <class S>
using Vector8 = std::array<S, 8>;

template <class S>
Form<S> interior(const Vector8<S>& v, const Form<S>& a) {
    if (a.grade == 0) return Form<S>(0);
    Form<S> r(a.grade - 1);
    for (auto& [m, coef] : a.c) {
        int pos = 0;
        for (int k = 0; k < 8; ++k) {
            if (!((m >> k) & 1u)) continue;
            if (!(v[k] == S(0))) {
                S s = (pos & 1) ? S(-1) : S(1);
                r.add(Mask(m & ~(Mask(1) << k)), s * v[k] * coef);
            }
            ++pos;
        }
    }
    return r;
}

// 1-form dual to a vector (orthonormal frame: same components).
template <class S>
Form<S> flat(const Vector8<S>& v) {
    Form<S> r(1);
    for (int k = 0; k < 8; ++k)
        if (!(v[k] == S(0))) r.add(Mask(Mask(1) << k), v[k]);
    return r;
}

// ---------------------------------------------------------------------------
// su(2) coefficient algebra.  Basis (i,j,k) acts on the normal frame by the
// quaternion table:
//   i: e1p->-e2p  e2p-> e1p  e3p-> e4p  e4p->-e3p
//   j: e1p->-e3p  e2p->-e4p  e3p-> e1p  e4p-> e2p
//   k: e1p->-e4p  e2p-> e3p  e3p->-e2p  e4p-> e1p
// Structure constants are derived from these matrices, not assumed.
// ---------------------------------------------------------------------------

// su2_act_mat[a][k][l]: (g_a z)_k = sum_l su2_act_mat[a][k][l] z_l  (z in normal frame)
inline const int (&su2_act_mat())[3][4][4] {
    static const int M[3][4][4] = {
        {{0, 1, 0, 0}, {-1, 0, 0, 0}, {0, 0, 0, -1}, {0, 0, 1, 0}},  // i
        {{0, 0, 1, 0}, {0, 0, 0, 1}, {-1, 0, 0, 0}, {0, -1, 0, 0}},  // j
        {{0, 0, 0, 1}, {0, 0, -1, 0}, {0, 1, 0, 0}, {-1, 0, 0, 0}},  // k
    };
    return M;
}

// f[a][b][c] with [g_a, g_b] = sum_c f[a][b][c] g_c, derived by commutating the
// action matrices and expanding against them (they are Frobenius-orthogonal,
// each of squared norm 4).
inline const int (&su2_structure())[3][3][3] {
    static const auto F = [] {
        std::array<std::array<std::array<int, 3>, 3>, 3> f{};
        const auto& M = su2_act_mat();
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                int K[4][4] = {};
                for (int r = 0; r < 4; ++r)
                    for (int s = 0; s < 4; ++s)
                        for (int t = 0; t < 4; ++t)
                            K[r][s] += M[a][r][t] * M[b][t][s] - M[b][r][t] * M[a][t][s];
                for (int cdx = 0; cdx < 3; ++cdx) {
                    int dot = 0;
                    for (int r = 0; r < 4; ++r)
                        for (int s = 0; s < 4; ++s) dot += K[r][s] * M[cdx][r][s];
                    if (dot % 4 != 0) throw std::logic_error("su2_structure: non-integral expansion");
                    f[a][b][cdx] = dot / 4;
                }
                // verify the expansion is exact (the commutator stays in the span)
                for (int r = 0; r < 4; ++r)
                    for (int s = 0; s < 4; ++s) {
                        int rec = 0;
                        for (int cdx = 0; cdx < 3; ++cdx) rec += f[a][b][cdx] * M[cdx][r][s];
                        if (rec != K[r][s]) throw std::logic_error("su2_structure: span failure");
                    }
            }
        static int out[3][3][3];
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                for (int cdx = 0; cdx < 3; ++cdx) out[a][b][cdx] = f[a][b][cdx];
        return &out;
    }();
    return *F;
}

template <class S>
struct Su2 {
    std::array<S, 3> c{S(0), S(0), S(0)};

    Su2() = default;
    Su2(S a, S b, S d) : c{a, b, d} {}

    Su2& operator+=(const Su2& o) { for (int k = 0; k < 3; ++k) c[k] += o.c[k]; return *this; }
    Su2& operator-=(const Su2& o) { for (int k = 0; k < 3; ++k) c[k] -= o.c[k]; return *this; }
    Su2 operator+(const Su2& o) const { Su2 r = *this; r += o; return r; }
    Su2 operator-(const Su2& o) const { Su2 r = *this; r -= o; return r; }
    Su2 operator*(const S& s) const { return Su2(c[0] * s, c[1] * s, c[2] * s); }
    Su2 operator-() const { return *this * S(-1); }
    bool operator==(const Su2& o) const { return c == o.c; }
    bool is_zero() const { return c[0] == S(0) && c[1] == S(0) && c[2] == S(0); }
};

template <class S>
Su2<S> bracket(const Su2<S>& x, const Su2<S>& y) {
    const auto& f = su2_structure();
    Su2<S> r;
    for (int a = 0; a < 3; ++a) {
        if (x.c[a] == S(0)) continue;
        for (int b = 0; b < 3; ++b) {
            if (y.c[b] == S(0)) continue;
            for (int cdx = 0; cdx < 3; ++cdx)
                if (f[a][b][cdx]) r.c[cdx] += S(f[a][b][cdx]) * x.c[a] * y.c[b];
        }
    }
    return r;
}

// Ad-invariant pairing (coefficient dot product).
template <class S>
S inner(const Su2<S>& x, const Su2<S>& y) {
    return x.c[0] * y.c[0] + x.c[1] * y.c[1] + x.c[2] * y.c[2];
}

// Action of an su(2) element on a normal-block vector (components z_1..z_4).
template <class S>
std::array<S, 4> act(const Su2<S>& x, const std::array<S, 4>& z) {
    const auto& M = su2_act_mat();
    std::array<S, 4> r{S(0), S(0), S(0), S(0)};
    for (int a = 0; a < 3; ++a) {
        if (x.c[a] == S(0)) continue;
        for (int k = 0; k < 4; ++k)
            for (int l = 0; l < 4; ++l)
                if (M[a][k][l]) r[k] += S(M[a][k][l]) * x.c[a] * z[l];
    }
    return r;
}

// Matrix entry (k,l) of an su(2) element acting on the normal block.
template <class S>
S act_entry(const Su2<S>& x, int k, int l) {
    const auto& M = su2_act_mat();
    S r(0);
    for (int a = 0; a < 3; ++a)
        if (M[a][k][l]) r += S(M[a][k][l]) * x.c[a];
    return r;
}

// ---------------------------------------------------------------------------
// su(2)-valued forms.
// ---------------------------------------------------------------------------

template <class S>
struct LieForm {
    int grade = 0;
    std::map<Mask, Su2<S>> c;

    LieForm() = default;
    explicit LieForm(int g) : grade(g) {
        if (g < 0 || g > 8) throw std::invalid_argument("LieForm: grade out of range");
    }

    void add(Mask m, const Su2<S>& v) {
        if (std::popcount(unsigned(m)) != grade)
            throw std::invalid_argument("LieForm::add: monomial grade mismatch");
        auto it = c.find(m);
        if (it == c.end()) {
            if (!v.is_zero()) c.emplace(m, v);
        } else {
            it->second += v;
            if (it->second.is_zero()) c.erase(it);
        }
    }
    Su2<S> coeff(Mask m) const {
        auto it = c.find(m);
        return it == c.end() ? Su2<S>() : it->second;
    }
    bool is_zero() const { return c.empty(); }

    LieForm& operator+=(const LieForm& o) {
        if (o.grade != grade) throw std::invalid_argument("LieForm: grade mismatch in +");
        for (auto& [m, v] : o.c) add(m, v);
        return *this;
    }
    LieForm& operator-=(const LieForm& o) {
        if (o.grade != grade) throw std::invalid_argument("LieForm: grade mismatch in -");
        for (auto& [m, v] : o.c) add(m, -v);
        return *this;
    }
    LieForm operator+(const LieForm& o) const { LieForm r = *this; r += o; return r; }
    LieForm operator-(const LieForm& o) const { LieForm r = *this; r -= o; return r; }
    LieForm operator*(const S& s) const {
        LieForm r(grade);
        for (auto& [m, v] : c) r.add(m, v * s);
        return r;
    }
};

// Scalar form wedge su(2)-valued form.
template <class S>
LieForm<S> wedge(const Form<S>& a, const LieForm<S>& b) {
    if (a.grade + b.grade > 8) return LieForm<S>(8);
    LieForm<S> r(a.grade + b.grade);
    for (auto& [ma, va] : a.c)
        for (auto& [mb, vb] : b.c) {
            int s = wedge_sign(ma, mb);
            if (s) r.add(Mask(ma | mb), vb * (S(s) * va));
        }
    return r;
}

// Wedge with simultaneous bracket on values: for 1-forms a this gives
// (lie_wedge(a,a))(X,Y) = 2 [a(X), a(Y)].
template <class S>
LieForm<S> lie_wedge(const LieForm<S>& a, const LieForm<S>& b) {
    if (a.grade + b.grade > 8) return LieForm<S>(8);
    LieForm<S> r(a.grade + b.grade);
    for (auto& [ma, va] : a.c)
        for (auto& [mb, vb] : b.c) {
            int s = wedge_sign(ma, mb);
            if (!s) continue;
            Su2<S> br = bracket(va, vb);
            if (s < 0) br = -br;
            r.add(Mask(ma | mb), br);
        }
    return r;
}

template <class S>
LieForm<S> hodge(const LieForm<S>& a) {
    LieForm<S> r(8 - a.grade);
    for (auto& [m, v] : a.c) r.add(Mask(~m), v * S(hodge_sign(m)));
    return r;
}

template <class S>
LieForm<S> interior(const Vector8<S>& v, const LieForm<S>& a) {
    if (a.grade == 0) return LieForm<S>(0);
    LieForm<S> r(a.grade - 1);
    for (auto& [m, coef] : a.c) {
        int pos = 0;
        for (int k = 0; k < 8; ++k) {
            if (!((m >> k) & 1u)) continue;
            if (!(v[k] == S(0))) {
                S s = (pos & 1) ? S(-v[k]) : v[k];
                r.add(Mask(m & ~(Mask(1) << k)), coef * s);
            }
            ++pos;
        }
    }
    return r;
}

template <class S>
S inner(const LieForm<S>& a, const LieForm<S>& b) {
    if (a.grade != b.grade) throw std::invalid_argument("inner: grade mismatch");
    S acc(0);
    for (auto& [m, v] : a.c) {
        auto it = b.c.find(m);
        if (it != b.c.end()) acc += inner(v, it->second);
    }
    return acc;
}

} // namespace cgw
