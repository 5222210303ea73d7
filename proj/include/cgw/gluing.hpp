// Gluing data over the core torus: a normal displacement v, a concentration
// profile lambda, and a normal-bundle rotation 1-form theta.  theta takes
// values in the self-dual factor of so(4) acting on the normal block -- the
// factor that commutes with the su(2) coefficient algebra of the instanton.
// Templates are analytic; GluingData carries sampled fields plus their
// stencil derivatives and the curvature of the induced normal connection.
#pragma once

#include <functional>

#include "cgw/exterior.hpp"
#include "cgw/grid.hpp"

namespace cgw {

// sd_act_mat[a][k][l]: self-dual generators on the normal block, matching the
// quaternionic patterns of the W basis.  They commute with su2_act_mat().
inline const int (&sd_act_mat())[3][4][4] {
    static const int M[3][4][4] = {
        {{0, -1, 0, 0}, {1, 0, 0, 0}, {0, 0, 0, -1}, {0, 0, 1, 0}},
        {{0, 0, -1, 0}, {0, 0, 0, 1}, {1, 0, 0, 0}, {0, -1, 0, 0}},
        {{0, 0, 0, -1}, {0, 0, -1, 0}, {0, 1, 0, 0}, {1, 0, 0, 0}},
    };
    return M;
}

inline const int (&sd_structure())[3][3][3] {
    static const auto F = [] {
        static int out[3][3][3];
        const auto& M = sd_act_mat();
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
                    out[a][b][cdx] = dot / 4;
                }
                for (int r = 0; r < 4; ++r)
                    for (int s = 0; s < 4; ++s) {
                        int rec = 0;
                        for (int cdx = 0; cdx < 3; ++cdx) rec += out[a][b][cdx] * M[cdx][r][s];
                        if (rec != K[r][s]) throw std::logic_error("sd_structure: span failure");
                    }
            }
        return &out;
    }();
    return *F;
}

// Verified once at startup use: the two so(4) factors commute.
inline bool su2_sd_commute() {
    static const bool ok = [] {
        const auto& A = su2_act_mat();
        const auto& B = sd_act_mat();
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                for (int r = 0; r < 4; ++r)
                    for (int s = 0; s < 4; ++s) {
                        int k = 0;
                        for (int t = 0; t < 4; ++t)
                            k += A[a][r][t] * B[b][t][s] - B[b][r][t] * A[a][t][s];
                        if (k != 0) return false;
                    }
        return true;
    }();
    return ok;
}

struct SdRot {
    std::array<double, 3> c{0, 0, 0};

    SdRot() = default;
    SdRot(double a, double b, double d) : c{a, b, d} {}

    bool is_zero() const { return c[0] == 0 && c[1] == 0 && c[2] == 0; }
    SdRot operator+(const SdRot& o) const { return {c[0] + o.c[0], c[1] + o.c[1], c[2] + o.c[2]}; }
    SdRot operator-(const SdRot& o) const { return {c[0] - o.c[0], c[1] - o.c[1], c[2] - o.c[2]}; }
    SdRot operator*(double s) const { return {c[0] * s, c[1] * s, c[2] * s}; }

    // matrix entry theta_{kl}
    double entry(int k, int l) const {
        const auto& M = sd_act_mat();
        return c[0] * M[0][k][l] + c[1] * M[1][k][l] + c[2] * M[2][k][l];
    }
    std::array<double, 4> apply(const std::array<double, 4>& z) const {
        const auto& M = sd_act_mat();
        std::array<double, 4> r{};
        for (int a = 0; a < 3; ++a) {
            if (c[a] == 0) continue;
            for (int k = 0; k < 4; ++k)
                for (int l = 0; l < 4; ++l)
                    if (M[a][k][l]) r[k] += c[a] * M[a][k][l] * z[l];
        }
        return r;
    }
    // Frobenius squared norm of the matrix representative
    double frob2() const { return 4 * (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]); }
};

inline SdRot sd_bracket(const SdRot& x, const SdRot& y) {
    const auto& f = sd_structure();
    SdRot r;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int cdx = 0; cdx < 3; ++cdx)
                if (f[a][b][cdx]) r.c[cdx] += f[a][b][cdx] * x.c[a] * y.c[b];
    return r;
}

// ---------------------------------------------------------------------------
// Analytic templates.
// ---------------------------------------------------------------------------

struct GluingTemplate {
    std::string name;
    std::function<std::array<double, 4>(const std::array<double, 4>&)> v;
    std::function<std::array<std::array<double, 4>, 4>(const std::array<double, 4>&)> dv; // dv[i][k] = d_i v_k
    std::function<double(const std::array<double, 4>&)> lambda;
    std::function<std::array<double, 4>(const std::array<double, 4>&)> dlambda;
    std::function<std::array<SdRot, 4>(const std::array<double, 4>&)> theta;
    std::array<int, 4> varies{0, 0, 0, 0}; // base axes the data depends on
};

GluingTemplate make_template(const std::string& name, double amplitude = 0.3,
                             std::uint64_t seed = 1);

// ---------------------------------------------------------------------------
// Sampled gluing data on a base grid.
// ---------------------------------------------------------------------------

struct GluingData {
    const ProductGrid* base = nullptr; // base-only grid (fiber axes collapsed)
    double eps = 0.1;
    Field v;    // 4
    Field lam;  // 1 (must stay >= some positive floor)
    Field th;   // 12 = 4 directions x 3 self-dual components
    Field dv;   // 16 = d_i v_k
    Field dlam; // 4
    Field dth;  // 48 = d_i theta_j (i outer, j inner, 3 comps)
    Field C;    // 18 = curvature of the normal connection, pairs (i<j) x 3

    static GluingData sample(const GluingTemplate& t, const ProductGrid& baseGrid, double eps);
    std::int64_t base_index(const std::array<int, 8>& ix) const {
        std::int64_t p = 0;
        for (int a = 0; a < 4; ++a) p += base->stride[a] * ix[a];
        return p;
    }
};

inline int tangent_pair(int i, int j) { // i<j in 0..3 -> 0..5
    static const int T[4][4] = {{-1, 0, 1, 2}, {0, -1, 3, 4}, {1, 3, -1, 5}, {2, 4, 5, -1}};
    return T[i][j];
}

} // namespace cgw
