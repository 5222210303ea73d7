// The model connection: the basic charge-one anti-self-dual instanton on the
// normal fibers, bent over the base torus by the gluing data (v, lambda,
// theta).  Curvature is available in closed form and through Richardson
// finite-difference oracles; the anti-self-duality residual F + *(Omega ^ F)
// is extracted in plus-basis coordinates.
#pragma once

#include <functional>

#include "cgw/exterior.hpp"
#include "cgw/gluing.hpp"
#include "cgw/norms.hpp"
#include "cgw/spin7.hpp"

namespace cgw {

// sigma_symbol()[k][l][a]: su(2) coefficients of the quaternionic symbol in
// B_k = sum_l sigma_{kl} z_l / rho.  Antisymmetric and anti-self-dual.
inline const int (&sigma_symbol())[4][4][3] {
    static const int s[4][4][3] = {
        {{0, 0, 0}, {-1, 0, 0}, {0, -1, 0}, {0, 0, -1}},
        {{1, 0, 0}, {0, 0, 0}, {0, 0, 1}, {0, -1, 0}},
        {{0, 1, 0}, {0, 0, -1}, {0, 0, 0}, {1, 0, 0}},
        {{0, 0, 1}, {0, 1, 0}, {-1, 0, 0}, {0, 0, 0}},
    };
    return s;
}

template <class S>
Su2<S> sigma(int k, int l) {
    const auto& s = sigma_symbol();
    return Su2<S>{S(s[k][l][0]), S(s[k][l][1]), S(s[k][l][2])};
}

// Basic instanton with concentration scale `scale` (= eps*lambda) centered at
// `center` (= eps*v) in the fiber.
template <class S>
struct BasicParams {
    S scale{1};
    std::array<S, 4> center{S(0), S(0), S(0), S(0)};
};

template <class S>
std::array<S, 4> recenter(const BasicParams<S>& b, const std::array<S, 4>& y) {
    return {y[0] - b.center[0], y[1] - b.center[1], y[2] - b.center[2], y[3] - b.center[3]};
}

template <class S>
S conformal_factor(const BasicParams<S>& b, const std::array<S, 4>& z) {
    return b.scale * b.scale + z[0] * z[0] + z[1] * z[1] + z[2] * z[2] + z[3] * z[3];
}

// B_k = sum_l sigma_{kl} z_l / rho
template <class S>
std::array<Su2<S>, 4> basic_potential(const BasicParams<S>& b, const std::array<S, 4>& y) {
    auto z = recenter(b, y);
    S rho = conformal_factor(b, z);
    std::array<Su2<S>, 4> B{};
    const auto& s = sigma_symbol();
    for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l)
            for (int a = 0; a < 3; ++a)
                if (s[k][l][a]) B[k].c[a] += S(s[k][l][a]) * z[l] / rho;
    return B;
}

// Exact curvature from the derivative of the potential, pairs (k<l):
// F_kl = 2 sigma_lk / rho - (2/rho^2)(z_k (sz)_l - z_l (sz)_k)
//        + (1/rho^2)[(sz)_k, (sz)_l],   (sz)_k = sum_l sigma_{kl} z_l.
template <class S>
std::array<Su2<S>, 6> basic_curvature(const BasicParams<S>& b, const std::array<S, 4>& y) {
    auto z = recenter(b, y);
    S rho = conformal_factor(b, z);
    std::array<Su2<S>, 4> sz{};
    const auto& s = sigma_symbol();
    for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l)
            for (int a = 0; a < 3; ++a)
                if (s[k][l][a]) sz[k].c[a] += S(s[k][l][a]) * z[l];
    std::array<Su2<S>, 6> F{};
    for (int k = 0; k < 4; ++k)
        for (int l = k + 1; l < 4; ++l) {
            Su2<S> f = sigma<S>(l, k) * (S(2) / rho);
            f = f + (sz[k] * z[l] - sz[l] * z[k]) * (S(2) / (rho * rho));
            f = f + bracket(sz[k], sz[l]) * (S(1) / (rho * rho));
            F[tangent_pair(k, l)] = f;
        }
    return F;
}

// Simplified closed form F_kl = 2 sigma_lk scale^2 / rho^2 (verified against
// basic_curvature in the test suite; used in hot loops).
template <class S>
std::array<Su2<S>, 6> basic_curvature_fast(const BasicParams<S>& b, const std::array<S, 4>& y) {
    auto z = recenter(b, y);
    S rho = conformal_factor(b, z);
    S amp = S(2) * b.scale * b.scale / (rho * rho);
    std::array<Su2<S>, 6> F{};
    for (int k = 0; k < 4; ++k)
        for (int l = k + 1; l < 4; ++l) F[tangent_pair(k, l)] = sigma<S>(l, k) * amp;
    return F;
}

// ---------------------------------------------------------------------------
// Glued connection in product coordinates (x on the base, y in the fiber).
// ---------------------------------------------------------------------------

// Everything about the gluing data needed at one base point.
struct BasePointData {
    double eps = 0;
    double lambda = 1;
    std::array<double, 4> v{};
    std::array<double, 4> dloglam{};              // d_i lambda / lambda
    std::array<std::array<double, 4>, 4> dv{};    // dv[i][k] = d_i v_k
    std::array<SdRot, 4> theta{};
    std::array<SdRot, 6> C{};                     // normal-connection curvature, pairs (i<j)

    BasicParams<double> basic() const { return {eps * lambda, {eps * v[0], eps * v[1], eps * v[2], eps * v[3]}}; }
};

BasePointData base_point_data(const GluingData& g, std::int64_t baseIndex);
// Analytic evaluation; C computed from the template's theta/dtheta via
// second-order central differences with Richardson extrapolation.
BasePointData base_point_data(const GluingTemplate& t, double eps, const std::array<double, 4>& x);

struct GluedPotential {
    std::array<Su2<double>, 4> Ab;  // su(2) part, base directions
    std::array<SdRot, 4> Tb;        // self-dual part, base directions (-theta)
    std::array<Su2<double>, 4> Af;  // fiber directions (the basic instanton)
};

GluedPotential glued_potential(const BasePointData& d, const std::array<double, 4>& y);

struct GluedCurvature {
    std::array<Su2<double>, 6> Fff;            // fiber-fiber pairs (k<l)
    std::array<std::array<Su2<double>, 4>, 4> Fmix; // [i][j] = F(e_i, e_j-perp)
    std::array<Su2<double>, 6> Fbb;            // su(2) part, base pairs (i<j)
    std::array<SdRot, 6> Tbb;                  // self-dual part, base pairs
};

GluedCurvature glued_curvature(const BasePointData& d, const std::array<double, 4>& y);

// Finite-difference oracle: Richardson-extrapolated central differences of the
// analytic potential, all components.
GluedCurvature glued_curvature_fd(const GluingTemplate& t, double eps,
                                  const std::array<double, 4>& x, const std::array<double, 4>& y,
                                  double h);

double curvature_max_abs_diff(const GluedCurvature& a, const GluedCurvature& b);

// ---------------------------------------------------------------------------
// Anti-self-duality residual F + *(Omega ^ F) = 4 P_plus F.
// ---------------------------------------------------------------------------

// Coordinates with respect to the orthonormal plus basis q_a = p_a / 2.
struct ResidualPlus {
    std::array<Su2<double>, 7> A;
    std::array<SdRot, 7> T;
    double max_abs() const {
        double m = 0;
        for (int a = 0; a < 7; ++a) {
            for (double c : A[a].c) m = std::max(m, std::abs(c));
            for (double c : T[a].c) m = std::max(m, std::abs(c));
        }
        return m;
    }
};

ResidualPlus asd_residual(const GluedCurvature& F);

// General calibration form (perturbed Omega): full residual two-form of the
// su(2) part, computed through the exterior-algebra layer.
LieForm<double> curvature_lieform(const GluedCurvature& F);
LieForm<double> asd_residual_general(const LieForm<double>& F, const Form<double>& Omega);

// ---------------------------------------------------------------------------
// Field-level operations.
// ---------------------------------------------------------------------------

// Residual of the glued connection in plus coordinates as a streaming
// evaluator (42 components: 7 x 3 su(2) + 7 x 3 self-dual) over a product
// grid whose base axes match the GluingData grid shape.
PointEval residual_evaluator(const GluingData& g, const ProductGrid& grid);
constexpr int kResidualComps = 42;

struct ResidualSweepResult {
    double eps;
    HolderResult norm;
};

// Weighted-Holder norm of the residual for each eps (weight nu, exponent
// gamma).  The gluing template is resampled per eps only through `g.eps`.
std::vector<ResidualSweepResult> residual_sweep(const GluingTemplate& t, const ProductGrid& grid,
                                                const std::vector<double>& epsilons, double nu,
                                                double gamma, std::uint64_t seed = kDefaultNormSeed,
                                                int long_pairs = 20000);

// Logarithmic cutoff profile: 1 inside r_in, 0 outside r_out,
// log(r_out/r)/log(r_out/r_in) between.  Gradient sup |y||eta'| is
// 1/log(r_out/r_in).
double cutoff_profile(double r, double r_in, double r_out);
double cutoff_profile_deriv(double r, double r_in, double r_out);

// Multiplies every component of a potential field by the cutoff profile in
// the fiber radius.  `pot` holds pointwise potential components.
void cutoff_extend(Field& pot, double r_in, double r_out);

} // namespace cgw
