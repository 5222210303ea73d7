// Desk-scale balancing machinery: the leading-term formula for the moment
// pair of the anti-self-duality residual, the full moment extraction Xi over
// an epsilon family, and the identity suite relating the second fundamental
// form, ambient curvature, and normal curvature of a Cayley plane.
#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "cgw/gluing.hpp"
#include "cgw/linearized.hpp"
#include "cgw/rational.hpp"
#include "cgw/spin7.hpp"

namespace cgw {

// ---------------------------------------------------------------------------
// Leading term and the moment extraction Xi.
// ---------------------------------------------------------------------------

// Leading term of the residual moment pair at every base point:
//   4 * ( proj_V( (d_i v_k + alpha_{ik,l} v_l) e_i (x) e_k-perp ),
//         proj_W( (dloglam_i delta_kl + theta_{i,kl} + alpha_{ik,l})
//                  e_i (x) e_k-perp (x) e_l-perp ) ).
std::vector<MomentPair> leading_term(const GluingData& g, const AlphaForm& alpha = {});

// Moment pair of the anti-self-duality residual of the glued connection at
// every base point (zeroth iterate: the assembled connection itself).  With a
// nonzero alpha the calibration form is the first-order model
// Omega0 + sum_k i_{e_k} alpha(y) ^ i_{e_k} Omega0.
// Throws std::runtime_error if a Gram system degenerates.
std::vector<MomentPair> xi_epsilon(const GluingData& g, const ProductGrid& grid,
                                   const AlphaForm& alpha = {});

// Plus coordinates (su(2) sector) of the residual against the perturbed
// calibration form; equals asd_residual_field when alpha is zero.
Field residual_plus_field(const GluingData& g, const ProductGrid& grid, const AlphaForm& alpha);

// Max over base points of the euclidean distance between two moment-pair
// fields, and the max euclidean size of one field.
double moment_pair_distance(const std::vector<MomentPair>& a, const std::vector<MomentPair>& b);
double moment_pair_max(const std::vector<MomentPair>& a);

// ---------------------------------------------------------------------------
// Identity suite: second fundamental form, ambient and normal curvature.
// ---------------------------------------------------------------------------

// h[k][i][j] = h(e_k, e_i, e_j-perp); symmetric in (k, i).
template <class S>
struct SecondFundamentalForm {
    std::array<std::array<std::array<S, 4>, 4>, 4> h{};
};

// Ambient curvature on the 8-frame, stored on ordered 2-form monomial pairs;
// r[p][q] = R(pair p, pair q) with p, q in the 28-pair layout of pair_table().
template <class S>
struct AmbientCurvature {
    std::array<std::array<S, 28>, 28> r{};

    S at(int a, int b, int c, int d) const {
        if (a == b || c == d) return S(0);
        S sign(1);
        if (a > b) { std::swap(a, b); sign = -sign; }
        if (c > d) { std::swap(c, d); sign = -sign; }
        return sign * r[pair_index(a, b)][pair_index(c, d)];
    }
    // mixed tangent-normal-normal-tangent entry R(e_i, e_k-perp, e_l-perp, e_j)
    S mixed(int i, int k, int l, int j) const { return at(i, 4 + k, 4 + l, j); }
};

// E[i][j][k][l] = E(e_i, e_j, e_k-perp, e_l-perp); antisymmetric in (i,j) and
// in (k,l).
template <class S>
struct NormalCurvature {
    std::array<std::array<std::array<std::array<S, 4>, 4>, 4>, 4> e{};
};

// The four Cayley constraint families, one residual per tangent direction k:
// out[f][k] with f = 0..3 the family index.
template <class S>
std::array<std::array<S, 4>, 4> cayley_constraint_residual(const SecondFundamentalForm<S>& h);

// Exact-rational sampler of the Cayley constraint kernel (24-dimensional);
// kernel basis computed once by rational row reduction.
SecondFundamentalForm<Rational> random_cayley_h(std::uint64_t seed);
int cayley_kernel_dimension();

// Exact-rational sampler of ambient curvatures with both 2-form slots in the
// negative eigenspace, the pair symmetry, and the first Bianchi identity
// (kernel basis computed once by rational row reduction).
AmbientCurvature<Rational> random_minus_curvature(std::uint64_t seed);
int minus_curvature_dimension();
// Negative control: a pair-symmetric Bianchi tensor built from a positive
// eigenbasis element; violates the negative-eigenspace hypothesis.
AmbientCurvature<Rational> plus_violating_curvature(std::uint64_t seed);

// Checks that both 2-form slots of R are annihilated by the positive
// projection and that the first Bianchi identity holds; returns the largest
// violation (exactly zero for random_minus_curvature output).
template <class S>
S curvature_invariant_residual(const AmbientCurvature<S>& R);

// Gauss relation E = R - sum_m ( h(m,i,k) h(m,j,l) - h(m,i,l) h(m,j,k) ).
template <class S>
NormalCurvature<S> gauss_E(const SecondFundamentalForm<S>& h, const AmbientCurvature<S>& R);

// The four aggregate displays: six-E-term sum minus
// ( sum_{ij} h(i,j,k)^2 + sum_i R(e_i, e_k-perp, e_k-perp, e_i) ), k = 0..3.
template <class S>
std::array<S, 4> aggregate_identity_residual(const SecondFundamentalForm<S>& h,
                                             const AmbientCurvature<S>& R);

// ---------------------------------------------------------------------------
// Constant-coefficient consistency of the second-order system on the base
// torus.  Derivatives are the periodic stencils of the base grid; the
// Laplacian is the composed stencil sum_i D_i D_i (applied to sin(x1) it
// returns approximately -sin(x1)).
// ---------------------------------------------------------------------------

// First-order deformation system: the four anti-self-duality-type
// combinations of D_i v_k.  v has 4 components on a base-only grid.
Field first_order_v_residual(const Field& v);

// Second-order system: out_k = sum_i D_i D_i v_k
//   + sum_{j,l,m} h(j,l,k) h(j,l,m) v_m + sum_{i,m} R(e_i,e_k,e_m,e_i) v_m.
Field jacobi_residual(const Field& v, const SecondFundamentalForm<double>& h,
                      const AmbientCurvature<double>& R);

// First-order scale/rotation system: the four displayed combinations of
// 2 lam^-1 D_i lam and the theta entries.  lam has 1 component, th has 12
// (4 directions x 3 self-dual components), both on a base-only grid.
Field first_order_lambda_theta_residual(const Field& lam, const Field& th);

// Second-order residuals: first = 4 lam^-1 sum_i D_i D_i lam - |theta|^2
//   + sum h h + sum_{i,k} R(e_i,e_k,e_k,e_i)  (1 component);
// second = sum_i ( D_i theta_i + 2 lam^-1 D_i lam theta_i )  (3 components).
std::pair<Field, Field> lambda_theta_residuals(const Field& lam, const Field& th,
                                               const SecondFundamentalForm<double>& h,
                                               const AmbientCurvature<double>& R);

} // namespace cgw
