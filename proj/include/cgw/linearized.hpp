// The linearized anti-self-duality operator L a = 2 P_+ D a on su(2)-valued
// 1-forms, its exact discrete adjoint, the Weitzenboeck identity, the moment
// projections (Pi and P) onto the instanton's deformation directions, the
// fiber model solver, and one Picard step of the deformation iteration.
//
// Field layouts (all su(2) values as 3 doubles in the {i,j,k} basis):
//   1-form field      : 24 = 8 axes x 3
//   positive 2-form   : 21 = 7 coords against the orthonormal basis p_a/2
//   gauge potential   : 24 (same layout as a 1-form field)
#pragma once

#include "cgw/instanton.hpp"

namespace cgw {

// Monomials of each positive basis 2-form: four (mu < nu, sign) terms.
struct PlusMonomial {
    int mu = 0, nu = 0;
    double s = 0;
};
const std::array<std::array<PlusMonomial, 4>, 7>& plus_monomials();

constexpr int kOneFormComps = 24;
constexpr int kPlusComps = 21;

// Gauge fields sampled on a grid.
Field make_basic_gauge(const ProductGrid& grid, const BasicParams<double>& b);
Field make_glued_gauge(const ProductGrid& grid, const GluingData& g); // su(2) part

// Covariant derivative of an su(2)-valued function: (D f)_mu = d_mu f + [A_mu, f].
Field covariant_d(const Field& f /*3*/, const Field& gauge /*24*/);

// L a = 2 P_+ (d a + [A ^ a]) in plus coordinates.
Field apply_LB(const Field& a /*24*/, const Field& gauge /*24*/);
// Exact adjoint of apply_LB with respect to the cell-volume inner product.
Field apply_LB_star(const Field& phi /*21*/, const Field& gauge /*24*/);

// Pointwise curvature term of the Weitzenboeck identity,
//   -2 sum_{k,l} e_k-perp ^ [F(e_k-perp, e_l-perp), i_{e_l-perp} phi],
// in plus coordinates; F passed as the 6 fiber pairs.
std::array<Su2<double>, 7> weitzenbock_bracket(const std::array<Su2<double>, 6>& F,
                                               const std::array<Su2<double>, 7>& phi);

// || L L* phi - (nabla* nabla phi + bracket term) || over interior points
// (weighted L2), for the basic-instanton gauge.
double weitzenbock_residual(const Field& phi, const BasicParams<double>& b);

// ---------------------------------------------------------------------------
// Moment projections.
// ---------------------------------------------------------------------------

struct MomentPair {
    std::array<double, 4> s{}; // V coordinates
    std::array<double, 4> t{}; // W coordinates
};

// Radii of the fiber cutoff entering the moment kernels.
struct KappaProfile {
    double r1 = 0, r2 = 0;
    double operator()(double r) const;
};
KappaProfile make_kappa(double eps, double R);

// Pi: Gram-solved moments of psi against the 8 kernels at one base point.
MomentPair moment_pair(const Field& psi, const std::array<int, 4>& baseIx, const GluingData& g);
// Raw (un-solved) moments; vanish on the complement range.
std::array<double, 8> raw_moments(const Field& psi, const std::array<int, 4>& baseIx,
                                  const GluingData& g);

Field project_P(const Field& psi, const GluingData& g);
Field project_G(const Field& psi, const GluingData& g); // psi - project_P(psi)

// The kernel field of a given pair at one base point (plus coordinates per
// fiber point); used to build P-images and test idempotence.
void kernel_plus_coords(const MomentPair& c, const BasePointData& d, const KappaProfile& kappa,
                        const std::array<double, 4>& y, std::array<Su2<double>, 7>& out);

// ---------------------------------------------------------------------------
// Fiber model solver (covariant Laplacian with the curvature coupling).
// ---------------------------------------------------------------------------

struct FiberSolveReport {
    int iters = 0;
    double rel_residual = 0;
    bool converged = false;
};

// nabla* nabla f_j = g_j for four independent su(2) scalars (12 components).
Field solve_fiber_laplace(const Field& gtan /*12*/, const BasicParams<double>& b,
                          FiberSolveReport& rep, double tol = 1e-8, int maxit = 4000);
// nabla* nabla f_j - 2 sum_k [F(e_j-perp,e_k-perp), f_k] = g_j (coupled).
// Throws std::runtime_error if the coupled operator turns indefinite.
Field solve_fiber_coupled(const Field& gperp /*12*/, const BasicParams<double>& b,
                          FiberSolveReport& rep, double tol = 1e-8, int maxit = 4000);

// Full model solve in plus coordinates: given psi (21), find phi (21) with
// L L* phi = psi.  Solved through the exact discrete composition
// apply_LB(apply_LB_star(.)), which is symmetric positive semidefinite by
// construction (the explicit block form of the model differs from it by the
// discretization defect, which can push the near-kernel deformation modes
// slightly negative).
Field solve_model_from_plus(const Field& psi, const BasicParams<double>& b, FiberSolveReport& rep,
                            double tol = 1e-8, int maxit = 4000);

// ---------------------------------------------------------------------------
// Picard step.
// ---------------------------------------------------------------------------

struct PicardOptions {
    double tol_g = 1e-6; // relative normal-equation tolerance of the G solve
    int maxit_g = 600;
    double nu = 3.0; // weight of the contraction norm
};

// Plus coordinates of F_A + *(Omega0 ^ F_A) over the grid (su(2) sector).
Field asd_residual_field(const GluingData& g, const ProductGrid& grid);
// Plus coordinates of [a,a] + *(Omega0 ^ [a,a]).
Field quad_residual_field(const Field& a);

// Least-squares approximate right inverse of apply_LB (CGLS on the normal
// equations).  Throws std::runtime_error on non-convergence.
Field apply_G(const Field& psi, const Field& gauge, const PicardOptions& opt, int* iters = nullptr);

struct PicardContext {
    const ProductGrid* grid = nullptr;
    const GluingData* gd = nullptr;
    Field gauge;  // 24
    Field resid0; // 21
};
PicardContext make_picard_context(const GluingData& g, const ProductGrid& grid);

// Phi(a) = -1/2 G (I-P)(F_A + *(Omega^F_A)) - 1/2 G (I-P)([a,a] + *(Omega^[a,a]))
Field picard_step(const Field& a, const PicardContext& ctx, const PicardOptions& opt = {});

double weighted_l2(const Field& u, double nu, double eps);

struct ContractionReport {
    double before = 0;
    double after = 0;
    double ratio = 0;
    int g_iters = 0;
};
// One-step contraction of the off-range residual: take a1 = Phi(0), measure
// ||(I-P) resid(A + a1)|| / ||(I-P) resid(A)|| in the weighted L2 norm.
ContractionReport picard_contraction(const GluingData& g, const ProductGrid& grid,
                                     const PicardOptions& opt = {});

} // namespace cgw
