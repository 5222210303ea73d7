#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cgw/spin7.hpp"

using namespace cgw;
using R = Rational;

TEST_CASE("the structure 4-form is self-dual with norm^2 = 14") {
    const Form<R>& O = omega0<R>();
    CHECK(O.c.size() == 14);
    CHECK(hodge(O) == O);
    CHECK(inner(O, O) == R(14));
}

TEST_CASE("eigenspace projections: idempotent, complementary, dimensions 7 + 21") {
    // P+ and P- on every monomial 2-form, exactly
    int rank_plus = 0;
    for (auto& [mu, nu] : pair_table()) {
        Form<R> m(2);
        m.add(Mask((1u << mu) | (1u << nu)), R(1));
        Form<R> p = project_plus(m), q = project_minus(m);
        CHECK((p + q - m).is_zero());
        CHECK((project_plus(p) - p).is_zero());
        CHECK((project_minus(q) - q).is_zero());
        CHECK(project_minus(p).is_zero());
        CHECK(project_plus(q).is_zero());
        // eigenvalue check: *(Omega ^ p) = 3p, *(Omega ^ q) = -q
        CHECK((hodge(wedge(omega0<R>(), p)) - p * R(3)).is_zero());
        CHECK((hodge(wedge(omega0<R>(), q)) + q).is_zero());
        (void)rank_plus;
    }
    CHECK(minus_basis<R>().size() == 21);
    // plus basis spans 7 dimensions: Gram matrix is 4*Id
    const auto& pb = plus_basis<R>();
    for (int a = 0; a < 7; ++a) {
        CHECK((project_plus(pb[a]) - pb[a]).is_zero());
        for (int b = 0; b < 7; ++b) CHECK(inner(pb[a], pb[b]) == (a == b ? R(4) : R(0)));
    }
}

TEST_CASE("plus basis orthogonal to minus basis") {
    for (const auto& p : plus_basis<R>())
        for (const auto& q : minus_basis<R>()) CHECK(inner(p, q) == R(0));
}

TEST_CASE("calibration values on coordinate planes") {
    auto axis = [](int k) {
        Vector8<R> v{};
        v[k] = R(1);
        return v;
    };
    // the coordinate plane and its normal plane are calibrated with value +1
    CHECK(calibration_value(axis(0), axis(1), axis(2), axis(3)) == R(1));
    CHECK(calibration_value(axis(4), axis(5), axis(6), axis(7)) == R(1));
    // a mixed plane appearing in the form with coefficient -1
    CHECK(calibration_value(axis(0), axis(1), axis(4), axis(5)) == R(-1));
    // value is bounded by 1 over all coordinate 4-planes
    for (int a = 0; a < 8; ++a)
        for (int b = a + 1; b < 8; ++b)
            for (int c = b + 1; c < 8; ++c)
                for (int d = c + 1; d < 8; ++d) {
                    R v = calibration_value(axis(a), axis(b), axis(c), axis(d));
                    CHECK(scalar_abs(v) <= R(1));
                }
    // non-orthonormal frame rejected
    Vector8<R> bad{};
    bad[0] = R(2);
    CHECK_THROWS_AS((void)calibration_value(bad, axis(1), axis(2), axis(3)), std::invalid_argument);
}

TEST_CASE("algebraic identity gate: symmetrized plus-projection sweep is exact") {
    CHECK(check_symmetrized_plus_projection<R>() == 0);
}

TEST_CASE("bracket-contraction with an anti-self-dual normal curvature stays positive") {
    // curvature samples proportional to the anti-self-dual symbol patterns
    std::array<Su2<R>, 6> F{};
    // pairs (12),(13),(14),(23),(24),(34): i, j, k, -k, j, -i (symbol pattern)
    F[0] = Su2<R>(R(1), R(0), R(0));
    F[1] = Su2<R>(R(0), R(1), R(0));
    F[2] = Su2<R>(R(0), R(0), R(1));
    F[3] = Su2<R>(R(0), R(0), R(-1));
    F[4] = Su2<R>(R(0), R(1), R(0));
    F[5] = Su2<R>(R(-1), R(0), R(0));
    CHECK(check_bracket_contraction_plus<R>(F) == 0);
    // scaled and mixed samples
    for (int a = 0; a < 6; ++a) F[a] = F[a] * R(3) + F[(a + 1) % 6] * R(0);
    CHECK(check_bracket_contraction_plus<R>(F) == 0);
}

TEST_CASE("V and W bases: norms, orthogonality, projection round trip") {
    const auto& VB = v_basis<R>();
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            R dot(0);
            for (int i = 0; i < 4; ++i)
                for (int k = 0; k < 4; ++k) dot += VB[a][i][k] * VB[b][i][k];
            CHECK(dot == (a == b ? R(4) : R(0)));
        }
    const auto& WB = w_basis<R>();
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            R dot(0);
            for (int i = 0; i < 4; ++i)
                for (int k = 0; k < 4; ++k)
                    for (int l = 0; l < 4; ++l) dot += WB[a][i][k][l] * WB[b][i][k][l];
            CHECK(dot == (a == b ? R(16) : R(0)));
        }
    // round trips
    VElem<R> cv{R(1), R(-2), R(3), R(5)};
    CHECK(proj_V(v_embed(cv)) == cv);
    WElem<R> cw{R(2), R(7), R(-1), R(4)};
    CHECK(proj_W(w_embed(cw)) == cw);
    // projection annihilates a tensor orthogonal to the basis
    VTensor<R> T{};
    T[0][0] = R(1);
    T[1][1] = R(-1); // orthogonal to identity and to the antisymmetric patterns
    auto c = proj_V(T);
    for (int a = 0; a < 4; ++a) CHECK(c[a] == R(0));
}

TEST_CASE("W normal-block patterns are self-dual as 2-forms") {
    // antisymmetric part of each W pattern pairs to zero with every
    // anti-self-dual symbol pattern (the V patterns 1..3)
    const auto& P = vw_patterns();
    const auto& WB = w_basis<R>();
    // extract pattern Q_q from basis element a=0 (identity assembly): slot i=q
    for (int q = 1; q < 4; ++q) {
        // W basis element q has e_1 factor with pattern Q_q (sign +1)
        for (int asd = 1; asd < 4; ++asd) {
            R dot(0);
            for (int k = 0; k < 4; ++k)
                for (int l = 0; l < 4; ++l) dot += WB[q][0][k][l] * R(P[asd][k][l]);
            CHECK(dot == R(0));
        }
    }
}

TEST_CASE("torsion 1-form model reduces to the flat structure at zero") {
    AlphaForm al;
    CHECK(al.is_zero());
    CHECK((al.omega_at({0, 0, 0, 0}) - omega0<double>()).is_zero());
    al.coeff[4][3] = 0.7; // alpha(e1p) with a mixed-plus component
    CHECK(!al.is_zero());
    Form<double> w = al.omega_at({1.0, 0, 0, 0});
    CHECK(!(w - omega0<double>()).is_zero());
    // mixed() reads back the coordinate it was given: plus_basis[3] has
    // coefficient +1 on e1 ^ e1p, so mixed(0,0,l) = 0.5 * coeff[4+l][3]
    CHECK(al.mixed(0, 0, 0) == doctest::Approx(0.35));
    CHECK(al.mixed(1, 2, 0) == doctest::Approx(0.0));
}
