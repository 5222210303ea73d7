#include "cgw/gluing.hpp"

#include <cmath>
#include <stdexcept>

#include "cgw/norms.hpp" // splitmix64

namespace cgw {

namespace {

std::array<double, 4> zero4(const std::array<double, 4>&) { return {0, 0, 0, 0}; }
std::array<std::array<double, 4>, 4> zero44(const std::array<double, 4>&) { return {}; }
std::array<SdRot, 4> zero_theta(const std::array<double, 4>&) { return {}; }

// low-mode Fourier scalar: a0 + sum over axes of (s_i sin x_i + c_i cos x_i)
struct FourierScalar {
    double a0 = 0;
    std::array<double, 4> s{}, c{};
    double eval(const std::array<double, 4>& x) const {
        double r = a0;
        for (int i = 0; i < 4; ++i) r += s[i] * std::sin(x[i]) + c[i] * std::cos(x[i]);
        return r;
    }
    double deriv(const std::array<double, 4>& x, int i) const {
        return s[i] * std::cos(x[i]) - c[i] * std::sin(x[i]);
    }
};

double unit(std::uint64_t& st) { // uniform in [-1,1)
    return 2.0 * (splitmix64(st) >> 11) * 0x1.0p-53 - 1.0;
}

} // namespace

GluingTemplate make_template(const std::string& name, double amplitude, std::uint64_t seed) {
    GluingTemplate t;
    t.name = name;
    t.v = zero4;
    t.dv = zero44;
    t.lambda = [](const std::array<double, 4>&) { return 1.0; };
    t.dlambda = zero4;
    t.theta = zero_theta;

    const double A = amplitude;
    if (name == "const") {
        t.v = [A](const std::array<double, 4>&) { return std::array<double, 4>{A, 0, 0, 0}; };
    } else if (name == "sin-v") {
        t.v = [A](const std::array<double, 4>& x) {
            return std::array<double, 4>{A * std::sin(x[0]), 0, 0, 0};
        };
        t.dv = [A](const std::array<double, 4>& x) {
            std::array<std::array<double, 4>, 4> d{};
            d[0][0] = A * std::cos(x[0]);
            return d;
        };
        t.varies = {1, 0, 0, 0};
    } else if (name == "exp-lambda") {
        t.lambda = [A](const std::array<double, 4>& x) { return std::exp(A * std::sin(x[1])); };
        t.dlambda = [A](const std::array<double, 4>& x) {
            std::array<double, 4> d{};
            d[1] = A * std::cos(x[1]) * std::exp(A * std::sin(x[1]));
            return d;
        };
        t.varies = {0, 1, 0, 0};
    } else if (name == "theta-const") {
        t.theta = [A](const std::array<double, 4>&) {
            std::array<SdRot, 4> th{};
            th[0] = SdRot(A, 0, 0);
            th[1] = SdRot(0, A, 0);
            return th;
        };
    } else if (name == "random-fourier") {
        std::uint64_t st = seed ? seed : 1;
        auto rnd_scalar = [&](double amp, double base) {
            FourierScalar f;
            f.a0 = base + 0.25 * amp * unit(st);
            for (int i = 0; i < 4; ++i) {
                f.s[i] = amp * unit(st);
                f.c[i] = amp * unit(st);
            }
            return f;
        };
        std::array<FourierScalar, 4> fv;
        for (int k = 0; k < 4; ++k) fv[k] = rnd_scalar(A, 0.0);
        FourierScalar flog = rnd_scalar(A, 0.0); // lambda = exp(flog)
        std::array<std::array<FourierScalar, 3>, 4> fth;
        for (int i = 0; i < 4; ++i)
            for (int a = 0; a < 3; ++a) fth[i][a] = rnd_scalar(A, 0.0);

        t.v = [fv](const std::array<double, 4>& x) {
            std::array<double, 4> r;
            for (int k = 0; k < 4; ++k) r[k] = fv[k].eval(x);
            return r;
        };
        t.dv = [fv](const std::array<double, 4>& x) {
            std::array<std::array<double, 4>, 4> d;
            for (int i = 0; i < 4; ++i)
                for (int k = 0; k < 4; ++k) d[i][k] = fv[k].deriv(x, i);
            return d;
        };
        t.lambda = [flog](const std::array<double, 4>& x) { return std::exp(flog.eval(x)); };
        t.dlambda = [flog](const std::array<double, 4>& x) {
            double l = std::exp(flog.eval(x));
            std::array<double, 4> d;
            for (int i = 0; i < 4; ++i) d[i] = l * flog.deriv(x, i);
            return d;
        };
        t.theta = [fth](const std::array<double, 4>& x) {
            std::array<SdRot, 4> th;
            for (int i = 0; i < 4; ++i)
                for (int a = 0; a < 3; ++a) th[i].c[a] = fth[i][a].eval(x);
            return th;
        };
        t.varies = {1, 1, 1, 1};
    } else if (name != "zero") {
        throw std::invalid_argument("make_template: unknown template '" + name + "'");
    }
    return t;
}

GluingData GluingData::sample(const GluingTemplate& t, const ProductGrid& baseGrid, double eps) {
    if (!su2_sd_commute()) throw std::logic_error("so(4) factor split failed");
    GluingData g;
    g.base = &baseGrid;
    g.eps = eps;
    g.v = Field(baseGrid, 4);
    g.lam = Field(baseGrid, 1);
    g.th = Field(baseGrid, 12);
    for (std::int64_t p = 0; p < baseGrid.npoints; ++p) {
        auto ix = baseGrid.unindex(p);
        std::array<double, 4> x{};
        for (int a = 0; a < 4; ++a) x[a] = baseGrid.ax[a].x[ix[a]];
        auto vv = t.v(x);
        for (int k = 0; k < 4; ++k) g.v.at(p)[k] = vv[k];
        double l = t.lambda(x);
        if (!(l > 1e-8)) throw std::invalid_argument("GluingData: lambda not positive");
        g.lam.at(p)[0] = l;
        auto th = t.theta(x);
        for (int i = 0; i < 4; ++i)
            for (int a = 0; a < 3; ++a) g.th.at(p)[3 * i + a] = th[i].c[a];
    }
    // stencil derivatives along base axes
    g.dv = Field(baseGrid, 16);
    g.dlam = Field(baseGrid, 4);
    g.dth = Field(baseGrid, 48);
    for (int i = 0; i < 4; ++i) {
        Field dvi = fd_partial(g.v, i);
        Field dli = fd_partial(g.lam, i);
        Field dti = fd_partial(g.th, i);
        for (std::int64_t p = 0; p < baseGrid.npoints; ++p) {
            for (int k = 0; k < 4; ++k) g.dv.at(p)[4 * i + k] = dvi.at(p)[k];
            g.dlam.at(p)[i] = dli.at(p)[0];
            for (int jc = 0; jc < 12; ++jc) g.dth.at(p)[12 * i + jc] = dti.at(p)[jc];
        }
    }
    // curvature of the normal connection: C_ij = -(d_i th_j - d_j th_i) + [th_i, th_j]
    g.C = Field(baseGrid, 18);
    for (std::int64_t p = 0; p < baseGrid.npoints; ++p) {
        std::array<SdRot, 4> th;
        for (int i = 0; i < 4; ++i)
            for (int a = 0; a < 3; ++a) th[i].c[a] = g.th.at(p)[3 * i + a];
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j) {
                SdRot cij = sd_bracket(th[i], th[j]);
                for (int a = 0; a < 3; ++a)
                    cij.c[a] -= g.dth.at(p)[12 * i + 3 * j + a] - g.dth.at(p)[12 * j + 3 * i + a];
                int pr = tangent_pair(i, j);
                for (int a = 0; a < 3; ++a) g.C.at(p)[3 * pr + a] = cij.c[a];
            }
    }
    return g;
}

} // namespace cgw
