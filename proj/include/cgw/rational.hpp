// Exact scalar kind used by the algebraic kernels.  Everything algebraic in this
// project is templated over the scalar so the same code runs in exact rational
// mode (identity checks, frozen fixtures) and in double mode (PDE work).
#pragma once

#include <boost/multiprecision/cpp_int.hpp>

namespace cgw {

using Rational = boost::multiprecision::cpp_rational;

// Convert either scalar kind to double for reporting.
inline double to_double(double x) { return x; }
inline double to_double(const Rational& x) { return x.convert_to<double>(); }

// abs that works for both kinds.
inline double scalar_abs(double x) { return x < 0 ? -x : x; }
inline Rational scalar_abs(const Rational& x) { return x < 0 ? Rational(-x) : x; }

} // namespace cgw
