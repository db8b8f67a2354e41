#ifndef CARPETFORGE_SPECIAL_HPP
#define CARPETFORGE_SPECIAL_HPP

#include <cmath>
#include <complex>

#include "carpetforge/core.hpp"

namespace carpetforge {

// ---------------------------------------------------------------------------
// Orthogonal polynomials by forward three-term recurrence.  Normalization
// constants are assembled from log-gamma by the callers, so none of these
// touch factorials directly.
// ---------------------------------------------------------------------------

inline double hermite_poly(int n, double x) {
    if (n == 0) return 1.0;
    double hm1 = 1.0;          // H_0
    double h = 2.0 * x;        // H_1
    for (int k = 1; k < n; ++k) {
        double hp1 = 2.0 * x * h - 2.0 * static_cast<double>(k) * hm1;
        hm1 = h;
        h = hp1;
    }
    return h;
}

// Generalized Laguerre L_n^{(k)}(y); k may be any real > -1 for our uses.
inline double laguerre_poly(int n, double k, double y) {
    if (n == 0) return 1.0;
    double lm1 = 1.0;
    double l = 1.0 + k - y;
    for (int m = 1; m < n; ++m) {
        double lp1 = ((2.0 * m + 1.0 + k - y) * l - (m + k) * lm1) / (m + 1.0);
        lm1 = l;
        l = lp1;
    }
    return l;
}

// Jacobi P_n^{(a,b)}(y).  Parameters and argument may be complex (the
// hyperbolic Scarf and trigonometric Rosen-Morse wells need both).
template <typename T>
T jacobi_poly(int n, T a, T b, T y) {
    if (n == 0) return T(1);
    T pm1 = T(1);
    T p = (a - b) / 2.0 + (a + b + 2.0) * y / 2.0;
    for (int m = 1; m < n; ++m) {
        T md(static_cast<double>(m));
        T c0 = 2.0 * (md + 1.0) * (md + a + b + 1.0) * (2.0 * md + a + b);
        T c1 = (2.0 * md + a + b + 1.0) * (a * a - b * b);
        T c2 = (2.0 * md + a + b) * (2.0 * md + a + b + 1.0) * (2.0 * md + a + b + 2.0);
        T c3 = 2.0 * (md + a) * (md + b) * (2.0 * md + a + b + 2.0);
        if (std::abs(c0) < 1e-300)
            throw BadParams("jacobi_poly: degenerate recurrence denominator");
        T pp1 = ((c1 + c2 * y) * p - c3 * pm1) / c0;
        pm1 = p;
        p = pp1;
    }
    return p;
}

// ---------------------------------------------------------------------------
// sech matching
// ---------------------------------------------------------------------------

inline double sech(double y) { return 1.0 / std::cosh(y); }

// arcsech on (0, 1]
inline double arcsech(double x) {
    if (!(x > 0.0) || x > 1.0) throw BadParams("arcsech: argument must lie in (0,1]");
    return std::log((1.0 + std::sqrt((1.0 - x) * (1.0 + x))) / x);
}

// ---------------------------------------------------------------------------
// Complex error function.
//
// One evaluator in the style of the Faddeeva w function: a Maclaurin series
// in the central disk and the Laplace continued fraction outside it, both
// accumulated in extended precision.  erf(z) is recovered from w through
// erf(z) = 1 - exp(-z^2) w(iz), with odd/conjugate reflections reducing the
// argument to the first quadrant.  Arguments met in practice sit near the
// exp(+-i pi/4) rays, where exp(-z^2) has unit modulus and both regimes are
// well conditioned.
// ---------------------------------------------------------------------------

namespace detail {

using lcomplex = std::complex<long double>;

// Series w(z) = sum_n (iz)^n / Gamma(n/2 + 1), valid near the origin.
inline lcomplex faddeeva_series(lcomplex z) {
    lcomplex izn(1.0L, 0.0L);
    lcomplex iz = lcomplex(0.0L, 1.0L) * z;
    lcomplex sum(0.0L, 0.0L);
    for (int n = 0; n < 300; ++n) {
        long double g = std::tgammal(0.5L * n + 1.0L);
        lcomplex term = izn / g;
        sum += term;
        if (n > 8 && std::abs(term) < 1e-22L * (1.0L + std::abs(sum))) break;
        izn *= iz;
    }
    return sum;
}

// Laplace continued fraction for w(z), Im z >= 0, evaluated by the modified
// Lentz algorithm:  w(z) = (i/sqrt(pi)) / K,
//   K = z - (1/2)/(z - 1/(z - (3/2)/(z - 2/(z - ...)))).
inline lcomplex faddeeva_confrac(lcomplex z) {
    const long double tiny = 1e-280L;
    lcomplex f = z;  // K's head term b_1 = z
    if (std::abs(f) < tiny) f = lcomplex(tiny, 0.0L);
    lcomplex C = f;
    lcomplex D(0.0L, 0.0L);
    for (int j = 2; j <= 500; ++j) {
        lcomplex a(-0.5L * (j - 1), 0.0L);
        D = z + a * D;
        if (std::abs(D) < tiny) D = lcomplex(tiny, 0.0L);
        C = z + a / C;
        if (std::abs(C) < tiny) C = lcomplex(tiny, 0.0L);
        D = 1.0L / D;
        lcomplex delta = C * D;
        f *= delta;
        if (std::abs(delta - 1.0L) < 1e-19L) break;
    }
    const long double sqrt_pi = 1.7724538509055160272981674833411452L;
    return lcomplex(0.0L, 1.0L) / sqrt_pi / f;
}

inline lcomplex faddeeva_upper(lcomplex z) {
    long double r = std::abs(z);
    if (r < 4.0L) return faddeeva_series(z);
    return faddeeva_confrac(z);
}

}  // namespace detail

// Faddeeva w(z) = exp(-z^2) erfc(-iz) for any z.
inline complex faddeeva_w(complex z) {
    detail::lcomplex zl(z.real(), z.imag());
    if (zl.imag() >= 0.0L) {
        auto w = detail::faddeeva_upper(zl);
        return complex(static_cast<double>(w.real()), static_cast<double>(w.imag()));
    }
    // w(z) = 2 exp(-z^2) - w(-z)
    auto w = detail::faddeeva_upper(-zl);
    auto e = std::exp(-zl * zl);
    auto r = 2.0L * e - w;
    if (!std::isfinite(static_cast<double>(r.real())) || !std::isfinite(static_cast<double>(r.imag())))
        throw ErfOverflow("faddeeva_w: exp(-z^2) overflow in lower half plane");
    return complex(static_cast<double>(r.real()), static_cast<double>(r.imag()));
}

inline complex erf_complex(complex z) {
    if (z.real() < 0.0) return -erf_complex(-z);
    if (z.imag() < 0.0) return std::conj(erf_complex(std::conj(z)));
    // First quadrant: erf(z) = 1 - exp(-z^2) w(iz), Im(iz) = Re z >= 0.
    detail::lcomplex zl(z.real(), z.imag());
    detail::lcomplex e = std::exp(-zl * zl);
    if (!std::isfinite(static_cast<double>(std::abs(e))))
        throw ErfOverflow("erf_complex: exp(-z^2) out of range");
    detail::lcomplex iz = detail::lcomplex(0.0L, 1.0L) * zl;
    detail::lcomplex w = detail::faddeeva_upper(iz);
    detail::lcomplex r = 1.0L - e * w;
    return complex(static_cast<double>(r.real()), static_cast<double>(r.imag()));
}

}  // namespace carpetforge

#endif
