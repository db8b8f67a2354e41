#ifndef CARPETFORGE_QUADRATURE_HPP
#define CARPETFORGE_QUADRATURE_HPP

#include <cmath>
#include <functional>

#include "carpetforge/core.hpp"

namespace carpetforge {

// Composite Simpson with a fixed panel count (panels must be even).
template <typename F>
double simpson(const F& f, double a, double b, int panels) {
    if (panels % 2) ++panels;
    const double h = (b - a) / panels;
    double sum = f(a) + f(b);
    for (int i = 1; i < panels; ++i) sum += f(a + h * i) * ((i % 2) ? 4.0 : 2.0);
    return sum * h / 3.0;
}

// Composite Simpson, panel count doubled until successive estimates agree.
// Starts at 4096 panels, the default resolution everywhere in the library.
// abs_tol guards integrals whose true value is negligibly small.
template <typename F>
double simpson_auto(const F& f, double a, double b, double rel_tol = 1e-10,
                    int start_panels = 4096, int max_panels = 1 << 20, double abs_tol = 0.0) {
    double prev = simpson(f, a, b, start_panels);
    for (int n = start_panels * 2; n <= max_panels; n *= 2) {
        double cur = simpson(f, a, b, n);
        double scale = std::max({std::abs(cur), std::abs(prev), 1e-300});
        if (std::abs(cur - prev) <= rel_tol * scale + abs_tol) return cur;
        prev = cur;
    }
    throw QuadratureFail("simpson_auto: no convergence");
}

template <typename F>
complex simpson_complex(const F& f, double a, double b, int panels) {
    if (panels % 2) ++panels;
    const double h = (b - a) / panels;
    complex sum = f(a) + f(b);
    for (int i = 1; i < panels; ++i) sum += f(a + h * i) * ((i % 2) ? 4.0 : 2.0);
    return sum * (h / 3.0);
}

namespace detail {

template <typename F>
double adaptive_simpson_rec(const F& f, double a, double b, double fa, double fm, double fb,
                            double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    if (depth <= 0) throw QuadratureFail("adaptive_simpson: depth exhausted");
    if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

// Locally adaptive Simpson with an absolute tolerance; handles integrands
// whose scale varies by many orders across the interval.
template <typename F>
double adaptive_simpson(const F& f, double a, double b, double abs_tol, int depth = 48) {
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, abs_tol, depth);
}

// Bisection root solve of a sign-changing continuous function.
template <typename F>
double bisect(const F& f, double lo, double hi, double tol = 1e-13, int max_iter = 200) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0)) throw NoConvergence("bisect: no sign change in bracket");
    for (int i = 0; i < max_iter; ++i) {
        double mid = 0.5 * (lo + hi);
        double fm = f(mid);
        if (fm == 0.0 || (hi - lo) < tol * std::max(1.0, std::abs(mid))) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Action integral between turning points: int sqrt(E - V) dx with inverse
// square-root behaviour at both ends.  The cosine substitution
// x = xl + (xr-xl)(1-cos th)/2 removes the endpoint singularities, after
// which plain Simpson refinement converges fast.
template <typename VFun>
double action_integral(const VFun& V, double E, double xl, double xr, double rel_tol = 1e-12) {
    const double half = 0.5 * (xr - xl);
    auto g = [&](double th) {
        double x = xl + half * (1.0 - std::cos(th));
        double p2 = E - V(x);
        if (p2 < 0.0) p2 = 0.0;  // roundoff at the very ends
        return std::sqrt(p2) * half * std::sin(th);
    };
    double coarse = simpson(g, 0.0, pi, 256);
    double scale = std::max(std::abs(coarse), 1e-3);
    return adaptive_simpson(g, 0.0, pi, rel_tol * scale);
}

}  // namespace carpetforge

#endif
