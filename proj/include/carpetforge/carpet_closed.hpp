#ifndef CARPETFORGE_CARPET_CLOSED_HPP
#define CARPETFORGE_CARPET_CLOSED_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "carpetforge/core.hpp"
#include "carpetforge/evolve.hpp"
#include "carpetforge/quadrature.hpp"
#include "carpetforge/special.hpp"
#include "carpetforge/spectra.hpp"
#include "carpetforge/wavepacket.hpp"

namespace carpetforge {

// ---------------------------------------------------------------------------
// Square-well carpet in closed form, in well units xi = x/L, tau = t/T1.
// Each Poisson index l contributes a pair of travelling Gaussians launched
// from the wall at tau = -l, modulated by a (1 - cos * sech) interference
// factor.  The overall constant is fixed by unit probability at tau = 0, not
// by the bookkeeping of the derivation.  Trustworthy while the terms stay
// disjoint; by default the validity mask keeps xi < 1/2.
// ---------------------------------------------------------------------------

struct CarpetClosedParams {
    int nbar = 30;
    double delta_n = 5.0;
    double t1_over_t2 = 1.0 / 60.0;
    double norm = 1.0;          // set by make_carpet_params
    double xi_valid = 0.5;      // validity mask: xi < xi_valid

    double sigma2(double tau) const {
        return sq(1.0 / (2.0 * sq(delta_n))) + sq(2.0 * pi * t1_over_t2 * tau);
    }
    double sigma(double tau) const { return std::sqrt(sigma2(tau)); }
};

namespace detail {

inline int carpet_l_lo(double tau_max) { return -static_cast<int>(std::ceil(tau_max)) - 2; }
inline int carpet_l_hi(double tau_min) { return -static_cast<int>(std::floor(tau_min)) + 2; }

inline double carpet_raw(const CarpetClosedParams& p, double xi, double tau, int l_lo, int l_hi) {
    const double s2 = p.sigma2(tau);
    const double s = std::sqrt(s2);
    const double dn2 = sq(p.delta_n);
    double sum = 0.0;
    for (int l = l_lo; l <= l_hi; ++l) {
        double u = tau + l;
        double gm = std::exp(-(sq(pi) / (2.0 * dn2)) * sq(xi - 2.0 * u) / (2.0 * s2));
        double gp = std::exp(-(sq(pi) / (2.0 * dn2)) * sq(xi + 2.0 * u) / (2.0 * s2));
        double cos_arg = pi * (xi / p.t1_over_t2 -
                               4.0 * sq(pi) * p.t1_over_t2 * tau * xi * u / s2);
        double osc = 1.0 - std::cos(cos_arg) * sech(sq(pi) / dn2 * xi * u / s2);
        sum += (gm + gp) * osc;
        OpCounters::closed_form_terms()++;
    }
    return sum / (2.0 * dn2 * s);
}

}  // namespace detail

// Builds the parameter block from a square-well packet and pins the overall
// constant so that int_0^1 |Psi|^2 dxi = 1 at tau = 0.
inline CarpetClosedParams make_carpet_params(int nbar, double delta_n, double xi_valid = 0.5) {
    if (nbar < 1 || !(delta_n > 0.0)) throw BadParams("make_carpet_params: nbar >= 1, dn > 0");
    CarpetClosedParams p;
    p.nbar = nbar;
    p.delta_n = delta_n;
    p.t1_over_t2 = 1.0 / (2.0 * nbar);
    p.xi_valid = xi_valid;
    double mass = simpson_auto(
        [&](double xi) { return detail::carpet_raw(p, xi, 0.0, -2, 2); }, 0.0, 1.0, 1e-12, 2048);
    if (!(mass > 0.0)) throw QuadratureFail("make_carpet_params: zero mass at tau = 0");
    p.norm = 1.0 / mass;
    return p;
}

inline double isw_carpet_closed(const CarpetClosedParams& p, double xi, double tau) {
    if (xi < 0.0 || xi > 1.0) throw OutOfDomain("isw_carpet_closed: xi in [0,1]");
    int l_lo = detail::carpet_l_lo(tau);
    int l_hi = detail::carpet_l_hi(tau);
    return p.norm * detail::carpet_raw(p, xi, tau, l_lo, l_hi);
}

// Grid over (xi, tau) with the validity mask applied.
inline DensityGrid carpet_closed_grid(const CarpetClosedParams& p, Axis xi_axis, Axis tau_axis) {
    DensityGrid g(xi_axis, tau_axis);
    g.basis_id = "isw carpet closed form";
    g.valid.assign(g.values.size(), 0);
    const int l_lo = detail::carpet_l_lo(tau_axis.hi);
    const int l_hi = detail::carpet_l_hi(tau_axis.lo);
    parallel_for(tau_axis.n, [&](int it) {
        double tau = tau_axis.at(it);
        for (int ix = 0; ix < xi_axis.n; ++ix) {
            double xi = xi_axis.at(ix);
            g.at(it, ix) = p.norm * detail::carpet_raw(p, xi, tau, l_lo, l_hi);
            g.valid[static_cast<size_t>(it) * xi_axis.n + ix] = (xi < p.xi_valid) ? 1 : 0;
        }
    });
    return g;
}

// alpha(A) = arcsech(exp(-A^2/2)): the sech half-width that matches a
// Gaussian of the same center at y = +-A sigma.
inline double sech_gauss_alpha(double A) {
    if (!(A > 0.0)) throw BadParams("sech_gauss_alpha: A > 0");
    return arcsech(std::exp(-0.5 * A * A));
}

enum class DephaseBranch { Lower, Upper };

// tau(xi) above which the interference factor overlaps the travelling
// Gaussian at the A-sigma matching level.
inline double dephase_curve(const CarpetClosedParams& p, double xi, double A,
                            DephaseBranch branch) {
    if (!(xi > 0.0) || xi > 1.0) throw BadParams("dephase_curve: xi in (0, 1]");
    if (!(A > 0.0)) throw BadParams("dephase_curve: A > 0");
    double al = sech_gauss_alpha(A);
    double sgn = (branch == DephaseBranch::Lower) ? -1.0 : 1.0;
    double bracket = 1.0 + al / sq(A) + sgn * std::sqrt(1.0 + 2.0 * al / sq(A));
    double rad = sq(pi * A * xi / al) * bracket - 1.0 / (2.0 * sq(p.delta_n));
    if (rad < 0.0) throw RegimeError("dephase_curve: packet narrower than the geometric term");
    return std::sqrt(2.0) / (4.0 * pi * p.delta_n) / p.t1_over_t2 * std::sqrt(rad);
}

// ---------------------------------------------------------------------------
// WKB + Poisson propagation for generic wells.
//
// The eigenfunction is modelled as cos(int_{xl}^x p_k dx' - mu pi/4) /
// sqrt(p_k) with mu = 2 at a hard wall and 1 at a smooth turning point, and
// all k-dependence (accumulated phase, energy, normalized amplitude) is
// Taylor-expanded around the packet center.  Each Poisson image l then
// reduces to a pair of Gaussian integrals in k.
// ---------------------------------------------------------------------------

struct WkbPropagator {
    // Taylor data sampled on an x grid
    std::vector<double> xs;
    std::vector<double> phi0, phi1, phi2;  // phase integral and k-derivatives
    std::vector<double> p0;                // local momentum at k = 0
    double e0 = 0, e1 = 0, e2 = 0;
    double c1 = 0;                         // d/dk of the log normalization
    double sigma_n = 1.0;
    double mu = 1.0;                       // turning-point phase index
    int prefactor_order = 1;               // 0 or 1
    double x_lo = 0, x_hi = 0;
    double norm = 1.0;

    double interp(const std::vector<double>& f, double x) const {
        double t = (x - x_lo) / (x_hi - x_lo) * (xs.size() - 1);
        int i = std::clamp(static_cast<int>(t), 0, static_cast<int>(xs.size()) - 2);
        double w = t - i;
        return f[i] * (1.0 - w) + f[i + 1] * w;
    }

    complex evaluate(double x, double t) const {
        if (x < x_lo || x > x_hi)
            throw TurningPointTooClose("wkb propagation: x too close to a turning point");
        double F0 = interp(phi0, x), F1 = interp(phi1, x), F2 = interp(phi2, x);
        double P0 = interp(p0, x);
        double rho1 = c1 - e1 / (4.0 * P0 * P0);

        complex total(0.0, 0.0);
        for (double sgn : {1.0, -1.0}) {  // e^{+i(Phi - mu pi/4)} ray and its conjugate
            // exponent in k: i sgn (F1 k + F2 k^2/2) - i (e1 k + e2 k^2/2) t - 2 pi i k l
            complex a(1.0 / (2.0 * sq(sigma_n)), -0.5 * (sgn * F2 - e2 * t));
            double rate = sgn * F1 - e1 * t;  // beta = i (rate - 2 pi l)
            // |exp(beta^2/4a)| = exp(-u^2/(8 sigma^2 |a|^2)) for beta = i u
            double umax = std::sqrt(40.0 * 8.0 * sq(sigma_n) * std::norm(a));
            int lspan = static_cast<int>(std::ceil(umax / (2.0 * pi))) + 1;
            int l0 = static_cast<int>(std::lround(rate / (2.0 * pi)));
            complex carrier = std::exp(complex(0.0, sgn * (F0 - mu * pi / 4.0) - e0 * t)) /
                              (2.0 * std::sqrt(P0));
            for (int l = l0 - lspan; l <= l0 + lspan; ++l) {
                complex beta(0.0, rate - 2.0 * pi * l);
                complex moment = 1.0;
                if (prefactor_order >= 1) moment += rho1 * beta / (2.0 * a);
                total += carrier * moment * std::sqrt(pi / a) * std::exp(beta * beta / (4.0 * a));
                OpCounters::closed_form_terms()++;
            }
        }
        return norm * total;
    }

    double density(double x, double t) const { return std::norm(evaluate(x, t)); }
};

// Builds the propagator for a Gaussian packet: Taylor data from the exact
// spectrum and quadrature of the accumulated WKB phase, normalization from
// unit probability at t = 0 over the usable window.
//
// The phase is referenced at whichever turning point the basis's exact
// eigenfunctions approach with an n-independent sign (the square well's
// sines from the left, the Morse tails from the right); referencing the
// other side would flip alternate modes and displace the packet by half a
// classical period.
inline WkbPropagator wkb_poisson_propagate(const Eigenbasis& basis, const PacketSpec& packet,
                                           int grid_points = 2049, double margin_frac = 0.05,
                                           int prefactor_order = 1) {
    if (packet.kind != PacketKind::GaussianN)
        throw BadParams("wkb_poisson_propagate: needs a Gaussian packet");
    WkbPropagator w;
    w.sigma_n = packet.width_param;
    w.prefactor_order = prefactor_order;
    w.mu = (basis.kind() == PotentialKind::ISW) ? 2.0 : 1.0;

    const int nbar = packet.nbar;
    double E[3];
    for (int k = -1; k <= 1; ++k) E[k + 1] = basis.energy(nbar + k);
    w.e0 = E[1];
    w.e1 = 0.5 * (E[2] - E[0]);
    w.e2 = E[2] - 2.0 * E[1] + E[0];

    // turning points per k; hard walls stay put
    auto turns = [&](int n) -> std::pair<double, double> {
        if (basis.kind() == PotentialKind::ISW) return {basis.hard_lo(), basis.hard_hi()};
        return detail::turning_points(basis, basis.energy(n));
    };
    auto [xl0, xr0] = turns(nbar);
    double width = xr0 - xl0;
    w.x_lo = xl0 + margin_frac * width;
    w.x_hi = xr0 - margin_frac * width;

    // pick the reference side: where do adjacent modes keep one sign?
    bool ref_right = false;
    {
        double probe_r = xr0 - 0.02 * width;
        double probe_l = xl0 + 0.02 * width;
        auto consistent = [&](double x) {
            double s0 = basis.psi(nbar - 1, x), s1 = basis.psi(nbar, x), s2 = basis.psi(nbar + 1, x);
            return s0 * s1 > 0.0 && s1 * s2 > 0.0;
        };
        if (!consistent(probe_l) && consistent(probe_r)) ref_right = true;
    }

    // accumulated phase from the reference turning point for k = -1, 0, 1
    std::vector<std::vector<double>> Phi(3);
    w.xs.resize(grid_points);
    for (int i = 0; i < grid_points; ++i)
        w.xs[i] = w.x_lo + (w.x_hi - w.x_lo) * i / (grid_points - 1);
    for (int k = -1; k <= 1; ++k) {
        auto [xl, xr] = turns(nbar + k);
        double e = basis.energy(nbar + k);
        Phi[k + 1].resize(grid_points);
        // cumulative integral: singular start handled by the cosine map on
        // the first stretch, plain Simpson afterwards
        auto pfun = [&](double x) {
            double v = e - basis.potential(x);
            return v > 0.0 ? std::sqrt(v) : 0.0;
        };
        auto edge_piece = [&](double from, double to) {
            // int_{from}^{to} p dx with a sqrt zero of p at 'from' (or 'to')
            double half = 0.5 * (to - from);
            return simpson_auto(
                [&](double th) {
                    double x = from + half * (1.0 - std::cos(th));
                    return pfun(x) * half * std::sin(th);
                },
                0.0, pi, 1e-12, 256);
        };
        if (!ref_right) {
            double acc = edge_piece(xl, w.xs[0]);
            Phi[k + 1][0] = acc;
            for (int i = 1; i < grid_points; ++i) {
                acc += simpson(pfun, w.xs[i - 1], w.xs[i], 16);
                Phi[k + 1][i] = acc;
            }
        } else {
            double acc = edge_piece(w.xs[grid_points - 1], xr);
            Phi[k + 1][grid_points - 1] = acc;
            for (int i = grid_points - 2; i >= 0; --i) {
                acc += simpson(pfun, w.xs[i], w.xs[i + 1], 16);
                Phi[k + 1][i] = acc;
            }
        }
    }
    w.phi0 = Phi[1];
    w.phi1.resize(grid_points);
    w.phi2.resize(grid_points);
    w.p0.resize(grid_points);
    for (int i = 0; i < grid_points; ++i) {
        w.phi1[i] = 0.5 * (Phi[2][i] - Phi[0][i]);
        w.phi2[i] = Phi[2][i] - 2.0 * Phi[1][i] + Phi[0][i];
        double v = w.e0 - basis.potential(w.xs[i]);
        if (!(v > 0.0)) throw TurningPointTooClose("wkb grid reached the forbidden region");
        w.p0[i] = std::sqrt(v);
    }

    // normalization slope: C(k) = (2 dA/dE at E_k)^{-1/2} with A the action,
    // so d ln C/dk = -E'(nbar) A''(E0) / (2 A'(E0)); action derivatives by
    // 4th-order differences of the smooth action integral
    {
        auto act = [&](double e) {
            if (basis.kind() == PotentialKind::ISW)
                return std::sqrt(e) * (basis.hard_hi() - basis.hard_lo());
            auto [xl, xr] = detail::turning_points(basis, e);
            return action_integral([&](double x) { return basis.potential(x); }, e, xl, xr,
                                   1e-12);
        };
        double d = 5e-3 * std::abs(w.e1);
        double a_m2 = act(w.e0 - 2 * d), a_m1 = act(w.e0 - d), a_p1 = act(w.e0 + d),
               a_p2 = act(w.e0 + 2 * d);
        double a0 = act(w.e0);
        double dA = (-a_p2 + 8.0 * a_p1 - 8.0 * a_m1 + a_m2) / (12.0 * d);
        double d2A = (-a_p2 + 16.0 * a_p1 - 30.0 * a0 + 16.0 * a_m1 - a_m2) / (12.0 * d * d);
        w.c1 = -0.5 * w.e1 * d2A / dA;
    }

    // unit probability at t = 0 over the usable window
    w.norm = 1.0;
    double mass = simpson_auto([&](double x) { return w.density(x, 0.0); }, w.x_lo, w.x_hi,
                               1e-10, 2048);
    if (!(mass > 0.0)) throw QuadratureFail("wkb_poisson_propagate: zero mass at t = 0");
    w.norm = 1.0 / std::sqrt(mass);
    return w;
}

}  // namespace carpetforge

#endif
