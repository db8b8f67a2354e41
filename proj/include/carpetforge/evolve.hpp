#ifndef CARPETFORGE_EVOLVE_HPP
#define CARPETFORGE_EVOLVE_HPP

#include <cmath>
#include <vector>

#include "carpetforge/core.hpp"
#include "carpetforge/quadrature.hpp"
#include "carpetforge/spectra.hpp"
#include "carpetforge/wavepacket.hpp"

namespace carpetforge {

// Direct eigenfunction-sum propagator: Psi(x,t) = sum_n c_n psi_n(x) e^{-i E_n t}.
// This is the ground-truth oracle every closed form is checked against.
inline complex psi_direct(const Eigenbasis& basis, const PacketSpec& packet, double x, double t) {
    complex acc(0.0, 0.0);
    for (int k = packet.k_min; k <= packet.k_max; ++k) {
        complex c = packet.c(k);
        if (c == complex(0.0, 0.0)) continue;
        int n = packet.nbar + k;
        double e = basis.energy(n);
        acc += c * basis.psi(n, x) * std::exp(complex(0.0, -e * t));
        OpCounters::eigenmode_terms()++;
    }
    return acc;
}

// Rows are computed independently (and possibly concurrently); each cell is
// the same accumulation psi_direct performs, so grid and pointwise values
// agree bit for bit.
inline DensityGrid density_grid(const Eigenbasis& basis, const PacketSpec& packet, Axis x_axis,
                                Axis t_axis) {
    if (x_axis.n < 1 || t_axis.n < 1) throw BadParams("density_grid: axes need >= 1 sample");
    if (x_axis.lo < basis.x_lo() - 1e-12 || x_axis.hi > basis.x_hi() + 1e-12)
        throw OutOfDomain("density_grid: x range exceeds basis domain");
    DensityGrid g(x_axis, t_axis);
    g.basis_id = basis.id();
    g.packet_id = packet.id();
    parallel_for(t_axis.n, [&](int it) {
        double t = t_axis.at(it);
        for (int ix = 0; ix < x_axis.n; ++ix)
            g.at(it, ix) = std::norm(psi_direct(basis, packet, x_axis.at(ix), t));
    });
    return g;
}

struct Observables {
    double norm = 0.0;
    double mean_x = 0.0;
    double mean_p = 0.0;
    double ehrenfest_residual = 0.0;
};

namespace detail {

// 4th-order first derivative of complex samples on a uniform grid.
inline complex d1_c4(const std::vector<complex>& f, int i, double h) {
    return (-f[i + 2] + 8.0 * f[i + 1] - 8.0 * f[i - 1] + f[i - 2]) / (12.0 * h);
}

struct MomentSet {
    double norm, mean_x, mean_p;
};

inline MomentSet moments_at(const Eigenbasis& basis, const PacketSpec& packet, double t, int nx) {
    double a = basis.x_lo(), b = basis.x_hi();
    double h = (b - a) / (nx - 1);
    std::vector<complex> f(nx);
    for (int i = 0; i < nx; ++i) f[i] = psi_direct(basis, packet, a + i * h, t);

    std::vector<double> dens(nx), xdens(nx), pdens(nx, 0.0);
    for (int i = 0; i < nx; ++i) {
        dens[i] = std::norm(f[i]);
        xdens[i] = (a + i * h) * dens[i];
    }
    for (int i = 2; i < nx - 2; ++i)
        pdens[i] = (std::conj(f[i]) * (complex(0.0, -1.0) * d1_c4(f, i, h))).real();

    auto integrate = [&](const std::vector<double>& v) {
        // composite Simpson over the sample array
        double s = v[0] + v[nx - 1];
        for (int i = 1; i < nx - 1; ++i) s += v[i] * ((i % 2) ? 4.0 : 2.0);
        return s * h / 3.0;
    };
    return {integrate(dens), integrate(xdens), integrate(pdens)};
}

}  // namespace detail

// norm, <x>, <p> (via -i d/dx on a 4096-point grid), and the Ehrenfest
// residual | d<p>/dt - <-dV/dx> | with the time derivative taken by a
// symmetric difference of step 1e-4 T_cl.
inline Observables observables(const Eigenbasis& basis, const PacketSpec& packet, double t,
                               int nx = 4096) {
    if (!std::isfinite(t)) throw BadParams("observables: t must be finite");
    if (nx % 2 == 0) ++nx;  // Simpson needs an even panel count
    auto m = detail::moments_at(basis, packet, t, nx);

    double t1 = std::abs(timescales(basis, packet.nbar, 2).t_cl());
    double dt = 1e-4 * t1;
    auto mp = detail::moments_at(basis, packet, t + dt, nx);
    auto mm = detail::moments_at(basis, packet, t - dt, nx);
    double dpdt = (mp.mean_p - mm.mean_p) / (2.0 * dt);

    // <-dV/dx>
    double a = basis.x_lo(), b = basis.x_hi();
    double h = (b - a) / (nx - 1);
    std::vector<double> fv(nx);
    for (int i = 0; i < nx; ++i) {
        double x = a + i * h;
        fv[i] = -basis.potential_derivative(x) * std::norm(psi_direct(basis, packet, x, t));
    }
    double s = fv[0] + fv[nx - 1];
    for (int i = 1; i < nx - 1; ++i) s += fv[i] * ((i % 2) ? 4.0 : 2.0);
    double force = s * h / 3.0;

    Observables out;
    out.norm = m.norm;
    out.mean_x = m.mean_x / m.norm;
    out.mean_p = m.mean_p / m.norm;
    out.ehrenfest_residual = std::abs(dpdt - force);
    return out;
}

}  // namespace carpetforge

#endif
