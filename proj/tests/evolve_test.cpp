#include <cmath>
#include <random>

#include "doctest.h"
#include "carpetforge/evolve.hpp"
#include "test_helpers.hpp"

using namespace carpetforge;

TEST_CASE("stationary state density is static") {
    Eigenbasis isw(PotentialKind::ISW, {{"L", 1.0}});
    auto p = explicit_packet(7, 0, {complex(1.0, 0.0)});
    for (double x : {0.13, 0.5, 0.77}) {
        double d0 = std::norm(psi_direct(isw, p, x, 0.0));
        for (double t : {0.3, 1.7, 9.2})
            CHECK(std::abs(std::norm(psi_direct(isw, p, x, t)) - d0) < 1e-12);
    }
}

TEST_CASE("square well density revives exactly at T_R") {
    Eigenbasis isw(PotentialKind::ISW, {{"L", 1.0}});
    auto p = gaussian_packet(12, 2.0);
    double tr = timescales(isw, 12, 2).t_rev();
    for (double x : {0.1, 0.37, 0.62, 0.9})
        CHECK(std::abs(std::norm(psi_direct(isw, p, x, tr)) -
                       std::norm(psi_direct(isw, p, x, 0.0))) < 1e-10);
}

TEST_CASE("two-level beat period") {
    Eigenbasis isw(PotentialKind::ISW, {{"L", 1.0}});
    auto p = explicit_packet(1, 0, {complex(1.0, 0.0), complex(1.0, 0.0)});  // n = 1, 2
    double period = 2.0 * pi / (isw.energy(2) - isw.energy(1));
    CHECK(period == doctest::Approx(2.0 / (3.0 * pi)).epsilon(1e-13));
    for (double x : {0.2, 0.6}) {
        for (double t : {0.05, 0.31}) {
            CHECK(std::norm(psi_direct(isw, p, x, t)) ==
                  doctest::Approx(std::norm(psi_direct(isw, p, x, t + period))).epsilon(1e-10));
        }
    }
}

TEST_CASE("grid values match pointwise evaluation bit for bit") {
    Eigenbasis isw(PotentialKind::ISW, {{"L", 1.0}});
    auto p = gaussian_packet(20, 2.0);
    Axis x{0.0, 1.0, 33};
    Axis t{0.0, 0.01, 7};
    DensityGrid g = density_grid(isw, p, x, t);
    for (int it = 0; it < t.n; ++it)
        for (int ix = 0; ix < x.n; ++ix) {
            double v = std::norm(psi_direct(isw, p, x.at(ix), t.at(it)));
            CHECK(g.at(it, ix) == v);
            CHECK(g.at(it, ix) >= 0.0);
        }
    // degenerate 1x1 grid
    DensityGrid one = density_grid(isw, p, Axis{0.4, 0.4, 1}, Axis{0.2, 0.2, 1});
    CHECK(one.at(0, 0) == std::norm(psi_direct(isw, p, 0.4, 0.2)));
    CHECK_THROWS_AS(density_grid(isw, p, Axis{-1.0, 2.0, 16}, t), OutOfDomain);
}

TEST_CASE("row-integrated probability is conserved") {
    Eigenbasis isw(PotentialKind::ISW, {{"L", 1.0}}, 128);
    auto p = gaussian_packet(40, 2.0);
    double tr = timescales(isw, 40, 2).t_rev();
    for (double frac : {0.0, 0.17, 0.5, 0.83, 1.0}) {
        double nrm = testutil::trapezoid(
            [&](double x) { return std::norm(psi_direct(isw, p, x, frac * tr)); }, 0.0, 1.0, 8192);
        CHECK(std::abs(nrm - 1.0) < 1e-6);
    }
}

TEST_CASE("time reversal for real coefficients") {
    Eigenbasis isw(PotentialKind::ISW, {{"L", 1.0}});
    auto p = gaussian_packet(25, 3.0);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> ux(0.02, 0.98), ut(0.0, 0.3);
    for (int i = 0; i < 40; ++i) {
        double x = ux(rng), t = ut(rng);
        CHECK(std::abs(std::norm(psi_direct(isw, p, x, -t)) -
                       std::norm(psi_direct(isw, p, x, t))) < 1e-10);
    }
}

TEST_CASE("norm at random times stays unit") {
    Eigenbasis sho(PotentialKind::SHO, {{"omega", 1.0}}, 40);
    auto p = gaussian_packet(6, 2.0);
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> ut(0.0, 20.0);
    for (int i = 0; i < 50; ++i) {
        auto o = observables(sho, p, ut(rng), 2049);
        CHECK(std::abs(o.norm - 1.0) < 1e-6);
    }
}

TEST_CASE("stationary state observables") {
    Eigenbasis sho(PotentialKind::SHO, {{"omega", 1.0}}, 40);
    auto p = explicit_packet(6, 0, {complex(1.0, 0.0)});
    auto o = observables(sho, p, 0.37);
    CHECK(std::abs(o.mean_p) < 1e-10);
    CHECK(o.ehrenfest_residual < 1e-6);
}

TEST_CASE("force balance holds across a period for an oscillator packet") {
    Eigenbasis sho(PotentialKind::SHO, {{"omega", 1.0}}, 40);
    auto p = gaussian_packet(6, 2.0);
    double maxforce = 0.0, worst = 0.0;
    for (int i = 0; i < 10; ++i) {
        double t = 2.0 * pi * i / 10.0;
        auto o = observables(sho, p, t, 2049);
        worst = std::max(worst, o.ehrenfest_residual);
        maxforce = std::max(maxforce, std::abs(o.mean_x));  // |<dV/dx>| = w^2 |<x>|
    }
    CHECK(worst < 1e-4 * maxforce);
}

TEST_CASE("oscillator packet peak follows a cosine") {
    Eigenbasis sho(PotentialKind::SHO, {{"omega", 1.0}}, 40);
    auto p = gaussian_packet(6, 2.0);

    // the mean position obeys the classical law exactly
    double x0 = observables(sho, p, 0.0, 2049).mean_x;
    for (int i = 1; i <= 8; ++i) {
        double t = 2.0 * pi * i / 8.0;
        CHECK(std::abs(observables(sho, p, t, 2049).mean_x - x0 * std::cos(t)) < 1e-10);
    }

    // row peaks, least-squares cosine
    auto fit_and_deviate = [&](int nx, double* worst, double* amp) {
        Axis xax{-8.0, 8.0, nx};
        Axis tax{0.0, 6.0 * pi, 96};
        DensityGrid g = density_grid(sho, p, xax, tax);
        double S[2][2] = {}, rhs[2] = {};
        std::vector<double> peaks(tax.n);
        for (int it = 0; it < tax.n; ++it) {
            std::vector<double> row(xax.n);
            for (int ix = 0; ix < xax.n; ++ix) row[ix] = g.at(it, ix);
            peaks[it] = testutil::peak_position(row, xax.lo, xax.step());
            double b[2] = {std::cos(tax.at(it)), 1.0};
            for (int a = 0; a < 2; ++a) {
                for (int c = 0; c < 2; ++c) S[a][c] += b[a] * b[c];
                rhs[a] += b[a] * peaks[it];
            }
        }
        double det = S[0][0] * S[1][1] - S[0][1] * S[1][0];
        double ca = (rhs[0] * S[1][1] - rhs[1] * S[0][1]) / det;
        double cb = (S[0][0] * rhs[1] - S[1][0] * rhs[0]) / det;
        *amp = std::abs(ca);
        *worst = 0.0;
        for (int it = 0; it < tax.n; ++it)
            *worst = std::max(*worst, std::abs(peaks[it] - (ca * std::cos(tax.at(it)) + cb)));
    };

    double worst_fine = 0.0, amp = 0.0;
    fit_and_deviate(384, &worst_fine, &amp);
    CHECK(worst_fine < 0.05 * (2.0 * amp));  // within 5% of the swing on a fine grid

    double worst_coarse = 0.0, amp2 = 0.0;
    fit_and_deviate(32, &worst_coarse, &amp2);
    CHECK(worst_coarse < 0.5 * (16.0 / 31.0));  // half a cell at render resolution
}
