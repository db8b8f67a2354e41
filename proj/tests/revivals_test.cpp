#include <cmath>
#include <random>

#include "doctest.h"
#include "carpetforge/evolve.hpp"
#include "carpetforge/revivals.hpp"
#include "test_helpers.hpp"

using namespace carpetforge;

TEST_CASE("fractions auto-reduce") {
    Fraction f(6, 8);
    CHECK(f.p == 3);
    CHECK(f.q == 4);
    CHECK(Fraction(0, 7).q == 1);
    CHECK_THROWS_AS(Fraction(1, 0), BadParams);
}

TEST_CASE("revival period classes") {
    auto [l5, c5] = revival_period(Fraction(1, 5));
    CHECK(l5 == 5);
    CHECK(c5 == QClass::Odd);
    auto [l4, c4] = revival_period(Fraction(1, 4));
    CHECK(l4 == 2);
    CHECK(c4 == QClass::MultiplePowersOf2);
    auto [l2, c2] = revival_period(Fraction(1, 2));
    CHECK(l2 == 2);
    CHECK(c2 == QClass::OnePowerOf2);
    auto [l6, c6] = revival_period(Fraction(5, 6));
    CHECK(l6 == 6);
    CHECK(c6 == QClass::OnePowerOf2);
}

TEST_CASE("coefficient tables for small denominators") {
    // q = 5: phase ladder between the five coefficients
    // Two equal coefficient pairs on a 2 pi / 5 phase ladder: {a2, a3} one
    // step from a0 and {a1, a4} four steps, with a single consistent
    // conjugation sign (the generating sum fixes it to +).
    auto d = revival_coefficients(Fraction(1, 5));
    auto ratio = [&](int m) { return d.a[m] / d.a[0]; };
    CHECK(std::abs(ratio(2) - ratio(3)) < 1e-12);
    CHECK(std::abs(ratio(1) - ratio(4)) < 1e-12);
    CHECK(std::abs(ratio(2) - std::exp(complex(0, 2 * pi / 5))) < 1e-12);
    CHECK(std::abs(ratio(1) - std::exp(complex(0, 2 * pi * 4 / 5))) < 1e-12);
    for (auto& a : d.a) CHECK(std::abs(a) == doctest::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-12));

    auto h = revival_coefficients(Fraction(1, 2));
    CHECK(std::abs(h.a[0]) < 1e-14);
    CHECK(std::abs(h.a[1] - complex(1.0, 0.0)) < 1e-12);

    auto q4 = revival_coefficients(Fraction(1, 4));
    CHECK(std::abs(q4.a[0] - complex(0.5, -0.5)) < 1e-12);
    CHECK(std::abs(q4.a[1] - complex(0.5, 0.5)) < 1e-12);
}

TEST_CASE("parseval, pairing, and route agreement up to q = 64") {
    for (long long q = 1; q <= 64; ++q) {
        for (long long p = 0; p <= (q == 1 ? 1 : q - 1); ++p) {
            if (std::gcd(p, q) != 1) continue;
            Fraction f(p, q);
            auto d = revival_coefficients(f);  // throws RecurrenceMismatch on divergence
            double parseval = 0.0;
            for (auto& a : d.a) parseval += std::norm(a);
            INFO(f.str());
            CHECK(std::abs(parseval - 1.0) < 1e-12);

            // pairing: a_{m(n)} = a_{m(-n)} and indices cancel mod l
            for (long long n = 0; n <= 2 * d.l; ++n) {
                long long mp = d.pairing(n), mm = d.pairing(-n);
                CHECK((mp + mm) % d.l == 0);
                CHECK(std::abs(d.a[mp] - d.a[mm]) < 1e-12);
            }

            // class-dependent modulus structure
            if (d.q_class == QClass::OnePowerOf2) {
                for (long long m = 0; m < d.l; m += 2) CHECK(std::abs(d.a[m]) < 1e-12);
            } else {
                for (auto& a : d.a)
                    CHECK(std::abs(a) == doctest::Approx(1.0 / std::sqrt(double(d.l))).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("classicized wavefunction basics") {
    Eigenbasis isw(PotentialKind::ISW, {{"L", 1.0}}, 128);
    auto pk = gaussian_packet(40, 2.0);
    for (double x : {0.21, 0.5, 0.84})
        CHECK(std::abs(psi_cl(isw, pk, x, 0.0) - psi_direct(isw, pk, x, 0.0)) < 1e-12);
    // exactly periodic with the classical period
    double t1 = timescales(isw, 40, 2).t_cl();
    for (double x : {0.3, 0.6})
        CHECK(std::abs(psi_cl(isw, pk, x, 0.4 * t1 + t1) - psi_cl(isw, pk, x, 0.4 * t1)) < 1e-10);
}

TEST_CASE("square-well classicized packet does not disperse") {
    Eigenbasis isw(PotentialKind::ISW, {{"L", 1.0}}, 2048);
    auto pk = spatial_gaussian_packet(isw, 1.0 / 3.0, 0.02);
    double t1 = timescales(isw, pk.nbar, 2).t_cl();

    // sample instants where the two counter-movers are well separated:
    // movers sit at the odd reflections of x0 -+ 2 L t / T_cl
    auto mover = [&](double x0, double v, double t) {
        double u = std::fmod(std::fmod(x0 + v * t, 2.0) + 2.0, 2.0);
        return u <= 1.0 ? u : 2.0 - u;
    };
    const int nx = 2048;
    std::vector<double> widths;
    for (int j = 0; j < 40; ++j) {
        double t = 5.0 * t1 * j / 40.0;
        double xa = mover(1.0 / 3.0, 2.0 / t1 * 1.0, t), xb = mover(1.0 / 3.0, -2.0 / t1, t);
        if (std::abs(xa - xb) < 0.25 || std::min({xa, xb}) < 0.1 || std::max({xa, xb}) > 0.9)
            continue;
        std::vector<double> row(nx);
        for (int i = 0; i < nx; ++i)
            row[i] = std::norm(psi_cl(isw, pk, (i + 0.5) / nx, t));
        // full width at half maximum of the tallest peak, linear interpolation
        int best = 0;
        for (int i = 1; i < nx; ++i)
            if (row[i] > row[best]) best = i;
        double half = 0.5 * row[best];
        int ilo = best, ihi = best;
        while (ilo > 0 && row[ilo] > half) --ilo;
        while (ihi < nx - 1 && row[ihi] > half) ++ihi;
        double flo = ilo + (half - row[ilo]) / (row[ilo + 1] - row[ilo]);
        double fhi = ihi - (half - row[ihi]) / (row[ihi - 1] - row[ihi]);
        widths.push_back((fhi - flo) / nx);
    }
    REQUIRE(widths.size() >= 10);
    double wmin = widths[0], wmax = widths[0];
    for (double w : widths) {
        wmin = std::min(wmin, w);
        wmax = std::max(wmax, w);
    }
    CHECK((wmax - wmin) / wmin < 0.02);  // constant width across five periods
}

TEST_CASE("fractional reconstruction is exact on the quadratic spectrum at dt = 0") {
    Eigenbasis isw(PotentialKind::ISW, {{"L", 1.0}}, 128);
    auto pk = gaussian_packet(40, 2.0);
    Timescales ts = timescales(isw, 40, 2);
    for (Fraction f : {Fraction(0, 1), Fraction(1, 3), Fraction(3, 8), Fraction(1, 2)}) {
        auto d = revival_coefficients(f);
        double t = f.value() * ts.t_rev();
        double worst = 0.0, amp = 0.0;
        for (int i = 0; i < 128; ++i) {
            double x = (i + 0.5) / 128.0;
            complex rec = reconstruct_at_fraction(isw, pk, d, 0.0, x);
            complex paired = reconstruct_at_fraction_paired(isw, pk, d, 0.0, x);
            CHECK(std::abs(rec - paired) < 1e-10);  // folded bookkeeping is the same sum
            complex dir = psi_direct(isw, pk, x, t);
            worst = std::max(worst, std::abs(std::abs(rec) - std::abs(dir)));
            amp = std::max(amp, std::abs(dir));
        }
        INFO(f.str());
        CHECK(worst / amp < 1e-9);
    }
}

TEST_CASE("identity decomposition at p/q = 0/1") {
    auto d = revival_coefficients(Fraction(0, 1));
    CHECK(d.l == 1);
    CHECK(std::abs(d.a[0] - complex(1.0, 0.0)) < 1e-14);
}

TEST_CASE("reconstruction error grows with dt") {
    Eigenbasis morse(PotentialKind::Morse, {{"A", 10.0}, {"B", 10.0}, {"alpha", 1.0}});
    auto pk = gaussian_packet_for(morse, 4, 1.0);
    Timescales ts = timescales(morse, 4, 2);
    Fraction f(1, 3);
    auto d = revival_coefficients(f);
    auto err_at = [&](double dt) {
        double t = f.value() * ts.t_rev() + dt;
        double worst = 0.0, amp = 0.0;
        for (int i = 0; i < 96; ++i) {
            double x = morse.x_lo() + (morse.x_hi() - morse.x_lo()) * (i + 0.5) / 96.0;
            complex rec = reconstruct_at_fraction(morse, pk, d, dt, x);
            complex dir = psi_direct(morse, pk, x, t);
            worst = std::max(worst, std::abs(std::abs(rec) - std::abs(dir)));
            amp = std::max(amp, std::abs(dir));
        }
        return worst / amp;
    };
    double t1 = std::abs(ts.t_cl());
    double e0 = err_at(t1 / 100.0), e1 = err_at(t1 / 30.0), e2 = err_at(t1 / 10.0);
    CHECK(e0 < e1);
    CHECK(e1 < e2);
}

TEST_CASE("square-well translation decomposition") {
    Eigenbasis isw(PotentialKind::ISW, {{"L", 1.0}}, 1024);
    auto pk = spatial_gaussian_packet(isw, 0.5, 0.003);
    double tr = 2.0 / pi;

    SUBCASE("half revival is a single unit-weight shift by L") {
        auto parts = isw_translation_decomposition(isw, Fraction(1, 2));
        REQUIRE(parts.size() == 1);
        CHECK(parts[0].shift == doctest::Approx(1.0));
        CHECK(std::abs(parts[0].weight - complex(1.0, 0.0)) < 1e-12);
    }
    SUBCASE("identity fraction") {
        auto parts = isw_translation_decomposition(isw, Fraction(0, 1));
        REQUIRE(parts.size() == 1);
        CHECK(parts[0].shift == 0.0);
        CHECK(std::abs(parts[0].weight - complex(1.0, 0.0)) < 1e-12);
    }
    SUBCASE("quarter revival gives two resolvable copies") {
        auto parts = isw_translation_decomposition(isw, Fraction(1, 4));
        CHECK(parts.size() == 2);
        double err = 0.0;
        for (int i = 0; i < 256; ++i) {
            double x = (i + 0.5) / 256.0;
            err = std::max(err, std::abs(isw_translated_synthesis(isw, pk, parts, x) -
                                         psi_direct(isw, pk, x, 0.25 * tr)));
        }
        CHECK(err < 1e-8);
    }
    SUBCASE("mirror at half the revival time") {
        double err = 0.0;
        for (int i = 0; i < 256; ++i) {
            double x = (i + 0.5) / 256.0;
            err = std::max(err, std::abs(std::norm(psi_direct(isw, pk, x, 0.5 * tr)) -
                                         std::norm(psi_direct(isw, pk, 1.0 - x, 0.0))));
        }
        CHECK(err < 1e-8);
    }
    SUBCASE("wrong basis is rejected") {
        Eigenbasis sho(PotentialKind::SHO, {{"omega", 1.0}});
        CHECK_THROWS_AS(isw_translation_decomposition(sho, Fraction(1, 2)), NotISW);
    }
}

TEST_CASE("modified evolution equation residual") {
    Eigenbasis isw(PotentialKind::ISW, {{"L", 1.0}}, 64);
    SUBCASE("single mode reduces to the stationary equation") {
        auto single = explicit_packet(3, 0, {complex(1.0, 0.0)});
        CHECK(psi_cl_residual(isw, single, 0.43, 0.2) < 1e-6);
    }
    SUBCASE("random interior points stay small on a packet") {
        auto pk = gaussian_packet(40, 2.0);
        double t1 = timescales(isw, 40, 2).t_cl();
        double escale = 0.0;
        for (int k = pk.k_min; k <= pk.k_max; ++k)
            escale = std::max(escale, std::abs(isw.energy(40 + k)));
        std::mt19937 rng(11);
        std::uniform_real_distribution<double> ux(0.05, 0.95), ut(0.0, 1.0);
        for (int i = 0; i < 20; ++i) {
            double x = ux(rng), t = ut(rng) * t1;
            double amp = std::abs(psi_cl(isw, pk, x, t));
            double scale = escale * std::max(amp, 0.3);
            CHECK(psi_cl_residual(isw, pk, x, t) < 1e-4 * scale);
        }
    }
    SUBCASE("dropping the correction inflates the residual tenfold") {
        auto pk = gaussian_packet(40, 2.0);
        double t1 = timescales(isw, 40, 2).t_cl();
        double with = 0.0, without = 0.0;
        for (int i = 0; i < 8; ++i) {
            double x = 0.15 + 0.7 * i / 7.0, t = 0.37 * t1;
            with = std::max(with, psi_cl_residual(isw, pk, x, t));
            // ablated residual: |i dPsi/dt + d2Psi/dx2 - V Psi| with no source term
            double hx = 1.0 / 4096.0, ht = 1e-4 * t1;
            auto f = [&](double xx, double tt) { return psi_cl(isw, pk, xx, tt); };
            complex dt = (-f(x, t + 2 * ht) + 8.0 * f(x, t + ht) - 8.0 * f(x, t - ht) +
                          f(x, t - 2 * ht)) /
                         (12.0 * ht);
            complex dxx = (-f(x + 2 * hx, t) + 16.0 * f(x + hx, t) - 30.0 * f(x, t) +
                           16.0 * f(x - hx, t) - f(x - 2 * hx, t)) /
                          (12.0 * hx * hx);
            without = std::max(without, std::abs(iu * dt + dxx));
        }
        CHECK(without > 10.0 * with);
    }
    SUBCASE("boundary guard") {
        auto pk = gaussian_packet(40, 2.0);
        CHECK_THROWS_AS(psi_cl_residual(isw, pk, 1e-5, 0.01), BoundaryTooClose);
    }
}

TEST_CASE("farey sequences") {
    auto f3 = farey_sequence(3);
    REQUIRE(f3.size() == 5);
    const char* want3[] = {"0/1", "1/3", "1/2", "2/3", "1/1"};
    for (size_t i = 0; i < 5; ++i) CHECK(f3[i].str() == want3[i]);

    auto f1 = farey_sequence(1);
    REQUIRE(f1.size() == 2);
    CHECK(f1[0].str() == "0/1");
    CHECK(f1[1].str() == "1/1");

    CHECK(farey_sequence(8).size() == 23);  // 1 + sum of totients

    // sorted, reduced, nested, and sized by the totient sum
    auto phi = testutil::totients(50);
    std::vector<Fraction> prev;
    for (int n = 1; n <= 50; ++n) {
        auto fn = farey_sequence(n);
        size_t expect = 1;
        for (int k = 1; k <= n; ++k) expect += phi[k];
        CHECK(fn.size() == expect);
        for (size_t i = 0; i + 1 < fn.size(); ++i) CHECK(fn[i] < fn[i + 1]);
        for (const auto& fr : fn) CHECK(std::gcd(fr.p, fr.q) == 1);
        size_t j = 0;
        for (const auto& fr : prev) {
            while (j < fn.size() && !(fn[j] == fr)) ++j;
            CHECK(j < fn.size());
        }
        prev = fn;
    }
}

TEST_CASE("mediant arithmetic") {
    CHECK(mediant(Fraction(1, 3), Fraction(1, 2)) == Fraction(2, 5));
    CHECK(mediant(Fraction(0, 1), Fraction(1, 1)) == Fraction(1, 2));
    Fraction m = mediant(Fraction(3, 8), Fraction(2, 5));
    CHECK(m == Fraction(5, 13));
    auto f13 = farey_sequence(13);
    // 5/13 sits between its parents in F_13
    for (size_t i = 1; i + 1 < f13.size(); ++i)
        if (f13[i] == m) {
            CHECK(f13[i - 1] == Fraction(3, 8));
            CHECK(f13[i + 1] == Fraction(2, 5));
        }
}

TEST_CASE("classicized ridge follows the classical orbit (morse)") {
    Eigenbasis b(PotentialKind::Morse, {{"A", 40.0}, {"B", 40.0}, {"alpha", 1.0}}, 40);
    auto pk = gaussian_packet_for(b, 20, 2.5);
    double t1 = timescales(b, 20, 2).t_cl();
    double e = b.energy(20);
    auto tp = detail::turning_points(b, e);

    Axis xax{b.x_lo(), 4.0, 192};
    Axis tax{0.0, 2.0 * t1, 96};
    std::vector<double> ridge(tax.n);
    std::vector<bool> single(tax.n);
    int it_turn = 0;
    for (int it = 0; it < tax.n; ++it) {
        std::vector<double> row(xax.n);
        int best = 0;
        for (int ix = 0; ix < xax.n; ++ix) {
            row[ix] = std::norm(psi_cl(b, pk, xax.at(ix), tax.at(it)));
            if (row[ix] > row[best]) best = ix;
        }
        int prominent = 0;
        for (int ix = 1; ix < xax.n - 1; ++ix)
            if (row[ix] >= row[ix - 1] && row[ix] >= row[ix + 1] && row[ix] > 0.5 * row[best])
                ++prominent;
        ridge[it] = xax.at(best);
        single[it] = (prominent == 1);
        if (ridge[it] > ridge[it_turn]) it_turn = it;
    }

    // orbit of energy E_nbar anchored at the outer turning point when the
    // packet peaks outermost
    std::vector<double> times(tax.n);
    for (int it = 0; it < tax.n; ++it)
        times[it] = std::fmod(tax.at(it) - tax.at(it_turn) + 20.0 * t1, t1);
    std::vector<double> sorted = times;
    std::sort(sorted.begin(), sorted.end());
    auto path = testutil::classical_path(b, e, tp.second - 1e-9, -1, sorted, 200000);
    double worst = 0.0;
    int used = 0;
    for (int it = 0; it < tax.n; ++it) {
        if (!single[it]) continue;
        size_t j = std::lower_bound(sorted.begin(), sorted.end(), times[it]) - sorted.begin();
        worst = std::max(worst, std::abs(ridge[it] - path[j]));
        ++used;
    }
    CHECK(used > 60);
    CHECK(worst <= 2.0 * xax.step());
}
