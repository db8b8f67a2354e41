#ifndef CARPETFORGE_REVIVALS_HPP
#define CARPETFORGE_REVIVALS_HPP

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "carpetforge/core.hpp"
#include "carpetforge/evolve.hpp"
#include "carpetforge/spectra.hpp"
#include "carpetforge/wavepacket.hpp"

namespace carpetforge {

// ---------------------------------------------------------------------------
// Reduced fractions and Farey sequences
// ---------------------------------------------------------------------------

struct Fraction {
    long long p = 0;
    long long q = 1;

    Fraction() = default;
    // Auto-reduces, so Farey-driven sweeps can pass raw p, q.
    Fraction(long long pp, long long qq) : p(pp), q(qq) {
        if (q < 1 || p < 0) throw BadParams("Fraction requires p >= 0, q >= 1");
        long long g = std::gcd(p, q);
        if (g > 1) { p /= g; q /= g; }
        if (p == 0) q = 1;
    }

    double value() const { return static_cast<double>(p) / static_cast<double>(q); }
    bool operator==(const Fraction& o) const { return p == o.p && q == o.q; }
    bool operator<(const Fraction& o) const { return p * o.q < o.p * q; }

    std::string str() const { return std::to_string(p) + "/" + std::to_string(q); }
};

inline Fraction mediant(const Fraction& a, const Fraction& b) {
    // Farey neighbours produce an already-reduced mediant.
    if (std::llabs(a.p * b.q - b.p * a.q) == 1 && std::gcd(a.p + b.p, a.q + b.q) != 1)
        throw Error("mediant of Farey neighbours failed to reduce");
    return Fraction(a.p + b.p, a.q + b.q);
}

// F_n by Stern-Brocot mediant insertion, ascending.
inline std::vector<Fraction> farey_sequence(int n) {
    if (n < 1) throw BadParams("farey_sequence: n >= 1");
    std::vector<Fraction> out;
    out.emplace_back(0, 1);
    // iterative mediant descent between consecutive terms
    std::function<void(const Fraction&, const Fraction&)> fill =
        [&](const Fraction& a, const Fraction& b) {
            if (a.q + b.q > n) return;
            Fraction m = mediant(a, b);
            fill(a, m);
            out.push_back(m);
            fill(m, b);
        };
    Fraction one(1, 1);
    fill(out.front(), one);
    out.push_back(one);
    return out;
}

// ---------------------------------------------------------------------------
// Revival period and Gauss-sum coefficients
// ---------------------------------------------------------------------------

enum class QClass { Odd, MultiplePowersOf2, OnePowerOf2 };

inline const char* to_string(QClass c) {
    switch (c) {
        case QClass::Odd: return "odd";
        case QClass::MultiplePowersOf2: return "multiple_powers_of_2";
        case QClass::OnePowerOf2: return "one_power_of_2";
    }
    return "?";
}

// phi_k = (p/q) k^2 mod 1 as an exact residue numerator: (p k^2) mod q.
inline long long phi_residue(const Fraction& f, long long k) {
    long long r = ((k % f.q) * (k % f.q)) % f.q;
    return (r * (f.p % f.q)) % f.q;
}

// Minimal period l of phi_k and the class of q:
//   q odd            -> l = q
//   q = 2 (mod 4)    -> l = q   (one power of 2)
//   q = 0 (mod 4)    -> l = q/2 (more than one power of 2)
inline std::pair<long long, QClass> revival_period(const Fraction& f) {
    long long q = f.q;
    long long l;
    QClass cls;
    if (q % 2 == 1) {
        l = q;
        cls = QClass::Odd;
    } else if (q % 4 == 0) {
        l = q / 2;
        cls = QClass::MultiplePowersOf2;
    } else {
        l = q;
        cls = QClass::OnePowerOf2;
    }
    for (long long k = 0; k < 3 * l; ++k)
        if (phi_residue(f, k) != phi_residue(f, k + l))
            throw Error("revival_period: periodicity check failed");
    return {l, cls};
}

// Decomposition of the quadratic phase sequence into l coefficients:
//   a_m = (1/l) sum_k exp(-2 pi i (phi_k - m k / l)),
// recomputed independently through the one-step recurrence
//   a_{m'} = a_m exp(2 pi i (m/l + p/q)),  m' = (m + 2 p l / q) mod l,
// and cross-checked to 1e-12.  The pairing map m(n) uses 2 p n mod q for
// l = q and p n mod q/2 otherwise.
struct RevivalDecomposition {
    Fraction fraction;
    long long l = 1;
    QClass q_class = QClass::Odd;
    std::vector<complex> a;

    long long pairing(long long n) const {
        long long step = (q_class == QClass::MultiplePowersOf2) ? fraction.p : 2 * fraction.p;
        long long r = ((n % l) * (step % l)) % l;
        return (r % l + l) % l;
    }
};

inline RevivalDecomposition revival_coefficients(const Fraction& f) {
    RevivalDecomposition d;
    d.fraction = f;
    auto [l, cls] = revival_period(f);
    d.l = l;
    d.q_class = cls;

    // direct Gauss sum
    d.a.assign(static_cast<size_t>(l), complex(0.0, 0.0));
    for (long long m = 0; m < l; ++m) {
        complex acc(0.0, 0.0);
        for (long long k = 0; k < l; ++k) {
            double phase = -2.0 * pi *
                           (static_cast<double>(phi_residue(f, k)) / f.q -
                            static_cast<double>(m) * k / l);
            acc += std::exp(complex(0.0, phase));
        }
        d.a[m] = acc / static_cast<double>(l);
    }

    // recurrence route, seeded from a_0 when nonzero, else a_1
    std::vector<complex> rec(static_cast<size_t>(l), complex(0.0, 0.0));
    std::vector<bool> seen(static_cast<size_t>(l), false);
    long long step = (2 * f.p * l / f.q) % l;
    auto run_chain = [&](long long seed_m) {
        rec[seed_m] = d.a[seed_m];
        seen[seed_m] = true;
        long long m = seed_m;
        for (long long i = 0; i < l; ++i) {
            long long mp = (m + step) % l;
            if (seen[mp]) break;
            rec[mp] = rec[m] * std::exp(complex(0.0, 2.0 * pi * (static_cast<double>(m) / l +
                                                                 f.value())));
            seen[mp] = true;
            m = mp;
        }
    };
    if (std::abs(d.a[0]) > 1e-14) run_chain(0);
    else if (l > 1) run_chain(1);
    else rec[0] = d.a[0], seen[0] = true;
    // in the one-power-of-2 class the even-index orbit is identically zero
    for (long long m = 0; m < l; ++m)
        if (!seen[m]) rec[m] = complex(0.0, 0.0);

    double worst = 0.0;
    for (long long m = 0; m < l; ++m) worst = std::max(worst, std::abs(rec[m] - d.a[m]));
    if (worst > 1e-12)
        throw RecurrenceMismatch("direct and recurrent coefficients diverge: " +
                                 std::to_string(worst));
    return d;
}

// ---------------------------------------------------------------------------
// Psi_cl: the wavefunction with only the linear-in-k phase kept.  The
// leading global phase e^{-i E_nbar t} is dropped everywhere here, so
// comparisons against psi_direct go through |Psi| (or phase-aligned values).
// ---------------------------------------------------------------------------

inline complex psi_cl(const Eigenbasis& basis, const PacketSpec& packet, double x, double t) {
    Timescales ts = timescales(basis, packet.nbar, 2);
    double t_cl = ts.t_cl();
    complex acc(0.0, 0.0);
    for (int k = packet.k_min; k <= packet.k_max; ++k) {
        complex c = packet.c(k);
        if (c == complex(0.0, 0.0)) continue;
        acc += c * basis.psi(packet.nbar + k, x) *
               std::exp(complex(0.0, -2.0 * pi * k * t / t_cl));
    }
    return acc;
}

// Weighted sum of Psi_cl time slices approximating Psi at (p/q) T_R + dt.
inline complex reconstruct_at_fraction(const Eigenbasis& basis, const PacketSpec& packet,
                                       const RevivalDecomposition& d, double dt, double x) {
    Timescales ts = timescales(basis, packet.nbar, 2);
    double t_cl = ts.t_cl();
    double t_r = ts.t_rev();
    double t0 = d.fraction.value() * t_r + dt;
    complex acc(0.0, 0.0);
    for (long long s = 0; s < d.l; ++s) {
        if (std::abs(d.a[s]) == 0.0) continue;
        acc += d.a[s] * psi_cl(basis, packet, x, t0 + (static_cast<double>(s) / d.l) * t_cl);
    }
    return acc;
}

// Same sum folded onto s and l-s pairs (the coefficients are palindromic,
// a_s = a_{l-s}, and Psi_cl is T_cl-periodic).  Agrees with the flat sum
// identically; exposed for the paired bookkeeping.
inline complex reconstruct_at_fraction_paired(const Eigenbasis& basis, const PacketSpec& packet,
                                              const RevivalDecomposition& d, double dt, double x) {
    Timescales ts = timescales(basis, packet.nbar, 2);
    double t_cl = ts.t_cl();
    double t_r = ts.t_rev();
    double t0 = d.fraction.value() * t_r + dt;
    long long h = (d.l % 2 == 0) ? d.l / 2 : (d.l - 1) / 2;
    complex acc = d.a[0] * psi_cl(basis, packet, x, t0);
    for (long long s = 1; s <= h; ++s) {
        if (std::abs(d.a[s]) == 0.0) continue;
        double shift = (static_cast<double>(s) / d.l) * t_cl;
        complex pair = psi_cl(basis, packet, x, t0 + shift);
        if (2 * s != d.l) pair += psi_cl(basis, packet, x, t0 - shift);
        acc += d.a[s] * pair;
    }
    return acc;
}

// ---------------------------------------------------------------------------
// Square-well translation theorem.  At t = (p/q) T_R the wavefunction is a
// weighted sum of translated copies of the t = 0 state under its odd
// 2L-periodic extension.  The weights are the Gauss coefficients taken on
// absolute quantum numbers, which keeps the comparison phase-exact.
// ---------------------------------------------------------------------------

struct Translation {
    double shift = 0.0;   // displacement of Psi(. , 0) under the odd extension
    complex weight{0.0, 0.0};
};

inline std::vector<Translation> isw_translation_decomposition(const Eigenbasis& basis,
                                                              const Fraction& f) {
    if (basis.kind() != PotentialKind::ISW)
        throw NotISW("translation decomposition requires the square well");
    auto [l, cls] = revival_period(f);
    (void)cls;
    double L = basis.params().count("L") ? basis.params().at("L") : 1.0;

    // Gauss coefficients over n-residues (same kernel as revival_coefficients)
    RevivalDecomposition d = revival_coefficients(f);
    std::vector<Translation> out;
    for (long long s = 0; s < l; ++s) {
        if (std::abs(d.a[s]) < 1e-15) continue;
        out.push_back({2.0 * L * static_cast<double>(s) / static_cast<double>(l), d.a[s]});
    }
    return out;
}

// Applies the odd 2L-periodic extension: the sine series itself evaluates it.
inline complex isw_translated_synthesis(const Eigenbasis& basis, const PacketSpec& packet,
                                        const std::vector<Translation>& parts, double x) {
    if (basis.kind() != PotentialKind::ISW) throw NotISW("synthesis requires the square well");
    double L = basis.params().count("L") ? basis.params().at("L") : 1.0;
    complex acc(0.0, 0.0);
    for (const auto& tr : parts) {
        complex v(0.0, 0.0);
        for (int k = packet.k_min; k <= packet.k_max; ++k) {
            complex c = packet.c(k);
            if (c == complex(0.0, 0.0)) continue;
            int n = packet.nbar + k;
            v += c * std::sqrt(2.0 / L) * std::sin(n * pi * (x - tr.shift) / L);
        }
        acc += tr.weight * v;
    }
    return acc;
}

// ---------------------------------------------------------------------------
// Residual of the modified evolution equation satisfied by Psi_cl:
//   i dPsi_cl/dt = -d2Psi_cl/dx2 + V Psi_cl - sum_k c_k (E_k - E k) psi_k e^{-i E k t},
// with E = |E'(nbar)|.  Derivatives by 4th-order finite differences.
// ---------------------------------------------------------------------------

inline double psi_cl_residual(const Eigenbasis& basis, const PacketSpec& packet, double x,
                              double t) {
    Timescales ts = timescales(basis, packet.nbar, 2);
    double erate = std::abs(2.0 * pi / ts.t_cl());

    double hx = (basis.x_hi() - basis.x_lo()) / 4096.0;
    if (x - 2 * hx < basis.x_lo() || x + 2 * hx > basis.x_hi())
        throw BoundaryTooClose("psi_cl_residual: need two cells of interior");
    double ht = 1e-4 * std::abs(ts.t_cl());

    auto f = [&](double xx, double tt) { return psi_cl(basis, packet, xx, tt); };

    complex dt = (-f(x, t + 2 * ht) + 8.0 * f(x, t + ht) - 8.0 * f(x, t - ht) + f(x, t - 2 * ht)) /
                 (12.0 * ht);
    complex dxx = (-f(x + 2 * hx, t) + 16.0 * f(x + hx, t) - 30.0 * f(x, t) + 16.0 * f(x - hx, t) -
                   f(x - 2 * hx, t)) /
                  (12.0 * hx * hx);

    complex corr(0.0, 0.0);
    for (int k = packet.k_min; k <= packet.k_max; ++k) {
        complex c = packet.c(k);
        if (c == complex(0.0, 0.0)) continue;
        double ek = basis.energy(packet.nbar + k);
        corr += c * (ek - erate * k) * basis.psi(packet.nbar + k, x) *
                std::exp(complex(0.0, -erate * k * t));
    }

    complex lhs = iu * dt;
    complex rhs = -dxx + basis.potential(x) * f(x, t) - corr;
    return std::abs(lhs - rhs);
}

}  // namespace carpetforge

#endif
