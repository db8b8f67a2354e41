#ifndef CARPETFORGE_TRACES_HPP
#define CARPETFORGE_TRACES_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <vector>

#include "carpetforge/core.hpp"
#include "carpetforge/evolve.hpp"
#include "carpetforge/quadrature.hpp"
#include "carpetforge/spectra.hpp"
#include "carpetforge/wavepacket.hpp"

namespace carpetforge {

// ---------------------------------------------------------------------------
// Multimode decomposition of the probability density:
//   mu_nm = (1/2) [ d_nm psi_n psi_m* e^{-i t (E_n - E_m)} + c.c. ],  d_nm = c_n c_m*,
// so the ordered double sum over (n, m) recovers |Psi|^2 exactly.
// ---------------------------------------------------------------------------

inline double multimode_term(const Eigenbasis& basis, const PacketSpec& packet, int n, int m,
                             double x, double t) {
    complex d = packet.c(n - packet.nbar) * std::conj(packet.c(m - packet.nbar));
    if (d == complex(0.0, 0.0)) return 0.0;
    double pn = basis.psi(n, x);
    double pm = basis.psi(m, x);
    complex ph = std::exp(complex(0.0, -t * (basis.energy(n) - basis.energy(m))));
    return (d * ph).real() * pn * pm;
}

// ---------------------------------------------------------------------------
// Characteristic velocities.  Each (n, m) seeds four values
//   v = +-1 (E_n - E_m) / (sqrt(E_n - V) +-2 sqrt(E_m - V)),
// returned in the order (+,+), (-,+), (+,-), (-,-) of (sign1, sign2).
// The difference-denominator family is the fast (group-velocity-like) one.
// On the diagonal the fast pair is reported as its limit +-2 sqrt(E_n - V)
// and the remaining slots as NaN: a diagonal term carries no phase motion.
// ---------------------------------------------------------------------------

inline std::array<double, 4> intermode_velocities(const Eigenbasis& basis, int n, int m,
                                                  double x) {
    double en = basis.energy(n), em = basis.energy(m);
    double v = basis.potential(x);
    if (!(en > v) || !(em > v)) throw ForbiddenRegion("intermode_velocities: E <= V(x)");
    double pn = std::sqrt(en - v), pm = std::sqrt(em - v);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (n == m) return {2.0 * pn, -2.0 * pn, nan, nan};
    double slow = (en - em) / (pn + pm);
    double fast = (en - em) / (pn - pm);
    return {slow, -slow, fast, -fast};
}

enum class TraceMode { Full, PsiCl };

struct VelocityEntry {
    int n = 0, m = 0;
    int sign1 = +1;      // overall sign
    int sign2 = +1;      // denominator sign: +1 sum (slow), -1 difference (fast)
    double v_at_v0 = 0.0;
    double wavenumber_at_v0 = 0.0;
};

struct VelocityBundle {
    double velocity = 0.0;
    std::vector<VelocityEntry> members;
    double weight = 0.0;  // sum |d_nm| over members
};

struct BundleAnalysis {
    std::vector<VelocityBundle> bundles;
    double energy_reference = 0.0;

    // Unordered (n, m) pairs appearing in a selected group of bundles.
    static std::set<std::pair<int, int>> pair_set(const std::vector<const VelocityBundle*>& bs) {
        std::set<std::pair<int, int>> out;
        for (const auto* b : bs)
            for (const auto& e : b->members)
                out.insert({std::min(e.n, e.m), std::max(e.n, e.m)});
        return out;
    }

    std::vector<const VelocityBundle*> with_speed(double speed, double rel_tol = 1e-9) const {
        std::vector<const VelocityBundle*> out;
        for (const auto& b : bundles)
            if (std::abs(std::abs(b.velocity) - speed) <= rel_tol * std::max(1.0, speed))
                out.push_back(&b);
        return out;
    }
};

// Enumerates every off-diagonal (n, m, signs) combination in the packet
// window and groups the velocities evaluated where the shifted potential
// vanishes.  energy_reference defaults to min V (the zero already present);
// pass a different constant to shift the potential, e.g. a linear spectrum's
// zero-point offset when analysing a quadratized packet.
inline BundleAnalysis degeneracy_bundles(const Eigenbasis& basis, const PacketSpec& packet,
                                         TraceMode mode,
                                         std::optional<double> energy_reference = std::nullopt,
                                         double rel_tol = 1e-9) {
    double ref = energy_reference.value_or(basis.min_potential());
    if (ref < basis.min_potential() - 1e-12)
        throw NoZeroPoint("degeneracy_bundles: shifted potential never crosses zero");

    double t1 = 0.0;
    if (mode == TraceMode::PsiCl) t1 = timescales(basis, packet.nbar, 2).t_cl();

    struct Item {
        VelocityEntry e;
        long long exact_key;  // integer velocity key for exact-degeneracy spectra
        bool has_exact;
        double dweight;
    };
    std::vector<Item> items;

    const bool isw_exact = basis.kind() == PotentialKind::ISW && mode == TraceMode::Full;
    std::vector<int> ns;
    for (int k = packet.k_min; k <= packet.k_max; ++k)
        if (packet.c(k) != complex(0.0, 0.0)) ns.push_back(packet.nbar + k);

    for (size_t i = 0; i < ns.size(); ++i) {
        for (size_t j = i + 1; j < ns.size(); ++j) {
            int n = ns[j], m = ns[i];  // n > m
            double en = basis.energy(n) - ref, em = basis.energy(m) - ref;
            if (!(en > 0.0) || !(em > 0.0))
                throw ForbiddenRegion("degeneracy_bundles: state below the reference energy");
            double pn = std::sqrt(en), pm = std::sqrt(em);
            double num = (mode == TraceMode::Full) ? (en - em)
                                                   : (2.0 * pi / t1) * static_cast<double>(n - m);
            double dw = std::abs(packet.c(n - packet.nbar)) * std::abs(packet.c(m - packet.nbar));
            for (int s2 : {+1, -1}) {
                double denom = (s2 > 0) ? pn + pm : pn - pm;
                double v = num / denom;
                for (int s1 : {+1, -1}) {
                    Item it;
                    it.e = {n, m, s1, s2, s1 * v, (en - em) / (s1 * v)};
                    it.dweight = dw;
                    it.has_exact = isw_exact;
                    if (isw_exact) {
                        // v = +- pi (n -+ m) / L exactly; key on the signed integer
                        long long base = (s2 > 0) ? (n - m) : (n + m);
                        it.exact_key = s1 * base;
                    } else {
                        it.exact_key = 0;
                    }
                    items.push_back(it);
                }
            }
        }
    }

    std::sort(items.begin(), items.end(), [&](const Item& a, const Item& b) {
        if (a.has_exact && b.has_exact && a.exact_key != b.exact_key)
            return a.exact_key < b.exact_key;
        return a.e.v_at_v0 < b.e.v_at_v0;
    });

    BundleAnalysis out;
    out.energy_reference = ref;
    for (size_t i = 0; i < items.size();) {
        VelocityBundle b;
        b.velocity = items[i].e.v_at_v0;
        size_t j = i;
        while (j < items.size()) {
            bool same;
            if (items[i].has_exact)
                same = items[j].exact_key == items[i].exact_key;
            else
                same = std::abs(items[j].e.v_at_v0 - b.velocity) <=
                       rel_tol * std::max(std::abs(b.velocity), std::abs(items[j].e.v_at_v0));
            if (!same) break;
            b.members.push_back(items[j].e);
            b.weight += items[j].dweight;
            ++j;
        }
        out.bundles.push_back(std::move(b));
        i = j;
    }
    return out;
}

// Partial density carried by a set of unordered pairs (each pair counted with
// both of its conjugate halves).
inline double bundle_density(const Eigenbasis& basis, const PacketSpec& packet,
                             const std::set<std::pair<int, int>>& pairs, double x, double t) {
    double acc = 0.0;
    for (const auto& [m, n] : pairs) acc += 2.0 * multimode_term(basis, packet, n, m, x, t);
    return acc;
}

inline double diagonal_density(const Eigenbasis& basis, const PacketSpec& packet, double x) {
    double acc = 0.0;
    for (int k = packet.k_min; k <= packet.k_max; ++k) {
        complex c = packet.c(k);
        if (c == complex(0.0, 0.0)) continue;
        acc += std::norm(c) * sq(basis.psi(packet.nbar + k, x));
    }
    return acc;
}

// ---------------------------------------------------------------------------
// Trace trajectory t(x) = int dx' / v(x') for the fast (classical) velocity
// family: v(x) = +-2 sqrt(E_eff - V(x)) with E_eff fixed by the velocity at
// the reference zero of the shifted potential.  Integration starts from a
// caller-supplied x0 and stops at a turning point or the domain edge.
// ---------------------------------------------------------------------------

struct TracePoint {
    double x = 0.0;
    double t = 0.0;
};

inline std::vector<TracePoint> trace_trajectory(const Eigenbasis& basis, double v_ref, double x0,
                                                int direction, int samples = 257,
                                                std::optional<double> energy_reference = std::nullopt) {
    if (v_ref == 0.0) throw VelocityZeroCrossing("trace_trajectory: zero reference velocity");
    if (direction != 1 && direction != -1) throw BadParams("trace_trajectory: direction is +-1");
    double ref = energy_reference.value_or(basis.min_potential());
    double e_eff = ref + sq(0.5 * v_ref);

    auto speed = [&](double x) {
        double d = e_eff - basis.potential(x);
        return d > 0.0 ? 2.0 * std::sqrt(d) : 0.0;
    };
    if (speed(x0) == 0.0) throw VelocityZeroCrossing("trace_trajectory: starting at a turning point");

    // stop at the turning point (or the wall) in the travel direction
    double cap = direction > 0 ? basis.x_hi() : basis.x_lo();
    double x_stop = cap;
    bool at_turning = false;
    double probe = x0;
    double step = direction * 0.01 * basis.length_scale();
    for (int i = 0; i < 100000; ++i) {
        double nx = probe + step;
        if ((direction > 0 && nx >= cap) || (direction < 0 && nx <= cap)) break;
        if (basis.potential(nx) > e_eff) {
            x_stop = bisect([&](double t) { return basis.potential(t) - e_eff; },
                            std::min(probe, nx), std::max(probe, nx), 1e-13);
            at_turning = true;
            break;
        }
        probe = nx;
    }

    std::vector<TracePoint> out;
    out.reserve(samples);
    out.push_back({x0, 0.0});
    if (!at_turning) {
        double t = 0.0, prev = x0;
        for (int i = 1; i < samples; ++i) {
            double x = x0 + (x_stop - x0) * static_cast<double>(i) / (samples - 1);
            t += std::abs(simpson([&](double u) { return 1.0 / speed(u); }, prev, x, 64));
            out.push_back({x, t});
            prev = x;
        }
        return out;
    }
    // speed vanishes like sqrt(x_stop - x); substituting u = sqrt distance
    // regularizes the time integral right up to the turning point
    double span = x_stop - x0;
    auto t_of = [&](double x) {
        double u_hi = std::sqrt(std::abs(span));
        double u_lo = std::sqrt(std::abs(x_stop - x));
        auto f = [&](double u) {
            double xx = x_stop - direction * u * u;
            double d = e_eff - basis.potential(xx);
            double v = d > 0.0 ? 2.0 * std::sqrt(d) : 0.0;
            return v > 0.0 ? 2.0 * u / v : 0.0;
        };
        return simpson(f, u_lo, u_hi, 512);
    };
    for (int i = 1; i < samples; ++i) {
        double x = x0 + span * static_cast<double>(i) / (samples - 1);
        out.push_back({x, t_of(x)});
    }
    return out;
}

// Zeroes every coefficient whose quantum number is not a perfect square and
// renormalizes; gives a linear spectrum the reindexed quadratic behaviour.
inline PacketSpec quadratize(const PacketSpec& packet) {
    PacketSpec out = packet;
    bool any = false;
    for (int k = out.k_min; k <= out.k_max; ++k) {
        int n = out.nbar + k;
        int r = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
        bool is_square = (r * r == n);
        if (!is_square)
            out.coeffs[k - out.k_min] = complex(0.0, 0.0);
        else if (out.coeffs[k - out.k_min] != complex(0.0, 0.0))
            any = true;
    }
    if (!any) throw EmptyPacket("quadratize: no perfect squares in window");
    out.kind = PacketKind::PerfectSquares;
    return out.normalize();
}

}  // namespace carpetforge

#endif
