#ifndef CARPETFORGE_WAVEPACKET_HPP
#define CARPETFORGE_WAVEPACKET_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <vector>

#include "carpetforge/core.hpp"
#include "carpetforge/quadrature.hpp"
#include "carpetforge/spectra.hpp"

namespace carpetforge {

enum class PacketKind { GaussianN, TopHat, SpatialGaussian, Explicit, PerfectSquares };

inline const char* to_string(PacketKind k) {
    switch (k) {
        case PacketKind::GaussianN: return "gaussian_n";
        case PacketKind::TopHat: return "top_hat";
        case PacketKind::SpatialGaussian: return "spatial_gaussian";
        case PacketKind::Explicit: return "explicit";
        case PacketKind::PerfectSquares: return "perfect_squares";
    }
    return "?";
}

// Quantum-number weighting coefficients c_n, stored against k = n - nbar.
// Normalized so sum |c|^2 = 1; entries with n < 1 are dropped outright.
struct PacketSpec {
    int nbar = 1;
    PacketKind kind = PacketKind::Explicit;
    int k_min = 0;
    int k_max = 0;
    std::vector<complex> coeffs;  // index k - k_min
    double width_param = 0.0;

    complex c(int k) const {
        if (k < k_min || k > k_max) return {0.0, 0.0};
        return coeffs[static_cast<size_t>(k - k_min)];
    }
    int n_lo() const { return nbar + k_min; }
    int n_hi() const { return nbar + k_max; }

    double norm2() const {
        double s = 0.0;
        for (const auto& v : coeffs) s += std::norm(v);
        return s;
    }

    PacketSpec& normalize() {
        double s = norm2();
        if (!(s > 0.0)) throw EmptyPacket("all coefficients vanished");
        double inv = 1.0 / std::sqrt(s);
        for (auto& v : coeffs) v *= inv;
        return *this;
    }

    // Drops negligible coefficients and enforces n >= 1, then renormalizes.
    PacketSpec& prune(double drop_below = 1e-12) {
        int lo = k_min, hi = k_max;
        auto mag = [&](int k) { return std::abs(c(k)); };
        while (lo <= hi && (nbar + lo < 1 || mag(lo) < drop_below)) ++lo;
        while (hi >= lo && mag(hi) < drop_below) --hi;
        if (lo > hi) throw EmptyPacket("all coefficients below cutoff");
        std::vector<complex> kept(coeffs.begin() + (lo - k_min), coeffs.begin() + (hi - k_min) + 1);
        for (int k = lo; k <= hi; ++k)
            if (nbar + k < 1) kept[k - lo] = complex(0.0, 0.0);
        coeffs = std::move(kept);
        k_min = lo;
        k_max = hi;
        return normalize();
    }

    std::string id() const {
        std::ostringstream os;
        os << to_string(kind) << " nbar=" << nbar << " w=" << width_param << " k=[" << k_min
           << "," << k_max << "]";
        return os.str();
    }
};

// ---------------------------------------------------------------------------
// Factories
// ---------------------------------------------------------------------------

// Default window: k in [-min(nbar-1, 6 sigma), +6 sigma].
inline PacketSpec gaussian_packet(int nbar, double sigma_n, int k_lo = 0, int k_hi = 0) {
    if (nbar < 1) throw BadParams("gaussian_packet: nbar >= 1");
    if (!(sigma_n > 0.0)) throw BadParams("gaussian_packet: sigma_n > 0");
    if (k_lo == 0 && k_hi == 0) {
        int w = static_cast<int>(std::ceil(6.0 * sigma_n));
        k_lo = -std::min(nbar - 1, w);
        k_hi = w;
    }
    if (k_lo > k_hi) throw BadParams("gaussian_packet: empty window");
    PacketSpec p;
    p.nbar = nbar;
    p.kind = PacketKind::GaussianN;
    p.width_param = sigma_n;
    p.k_min = k_lo;
    p.k_max = k_hi;
    for (int k = k_lo; k <= k_hi; ++k)
        p.coeffs.push_back(complex(std::exp(-0.5 * sq(k / sigma_n)), 0.0));
    return p.prune();
}

// Gaussian window clamped to the basis bound range.
inline PacketSpec gaussian_packet_for(const Eigenbasis& basis, int nbar, double sigma_n) {
    int w = static_cast<int>(std::ceil(6.0 * sigma_n));
    int k_lo = std::max(basis.n_min(), nbar - w) - nbar;
    int k_hi = std::min(basis.n_max(), nbar + w) - nbar;
    return gaussian_packet(nbar, sigma_n, k_lo, k_hi);
}

// 2N+1 equal coefficients on |k| <= N.
inline PacketSpec top_hat_packet(int nbar, int N) {
    if (nbar < 1 || N < 0) throw BadParams("top_hat_packet: nbar >= 1, N >= 0");
    PacketSpec p;
    p.nbar = nbar;
    p.kind = PacketKind::TopHat;
    p.width_param = N;
    p.k_min = -N;
    p.k_max = N;
    p.coeffs.assign(2 * N + 1, complex(1.0, 0.0));
    return p.prune();
}

// Equal weights on an explicit range of quantum numbers.
inline PacketSpec uniform_packet(int n_lo, int n_hi) {
    if (n_lo < 1 || n_hi < n_lo) throw BadParams("uniform_packet: bad range");
    PacketSpec p;
    p.nbar = (n_lo + n_hi) / 2;
    p.kind = PacketKind::Explicit;
    p.k_min = n_lo - p.nbar;
    p.k_max = n_hi - p.nbar;
    p.coeffs.assign(n_hi - n_lo + 1, complex(1.0, 0.0));
    return p.normalize();
}

inline PacketSpec explicit_packet(int nbar, int k_min, std::vector<complex> coeffs) {
    PacketSpec p;
    p.nbar = nbar;
    p.kind = PacketKind::Explicit;
    p.k_min = k_min;
    p.k_max = k_min + static_cast<int>(coeffs.size()) - 1;
    p.coeffs = std::move(coeffs);
    return p.prune();
}

// Keeps only perfect-square quantum numbers, equal weight.
inline PacketSpec perfect_squares_packet(int n_lo, int n_hi) {
    if (n_lo < 1 || n_hi < n_lo) throw BadParams("perfect_squares_packet: bad range");
    std::vector<int> sq_n;
    for (int j = 1; j * j <= n_hi; ++j)
        if (j * j >= n_lo) sq_n.push_back(j * j);
    if (sq_n.empty()) throw EmptyPacket("no perfect squares in window");
    PacketSpec p;
    p.kind = PacketKind::PerfectSquares;
    p.nbar = sq_n[sq_n.size() / 2];
    p.k_min = sq_n.front() - p.nbar;
    p.k_max = sq_n.back() - p.nbar;
    p.coeffs.assign(p.k_max - p.k_min + 1, complex(0.0, 0.0));
    for (int n : sq_n) p.coeffs[n - p.nbar - p.k_min] = complex(1.0, 0.0);
    return p.normalize();
}

// Projects a position-space Gaussian amplitude (center x0, width sigma_x in
// the |Psi|^2 sense) onto the eigenbasis by quadrature.
inline PacketSpec spatial_gaussian_packet(const Eigenbasis& basis, double x0, double sigma_x,
                                          int n_hi = 0) {
    if (!(sigma_x > 0.0)) throw BadParams("spatial_gaussian_packet: sigma_x > 0");
    if (x0 < basis.x_lo() || x0 > basis.x_hi())
        throw BadParams("spatial_gaussian_packet: center outside basis domain");
    if (n_hi <= 0) {
        // Window chosen from the induced quantum-number spread: for a well of
        // size ~ the basis length scale, sigma_n ~ scale / (sqrt(2) pi sigma_x);
        // keep ~8 sigma_n and respect the basis bound range.
        double sn = basis.length_scale() / (std::sqrt(2.0) * pi * sigma_x);
        n_hi = std::min<long long>(basis.n_max(),
                                   static_cast<long long>(std::ceil(8.0 * std::max(sn, 4.0))));
    }
    n_hi = std::min(n_hi, basis.n_max());

    double a = std::max(basis.x_lo(), x0 - 12.0 * sigma_x);
    double b = std::min(basis.x_hi(), x0 + 12.0 * sigma_x);
    auto g = [&](double x) {
        return std::exp(-sq(x - x0) / (4.0 * sq(sigma_x)));
    };

    std::vector<complex> cs(static_cast<size_t>(n_hi - basis.n_min() + 1));
    try {
        for (int n = basis.n_min(); n <= n_hi; ++n) {
            double v = simpson_auto([&](double x) { return basis.psi(n, x) * g(x); }, a, b,
                                    1e-10, 4096, 1 << 20, 1e-14);
            cs[n - basis.n_min()] = complex(v, 0.0);
        }
    } catch (const QuadratureFail& e) {
        throw ProjectionFail(e.what());
    }

    // center on the dominant quantum number
    int best = basis.n_min();
    double bm = 0.0;
    double mean = 0.0, tot = 0.0;
    for (int n = basis.n_min(); n <= n_hi; ++n) {
        double w = std::norm(cs[n - basis.n_min()]);
        mean += n * w;
        tot += w;
        if (w > bm) { bm = w; best = n; }
    }
    if (!(tot > 0.0)) throw EmptyPacket("projection produced no weight");
    int nbar = std::max(1, static_cast<int>(std::lround(mean / tot)));
    (void)best;

    PacketSpec p;
    p.kind = PacketKind::SpatialGaussian;
    p.nbar = nbar;
    p.width_param = sigma_x;
    p.k_min = basis.n_min() - nbar;
    p.k_max = n_hi - nbar;
    p.coeffs = std::move(cs);
    return p.prune();
}

// Generic dispatcher used by the CLI.
inline PacketSpec make_coefficients(PacketKind kind, int nbar, double width_param,
                                    int k_lo = 0, int k_hi = 0) {
    switch (kind) {
        case PacketKind::GaussianN: return gaussian_packet(nbar, width_param, k_lo, k_hi);
        case PacketKind::TopHat: return top_hat_packet(nbar, static_cast<int>(width_param));
        default:
            throw BadParams("make_coefficients: this kind needs a dedicated factory");
    }
}

// ---------------------------------------------------------------------------
// Timescales: 2 pi / T_j = E^(j)(nbar) / j!
// ---------------------------------------------------------------------------

struct Timescales {
    double e_nbar = 0.0;
    std::vector<double> periods;  // signed T_1 .. T_J; +inf when E^(j) = 0

    double t_cl() const { return periods.at(0); }
    double t_rev() const { return periods.at(1); }
};

inline Timescales timescales(const Eigenbasis& basis, int nbar, int order = 3) {
    if (order < 2) throw BadParams("timescales: order >= 2");
    Timescales ts;
    ts.e_nbar = basis.energy(nbar);
    std::vector<double> deriv(order + 1, 0.0);

    if (basis.polynomial_spectrum()) {
        // E = e0 + e1 n + e2 n^2 exactly
        deriv[1] = basis.poly_e1() + 2.0 * basis.poly_e2() * nbar;
        if (order >= 2) deriv[2] = 2.0 * basis.poly_e2();
    } else {
        if (order > 3)
            throw BadParams("timescales: integer-lattice differences stop at order 3");
        // The spectrum only exists on the integer lattice, so the finite
        // difference step is pinned at 1.
        auto E = [&](int n) { return basis.energy(n); };
        deriv[1] = (E(nbar + 1) - E(nbar - 1)) / 2.0;
        if (order >= 2) deriv[2] = E(nbar + 1) - 2.0 * E(nbar) + E(nbar - 1);
        if (order >= 3)
            deriv[3] = (E(nbar + 2) - 2.0 * E(nbar + 1) + 2.0 * E(nbar - 1) - E(nbar - 2)) / 2.0;
    }

    double factorial = 1.0;
    for (int j = 1; j <= order; ++j) {
        factorial *= j;
        double rate = deriv[j] / factorial;  // E^(j)/j!
        if (rate == 0.0)
            ts.periods.push_back(std::numeric_limits<double>::infinity());
        else
            ts.periods.push_back(2.0 * pi / rate);
    }
    return ts;
}

}  // namespace carpetforge

#endif
