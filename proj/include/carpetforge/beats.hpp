#ifndef CARPETFORGE_BEATS_HPP
#define CARPETFORGE_BEATS_HPP

#include <cmath>
#include <limits>
#include <vector>

#include "carpetforge/core.hpp"
#include "carpetforge/revivals.hpp"
#include "carpetforge/special.hpp"

namespace carpetforge {

// Zero-dimensional beat signal f(t) = sum_k P_{nbar+k} exp 2 pi i (k t/T1 + k^2 t/T2).
// Two weight families are treated in closed form: a Gaussian of spread dn and
// a flat distribution of half-width N.  T_j for j >= 3 are taken infinite.
//
// Normalization conventions, chosen so each route is self-consistent:
//   - Gaussian weights carry the 1/sqrt(2 pi dn^2) prefactor, making the
//     closed form the exact Poisson dual of the direct sum.
//   - The flat direct sum uses unit total weight sum P_k = 1; the closed form
//     uses the unit-integral density 1/(2N), so its single-pulse value tends
//     to 1 as t -> 0.  Flat-case cross-checks therefore compare shapes.

enum class BeatDistribution { Gaussian, TopHat };

struct BeatSpec {
    BeatDistribution distribution = BeatDistribution::Gaussian;
    double width = 8.0;   // dn for Gaussian, N for top-hat
    double t1 = 1.0;      // signed
    double t2 = 200.0;    // signed, may be +-infinity
    int nbar = 200;

    BeatSpec() = default;
    BeatSpec(BeatDistribution d, double w, double t1_, double t2_, int nbar_ = 200)
        : distribution(d), width(w), t1(t1_), t2(t2_), nbar(nbar_) {
        if (!(w > 0.0)) throw BadParams("BeatSpec: width > 0");
        if (!(std::abs(t1) < std::abs(t2)))
            throw BadParams("BeatSpec: requires |T1| < |T2|");
    }

    double ratio21() const { return t2 / t1; }
};

inline double beat_weight(const BeatSpec& s, int k) {
    if (s.distribution == BeatDistribution::Gaussian)
        return std::exp(-0.5 * sq(k / s.width)) / std::sqrt(2.0 * pi * sq(s.width));
    return (std::abs(k) <= s.width + 0.5) ? 1.0 / (2.0 * std::floor(s.width) + 1.0) : 0.0;
}

inline int beat_window(const BeatSpec& s) {
    if (s.distribution == BeatDistribution::Gaussian)
        return static_cast<int>(std::ceil(9.0 * s.width));
    return static_cast<int>(std::floor(s.width));
}

inline complex beat_signal_direct(const BeatSpec& s, double t) {
    if (!std::isfinite(t)) throw BadParams("beat_signal_direct: t must be finite");
    int K = beat_window(s);
    complex acc(0.0, 0.0);
    for (int k = -K; k <= K; ++k) {
        if (s.nbar + k < 1) continue;  // physical cutoff of the spectrum
        double w = beat_weight(s, k);
        if (w == 0.0) continue;
        double phase = 2.0 * pi * (k * t / s.t1 + sq(static_cast<double>(k)) * t / s.t2);
        acc += w * std::exp(complex(0.0, phase));
    }
    return acc;
}

// ---------------------------------------------------------------------------
// Gaussian closed form
// ---------------------------------------------------------------------------

struct GaussianBeatValue {
    complex value{0.0, 0.0};
    double sigma_r = 0.0;
    double sigma_i = 0.0;
};

namespace detail {

// One Poisson signal: integral of P(k) exp 2 pi i (u1 k + u2 k^2) over k,
// for Gaussian P of spread dn.  u1 = t/T1 - l, u2 = t/T2.
inline complex gaussian_signal_term(double dn, double u1, double u2) {
    complex denom = 1.0 - complex(0.0, 4.0 * pi * sq(dn) * u2);
    complex pref = 1.0 / std::sqrt(denom);
    complex expo = -2.0 * sq(pi) * sq(dn) * sq(u1) / denom;
    return pref * std::exp(expo);
}

// Flat-distribution signal: integral of a unit density truncated at +-Ne.
// The edge sits half a lattice step beyond the outermost teeth (Ne = N + 1/2)
// so that every tooth of the discrete sum carries unit weight under the
// Poisson correspondence; a hard edge at +-N would count the k = +-N teeth
// at half weight.
inline complex tophat_signal_term(double N, double u1, double u2) {
    const double Ne = std::floor(N) + 0.5;
    if (std::abs(u2) < 1e-30) {
        // plain Fourier kernel: sinc pulse
        double arg = 2.0 * pi * u1 * Ne;
        double v = (std::abs(arg) < 1e-12) ? 1.0 : std::sin(arg) / arg;
        return complex(v, 0.0);
    }
    complex a(0.0, -2.0 * pi * u2);
    complex b(0.0, 2.0 * pi * u1);
    complex ra = std::sqrt(a);
    complex e1 = erf_complex((2.0 * a * Ne + b) / (2.0 * ra));
    complex e2 = erf_complex((2.0 * a * Ne - b) / (2.0 * ra));
    complex val = (1.0 / (2.0 * Ne)) * std::sqrt(pi / a) * std::exp(b * b / (4.0 * a)) * 0.5 *
                  (e1 + e2);
    if (!std::isfinite(val.real()) || !std::isfinite(val.imag()))
        throw ErfOverflow("tophat_signal_term: NaN propagated through erf");
    return val;
}

}  // namespace detail

inline double gaussian_sigma_r(const BeatSpec& s, double u2) {
    return std::sqrt(0.5 * (1.0 / (2.0 * sq(pi * s.width)) + 8.0 * sq(s.width) * sq(u2)));
}

inline double gaussian_sigma_i(const BeatSpec& s, double u2) {
    if (u2 == 0.0) return std::numeric_limits<double>::infinity();
    return std::sqrt(std::abs(0.5 * (1.0 / (8.0 * std::pow(pi, 3) * std::pow(s.width, 4) * u2) +
                                     (2.0 / pi) * u2)));
}

inline GaussianBeatValue gaussian_beats_closed(const BeatSpec& s, double t) {
    if (s.distribution != BeatDistribution::Gaussian)
        throw BadParams("gaussian_beats_closed: spec is not Gaussian");
    double u2 = t / s.t2;
    GaussianBeatValue out;
    out.sigma_r = gaussian_sigma_r(s, u2);
    out.sigma_i = gaussian_sigma_i(s, u2);

    double tau = t / s.t1;
    int span = static_cast<int>(std::ceil(6.0 * out.sigma_r + 2.0));
    int l0 = static_cast<int>(std::lround(tau));
    complex acc(0.0, 0.0);
    for (int l = l0 - span; l <= l0 + span; ++l) {
        acc += detail::gaussian_signal_term(s.width, tau - l, u2);
        OpCounters::closed_form_terms()++;
    }
    out.value = acc;
    return out;
}

inline complex tophat_beats_closed(const BeatSpec& s, double t) {
    if (s.distribution != BeatDistribution::TopHat)
        throw BadParams("tophat_beats_closed: spec is not flat");
    double N = std::floor(s.width);
    double u2 = t / s.t2;
    double tau = t / s.t1;
    double w = 2.0 * N * std::abs(s.t1 / s.t2);
    int lo = static_cast<int>(std::floor(tau * (1.0 - w))) - 8;
    int hi = static_cast<int>(std::ceil(tau * (1.0 + w))) + 8;
    if (hi - lo > 4000) throw BadParams("tophat_beats_closed: window too wide");
    complex acc(0.0, 0.0);
    for (int l = lo; l <= hi; ++l) {
        acc += detail::tophat_signal_term(N, tau - l, u2);
        OpCounters::closed_form_terms()++;
    }
    return acc;
}

// ---------------------------------------------------------------------------
// Dephasing landmarks (in units of T1):
//   Gaussian: (T2/T1) (1/8 dn q) sqrt(1 - 1/(q^2 pi^2 dn^2))
//   flat:     (T2/T1) / (8 N q)
// ---------------------------------------------------------------------------

inline double dephase_time(const BeatSpec& s, int q = 1) {
    if (q < 1) throw BadParams("dephase_time: q >= 1");
    double ratio = std::abs(s.ratio21());
    if (s.distribution == BeatDistribution::TopHat)
        return ratio / (8.0 * std::floor(s.width) * q);
    double rad = 1.0 - 1.0 / (sq(static_cast<double>(q)) * sq(pi) * sq(s.width));
    if (rad < 0.0) throw ImaginaryRoot("dephase_time: packet too narrow for this regime");
    return ratio / (8.0 * s.width * q) * std::sqrt(rad);
}

// ---------------------------------------------------------------------------
// Fractional revivals of the beat signal
// ---------------------------------------------------------------------------

struct FractionalTime {
    Fraction fraction;
    long long l_int = 0;   // nearest whole number of classical periods
    double epsilon = 0.0;  // in [-1/2, 1/2]
    long long j = 1;       // minimum period of the quadratic weight w_k

    double t_over_t1(const BeatSpec& s) const {
        return fraction.value() * s.ratio21();
    }
};

// l T1 = (p/q) T2 + eps T1, so eps = l - (p/q) T2/T1 with |eps| <= 1/2.
inline FractionalTime make_fractional_time(const BeatSpec& s, const Fraction& f) {
    FractionalTime ft;
    ft.fraction = f;
    double rho = f.value() * s.ratio21();
    ft.l_int = std::llround(rho);
    ft.epsilon = static_cast<double>(ft.l_int) - rho;
    ft.j = (f.q % 4 == 0) ? f.q / 2 : f.q;
    return ft;
}

// W_k = (1/j) sum_r exp 2 pi i (r^2 p/q + r k / j); j-periodic in k.
inline complex fractional_weight(const FractionalTime& ft, long long k) {
    complex acc(0.0, 0.0);
    long long kr = ((k % ft.j) + ft.j) % ft.j;
    for (long long r = 0; r < ft.j; ++r) {
        double phase = 2.0 * pi * (static_cast<double>((r * r % ft.fraction.q) * ft.fraction.p %
                                                       ft.fraction.q) /
                                       ft.fraction.q +
                                   static_cast<double>(r * kr % ft.j) / ft.j);
        acc += std::exp(complex(0.0, phase));
    }
    return acc / static_cast<double>(ft.j);
}

// One fractional signal S_k(dt): the early-evolution integral with
//   (t/T1 - l) -> (dt/T1 - k/j) and t/T2 -> (eps + dt/T1) T1/T2.
inline complex fractional_signal_component(const BeatSpec& s, const FractionalTime& ft,
                                           long long k, double dt) {
    double u1 = dt / s.t1 - static_cast<double>(k) / ft.j;
    double u2 = (ft.epsilon + dt / s.t1) * (s.t1 / s.t2);
    if (s.distribution == BeatDistribution::Gaussian)
        return detail::gaussian_signal_term(s.width, u1, u2);
    return detail::tophat_signal_term(std::floor(s.width), u1, u2);
}

// f(t_{p/q} + dt) = sum_k W_k S_k(dt), |dt| < T1/2.
inline complex fractional_beat_signal(const BeatSpec& s, const Fraction& f, double dt) {
    if (!(std::abs(dt) < 0.5 * std::abs(s.t1)))
        throw BadParams("fractional_beat_signal: |dt| < T1/2 required");
    FractionalTime ft = make_fractional_time(s, f);
    double u2 = (ft.epsilon + dt / s.t1) * (s.t1 / s.t2);
    double reach;
    if (s.distribution == BeatDistribution::Gaussian)
        reach = 6.0 * gaussian_sigma_r(s, u2) + 2.0;
    else
        reach = 2.0 * std::floor(s.width) * std::abs(u2) * 2.0 + 2.0;
    long long span = static_cast<long long>(std::ceil((0.5 + reach) * ft.j)) + 1;
    complex acc(0.0, 0.0);
    for (long long k = -span; k <= span; ++k)
        acc += fractional_weight(ft, k) * fractional_signal_component(s, ft, k, dt);
    return acc;
}

// dt dE = 2 pi (T2/T1 + 2 nbar): dt = T2/(2 width), dE = 4 pi width (1/T1 + 2 nbar/T2).
inline double uncertainty_product(const BeatSpec& s) {
    double w = s.distribution == BeatDistribution::Gaussian ? s.width : std::floor(s.width);
    double dt = s.t2 / (2.0 * w);
    double de = 4.0 * pi * w * (1.0 / s.t1 + 2.0 * s.nbar / s.t2);
    return dt * de;
}

}  // namespace carpetforge

#endif
