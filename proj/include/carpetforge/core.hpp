#ifndef CARPETFORGE_CORE_HPP
#define CARPETFORGE_CORE_HPP

#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace carpetforge {

using complex = std::complex<double>;

inline constexpr double pi = 3.141592653589793238462643383279502884;
inline constexpr complex iu{0.0, 1.0};

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define CARPETFORGE_ERROR(Name)                 \
    struct Name : Error {                       \
        using Error::Error;                     \
    }

CARPETFORGE_ERROR(BadParams);
CARPETFORGE_ERROR(UnboundState);
CARPETFORGE_ERROR(ComplexLeak);
CARPETFORGE_ERROR(ForbiddenRegion);
CARPETFORGE_ERROR(NoConvergence);
CARPETFORGE_ERROR(NoBoundState);
CARPETFORGE_ERROR(EmptyPacket);
CARPETFORGE_ERROR(ProjectionFail);
CARPETFORGE_ERROR(OutOfDomain);
CARPETFORGE_ERROR(QuadratureFail);
CARPETFORGE_ERROR(RecurrenceMismatch);
CARPETFORGE_ERROR(NotISW);
CARPETFORGE_ERROR(BoundaryTooClose);
CARPETFORGE_ERROR(ErfOverflow);
CARPETFORGE_ERROR(ImaginaryRoot);
CARPETFORGE_ERROR(RegimeError);
CARPETFORGE_ERROR(TurningPointTooClose);
CARPETFORGE_ERROR(VelocityZeroCrossing);
CARPETFORGE_ERROR(NoZeroPoint);
CARPETFORGE_ERROR(IoError);
CARPETFORGE_ERROR(ConfigError);

#undef CARPETFORGE_ERROR

// ---------------------------------------------------------------------------
// Axes and density grids
// ---------------------------------------------------------------------------

struct Axis {
    double lo = 0.0;
    double hi = 1.0;
    int n = 2;

    double at(int i) const {
        if (n == 1) return lo;
        return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    double step() const { return n > 1 ? (hi - lo) / static_cast<double>(n - 1) : 0.0; }
};

// Rectangular x-by-t lattice of |Psi|^2 samples.  Rows are time slices,
// row 0 being the earliest time.  An optional validity mask marks cells
// where a closed-form approximation is trusted.
struct DensityGrid {
    Axis x_axis;
    Axis t_axis;
    std::vector<double> values;       // t_axis.n * x_axis.n, time-major
    std::vector<uint8_t> valid;       // empty means "all valid"
    std::string basis_id;
    std::string packet_id;

    DensityGrid() = default;
    DensityGrid(Axis x, Axis t) : x_axis(x), t_axis(t), values(static_cast<size_t>(x.n) * t.n, 0.0) {}

    double& at(int it, int ix) { return values[static_cast<size_t>(it) * x_axis.n + ix]; }
    double at(int it, int ix) const { return values[static_cast<size_t>(it) * x_axis.n + ix]; }

    bool is_valid(int it, int ix) const {
        if (valid.empty()) return true;
        return valid[static_cast<size_t>(it) * x_axis.n + ix] != 0;
    }
    double valid_fraction() const {
        if (valid.empty()) return 1.0;
        size_t c = 0;
        for (uint8_t v : valid) c += (v != 0);
        return static_cast<double>(c) / static_cast<double>(valid.size());
    }
    double max_value() const {
        double m = 0.0;
        for (double v : values) m = std::max(m, v);
        return m;
    }
    double min_value() const {
        if (values.empty()) return 0.0;
        double m = values.front();
        for (double v : values) m = std::min(m, v);
        return m;
    }
};

// ---------------------------------------------------------------------------
// Parallelism
// ---------------------------------------------------------------------------

inline int max_threads() {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("CARPETFORGE_THREADS")) {
        long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1 && static_cast<unsigned>(cap) < hw) hw = static_cast<unsigned>(cap);
    }
    return static_cast<int>(hw);
}

// Runs fn(i) for i in [0, count).  Work is split by contiguous blocks; the
// result is deterministic because every index writes only its own slot.
inline void parallel_for(int count, const std::function<void(int)>& fn) {
    int nthreads = std::min(max_threads(), count);
    if (nthreads <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::atomic<bool> failed{false};
    std::mutex err_mutex;
    for (int t = 0; t < nthreads; ++t) {
        pool.emplace_back([&]() {
            for (;;) {
                int i = next.fetch_add(1);
                if (i >= count || failed.load()) break;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!failed.exchange(true)) first_error = std::current_exception();
                    break;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

// ---------------------------------------------------------------------------
// Operation counters (term-count accounting, not wall time)
// ---------------------------------------------------------------------------

struct OpCounters {
    static std::atomic<uint64_t>& closed_form_terms() {
        static std::atomic<uint64_t> c{0};
        return c;
    }
    static std::atomic<uint64_t>& eigenmode_terms() {
        static std::atomic<uint64_t> c{0};
        return c;
    }
    static std::atomic<uint64_t>& clamp_hits() {
        static std::atomic<uint64_t> c{0};
        return c;
    }
    static void reset() {
        closed_form_terms() = 0;
        eigenmode_terms() = 0;
        clamp_hits() = 0;
    }
};

inline double sq(double v) { return v * v; }

}  // namespace carpetforge

#endif
