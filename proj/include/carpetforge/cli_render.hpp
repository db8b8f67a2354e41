#ifndef CARPETFORGE_CLI_RENDER_HPP
#define CARPETFORGE_CLI_RENDER_HPP

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "carpetforge/beats.hpp"
#include "carpetforge/carpet_closed.hpp"
#include "carpetforge/core.hpp"
#include "carpetforge/evolve.hpp"
#include "carpetforge/render.hpp"
#include "carpetforge/revivals.hpp"
#include "carpetforge/spectra.hpp"
#include "carpetforge/traces.hpp"
#include "carpetforge/wavepacket.hpp"

namespace carpetforge {

// A scenario is a flat key = value map plus a command; flags override file
// values, file values override preset values.
struct Scenario {
    std::string name = "custom";
    std::string command;
    std::map<std::string, std::string> kv;

    bool has(const std::string& k) const { return kv.count(k) != 0; }
    std::string get(const std::string& k, const std::string& dflt = "") const {
        auto it = kv.find(k);
        return it == kv.end() ? dflt : it->second;
    }
    double num(const std::string& k, double dflt) const {
        auto it = kv.find(k);
        if (it == kv.end()) return dflt;
        try {
            size_t pos = 0;
            double v = std::stod(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument(k);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("bad numeric value for " + k + ": " + it->second);
        }
    }
    int integer(const std::string& k, int dflt) const {
        double v = num(k, dflt);
        int i = static_cast<int>(std::llround(v));
        if (std::abs(v - i) > 1e-9) throw ConfigError(k + " must be an integer");
        return i;
    }
};

// flat "key = value" config file; '#' starts a comment
inline std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            size_t a = s.find_first_not_of(" \t\r");
            size_t b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("empty key in config file");
        kv[key] = val;
    }
    return kv;
}

// ---------------------------------------------------------------------------
// Scenario -> domain objects
// ---------------------------------------------------------------------------

inline Eigenbasis scenario_basis(const Scenario& s) {
    PotentialKind kind = potential_kind_from_string(s.get("basis.kind", "isw"));
    ParamMap pm = default_params(kind);
    for (const char* key : {"L", "omega", "A", "B", "alpha", "nmax"})
        if (s.has(std::string("basis.") + key)) pm[key] = s.num(std::string("basis.") + key, 0.0);
    return Eigenbasis(kind, pm);
}

inline PacketSpec scenario_packet(const Scenario& s, const Eigenbasis& basis) {
    std::string kind = s.get("packet.kind", "gaussian_n");
    if (kind == "gaussian_n") {
        if (s.has("packet.k_lo") || s.has("packet.k_hi"))
            return gaussian_packet(s.integer("packet.nbar", 40), s.num("packet.sigma", 2.0),
                                   s.integer("packet.k_lo", 0), s.integer("packet.k_hi", 0));
        return gaussian_packet_for(basis, s.integer("packet.nbar", 40),
                                   s.num("packet.sigma", 2.0));
    }
    if (kind == "top_hat")
        return top_hat_packet(s.integer("packet.nbar", 40), s.integer("packet.N", 8));
    if (kind == "uniform")
        return uniform_packet(s.integer("packet.n_lo", 1), s.integer("packet.n_hi", 10));
    if (kind == "perfect_squares")
        return perfect_squares_packet(s.integer("packet.n_lo", 1), s.integer("packet.n_hi", 81));
    if (kind == "spatial_gaussian")
        return spatial_gaussian_packet(basis, s.num("packet.x0", 0.5),
                                       s.num("packet.sigma_x", 0.003),
                                       s.integer("packet.n_hi", 0));
    throw ConfigError("unknown packet.kind: " + kind);
}

inline double scenario_time_unit(const Scenario& s, const Eigenbasis& basis,
                                 const PacketSpec& packet) {
    std::string unit = s.get("grid.t_unit", "abs");
    if (unit == "abs") return 1.0;
    Timescales ts = timescales(basis, packet.nbar, 2);
    if (unit == "tcl") return std::abs(ts.t_cl());
    if (unit == "tr") return std::abs(ts.t_rev());
    throw ConfigError("grid.t_unit must be abs, tcl or tr");
}

struct RunReport {
    std::string summary_json;
    std::vector<std::string> outputs;
};

namespace detail {

inline void check_out_dir(const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    auto probe = fs::path(out_dir) / ".writable";
    std::ofstream f(probe);
    if (!f) throw ConfigError("output directory not writable: " + out_dir);
    f.close();
    fs::remove(probe, ec);
}

inline Axis scenario_x_axis(const Scenario& s, const Eigenbasis& basis) {
    Axis x;
    x.lo = s.num("grid.x0", basis.x_lo());
    x.hi = s.num("grid.x1", basis.x_hi());
    x.n = s.integer("grid.nx", 512);
    if (x.n < 1 || x.hi <= x.lo) throw ConfigError("bad x axis");
    return x;
}

inline Axis scenario_t_axis(const Scenario& s, double unit) {
    Axis t;
    t.lo = s.num("grid.t0", 0.0) * unit;
    t.hi = s.num("grid.t1", 1.0) * unit;
    t.n = s.integer("grid.nt", 512);
    if (t.n < 1 || t.hi < t.lo) throw ConfigError("bad t axis");
    return t;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Command implementations.  Each returns the grids/values it produced and
// appends artifact paths; run_scenario assembles the machine-readable
// summary around them.
// ---------------------------------------------------------------------------

inline RunReport run_scenario(const Scenario& s, const std::string& out_dir) {
    namespace fs = std::filesystem;
    detail::check_out_dir(out_dir);
    auto t_start = std::chrono::steady_clock::now();

    nlohmann::json summary;
    summary["name"] = s.name;
    summary["command"] = s.command;
    summary["inputs"] = nlohmann::json::object();
    for (const auto& [k, v] : s.kv) summary["inputs"][k] = v;

    RunReport report;
    auto emit_grid = [&](const DensityGrid& g, const std::string& stem, bool pgm = true) {
        double vmax = s.num("render.vmax", 0.0);
        std::string base = (fs::path(out_dir) / stem).string();
        if (pgm) {
            write_pgm(g, base + ".pgm", vmax);
            report.outputs.push_back(base + ".pgm");
        }
        write_csv(g, base + ".csv");
        report.outputs.push_back(base + ".csv");
        summary["density_max"] = g.max_value();
        summary["density_min"] = g.min_value();
        summary["validity_mask_coverage"] = g.valid_fraction();
    };

    if (s.command == "carpet" || s.command == "psicl") {
        if (s.command == "carpet" && s.integer("carpet.closed", 0) != 0) {
            // closed-form square-well carpet in (xi, tau) units
            CarpetClosedParams cp = make_carpet_params(s.integer("packet.nbar", 30),
                                                       s.num("packet.sigma", 5.0),
                                                       s.num("carpet.xi_valid", 0.5));
            Axis xi{s.num("grid.x0", 0.0), s.num("grid.x1", 1.0), s.integer("grid.nx", 512)};
            Axis tau{s.num("grid.t0", 0.0), s.num("grid.t1", 4.0), s.integer("grid.nt", 512)};
            DensityGrid g = carpet_closed_grid(cp, xi, tau);
            emit_grid(g, s.name);
            if (s.integer("carpet.dephase_curve", 0) != 0) {
                double A = s.num("dephase.A", 1.0);
                DephaseBranch br = s.get("dephase.branch", "lower") == "upper"
                                       ? DephaseBranch::Upper
                                       : DephaseBranch::Lower;
                DensityGrid curve;
                std::vector<double> xs, tsv;
                for (int i = 0; i < xi.n; ++i) {
                    double x = xi.at(i);
                    if (x <= 0.0) continue;
                    try {
                        double tau_x = dephase_curve(cp, x, A, br);
                        xs.push_back(x);
                        tsv.push_back(tau_x);
                    } catch (const RegimeError&) {
                        continue;
                    }
                }
                // one row per xi sample: x = xi, t = tau(xi)
                std::string path = (fs::path(out_dir) / (s.name + "_curve.csv")).string();
                std::ofstream f(path, std::ios::binary);
                f << "x,t,value\n";
                for (size_t i = 0; i < xs.size(); ++i)
                    f << detail::fmt15(xs[i]) << ',' << detail::fmt15(tsv[i]) << ",0\n";
                report.outputs.push_back(path);
            }
        } else {
            Eigenbasis basis = scenario_basis(s);
            PacketSpec packet = scenario_packet(s, basis);
            double unit = scenario_time_unit(s, basis, packet);
            Axis x = detail::scenario_x_axis(s, basis);
            Axis t = detail::scenario_t_axis(s, unit);
            if (s.command == "psicl") {
                DensityGrid g(x, t);
                g.basis_id = basis.id();
                g.packet_id = packet.id();
                parallel_for(t.n, [&](int it) {
                    for (int ix = 0; ix < x.n; ++ix)
                        g.at(it, ix) = std::norm(psi_cl(basis, packet, x.at(ix), t.at(it)));
                });
                emit_grid(g, s.name);
            } else {
                DensityGrid g = density_grid(basis, packet, x, t);
                emit_grid(g, s.name);
                if (s.has("carpet.slices")) {
                    std::istringstream ss(s.get("carpet.slices"));
                    std::string tok;
                    int idx = 0;
                    while (std::getline(ss, tok, ',')) {
                        double frac = std::stod(tok);
                        Axis one{frac * unit, frac * unit, 1};
                        DensityGrid row = density_grid(basis, packet, x, one);
                        std::string stem = s.name + "_slice" + std::to_string(idx++);
                        write_csv(row, (fs::path(out_dir) / (stem + ".csv")).string());
                        report.outputs.push_back((fs::path(out_dir) / (stem + ".csv")).string());
                    }
                }
            }
        }
    } else if (s.command == "beats") {
        BeatDistribution dist = s.get("beats.dist", "gaussian") == "tophat"
                                    ? BeatDistribution::TopHat
                                    : BeatDistribution::Gaussian;
        double width = dist == BeatDistribution::Gaussian ? s.num("beats.dn", 8.0)
                                                          : s.num("beats.N", 8.0);
        BeatSpec spec(dist, width, 1.0, s.num("beats.t2_over_t1", 200.0),
                      s.integer("beats.nbar", 200));
        int samples = s.integer("beats.samples", 2000);
        double t0 = s.num("beats.t0", 0.0), t1v = s.num("beats.t1", 5.0);
        std::string mode = s.get("beats.mode", "both");
        auto signal_grid = [&](bool closed) {
            DensityGrid g(Axis{t0, t1v, samples}, Axis{0.0, 0.0, 1});
            for (int i = 0; i < samples; ++i) {
                double t = g.x_axis.at(i);
                complex v = closed ? (dist == BeatDistribution::Gaussian
                                          ? gaussian_beats_closed(spec, t * spec.t1).value
                                          : tophat_beats_closed(spec, t * spec.t1))
                                   : beat_signal_direct(spec, t * spec.t1);
                g.at(0, i) = std::norm(v);
            }
            return g;
        };
        if (mode == "direct" || mode == "both")
            emit_grid(signal_grid(false), s.name + "_direct", false);
        if (mode == "closed" || mode == "both")
            emit_grid(signal_grid(true), s.name + "_closed", false);
    } else if (s.command == "revival") {
        Fraction f(s.integer("revival.p", 1), s.integer("revival.q", 5));
        RevivalDecomposition d = revival_coefficients(f);
        std::string path = (fs::path(out_dir) / (s.name + "_coeffs.csv")).string();
        std::ofstream out(path, std::ios::binary);
        out << "m,re,im,abs\n";
        for (long long m = 0; m < d.l; ++m)
            out << m << ',' << detail::fmt15(d.a[m].real()) << ',' << detail::fmt15(d.a[m].imag())
                << ',' << detail::fmt15(std::abs(d.a[m])) << '\n';
        report.outputs.push_back(path);
        summary["l"] = d.l;
        summary["q_class"] = to_string(d.q_class);
    } else if (s.command == "traces") {
        Eigenbasis basis = scenario_basis(s);
        PacketSpec packet = scenario_packet(s, basis);
        double unit = scenario_time_unit(s, basis, packet);
        Axis x = detail::scenario_x_axis(s, basis);
        Axis t = detail::scenario_t_axis(s, unit);
        BundleAnalysis an = degeneracy_bundles(basis, packet, TraceMode::Full);
        {
            std::string path = (fs::path(out_dir) / (s.name + "_bundles.csv")).string();
            std::ofstream out(path, std::ios::binary);
            out << "velocity,members,weight\n";
            for (const auto& b : an.bundles)
                out << detail::fmt15(b.velocity) << ',' << b.members.size() << ','
                    << detail::fmt15(b.weight) << '\n';
            report.outputs.push_back(path);
        }
        if (s.has("traces.speeds_pi")) {
            double L = basis.length_scale();
            std::istringstream ss(s.get("traces.speeds_pi"));
            std::string tok;
            int idx = 0;
            while (std::getline(ss, tok, ',')) {
                double speed = std::stod(tok) * pi / L;
                auto pairs = BundleAnalysis::pair_set(an.with_speed(speed));
                DensityGrid g(x, t);
                g.basis_id = basis.id();
                g.packet_id = packet.id();
                parallel_for(t.n, [&](int it) {
                    for (int ix = 0; ix < x.n; ++ix)
                        g.at(it, ix) = bundle_density(basis, packet, pairs, x.at(ix), t.at(it));
                });
                emit_grid(g, s.name + "_v" + std::to_string(idx++));
            }
        }
    } else if (s.command == "dephase") {
        BeatDistribution dist = s.get("dephase.dist", s.get("beats.dist", "gaussian")) == "tophat"
                                    ? BeatDistribution::TopHat
                                    : BeatDistribution::Gaussian;
        double width = dist == BeatDistribution::Gaussian
                           ? s.num("dephase.dn", s.num("beats.dn", 8.0))
                           : s.num("dephase.N", s.num("beats.N", 8.0));
        BeatSpec spec(dist, width, 1.0,
                      s.num("dephase.t2_over_t1", s.num("beats.t2_over_t1", 200.0)), 200);
        double td = dephase_time(spec, s.integer("dephase.q", 1));
        std::ostringstream line;
        line << "t_dephase/T1 = " << td;
        summary["t_dephase_over_t1"] = td;
        summary["stdout"] = line.str();
        std::string path = (fs::path(out_dir) / (s.name + ".txt")).string();
        std::ofstream out(path, std::ios::binary);
        out << line.str() << "\n";
        report.outputs.push_back(path);
    } else if (s.command == "farey") {
        int n = s.integer("farey.n", 5);
        auto seq = farey_sequence(n);
        std::ostringstream line;
        for (size_t i = 0; i < seq.size(); ++i) line << (i ? " " : "") << seq[i].str();
        summary["stdout"] = line.str();
        summary["count"] = seq.size();
        std::string path = (fs::path(out_dir) / (s.name + ".txt")).string();
        std::ofstream out(path, std::ios::binary);
        out << line.str() << "\n";
        report.outputs.push_back(path);
    } else {
        throw ConfigError("unknown command: " + s.command);
    }

    auto t_end = std::chrono::steady_clock::now();
    summary["wall_ms"] =
        std::chrono::duration_cast<std::chrono::microseconds>(t_end - t_start).count() / 1000.0;
    if (!summary.contains("validity_mask_coverage")) summary["validity_mask_coverage"] = 1.0;
    summary["outputs"] = report.outputs;
    report.summary_json = summary.dump(2);

    std::ofstream sf((fs::path(out_dir) / (s.name + "_summary.json")).string(), std::ios::binary);
    sf << report.summary_json << "\n";
    return report;
}

}  // namespace carpetforge

#endif
