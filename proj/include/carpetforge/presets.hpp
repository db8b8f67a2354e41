#ifndef CARPETFORGE_PRESETS_HPP
#define CARPETFORGE_PRESETS_HPP

#include <map>
#include <string>
#include <vector>

#include "carpetforge/cli_render.hpp"

namespace carpetforge {

// One preset per figure family.  Values are plain config keys, so a preset
// behaves exactly like a config file that flags may override.
inline std::map<std::string, Scenario> preset_table() {
    std::map<std::string, Scenario> t;
    auto add = [&](const std::string& name, const std::string& command,
                   std::map<std::string, std::string> kv) {
        Scenario s;
        s.name = name;
        s.command = command;
        s.kv = std::move(kv);
        t[name] = s;
    };

    // square well, narrow spatial packet released at the center
    add("fig-first", "carpet",
        {{"basis.kind", "isw"}, {"packet.kind", "spatial_gaussian"}, {"packet.x0", "0.5"},
         {"packet.sigma_x", "0.003"}, {"grid.nx", "384"}, {"grid.nt", "384"},
         {"grid.t_unit", "tr"}, {"grid.t0", "0"}, {"grid.t1", "1"}});

    // square well revival structure over one revival period
    add("fig-rev", "carpet",
        {{"basis.kind", "isw"}, {"packet.kind", "gaussian_n"}, {"packet.nbar", "40"},
         {"packet.sigma", "2"}, {"grid.nx", "512"}, {"grid.nt", "512"}, {"grid.t_unit", "tr"},
         {"grid.t0", "0"}, {"grid.t1", "1"}});

    // oscillator packet: pure classical oscillation
    add("fig-sho-pd", "carpet",
        {{"basis.kind", "sho"}, {"packet.kind", "gaussian_n"}, {"packet.nbar", "6"},
         {"packet.sigma", "2"}, {"grid.nx", "384"}, {"grid.nt", "384"}, {"grid.x0", "-8"},
         {"grid.x1", "8"}, {"grid.t_unit", "tcl"}, {"grid.t0", "0"}, {"grid.t1", "3"}});

    // density slices at t = 0, T_R/2, T_R/4
    add("fig-isw-cuts", "carpet",
        {{"basis.kind", "isw"}, {"packet.kind", "spatial_gaussian"}, {"packet.x0", "0.5"},
         {"packet.sigma_x", "0.003"}, {"grid.nx", "1024"}, {"grid.nt", "2"},
         {"grid.t_unit", "tr"}, {"grid.t0", "0"}, {"grid.t1", "1"},
         {"carpet.slices", "0,0.5,0.25"}});

    // fractional-revival counting range
    add("fig-isw-frac", "carpet",
        {{"basis.kind", "isw"}, {"packet.kind", "spatial_gaussian"}, {"packet.x0", "0.5"},
         {"packet.sigma_x", "0.003"}, {"grid.nx", "512"}, {"grid.nt", "512"},
         {"grid.t_unit", "tr"}, {"grid.t0", "0"}, {"grid.t1", "0.125"}});

    // classicized density in two smooth wells
    add("fig-pt-psicl", "psicl",
        {{"basis.kind", "poschl_teller"}, {"basis.A", "16"}, {"basis.B", "20"},
         {"basis.alpha", "1"}, {"packet.kind", "gaussian_n"}, {"packet.nbar", "8"},
         {"packet.sigma", "1.5"}, {"grid.nx", "384"}, {"grid.nt", "384"},
         {"grid.t_unit", "tcl"}, {"grid.t0", "0"}, {"grid.t1", "2"}});
    add("fig-mr-psicl", "psicl",
        {{"basis.kind", "morse"}, {"basis.A", "16"}, {"basis.B", "16"}, {"basis.alpha", "1"},
         {"packet.kind", "gaussian_n"}, {"packet.nbar", "6"}, {"packet.sigma", "1.5"},
         {"grid.nx", "384"}, {"grid.nt", "384"}, {"grid.t_unit", "tcl"}, {"grid.t0", "0"},
         {"grid.t1", "2"}});

    // beat signals, both weight families
    add("fig-qbeats-g", "beats",
        {{"beats.dist", "gaussian"}, {"beats.dn", "8"}, {"beats.t2_over_t1", "200"},
         {"beats.t0", "0"}, {"beats.t1", "5"}, {"beats.samples", "2000"},
         {"beats.mode", "both"}});
    add("fig-qbeats-t", "beats",
        {{"beats.dist", "tophat"}, {"beats.N", "8"}, {"beats.t2_over_t1", "200"},
         {"beats.t0", "0"}, {"beats.t1", "5"}, {"beats.samples", "2000"},
         {"beats.mode", "both"}});

    // closed-form square-well carpet and its dephasing boundary
    add("fig-beatwell", "carpet",
        {{"carpet.closed", "1"}, {"packet.nbar", "30"}, {"packet.sigma", "5"},
         {"grid.nx", "512"}, {"grid.nt", "512"}, {"grid.t0", "0"}, {"grid.t1", "4"}});
    add("fig-beatwell-dephase", "carpet",
        {{"carpet.closed", "1"}, {"packet.nbar", "30"}, {"packet.sigma", "5"},
         {"grid.nx", "512"}, {"grid.nt", "512"}, {"grid.t0", "0"}, {"grid.t1", "4"},
         {"carpet.dephase_curve", "1"}, {"dephase.A", "1"}, {"dephase.branch", "lower"}});

    // velocity bundles of an even ten-state square-well packet
    add("fig-trace-v", "traces",
        {{"basis.kind", "isw"}, {"packet.kind", "uniform"}, {"packet.n_lo", "1"},
         {"packet.n_hi", "10"}, {"traces.speeds_pi", "1,2"}, {"grid.nx", "384"},
         {"grid.nt", "384"}, {"grid.t_unit", "tr"}, {"grid.t0", "0"}, {"grid.t1", "1"}});
    add("fig-carpet-0", "carpet",
        {{"basis.kind", "isw"}, {"packet.kind", "uniform"}, {"packet.n_lo", "1"},
         {"packet.n_hi", "10"}, {"grid.nx", "384"}, {"grid.nt", "384"}, {"grid.t_unit", "tr"},
         {"grid.t0", "0"}, {"grid.t1", "1"}});
    add("fig-carpet-1", "traces",
        {{"basis.kind", "isw"}, {"packet.kind", "uniform"}, {"packet.n_lo", "1"},
         {"packet.n_hi", "10"}, {"traces.speeds_pi", "1"}, {"grid.nx", "384"},
         {"grid.nt", "384"}, {"grid.t_unit", "tr"}, {"grid.t0", "0"}, {"grid.t1", "1"}});
    add("fig-carpet-2", "traces",
        {{"basis.kind", "isw"}, {"packet.kind", "uniform"}, {"packet.n_lo", "1"},
         {"packet.n_hi", "10"}, {"traces.speeds_pi", "2"}, {"grid.nx", "384"},
         {"grid.nt", "384"}, {"grid.t_unit", "tr"}, {"grid.t0", "0"}, {"grid.t1", "1"}});

    // oscillator carpet forced by perfect-square weighting
    add("fig-sho-sqr", "carpet",
        {{"basis.kind", "sho"}, {"basis.nmax", "85"}, {"packet.kind", "perfect_squares"},
         {"packet.n_lo", "1"}, {"packet.n_hi", "81"}, {"grid.nx", "384"}, {"grid.nt", "384"},
         {"grid.x0", "-16"}, {"grid.x1", "16"}, {"grid.t_unit", "tcl"}, {"grid.t0", "0"},
         {"grid.t1", "1"}});

    add("fig-farey", "farey", {{"farey.n", "15"}});
    return t;
}

inline Scenario preset(const std::string& name) {
    auto t = preset_table();
    auto it = t.find(name);
    if (it == t.end()) throw ConfigError("unknown preset: " + name);
    return it->second;
}

}  // namespace carpetforge

#endif
