#pragma once

/// File formats: lattice/tiling JSON, netlist text, trace CSV, Touchstone
/// S-parameter files, and report JSON.  All writers are deterministic
/// (fixed field order, shortest round-trip number formatting, no
/// timestamps) and all readers validate what they parse.

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hyperlat/analysis.hpp"
#include "hyperlat/circuit.hpp"
#include "hyperlat/common.hpp"
#include "hyperlat/lattice.hpp"
#include "hyperlat/spectrum.hpp"
#include "hyperlat/tiling.hpp"

namespace hyperlat {
namespace io {

using nlohmann::json;

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string best = buf;
    for (int prec = 1; prec < 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(buf, "%lf", &back);
        if (back == v && std::strlen(buf) < best.size())
            best = buf;
    }
    return best;
}

/// Writes content through a temporary file and renames it into place, so a
/// failure never leaves a partial file behind.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("atomic_write: cannot open " + tmp.string());
        out << content;
        if (!out)
            throw std::runtime_error("atomic_write: write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::invalid_argument("read_file: cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// --- tiling JSON ---------------------------------------------------------

inline json tiling_to_json(const Tiling& tiling) {
    json j;
    j["spec"] = {{"p", tiling.spec.p}, {"q", tiling.spec.q}, {"depth", tiling.spec.depth}};
    json verts = json::array();
    for (const DiskPoint& v : tiling.vertices)
        verts.push_back({v.re, v.im});
    j["vertices"] = std::move(verts);
    json faces = json::array();
    json gens = json::array();
    for (const TilingFace& f : tiling.faces) {
        faces.push_back(f.vertices);
        gens.push_back(f.generation);
    }
    j["faces"] = std::move(faces);
    j["generations"] = std::move(gens);
    return j;
}

inline Tiling tiling_from_json(const json& j) {
    Tiling tiling;
    tiling.spec.p = j.at("spec").at("p").get<int>();
    tiling.spec.q = j.at("spec").at("q").get<int>();
    tiling.spec.depth = j.at("spec").at("depth").get<int>();
    tiling.spec.validate();
    for (const json& v : j.at("vertices")) {
        if (!v.is_array() || v.size() != 2)
            throw std::invalid_argument("tiling_from_json: vertex must be [re, im]");
        tiling.vertices.push_back({v[0].get<double>(), v[1].get<double>()});
    }
    const json& faces = j.at("faces");
    const json& gens = j.at("generations");
    if (faces.size() != gens.size())
        throw std::invalid_argument("tiling_from_json: faces/generations size mismatch");
    for (std::size_t k = 0; k < faces.size(); ++k) {
        TilingFace f;
        f.vertices = faces[k].get<std::vector<int>>();
        f.generation = gens[k].get<int>();
        for (int v : f.vertices)
            if (v < 0 || v >= static_cast<int>(tiling.vertices.size()))
                throw std::invalid_argument("tiling_from_json: face vertex out of range");
        tiling.faces.push_back(std::move(f));
    }
    return tiling;
}

// --- lattice JSON ---------------------------------------------------------

inline json lattice_to_json(const LatticeGraph& graph) {
    json j;
    j["kind"] = graph.kind == GraphKind::parent ? "parent" : "medial";
    json verts = json::array();
    for (const LatticeVertex& v : graph.vertices)
        verts.push_back({v.id, v.position.re, v.position.im});
    j["vertices"] = std::move(verts);
    json edges = json::array();
    for (const LatticeEdge& e : graph.edges)
        edges.push_back({e.i, e.j, e.euclidean_length, e.hyperbolic_length});
    j["edges"] = std::move(edges);
    j["faces"] = graph.faces;
    return j;
}

inline LatticeGraph lattice_from_json(const json& j) {
    LatticeGraph graph;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "parent")
        graph.kind = GraphKind::parent;
    else if (kind == "medial")
        graph.kind = GraphKind::medial;
    else
        throw std::invalid_argument("lattice_from_json: kind must be 'parent' or 'medial'");
    for (const json& v : j.at("vertices")) {
        if (!v.is_array() || v.size() != 3)
            throw std::invalid_argument("lattice_from_json: vertex must be [id, re, im]");
        graph.vertices.push_back(
            {v[0].get<int>(), {v[1].get<double>(), v[2].get<double>()}});
    }
    for (const json& e : j.at("edges")) {
        if (!e.is_array() || e.size() != 4)
            throw std::invalid_argument(
                "lattice_from_json: edge must be [i, j, d_euclidean, d_hyperbolic]");
        graph.edges.push_back({e[0].get<int>(), e[1].get<int>(), e[2].get<double>(),
                               e[3].get<double>()});
    }
    for (const json& f : j.at("faces"))
        graph.faces.push_back(f.get<std::vector<int>>());
    graph.validate();
    return graph;
}

// --- spectrum / analysis JSON --------------------------------------------

inline json dos_to_json(const DosHistogram& hist) {
    json j;
    j["bin_width"] = hist.bin_width;
    j["origin"] = hist.origin;
    j["centers"] = hist.centers;
    j["counts"] = hist.counts;
    j["fractions"] = hist.fractions;
    return j;
}

inline json gaps_to_json(const GapList& gaps) {
    json j;
    j["threshold"] = gaps.threshold;
    json list = json::array();
    for (const SpectralGap& g : gaps.gaps)
        list.push_back({{"lower", g.lower}, {"upper", g.upper}, {"width", g.width()}});
    j["gaps"] = std::move(list);
    j["count"] = gaps.gaps.size();
    return j;
}

inline json degeneracies_to_json(const std::vector<DegenerateGroup>& groups) {
    json list = json::array();
    for (const DegenerateGroup& g : groups)
        list.push_back({{"energy", g.energy},
                        {"multiplicity", g.multiplicity},
                        {"first_index", g.first_index}});
    return list;
}

inline json cls_to_json(const ClsSet& set) {
    json j;
    j["energy"] = set.energy;
    json states = json::array();
    for (const CompactLocalizedState& s : set.states) {
        json amps = json::array();
        for (const auto& [v, a] : s.amplitudes)
            amps.push_back({v, a});
        states.push_back({{"parent_face", s.parent_face}, {"amplitudes", std::move(amps)}});
    }
    j["states"] = std::move(states);
    return j;
}

inline json coupling_plan_to_json(const CouplingPlan& plan) {
    json j;
    j["basis"] = to_string(plan.basis);
    j["reference_capacitance_f"] = plan.reference_capacitance_f;
    j["reference_distance"] = plan.reference_distance;
    j["capacitances_f"] = plan.capacitances_f;
    return j;
}

inline json peaks_to_json(const analysis::PeakSet& peaks) {
    json list = json::array();
    for (const analysis::Peak& p : peaks.peaks)
        list.push_back({{"sample_index", p.sample_index},
                        {"frequency_hz", p.frequency_hz},
                        {"height_db", p.height_db},
                        {"prominence_db", p.prominence_db}});
    return list;
}

inline json clustering_to_json(const analysis::Clustering& clustering) {
    json j;
    j["height_threshold_db"] = clustering.height_threshold_db;
    j["separation_hz"] = clustering.separation_hz;
    json list = json::array();
    for (const analysis::PeakCluster& c : clustering.clusters)
        list.push_back({{"peak_indices", c.peak_indices},
                        {"lower_hz", c.lower_hz},
                        {"upper_hz", c.upper_hz},
                        {"center_hz", c.center_hz},
                        {"max_height_db", c.max_height_db}});
    j["clusters"] = std::move(list);
    j["unclustered"] = clustering.unclustered;
    return j;
}

inline json mapping_report_to_json(const analysis::MappingReport& report) {
    json j;
    j["lambda1"] = report.lambda1;
    j["lambda2"] = report.lambda2;
    j["f1_hz"] = report.f1_hz;
    j["f2_hz"] = report.f2_hz;
    j["match_window_hz"] = report.match_window_hz;
    json matches = json::array();
    for (const analysis::EigenvalueMatch& m : report.matches) {
        json e = {{"index", m.index},
                  {"energy", m.energy},
                  {"mapped_hz", m.mapped_hz},
                  {"cluster_index", m.cluster_index}};
        if (m.peak_index >= 0) {
            e["peak_index"] = m.peak_index;
            e["residual_hz"] = m.residual_hz;
        } else {
            e["peak_index"] = nullptr;
            e["residual_hz"] = nullptr;
        }
        matches.push_back(std::move(e));
    }
    j["matches"] = std::move(matches);
    j["unmatched"] = report.unmatched;
    json gaps = json::array();
    for (const analysis::GapAlignment& g : report.gap_alignment)
        gaps.push_back({{"theory_lower_hz", g.theory_lower_hz},
                        {"theory_upper_hz", g.theory_upper_hz},
                        {"trace_lower_hz", g.trace_lower_hz},
                        {"trace_upper_hz", g.trace_upper_hz},
                        {"aligned", g.aligned}});
    j["gap_alignment"] = std::move(gaps);
    return j;
}

// --- netlist text format ---------------------------------------------------
//
//   # comment
//   C <node1> <node2> <farads>
//   L <node1> <node2> <henries>
//   P <node> <ohms>
//
// Node 0 is ground.  Values round-trip bit-exactly.

inline std::string write_netlist(const Netlist& netlist) {
    netlist.validate();
    std::ostringstream out;
    out << "# LC resonator netlist; node 0 is ground\n";
    out << "# nodes " << netlist.node_count << ", C " << netlist.capacitors.size() << ", L "
        << netlist.inductors.size() << ", P " << netlist.ports.size() << "\n";
    for (const Netlist::Capacitor& c : netlist.capacitors)
        out << "C " << c.n1 << ' ' << c.n2 << ' ' << format_double(c.farads) << '\n';
    for (const Netlist::Inductor& l : netlist.inductors)
        out << "L " << l.n1 << ' ' << l.n2 << ' ' << format_double(l.henries) << '\n';
    for (const Netlist::Port& p : netlist.ports)
        out << "P " << p.node << ' ' << format_double(p.ohms) << '\n';
    return out.str();
}

inline Netlist parse_netlist(const std::string& text) {
    Netlist netlist;
    netlist.node_count = 1;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    auto fail = [&line_no](const std::string& why) {
        throw std::invalid_argument("parse_netlist: line " + std::to_string(line_no) + ": " +
                                    why);
    };
    auto track = [&netlist](int node) {
        netlist.node_count = std::max(netlist.node_count, node + 1);
    };
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#')
            continue;
        std::istringstream fields(line);
        std::string kind;
        fields >> kind;
        if (kind == "C" || kind == "L") {
            int n1 = 0, n2 = 0;
            double value = 0.0;
            if (!(fields >> n1 >> n2 >> value))
                fail("expected '<n1> <n2> <value>'");
            std::string rest;
            if (fields >> rest)
                fail("trailing token '" + rest + "'");
            if (n1 < 0 || n2 < 0)
                fail("negative node id");
            track(n1);
            track(n2);
            if (kind == "C")
                netlist.capacitors.push_back({n1, n2, value});
            else
                netlist.inductors.push_back({n1, n2, value});
        } else if (kind == "P") {
            int node = 0;
            double ohms = 0.0;
            if (!(fields >> node >> ohms))
                fail("expected '<node> <ohms>'");
            std::string rest;
            if (fields >> rest)
                fail("trailing token '" + rest + "'");
            if (node < 0)
                fail("negative node id");
            track(node);
            netlist.ports.push_back({node, ohms});
        } else {
            fail("unknown directive '" + kind + "'");
        }
    }
    netlist.validate();
    return netlist;
}

// --- CSV -------------------------------------------------------------------

inline std::string write_trace_csv(const analysis::Trace& trace) {
    trace.validate();
    std::ostringstream out;
    out << "frequency_hz,value_db\n";
    for (std::size_t k = 0; k < trace.frequency_hz.size(); ++k)
        out << format_double(trace.frequency_hz[k]) << ',' << format_double(trace.value_db[k])
            << '\n';
    return out.str();
}

inline analysis::Trace parse_trace_csv(const std::string& text) {
    analysis::Trace trace;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r")
            continue;
        if (line_no == 1 && line.rfind("frequency_hz", 0) == 0)
            continue;
        double f = 0.0, v = 0.0;
        char comma = 0;
        std::istringstream fields(line);
        if (!(fields >> f >> comma >> v) || comma != ',')
            throw std::invalid_argument("parse_trace_csv: bad row at line " +
                                        std::to_string(line_no));
        trace.frequency_hz.push_back(f);
        trace.value_db.push_back(v);
    }
    trace.validate();
    return trace;
}

inline std::string write_spectrum_csv(const Spectrum& spectrum,
                                      const std::vector<DegenerateGroup>& groups,
                                      const std::vector<double>& ipr) {
    if (ipr.size() != spectrum.energies.size())
        throw std::invalid_argument("write_spectrum_csv: IPR array size mismatch");
    std::vector<int> multiplicity(spectrum.energies.size(), 0);
    for (const DegenerateGroup& g : groups)
        for (int k = 0; k < g.multiplicity; ++k)
            multiplicity[static_cast<std::size_t>(g.first_index + k)] = g.multiplicity;
    std::ostringstream out;
    out << "index,energy,multiplicity,ipr\n";
    for (std::size_t k = 0; k < spectrum.energies.size(); ++k)
        out << k << ',' << format_double(spectrum.energies[k]) << ',' << multiplicity[k] << ','
            << format_double(ipr[k]) << '\n';
    return out.str();
}

/// Full sweep matrix as CSV: one row per grid point, real/imaginary parts
/// for every port pair.
inline std::string write_sweep_csv(const SweepResult& sweep) {
    std::ostringstream out;
    out << "frequency_hz";
    for (int i = 0; i < sweep.port_count; ++i)
        for (int j = 0; j < sweep.port_count; ++j)
            out << ",s" << (i + 1) << (j + 1) << "_re,s" << (i + 1) << (j + 1) << "_im";
    out << '\n';
    for (std::size_t k = 0; k < sweep.frequency_hz.size(); ++k) {
        out << format_double(sweep.frequency_hz[k]);
        for (int i = 0; i < sweep.port_count; ++i)
            for (int j = 0; j < sweep.port_count; ++j) {
                const std::complex<double> s = sweep.s_parameters[k](i, j);
                out << ',' << format_double(s.real()) << ',' << format_double(s.imag());
            }
        out << '\n';
    }
    return out.str();
}

/// Parses the multi-column S-parameter CSV written by `write_sweep_csv`.
inline SweepResult parse_sweep_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line))
        throw std::invalid_argument("parse_sweep_csv: empty file");
    // Header: frequency_hz followed by port_count^2 (re, im) column pairs.
    std::size_t columns = 0;
    for (char c : line)
        if (c == ',')
            ++columns;
    if (columns == 0 || columns % 2 != 0)
        throw std::invalid_argument("parse_sweep_csv: malformed header");
    const int pairs = static_cast<int>(columns / 2);
    const int ports = static_cast<int>(std::llround(std::sqrt(static_cast<double>(pairs))));
    if (ports * ports != pairs)
        throw std::invalid_argument("parse_sweep_csv: column count is not a square matrix");

    SweepResult sweep;
    sweep.port_count = ports;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r")
            continue;
        std::istringstream fields(line);
        std::string cell;
        if (!std::getline(fields, cell, ','))
            throw std::invalid_argument("parse_sweep_csv: bad row at line " +
                                        std::to_string(line_no));
        sweep.frequency_hz.push_back(std::stod(cell));
        Eigen::MatrixXcd s(ports, ports);
        for (int i = 0; i < ports; ++i)
            for (int j = 0; j < ports; ++j) {
                std::string re_cell, im_cell;
                if (!std::getline(fields, re_cell, ',') || !std::getline(fields, im_cell, ','))
                    throw std::invalid_argument("parse_sweep_csv: short row at line " +
                                                std::to_string(line_no));
                s(i, j) = {std::stod(re_cell), std::stod(im_cell)};
            }
        sweep.s_parameters.push_back(std::move(s));
    }
    if (sweep.frequency_hz.empty())
        throw std::invalid_argument("parse_sweep_csv: no data rows");
    return sweep;
}

// --- Touchstone -------------------------------------------------------------

/// Touchstone 1.x, RI format, Hz.  Two-port files use the standard
/// S11 S21 S12 S22 column order; other sizes emit the matrix row-wise, one
/// matrix row per line.
inline std::string write_touchstone(const SweepResult& sweep, double reference_ohm) {
    std::ostringstream out;
    out << "# Hz S RI R " << format_double(reference_ohm) << '\n';
    for (std::size_t k = 0; k < sweep.frequency_hz.size(); ++k) {
        const Eigen::MatrixXcd& s = sweep.s_parameters[k];
        if (sweep.port_count == 2) {
            out << format_double(sweep.frequency_hz[k]);
            for (auto [i, j] : {std::pair{0, 0}, {1, 0}, {0, 1}, {1, 1}})
                out << ' ' << format_double(s(i, j).real()) << ' '
                    << format_double(s(i, j).imag());
            out << '\n';
        } else {
            out << format_double(sweep.frequency_hz[k]);
            for (int i = 0; i < sweep.port_count; ++i) {
                if (i > 0)
                    out << '\n';
                for (int j = 0; j < sweep.port_count; ++j)
                    out << ' ' << format_double(s(i, j).real()) << ' '
                        << format_double(s(i, j).imag());
            }
            out << '\n';
        }
    }
    return out.str();
}

/// Parses a two-port Touchstone file written by `write_touchstone`.
inline SweepResult parse_touchstone_2port(const std::string& text) {
    SweepResult sweep;
    sweep.port_count = 2;
    std::istringstream in(text);
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        const std::size_t first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '!')
            continue;
        if (line[first] == '#') {
            std::istringstream fields(line.substr(first + 1));
            std::string unit, param, fmt, rtoken;
            double r = 0.0;
            if (!(fields >> unit >> param >> fmt >> rtoken >> r) || unit != "Hz" ||
                param != "S" || fmt != "RI" || rtoken != "R")
                throw std::invalid_argument(
                    "parse_touchstone_2port: unsupported option line (need '# Hz S RI R <z0>')");
            have_header = true;
            continue;
        }
        if (!have_header)
            throw std::invalid_argument("parse_touchstone_2port: data before option line");
        std::istringstream fields(line);
        double f = 0.0;
        double v[8] = {};
        if (!(fields >> f >> v[0] >> v[1] >> v[2] >> v[3] >> v[4] >> v[5] >> v[6] >> v[7]))
            throw std::invalid_argument("parse_touchstone_2port: bad data row");
        Eigen::MatrixXcd s(2, 2);
        s(0, 0) = {v[0], v[1]};
        s(1, 0) = {v[2], v[3]};
        s(0, 1) = {v[4], v[5]};
        s(1, 1) = {v[6], v[7]};
        sweep.frequency_hz.push_back(f);
        sweep.s_parameters.push_back(std::move(s));
    }
    if (sweep.frequency_hz.empty())
        throw std::invalid_argument("parse_touchstone_2port: no data rows");
    return sweep;
}

} // namespace io
} // namespace hyperlat
