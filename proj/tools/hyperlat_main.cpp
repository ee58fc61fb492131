/// Command-line surface of the hyperbolic lattice circuit toolkit.
///
/// Subcommands: tile, flake, medial, spectrum, design, simulate, analyze,
/// compare.  Global flags: --config (INI/TOML file, flags override),
/// --out-dir, --seed.  Exit codes: 0 success, 1 validation error,
/// 2 numerical failure.
///
/// Every command resolves and validates its inputs, composes all output
/// files in memory, then writes them atomically together with a manifest of
/// the effective configuration — reruns are byte-identical.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "hyperlat/analysis.hpp"
#include "hyperlat/circuit.hpp"
#include "hyperlat/common.hpp"
#include "hyperlat/io.hpp"
#include "hyperlat/lattice.hpp"
#include "hyperlat/presets.hpp"
#include "hyperlat/spectrum.hpp"
#include "hyperlat/tiling.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GlobalOptions {
    std::string out_dir = ".";
    std::uint64_t seed = 0;
};

/// Deferred file outputs: everything is composed before anything is written.
class OutputSet {
public:
    explicit OutputSet(const GlobalOptions& global) : global_(global) {}

    void add(const std::string& name, std::string content) {
        files_.emplace_back(name, std::move(content));
    }

    void add_manifest(const std::string& command, json options) {
        json manifest;
        manifest["command"] = command;
        manifest["seed"] = global_.seed;
        manifest["out_dir"] = global_.out_dir;
        manifest["options"] = std::move(options);
        add(command + "_manifest.json", manifest.dump(2) + "\n");
    }

    void flush() const {
        fs::create_directories(global_.out_dir);
        for (const auto& [name, content] : files_)
            hyperlat::io::atomic_write(fs::path(global_.out_dir) / name, content);
    }

private:
    const GlobalOptions& global_;
    std::vector<std::pair<std::string, std::string>> files_;
};

std::string format_energy(double e) {
    const double rounded = std::round(e);
    char buf[32];
    if (std::abs(e - rounded) < 1e-9)
        std::snprintf(buf, sizeof buf, "%.0f", rounded);
    else
        std::snprintf(buf, sizeof buf, "%.6g", e);
    return buf;
}

hyperlat::DistanceBasis parse_basis(const std::string& name) {
    if (name == "euclidean")
        return hyperlat::DistanceBasis::euclidean;
    if (name == "hyperbolic")
        return hyperlat::DistanceBasis::hyperbolic;
    if (name == "uniform")
        return hyperlat::DistanceBasis::uniform;
    throw std::invalid_argument("unknown distance basis '" + name +
                                "' (euclidean, hyperbolic, uniform)");
}

/// Shared way of naming a lattice: a preset or a lattice JSON file, with an
/// optional separate parent lattice file (needed by medial-specific
/// features when the lattice came from a file).
struct LatticeSource {
    std::string preset;
    std::string lattice_path;
    std::string parent_path;

    void add_flags(CLI::App* cmd) {
        cmd->add_option("--preset", preset,
                        "named preset (paper-83, paper-124, paper-83-kagome, "
                        "paper-124-kagome, euclidean-83-kagome, euclidean-124-kagome)");
        cmd->add_option("--lattice", lattice_path, "lattice JSON file");
        cmd->add_option("--parent", parent_path,
                        "parent lattice JSON file (for medial-lattice inputs)");
    }

    json to_json() const {
        return {{"preset", preset}, {"lattice", lattice_path}, {"parent", parent_path}};
    }

    struct Resolved {
        hyperlat::LatticeGraph target;
        std::optional<hyperlat::LatticeGraph> parent; ///< when target is medial
        std::optional<hyperlat::DistanceBasis> preset_basis;
    };

    Resolved resolve() const {
        if (!preset.empty() && !lattice_path.empty())
            throw std::invalid_argument("give either --preset or --lattice, not both");
        Resolved r;
        if (!preset.empty()) {
            hyperlat::BuiltPreset built = hyperlat::build_preset(preset);
            r.preset_basis = built.definition.basis;
            if (built.medial) {
                r.target = std::move(*built.medial);
                r.parent = std::move(built.parent);
            } else {
                r.target = std::move(built.parent);
            }
            return r;
        }
        if (lattice_path.empty())
            throw std::invalid_argument("a lattice is required: --preset or --lattice");
        r.target =
            hyperlat::io::lattice_from_json(json::parse(hyperlat::io::read_file(lattice_path)));
        if (!parent_path.empty())
            r.parent = hyperlat::io::lattice_from_json(
                json::parse(hyperlat::io::read_file(parent_path)));
        return r;
    }
};

// --- trace ingestion --------------------------------------------------------

/// Loads a trace from any accepted format: two-column trace CSV, the
/// multi-column sweep CSV (picking `pair`, e.g. "s21"), or a two-port
/// Touchstone file.
hyperlat::analysis::Trace load_trace(const std::string& path, const std::string& pair) {
    const std::string text = hyperlat::io::read_file(path);
    if (pair.size() != 3 || (pair[0] != 's' && pair[0] != 'S') || !std::isdigit(pair[1]) ||
        !std::isdigit(pair[2]))
        throw std::invalid_argument("bad S-parameter pair '" + pair + "' (expected e.g. s21)");
    const int out_port = pair[1] - '1';
    const int in_port = pair[2] - '1';

    // Sniff the format from the first non-blank line.
    std::istringstream in(text);
    std::string first;
    while (std::getline(in, first)) {
        if (!first.empty() && first != "\r")
            break;
    }
    if (first.rfind("frequency_hz,value_db", 0) == 0)
        return hyperlat::io::parse_trace_csv(text);
    if (first.rfind("frequency_hz,", 0) == 0) {
        const hyperlat::SweepResult sweep = hyperlat::io::parse_sweep_csv(text);
        return hyperlat::transmission_trace(sweep, out_port, in_port);
    }
    if (!first.empty() && (first[0] == '#' || first[0] == '!')) {
        const hyperlat::SweepResult sweep = hyperlat::io::parse_touchstone_2port(text);
        return hyperlat::transmission_trace(sweep, out_port, in_port);
    }
    throw std::invalid_argument("unrecognized trace format in " + path);
}

hyperlat::analysis::Trace load_traces(const std::vector<std::string>& paths,
                                      const std::string& pair, bool aggregate) {
    if (paths.empty())
        throw std::invalid_argument("at least one --trace input is required");
    std::vector<hyperlat::analysis::Trace> traces;
    traces.reserve(paths.size());
    for (const std::string& p : paths)
        traces.push_back(load_trace(p, pair));
    if (traces.size() == 1)
        return traces.front();
    if (!aggregate)
        throw std::invalid_argument("multiple traces given; pass --aggregate to max-combine them");
    return hyperlat::analysis::aggregate_max(traces);
}

// --- tile --------------------------------------------------------------------

struct TileOptions {
    int p = 8, q = 3, depth = 1;
    std::size_t max_vertices = 250000;
    std::string out = "tiling.json";
};

void run_tile(const GlobalOptions& global, const TileOptions& opt) {
    hyperlat::TilingSpec spec{opt.p, opt.q, opt.depth};
    hyperlat::TilingOptions topt;
    topt.max_vertices = opt.max_vertices;
    const hyperlat::Tiling tiling = hyperlat::generate_tiling(spec, topt);

    OutputSet out(global);
    out.add(opt.out, hyperlat::io::tiling_to_json(tiling).dump(2) + "\n");
    out.add_manifest("tile", {{"p", opt.p},
                              {"q", opt.q},
                              {"depth", opt.depth},
                              {"max_vertices", opt.max_vertices},
                              {"out", opt.out}});
    out.flush();
    std::cout << "V=" << tiling.vertices.size() << " F=" << tiling.faces.size() << "\n";
}

// --- flake ---------------------------------------------------------------------

struct FlakeOptions {
    std::string preset;
    std::string tiling_path;
    int p = 8, q = 3, depth = 1;
    std::string selection = "edge-neighbors";
    std::vector<int> corners;
    std::vector<int> faces;
    std::string out = "lattice.json";
};

void run_flake(const GlobalOptions& global, const FlakeOptions& opt) {
    hyperlat::LatticeGraph graph;
    if (!opt.preset.empty()) {
        graph = hyperlat::build_preset(opt.preset).parent;
    } else {
        hyperlat::Tiling tiling;
        if (!opt.tiling_path.empty())
            tiling = hyperlat::io::tiling_from_json(
                json::parse(hyperlat::io::read_file(opt.tiling_path)));
        else
            tiling = hyperlat::generate_tiling({opt.p, opt.q, opt.depth});
        hyperlat::FlakeSpec spec;
        if (opt.selection == "edge-neighbors") {
            spec.selection = hyperlat::FlakeSpec::Selection::edge_neighbors;
        } else if (opt.selection == "vertex-attached") {
            spec.selection = hyperlat::FlakeSpec::Selection::vertex_attached;
            spec.corner_positions = opt.corners;
        } else if (opt.selection == "explicit") {
            spec.selection = hyperlat::FlakeSpec::Selection::explicit_faces;
            spec.face_indices = opt.faces;
        } else {
            throw std::invalid_argument("unknown selection '" + opt.selection +
                                        "' (edge-neighbors, vertex-attached, explicit)");
        }
        graph = hyperlat::build_flake(tiling, spec);
    }

    OutputSet out(global);
    out.add(opt.out, hyperlat::io::lattice_to_json(graph).dump(2) + "\n");
    out.add_manifest("flake", {{"preset", opt.preset},
                               {"tiling", opt.tiling_path},
                               {"p", opt.p},
                               {"q", opt.q},
                               {"depth", opt.depth},
                               {"selection", opt.selection},
                               {"corners", opt.corners},
                               {"faces", opt.faces},
                               {"out", opt.out}});
    out.flush();
    std::cout << "V=" << graph.vertex_count() << " E=" << graph.edge_count()
              << " F=" << graph.face_count() << "\n";
}

// --- medial ---------------------------------------------------------------------

struct MedialOptions {
    std::string preset;
    std::string lattice_path;
    std::string out = "medial.json";
};

void run_medial(const GlobalOptions& global, const MedialOptions& opt) {
    hyperlat::LatticeGraph parent;
    if (!opt.preset.empty()) {
        if (!opt.lattice_path.empty())
            throw std::invalid_argument("give either --preset or --lattice, not both");
        parent = hyperlat::build_preset(opt.preset).parent;
    } else if (!opt.lattice_path.empty()) {
        parent = hyperlat::io::lattice_from_json(
            json::parse(hyperlat::io::read_file(opt.lattice_path)));
    } else {
        throw std::invalid_argument("a lattice is required: --preset or --lattice");
    }
    const hyperlat::LatticeGraph medial = hyperlat::medial_lattice(parent);

    OutputSet out(global);
    out.add(opt.out, hyperlat::io::lattice_to_json(medial).dump(2) + "\n");
    out.add_manifest("medial", {{"preset", opt.preset},
                                {"lattice", opt.lattice_path},
                                {"out", opt.out}});
    out.flush();
    std::cout << "V=" << medial.vertex_count() << " E=" << medial.edge_count() << "\n";
}

// --- spectrum --------------------------------------------------------------------

struct SpectrumOptions {
    LatticeSource source;
    std::string weighting = "uniform";
    std::string basis; ///< empty: preset basis, else euclidean
    double bin_width = 0.03;
    double gap_threshold = 0.25;
    double degeneracy_tol = 1e-8;
    bool cls = false;
    std::string out_prefix = "spectrum";
};

void run_spectrum(const GlobalOptions& global, const SpectrumOptions& opt) {
    const LatticeSource::Resolved resolved = opt.source.resolve();
    const hyperlat::LatticeGraph& graph = resolved.target;

    hyperlat::Spectrum spectrum;
    if (opt.weighting == "uniform") {
        spectrum = hyperlat::adjacency_energies(graph);
    } else if (opt.weighting == "capacitive") {
        hyperlat::DistanceBasis basis = hyperlat::DistanceBasis::euclidean;
        if (!opt.basis.empty())
            basis = parse_basis(opt.basis);
        else if (resolved.preset_basis)
            basis = *resolved.preset_basis;
        const hyperlat::CouplingPlan plan = hyperlat::derive_couplings(graph, 1.0, basis);
        const std::vector<double> weights = plan.relative_weights();
        spectrum = hyperlat::adjacency_energies(graph, weights);
    } else {
        throw std::invalid_argument("unknown weighting '" + opt.weighting +
                                    "' (uniform, capacitive)");
    }

    const auto groups = hyperlat::group_degeneracies(spectrum, opt.degeneracy_tol);
    const auto ipr = hyperlat::inverse_participation_ratios(spectrum);
    const auto hist = hyperlat::dos(spectrum, opt.bin_width);
    const auto gaps = hyperlat::detect_gaps(spectrum, opt.gap_threshold);

    json j;
    j["energies"] = spectrum.energies;
    j["weighted"] = spectrum.weighted;
    j["degeneracies"] = hyperlat::io::degeneracies_to_json(groups);
    j["ipr"] = ipr;
    j["dos"] = hyperlat::io::dos_to_json(hist);
    j["gaps"] = hyperlat::io::gaps_to_json(gaps);
    const bool flat_band = groups.front().multiplicity >= 2;
    if (flat_band)
        j["flat_band"] = {{"energy", groups.front().energy},
                          {"multiplicity", groups.front().multiplicity}};
    else
        j["flat_band"] = nullptr;

    OutputSet out(global);

    std::optional<hyperlat::ClsSet> cls;
    if (opt.cls) {
        if (graph.kind != hyperlat::GraphKind::medial || !resolved.parent)
            throw std::invalid_argument(
                "--cls needs a medial lattice with its parent (kagome preset or --parent)");
        cls = hyperlat::construct_cls(*resolved.parent, graph);
        out.add(opt.out_prefix + "_cls.json",
                hyperlat::io::cls_to_json(*cls).dump(2) + "\n");
    }

    out.add(opt.out_prefix + ".json", j.dump(2) + "\n");
    out.add(opt.out_prefix + ".csv", hyperlat::io::write_spectrum_csv(spectrum, groups, ipr));
    out.add_manifest("spectrum", {{"source", opt.source.to_json()},
                                  {"weighting", opt.weighting},
                                  {"basis", opt.basis},
                                  {"bin_width", opt.bin_width},
                                  {"gap_threshold", opt.gap_threshold},
                                  {"degeneracy_tol", opt.degeneracy_tol},
                                  {"cls", opt.cls},
                                  {"out_prefix", opt.out_prefix}});
    out.flush();

    std::cout << "states=" << spectrum.size() << " range=[" << format_energy(spectrum.energies.front())
              << "," << format_energy(spectrum.energies.back()) << "]\n";
    if (flat_band)
        std::cout << "flat band: E=" << format_energy(groups.front().energy) << ", multiplicity "
                  << groups.front().multiplicity << "\n";
    std::cout << "gaps=" << gaps.gaps.size() << " threshold=" << opt.gap_threshold << "\n";
    if (cls)
        std::cout << "cls=" << cls->states.size() << "\n";
}

// --- design ---------------------------------------------------------------------

struct DesignOptions {
    LatticeSource source;
    std::string basis; ///< empty: preset basis, else euclidean
    double c_ref = 1e-15;
    double f0 = 6.5e9;
    double impedance = 50.0;
    double port_coupling = 1e-15;
    std::vector<int> ports;
    int port_count = 4;
    bool no_ports = false;
    bool no_compensation = false;
    bool couplers = false;
    double branch_cap = 10e-15;
    double island_ground = 0.0;
    std::string out_netlist = "netlist.txt";
    std::string out_plan = "coupling_plan.json";
    std::string out_design = "design.json";
};

void run_design(const GlobalOptions& global, const DesignOptions& opt) {
    const LatticeSource::Resolved resolved = opt.source.resolve();
    const hyperlat::LatticeGraph& graph = resolved.target;

    hyperlat::DistanceBasis basis = hyperlat::DistanceBasis::euclidean;
    if (!opt.basis.empty())
        basis = parse_basis(opt.basis);
    else if (resolved.preset_basis)
        basis = *resolved.preset_basis;

    const hyperlat::CouplingPlan plan = hyperlat::derive_couplings(graph, opt.c_ref, basis);

    hyperlat::SynthesisOptions synth;
    synth.resonator.frequency_hz = opt.f0;
    synth.resonator.impedance_ohm = opt.impedance;
    synth.port_coupling_f = opt.port_coupling;
    synth.compensate_loading = !opt.no_compensation;

    std::vector<int> ports = opt.ports;
    if (!opt.no_ports && ports.empty())
        ports = hyperlat::auto_ports(graph, opt.port_count);
    if (opt.no_ports)
        ports.clear();

    hyperlat::SynthesizedCircuit circuit;
    if (opt.couplers) {
        if (graph.kind != hyperlat::GraphKind::medial || !resolved.parent)
            throw std::invalid_argument(
                "--couplers needs a medial lattice with its parent (kagome preset or --parent)");
        circuit = hyperlat::synthesize_coupler_netlist(*resolved.parent, graph, synth,
                                                       opt.branch_cap, opt.island_ground, ports);
    } else {
        circuit = hyperlat::synthesize_netlist(graph, plan, synth, ports);
    }

    json design;
    design["resonator"] = {{"frequency_hz", synth.resonator.frequency_hz},
                           {"impedance_ohm", synth.resonator.impedance_ohm},
                           {"capacitance_f", synth.resonator.capacitance_f()},
                           {"inductance_h", synth.resonator.inductance_h()}};
    design["compensate_loading"] = synth.compensate_loading;
    design["couplers"] = opt.couplers;
    design["vertex_node"] = circuit.vertex_node;
    design["port_vertices"] = circuit.port_vertices;
    design["port_nodes"] = circuit.port_nodes;
    design["shunt_capacitance_f"] = circuit.shunt_capacitance_f;

    OutputSet out(global);
    out.add(opt.out_netlist, hyperlat::io::write_netlist(circuit.netlist));
    out.add(opt.out_plan, hyperlat::io::coupling_plan_to_json(plan).dump(2) + "\n");
    out.add(opt.out_design, design.dump(2) + "\n");
    out.add_manifest("design", {{"source", opt.source.to_json()},
                                {"basis", opt.basis},
                                {"c_ref", opt.c_ref},
                                {"f0", opt.f0},
                                {"impedance", opt.impedance},
                                {"port_coupling", opt.port_coupling},
                                {"ports", ports},
                                {"port_count", opt.port_count},
                                {"no_ports", opt.no_ports},
                                {"no_compensation", opt.no_compensation},
                                {"couplers", opt.couplers},
                                {"branch_cap", opt.branch_cap},
                                {"island_ground", opt.island_ground},
                                {"out_netlist", opt.out_netlist},
                                {"out_plan", opt.out_plan},
                                {"out_design", opt.out_design}});
    out.flush();

    std::cout << "nodes=" << circuit.netlist.node_count
              << " C=" << circuit.netlist.capacitors.size()
              << " L=" << circuit.netlist.inductors.size()
              << " P=" << circuit.netlist.ports.size() << "\n";
}

// --- simulate ---------------------------------------------------------------------

struct SimulateOptions {
    std::string netlist_path;
    double from_hz = 0.0;
    double to_hz = 0.0;
    double f0 = 6.5e9;
    double span_frac = 0.05;
    int points = 20001;
    double loss_conductance = 0.0;
    double disorder_std = 0.0;
    int trace_out_port = 1;
    std::string out_prefix = "sweep";
};

void run_simulate(const GlobalOptions& global, const SimulateOptions& opt) {
    if (opt.netlist_path.empty())
        throw std::invalid_argument("simulate: --netlist is required");
    hyperlat::Netlist netlist =
        hyperlat::io::parse_netlist(hyperlat::io::read_file(opt.netlist_path));
    if (netlist.ports.empty())
        throw std::invalid_argument("simulate: netlist has no ports");

    if (opt.disorder_std < 0.0)
        throw std::invalid_argument("simulate: disorder std must be non-negative");
    if (opt.disorder_std > 0.0) {
        // Fabrication-style disorder: perturb each resonator's ground
        // capacitor by a seeded Gaussian fraction.
        std::vector<char> resonant(static_cast<std::size_t>(netlist.node_count), 0);
        for (const auto& l : netlist.inductors) {
            if (l.n1 != 0)
                resonant[static_cast<std::size_t>(l.n1)] = 1;
            if (l.n2 != 0)
                resonant[static_cast<std::size_t>(l.n2)] = 1;
        }
        std::mt19937_64 rng(global.seed);
        std::normal_distribution<double> gauss(0.0, opt.disorder_std);
        for (auto& c : netlist.capacitors) {
            const bool ground_leg = (c.n1 == 0) != (c.n2 == 0);
            const int node = c.n1 == 0 ? c.n2 : c.n1;
            if (ground_leg && resonant[static_cast<std::size_t>(node)]) {
                const double factor = 1.0 + gauss(rng);
                if (!(factor > 0.0))
                    throw std::invalid_argument(
                        "simulate: disorder sample drove a capacitance negative; "
                        "reduce --disorder-std");
                c.farads *= factor;
            }
        }
    }

    double from = opt.from_hz, to = opt.to_hz;
    if (from <= 0.0 && to <= 0.0) {
        from = opt.f0 * (1.0 - opt.span_frac);
        to = opt.f0 * (1.0 + opt.span_frac);
    }
    const std::vector<double> grid = hyperlat::frequency_grid(from, to, opt.points);

    hyperlat::SweepOptions sweep_options;
    sweep_options.shunt_conductance_s = opt.loss_conductance;
    const hyperlat::SweepResult sweep = hyperlat::ac_sweep(netlist, grid, sweep_options);

    OutputSet out(global);
    out.add(opt.out_prefix + ".csv", hyperlat::io::write_sweep_csv(sweep));
    out.add(opt.out_prefix + ".s" + std::to_string(sweep.port_count) + "p",
            hyperlat::io::write_touchstone(sweep, netlist.ports.front().ohms));
    if (sweep.port_count >= 2) {
        const int o = opt.trace_out_port;
        if (o < 1 || o > sweep.port_count)
            throw std::invalid_argument("simulate: trace out port out of range");
        for (int in = 1; in <= sweep.port_count; ++in) {
            if (in == o)
                continue;
            const hyperlat::analysis::Trace trace =
                hyperlat::transmission_trace(sweep, o - 1, in - 1);
            out.add(opt.out_prefix + "_s" + std::to_string(o) + std::to_string(in) + ".csv",
                    hyperlat::io::write_trace_csv(trace));
        }
    }
    out.add_manifest("simulate", {{"netlist", opt.netlist_path},
                                  {"from", from},
                                  {"to", to},
                                  {"f0", opt.f0},
                                  {"span_frac", opt.span_frac},
                                  {"points", opt.points},
                                  {"loss_conductance", opt.loss_conductance},
                                  {"disorder_std", opt.disorder_std},
                                  {"trace_out_port", opt.trace_out_port},
                                  {"out_prefix", opt.out_prefix}});
    out.flush();

    std::cout << "points=" << sweep.frequency_hz.size() << " ports=" << sweep.port_count
              << " failed=" << sweep.failed_indices.size() << "\n";
}

// --- analyze ---------------------------------------------------------------------

struct AnalyzeOptions {
    std::vector<std::string> traces;
    std::string pair = "s21";
    bool aggregate = false;
    double prominence = 3.0;
    double separation = 1e6;
    double height_threshold = -40.0;
    double cluster_separation = 1e7;
    std::string out_prefix = "analysis";
};

void run_analyze(const GlobalOptions& global, const AnalyzeOptions& opt) {
    const hyperlat::analysis::Trace trace = load_traces(opt.traces, opt.pair, opt.aggregate);
    const hyperlat::analysis::PeakSet peaks =
        hyperlat::analysis::find_peaks(trace, opt.prominence, opt.separation);
    const hyperlat::analysis::Clustering clusters =
        hyperlat::analysis::cluster_peaks(peaks, opt.height_threshold, opt.cluster_separation);

    std::ostringstream markers;
    markers << "frequency_hz,height_db\n";
    for (const hyperlat::analysis::Peak& p : peaks.peaks)
        markers << hyperlat::io::format_double(p.frequency_hz) << ','
                << hyperlat::io::format_double(p.height_db) << '\n';

    OutputSet out(global);
    out.add(opt.out_prefix + "_trace.csv", hyperlat::io::write_trace_csv(trace));
    out.add(opt.out_prefix + "_peaks.json",
            hyperlat::io::peaks_to_json(peaks).dump(2) + "\n");
    out.add(opt.out_prefix + "_clusters.json",
            hyperlat::io::clustering_to_json(clusters).dump(2) + "\n");
    out.add(opt.out_prefix + "_peak_markers.csv", markers.str());
    out.add_manifest("analyze", {{"traces", opt.traces},
                                 {"pair", opt.pair},
                                 {"aggregate", opt.aggregate},
                                 {"prominence", opt.prominence},
                                 {"separation", opt.separation},
                                 {"height_threshold", opt.height_threshold},
                                 {"cluster_separation", opt.cluster_separation},
                                 {"out_prefix", opt.out_prefix}});
    out.flush();

    std::cout << "peaks=" << peaks.peaks.size() << " clusters=" << clusters.clusters.size()
              << " unclustered=" << clusters.unclustered.size() << "\n";
}

// --- compare ---------------------------------------------------------------------

struct CompareOptions {
    std::string spectrum_path;
    std::vector<std::string> traces;
    std::string pair = "s21";
    bool aggregate = false;
    double prominence = 3.0;
    double separation = 1e6;
    double height_threshold = -40.0;
    double cluster_separation = 1e7;
    double lambda1 = std::numeric_limits<double>::quiet_NaN();
    double lambda2 = std::numeric_limits<double>::quiet_NaN();
    double f1 = 0.0;
    double f2 = 0.0;
    double match_window = 2e6;
    std::string out_prefix = "compare";
};

void run_compare(const GlobalOptions& global, const CompareOptions& opt) {
    if (opt.spectrum_path.empty())
        throw std::invalid_argument("compare: --spectrum is required");
    const json sj = json::parse(hyperlat::io::read_file(opt.spectrum_path));
    const std::vector<double> energies = sj.at("energies").get<std::vector<double>>();
    if (energies.size() < 2)
        throw std::invalid_argument("compare: spectrum has fewer than two energies");

    hyperlat::GapList gaps;
    if (sj.contains("gaps")) {
        gaps.threshold = sj.at("gaps").at("threshold").get<double>();
        for (const json& g : sj.at("gaps").at("gaps"))
            gaps.gaps.push_back({g.at("lower").get<double>(), g.at("upper").get<double>()});
    }

    const hyperlat::analysis::Trace trace = load_traces(opt.traces, opt.pair, opt.aggregate);
    const hyperlat::analysis::PeakSet peaks =
        hyperlat::analysis::find_peaks(trace, opt.prominence, opt.separation);
    const hyperlat::analysis::Clustering clusters =
        hyperlat::analysis::cluster_peaks(peaks, opt.height_threshold, opt.cluster_separation);

    double lambda1 = opt.lambda1, lambda2 = opt.lambda2;
    if (std::isnan(lambda1) || std::isnan(lambda2)) {
        const auto anchors = hyperlat::analysis::anchor_energies(energies);
        lambda1 = anchors.first;
        lambda2 = anchors.second;
    }
    double f1 = opt.f1, f2 = opt.f2;
    if (f1 <= 0.0 || f2 <= 0.0) {
        if (peaks.peaks.size() < 2)
            throw std::invalid_argument(
                "compare: fewer than two peaks detected; pass --f1/--f2 explicitly");
        f1 = peaks.peaks[0].frequency_hz;
        f2 = peaks.peaks[1].frequency_hz;
    }

    const hyperlat::analysis::MappingReport report = hyperlat::analysis::compare(
        energies, lambda1, lambda2, f1, f2, peaks, clusters, gaps, opt.match_window);

    std::ostringstream mapped_csv;
    mapped_csv << "index,energy,mapped_hz\n";
    for (std::size_t k = 0; k < energies.size(); ++k)
        mapped_csv << k << ',' << hyperlat::io::format_double(energies[k]) << ','
                   << hyperlat::io::format_double(report.mapped_hz[k]) << '\n';

    OutputSet out(global);
    out.add(opt.out_prefix + ".json",
            hyperlat::io::mapping_report_to_json(report).dump(2) + "\n");
    out.add(opt.out_prefix + "_mapped.csv", mapped_csv.str());
    out.add_manifest("compare", {{"spectrum", opt.spectrum_path},
                                 {"traces", opt.traces},
                                 {"pair", opt.pair},
                                 {"aggregate", opt.aggregate},
                                 {"prominence", opt.prominence},
                                 {"separation", opt.separation},
                                 {"height_threshold", opt.height_threshold},
                                 {"cluster_separation", opt.cluster_separation},
                                 {"lambda1", lambda1},
                                 {"lambda2", lambda2},
                                 {"f1", f1},
                                 {"f2", f2},
                                 {"match_window", opt.match_window},
                                 {"out_prefix", opt.out_prefix}});
    out.flush();

    // Human-readable table.
    std::printf("%-5s %-12s %-12s %-12s %-12s %s\n", "idx", "energy", "mapped_GHz", "peak_GHz",
                "resid_MHz", "cluster");
    for (const hyperlat::analysis::EigenvalueMatch& m : report.matches) {
        if (m.peak_index >= 0)
            std::printf("%-5d %-12.6f %-12.6f %-12.6f %-12.4f %d\n", m.index, m.energy,
                        m.mapped_hz / 1e9,
                        peaks.peaks[static_cast<std::size_t>(m.peak_index)].frequency_hz / 1e9,
                        m.residual_hz / 1e6, m.cluster_index);
        else
            std::printf("%-5d %-12.6f %-12.6f %-12s %-12s %d\n", m.index, m.energy,
                        m.mapped_hz / 1e9, "-", "-", m.cluster_index);
    }
    int aligned = 0;
    for (const hyperlat::analysis::GapAlignment& g : report.gap_alignment)
        aligned += g.aligned ? 1 : 0;
    std::cout << "matched=" << (report.matches.size() - report.unmatched.size())
              << " unmatched=" << report.unmatched.size() << " gaps_aligned=" << aligned << "/"
              << report.gap_alignment.size() << "\n";
}

} // namespace

int main(int argc, char** argv) {
    GlobalOptions global;
    CLI::App app{"hyperbolic lattice resonator-circuit toolkit"};
    app.fallthrough();
    app.require_subcommand(1);
    app.set_config("--config", "", "configuration file (INI; flags override)");
    app.add_option("--out-dir", global.out_dir, "output directory")->capture_default_str();
    app.add_option("--seed", global.seed, "seed for stochastic synthesis (disorder)")
        ->capture_default_str();

    TileOptions tile;
    CLI::App* cmd_tile = app.add_subcommand("tile", "generate a {p,q} tiling patch");
    cmd_tile->add_option("--p", tile.p, "polygon sides")->capture_default_str();
    cmd_tile->add_option("--q", tile.q, "polygons per vertex")->capture_default_str();
    cmd_tile->add_option("--depth", tile.depth, "vertex-adjacency rings")->capture_default_str();
    cmd_tile->add_option("--max-vertices", tile.max_vertices, "vertex budget")
        ->capture_default_str();
    cmd_tile->add_option("--out", tile.out, "output tiling JSON")->capture_default_str();
    cmd_tile->callback([&] { run_tile(global, tile); });

    FlakeOptions flake;
    CLI::App* cmd_flake = app.add_subcommand("flake", "cut a flake lattice from a tiling");
    cmd_flake->add_option("--preset", flake.preset, "named preset (see README)");
    cmd_flake->add_option("--tiling", flake.tiling_path, "tiling JSON input");
    cmd_flake->add_option("--p", flake.p, "polygon sides")->capture_default_str();
    cmd_flake->add_option("--q", flake.q, "polygons per vertex")->capture_default_str();
    cmd_flake->add_option("--depth", flake.depth, "tiling depth")->capture_default_str();
    cmd_flake->add_option("--selection", flake.selection,
                          "edge-neighbors | vertex-attached | explicit")
        ->capture_default_str();
    cmd_flake->add_option("--corners", flake.corners,
                          "corner positions for vertex-attached selection");
    cmd_flake->add_option("--faces", flake.faces, "face indices for explicit selection");
    cmd_flake->add_option("--out", flake.out, "output lattice JSON")->capture_default_str();
    cmd_flake->callback([&] { run_flake(global, flake); });

    MedialOptions medial;
    CLI::App* cmd_medial = app.add_subcommand("medial", "medial (kagome-like) lattice");
    cmd_medial->add_option("--preset", medial.preset, "named preset (parent is used)");
    cmd_medial->add_option("--lattice", medial.lattice_path, "parent lattice JSON");
    cmd_medial->add_option("--out", medial.out, "output lattice JSON")->capture_default_str();
    cmd_medial->callback([&] { run_medial(global, medial); });

    SpectrumOptions spectrum;
    CLI::App* cmd_spectrum =
        app.add_subcommand("spectrum", "tight-binding spectrum, DOS, gaps, IPR, CLS");
    spectrum.source.add_flags(cmd_spectrum);
    cmd_spectrum->add_option("--weighting", spectrum.weighting, "uniform | capacitive")
        ->capture_default_str();
    cmd_spectrum->add_option("--basis", spectrum.basis,
                             "distance basis for capacitive weighting "
                             "(euclidean | hyperbolic | uniform)");
    cmd_spectrum->add_option("--bin-width", spectrum.bin_width, "DOS bin width")
        ->capture_default_str();
    cmd_spectrum->add_option("--gap-threshold", spectrum.gap_threshold, "gap threshold")
        ->capture_default_str();
    cmd_spectrum->add_option("--degeneracy-tol", spectrum.degeneracy_tol,
                             "degeneracy grouping tolerance")
        ->capture_default_str();
    cmd_spectrum->add_flag("--cls", spectrum.cls, "emit compact localized states");
    cmd_spectrum->add_option("--out-prefix", spectrum.out_prefix, "output file prefix")
        ->capture_default_str();
    cmd_spectrum->callback([&] { run_spectrum(global, spectrum); });

    DesignOptions design;
    CLI::App* cmd_design = app.add_subcommand("design", "synthesize an LC resonator netlist");
    design.source.add_flags(cmd_design);
    cmd_design->add_option("--basis", design.basis,
                           "distance basis (euclidean | hyperbolic | uniform)");
    cmd_design->add_option("--c-ref", design.c_ref, "reference coupling capacitance [F]")
        ->capture_default_str();
    cmd_design->add_option("--f0", design.f0, "resonator frequency [Hz]")->capture_default_str();
    cmd_design->add_option("--impedance", design.impedance, "resonator/port impedance [ohm]")
        ->capture_default_str();
    cmd_design->add_option("--port-coupling", design.port_coupling,
                           "port series capacitance [F]")
        ->capture_default_str();
    cmd_design->add_option("--ports", design.ports, "explicit port vertex ids");
    cmd_design->add_option("--port-count", design.port_count, "auto-placed port count")
        ->capture_default_str();
    cmd_design->add_flag("--no-ports", design.no_ports, "synthesize a closed network");
    cmd_design->add_flag("--no-compensation", design.no_compensation,
                         "keep raw shunts (skip loading compensation)");
    cmd_design->add_flag("--couplers", design.couplers,
                         "medial synthesis via reduced coupler islands");
    cmd_design->add_option("--branch-cap", design.branch_cap, "coupler branch capacitance [F]")
        ->capture_default_str();
    cmd_design->add_option("--island-ground", design.island_ground,
                           "coupler island ground capacitance [F]")
        ->capture_default_str();
    cmd_design->add_option("--out-netlist", design.out_netlist, "netlist file")
        ->capture_default_str();
    cmd_design->add_option("--out-plan", design.out_plan, "coupling plan JSON")
        ->capture_default_str();
    cmd_design->add_option("--out-design", design.out_design, "design bookkeeping JSON")
        ->capture_default_str();
    cmd_design->callback([&] { run_design(global, design); });

    SimulateOptions simulate;
    CLI::App* cmd_simulate = app.add_subcommand("simulate", "AC sweep (S-parameters)");
    cmd_simulate->add_option("--netlist", simulate.netlist_path, "netlist file");
    cmd_simulate->add_option("--from", simulate.from_hz, "sweep start [Hz] (0: auto)")
        ->capture_default_str();
    cmd_simulate->add_option("--to", simulate.to_hz, "sweep stop [Hz] (0: auto)")
        ->capture_default_str();
    cmd_simulate->add_option("--f0", simulate.f0, "auto-grid center [Hz]")->capture_default_str();
    cmd_simulate->add_option("--span-frac", simulate.span_frac, "auto-grid half-span fraction")
        ->capture_default_str();
    cmd_simulate->add_option("--points", simulate.points, "grid points")->capture_default_str();
    cmd_simulate->add_option("--loss-conductance", simulate.loss_conductance,
                             "shunt conductance at resonator nodes [S]")
        ->capture_default_str();
    cmd_simulate->add_option("--disorder-std", simulate.disorder_std,
                             "fractional resonator-capacitance disorder (seeded)")
        ->capture_default_str();
    cmd_simulate->add_option("--trace-out-port", simulate.trace_out_port,
                             "output port for trace CSVs (1-based)")
        ->capture_default_str();
    cmd_simulate->add_option("--out-prefix", simulate.out_prefix, "output file prefix")
        ->capture_default_str();
    cmd_simulate->callback([&] { run_simulate(global, simulate); });

    AnalyzeOptions analyze;
    CLI::App* cmd_analyze = app.add_subcommand("analyze", "peak and cluster extraction");
    cmd_analyze->add_option("--trace", analyze.traces,
                            "trace inputs (trace CSV, sweep CSV, or 2-port Touchstone)");
    cmd_analyze->add_option("--pair", analyze.pair, "S-parameter pair for matrix inputs")
        ->capture_default_str();
    cmd_analyze->add_flag("--aggregate", analyze.aggregate, "max-combine multiple traces");
    cmd_analyze->add_option("--prominence", analyze.prominence, "min peak prominence [dB]")
        ->capture_default_str();
    cmd_analyze->add_option("--separation", analyze.separation, "min peak separation [Hz]")
        ->capture_default_str();
    cmd_analyze->add_option("--height-threshold", analyze.height_threshold,
                            "cluster max-height threshold [dB]")
        ->capture_default_str();
    cmd_analyze->add_option("--cluster-separation", analyze.cluster_separation,
                            "cluster separation [Hz]")
        ->capture_default_str();
    cmd_analyze->add_option("--out-prefix", analyze.out_prefix, "output file prefix")
        ->capture_default_str();
    cmd_analyze->callback([&] { run_analyze(global, analyze); });

    CompareOptions compare;
    CLI::App* cmd_compare =
        app.add_subcommand("compare", "map eigenvalues onto a trace and report residuals");
    cmd_compare->add_option("--spectrum", compare.spectrum_path, "spectrum JSON (from 'spectrum')");
    cmd_compare->add_option("--trace", compare.traces, "trace inputs");
    cmd_compare->add_option("--pair", compare.pair, "S-parameter pair for matrix inputs")
        ->capture_default_str();
    cmd_compare->add_flag("--aggregate", compare.aggregate, "max-combine multiple traces");
    cmd_compare->add_option("--prominence", compare.prominence, "min peak prominence [dB]")
        ->capture_default_str();
    cmd_compare->add_option("--separation", compare.separation, "min peak separation [Hz]")
        ->capture_default_str();
    cmd_compare->add_option("--height-threshold", compare.height_threshold,
                            "cluster max-height threshold [dB]")
        ->capture_default_str();
    cmd_compare->add_option("--cluster-separation", compare.cluster_separation,
                            "cluster separation [Hz]")
        ->capture_default_str();
    cmd_compare->add_option("--lambda1", compare.lambda1, "anchor eigenvalue 1 (default: auto)");
    cmd_compare->add_option("--lambda2", compare.lambda2, "anchor eigenvalue 2 (default: auto)");
    cmd_compare->add_option("--f1", compare.f1, "anchor frequency 1 [Hz] (default: first peak)");
    cmd_compare->add_option("--f2", compare.f2, "anchor frequency 2 [Hz] (default: second peak)");
    cmd_compare->add_option("--match-window", compare.match_window, "peak match window [Hz]")
        ->capture_default_str();
    cmd_compare->add_option("--out-prefix", compare.out_prefix, "output file prefix")
        ->capture_default_str();
    cmd_compare->callback([&] { run_compare(global, compare); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const hyperlat::numerical_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 2;
    } catch (const hyperlat::capacity_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
