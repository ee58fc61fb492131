#pragma once

/// Synthesis and AC analysis of capacitively coupled LC resonator networks
/// that emulate tight-binding lattices.
///
/// Each lattice vertex becomes a parallel LC resonator; each edge becomes a
/// coupling capacitor whose value scales inversely with the edge length.
/// Every resonator's shunt capacitor is trimmed so the total capacitance
/// seen at each node is identical — the condition under which the network's
/// fractional mode splittings reproduce the weighted adjacency spectrum in
/// the weak-coupling limit.  S-parameters come from modified nodal analysis
/// with Schur elimination of internal nodes.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hyperlat/analysis.hpp"
#include "hyperlat/common.hpp"
#include "hyperlat/lattice.hpp"

namespace hyperlat {

/// Which edge length drives the coupling strengths.
enum class DistanceBasis { euclidean, hyperbolic, uniform };

inline const char* to_string(DistanceBasis basis) {
    switch (basis) {
    case DistanceBasis::euclidean: return "euclidean";
    case DistanceBasis::hyperbolic: return "hyperbolic";
    case DistanceBasis::uniform: return "uniform";
    }
    return "?";
}

/// Per-edge coupling capacitances: C_k = c_ref * d_ref / d_k with d_ref the
/// longest edge, so the longest edge carries exactly c_ref and every other
/// edge carries more.  The `uniform` basis assigns c_ref everywhere (the
/// flat-coupling control).
struct CouplingPlan {
    DistanceBasis basis = DistanceBasis::euclidean;
    double reference_capacitance_f = 0.0;
    double reference_distance = 0.0; ///< longest edge length in the chosen basis (0: uniform)
    std::vector<double> capacitances_f; ///< aligned with LatticeGraph::edges

    /// Capacitances in units of the reference (the weighted-adjacency weights).
    std::vector<double> relative_weights() const {
        std::vector<double> w;
        w.reserve(capacitances_f.size());
        for (double c : capacitances_f)
            w.push_back(c / reference_capacitance_f);
        return w;
    }
};

inline CouplingPlan derive_couplings(const LatticeGraph& graph, double c_ref_f,
                                     DistanceBasis basis) {
    if (!(c_ref_f > 0.0))
        throw std::invalid_argument("derive_couplings: reference capacitance must be positive");
    if (graph.edges.empty())
        throw std::invalid_argument("derive_couplings: graph has no edges");

    CouplingPlan plan;
    plan.basis = basis;
    plan.reference_capacitance_f = c_ref_f;
    plan.capacitances_f.reserve(graph.edges.size());

    if (basis == DistanceBasis::uniform) {
        plan.capacitances_f.assign(graph.edges.size(), c_ref_f);
        return plan;
    }

    auto length = [basis](const LatticeEdge& e) {
        return basis == DistanceBasis::euclidean ? e.euclidean_length : e.hyperbolic_length;
    };
    double d_ref = 0.0;
    for (const LatticeEdge& e : graph.edges) {
        if (!(length(e) > 0.0))
            throw std::invalid_argument("derive_couplings: non-positive edge length");
        d_ref = std::max(d_ref, length(e));
    }
    plan.reference_distance = d_ref;
    for (const LatticeEdge& e : graph.edges)
        plan.capacitances_f.push_back(c_ref_f * d_ref / length(e));
    return plan;
}

/// Target resonator: f0 = 1 / (2 pi sqrt(L C)) with C = 1/(2 pi f0 Z) and
/// L = Z/(2 pi f0), i.e. sqrt(L/C) = Z.
struct ResonatorDesign {
    double frequency_hz = 6.5e9;
    double impedance_ohm = 50.0;

    double capacitance_f() const {
        return 1.0 / (2.0 * std::numbers::pi * frequency_hz * impedance_ohm);
    }
    double inductance_h() const {
        return impedance_ohm / (2.0 * std::numbers::pi * frequency_hz);
    }

    void validate() const {
        if (!(frequency_hz > 0.0) || !(impedance_ohm > 0.0))
            throw std::invalid_argument(
                "ResonatorDesign: frequency and impedance must be positive");
    }
};

/// A lumped LC netlist with ports.  Node 0 is ground.
struct Netlist {
    struct Capacitor {
        int n1 = 0, n2 = 0;
        double farads = 0.0;
    };
    struct Inductor {
        int n1 = 0, n2 = 0;
        double henries = 0.0;
    };
    struct Port {
        int node = 0;
        double ohms = 50.0;
    };

    int node_count = 1; ///< including ground
    std::vector<Capacitor> capacitors;
    std::vector<Inductor> inductors;
    std::vector<Port> ports;

    void validate() const {
        auto check_node = [this](int n, const char* what) {
            if (n < 0 || n >= node_count)
                throw std::invalid_argument(std::string("Netlist: ") + what +
                                            " node out of range");
        };
        for (const Capacitor& c : capacitors) {
            check_node(c.n1, "capacitor");
            check_node(c.n2, "capacitor");
            if (c.n1 == c.n2)
                throw std::invalid_argument("Netlist: capacitor shorted to itself");
            if (!(c.farads > 0.0) || !std::isfinite(c.farads))
                throw std::invalid_argument("Netlist: capacitance must be positive and finite");
        }
        for (const Inductor& l : inductors) {
            check_node(l.n1, "inductor");
            check_node(l.n2, "inductor");
            if (l.n1 == l.n2)
                throw std::invalid_argument("Netlist: inductor shorted to itself");
            if (!(l.henries > 0.0) || !std::isfinite(l.henries))
                throw std::invalid_argument("Netlist: inductance must be positive and finite");
        }
        std::vector<int> port_nodes;
        for (const Port& p : ports) {
            check_node(p.node, "port");
            if (p.node == 0)
                throw std::invalid_argument("Netlist: port on ground node");
            if (!(p.ohms > 0.0))
                throw std::invalid_argument("Netlist: port impedance must be positive");
            port_nodes.push_back(p.node);
        }
        std::sort(port_nodes.begin(), port_nodes.end());
        if (std::adjacent_find(port_nodes.begin(), port_nodes.end()) != port_nodes.end())
            throw std::invalid_argument("Netlist: two ports share a node");
    }
};

struct SynthesisOptions {
    ResonatorDesign resonator;
    double port_coupling_f = 1e-15;  ///< series capacitance from each port to its resonator
    bool compensate_loading = true;  ///< trim shunts so every node's total capacitance matches
};

/// A synthesized netlist plus the bookkeeping linking it back to the lattice.
struct SynthesizedCircuit {
    Netlist netlist;
    std::vector<int> vertex_node;        ///< lattice vertex -> resonator node id
    std::vector<int> port_nodes;         ///< external port node ids, port order
    std::vector<int> port_vertices;      ///< lattice vertex behind each port
    std::vector<double> shunt_capacitance_f; ///< per vertex, after compensation
};

/// Builds the resonator-per-vertex, capacitor-per-edge netlist.
///
/// With loading compensation (the default) each resonator's shunt capacitor
/// is reduced by its share of coupling and port capacitance, keeping the
/// total capacitance at every node equal to the design value; a coupling
/// budget that exceeds the design capacitance is rejected.  Ports attach
/// through series capacitors to the listed vertices (the list may be empty
/// for a closed network).
inline SynthesizedCircuit synthesize_netlist(const LatticeGraph& graph,
                                             const CouplingPlan& plan,
                                             const SynthesisOptions& options,
                                             std::span<const int> port_vertices) {
    options.resonator.validate();
    if (plan.capacitances_f.size() != graph.edges.size())
        throw std::invalid_argument("synthesize_netlist: plan does not match the graph");
    if (!port_vertices.empty() && !(options.port_coupling_f > 0.0))
        throw std::invalid_argument("synthesize_netlist: port coupling must be positive");

    const int n = graph.vertex_count();
    if (n == 0)
        throw std::invalid_argument("synthesize_netlist: empty graph");
    {
        std::vector<int> sorted(port_vertices.begin(), port_vertices.end());
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw std::invalid_argument("synthesize_netlist: duplicate port vertex");
        for (int v : sorted)
            if (v < 0 || v >= n)
                throw std::invalid_argument("synthesize_netlist: port vertex out of range");
    }

    const double c_res = options.resonator.capacitance_f();
    const double l_res = options.resonator.inductance_h();

    // Capacitive load per vertex: couplings plus any port attachment.
    std::vector<double> load(static_cast<std::size_t>(n), 0.0);
    for (std::size_t k = 0; k < graph.edges.size(); ++k) {
        if (!(plan.capacitances_f[k] > 0.0))
            throw std::invalid_argument("synthesize_netlist: non-positive coupling capacitance");
        load[static_cast<std::size_t>(graph.edges[k].i)] += plan.capacitances_f[k];
        load[static_cast<std::size_t>(graph.edges[k].j)] += plan.capacitances_f[k];
    }
    for (int v : port_vertices)
        load[static_cast<std::size_t>(v)] += options.port_coupling_f;

    SynthesizedCircuit circuit;
    circuit.netlist.node_count = 1 + n + static_cast<int>(port_vertices.size());
    circuit.vertex_node.resize(static_cast<std::size_t>(n));
    circuit.shunt_capacitance_f.resize(static_cast<std::size_t>(n));

    for (int v = 0; v < n; ++v) {
        circuit.vertex_node[static_cast<std::size_t>(v)] = v + 1;
        double shunt = c_res;
        if (options.compensate_loading) {
            shunt = c_res - load[static_cast<std::size_t>(v)];
            if (!(shunt > 0.0))
                throw std::invalid_argument(
                    "synthesize_netlist: coupling exceeds the resonator capacitance budget at "
                    "vertex " +
                    std::to_string(v));
        }
        circuit.shunt_capacitance_f[static_cast<std::size_t>(v)] = shunt;
        circuit.netlist.capacitors.push_back({0, v + 1, shunt});
        circuit.netlist.inductors.push_back({0, v + 1, l_res});
    }
    for (std::size_t k = 0; k < graph.edges.size(); ++k)
        circuit.netlist.capacitors.push_back(
            {graph.edges[k].i + 1, graph.edges[k].j + 1, plan.capacitances_f[k]});

    int next_node = n + 1;
    for (int v : port_vertices) {
        circuit.port_vertices.push_back(v);
        circuit.port_nodes.push_back(next_node);
        circuit.netlist.capacitors.push_back({v + 1, next_node, options.port_coupling_f});
        circuit.netlist.ports.push_back({next_node, options.resonator.impedance_ohm});
        ++next_node;
    }

    circuit.netlist.validate();
    return circuit;
}

/// One branch of a capacitive coupler island.
struct CouplerBranch {
    int terminal = 0;        ///< resonator identifier (any labelling)
    double capacitance_f = 0.0;
};

/// Star-mesh (Schur) elimination of a floating coupler island.
struct CouplerReduction {
    /// Effective pairwise capacitances C_a C_b / (C_g + sum C_k).
    std::vector<std::pair<std::pair<int, int>, double>> pairwise_f;
    /// True per-branch capacitance to ground, C_a C_g / (C_g + sum C_k).
    std::vector<double> ground_shunt_f;
    /// Total diagonal loading per branch, C_a (C_g + sum_{k!=a} C_k) / (C_g + sum C_k)
    /// — the sum of that branch's pairwise couplings and its ground leg.
    std::vector<double> self_loading_f;
};

inline CouplerReduction reduce_coupler(std::span<const CouplerBranch> branches,
                                       double ground_capacitance_f) {
    if (branches.size() < 2)
        throw std::invalid_argument("reduce_coupler: need at least two branches");
    if (!(ground_capacitance_f >= 0.0))
        throw std::invalid_argument("reduce_coupler: ground capacitance must be non-negative");
    double total = ground_capacitance_f;
    for (const CouplerBranch& b : branches) {
        if (!(b.capacitance_f > 0.0))
            throw std::invalid_argument("reduce_coupler: branch capacitance must be positive");
        total += b.capacitance_f;
    }
    for (std::size_t a = 0; a < branches.size(); ++a)
        for (std::size_t b = a + 1; b < branches.size(); ++b)
            if (branches[a].terminal == branches[b].terminal)
                throw std::invalid_argument("reduce_coupler: duplicate branch terminal");

    CouplerReduction red;
    for (std::size_t a = 0; a < branches.size(); ++a)
        for (std::size_t b = a + 1; b < branches.size(); ++b)
            red.pairwise_f.push_back({{branches[a].terminal, branches[b].terminal},
                                      branches[a].capacitance_f * branches[b].capacitance_f /
                                          total});
    for (const CouplerBranch& br : branches) {
        red.ground_shunt_f.push_back(br.capacitance_f * ground_capacitance_f / total);
        red.self_loading_f.push_back(br.capacitance_f * (total - br.capacitance_f) / total);
    }
    return red;
}

/// Builds a medial-lattice netlist the way the physical devices do it: one
/// LC resonator per medial vertex and one floating coupler island per parent
/// vertex (equal branch capacitors to each incident resonator), stored in
/// reduced form — effective pairwise capacitors plus ground-shunt loading.
/// The reduced coupling graph is exactly the medial graph.
inline SynthesizedCircuit synthesize_coupler_netlist(const LatticeGraph& parent,
                                                     const LatticeGraph& medial,
                                                     const SynthesisOptions& options,
                                                     double branch_capacitance_f,
                                                     double island_ground_f,
                                                     std::span<const int> port_vertices) {
    options.resonator.validate();
    if (parent.kind != GraphKind::parent || medial.kind != GraphKind::medial)
        throw std::invalid_argument(
            "synthesize_coupler_netlist: expects a parent lattice and its medial lattice");
    if (medial.vertex_count() != parent.edge_count())
        throw std::invalid_argument(
            "synthesize_coupler_netlist: medial lattice does not correspond to the parent");
    if (!(branch_capacitance_f > 0.0) || !(island_ground_f >= 0.0))
        throw std::invalid_argument(
            "synthesize_coupler_netlist: invalid island capacitances");

    const int n = medial.vertex_count();
    std::vector<std::vector<int>> incident(parent.vertices.size());
    for (std::size_t k = 0; k < parent.edges.size(); ++k) {
        incident[static_cast<std::size_t>(parent.edges[k].i)].push_back(static_cast<int>(k));
        incident[static_cast<std::size_t>(parent.edges[k].j)].push_back(static_cast<int>(k));
    }

    std::vector<double> load(static_cast<std::size_t>(n), 0.0);
    std::vector<double> ground_legs(static_cast<std::size_t>(n), 0.0);
    std::vector<Netlist::Capacitor> couplings;
    for (const std::vector<int>& inc : incident) {
        if (inc.size() < 2)
            continue;
        std::vector<CouplerBranch> branches;
        branches.reserve(inc.size());
        for (int m : inc)
            branches.push_back({m, branch_capacitance_f});
        const CouplerReduction red = reduce_coupler(branches, island_ground_f);
        for (const auto& [pair, cap] : red.pairwise_f)
            couplings.push_back({std::min(pair.first, pair.second) + 1,
                                 std::max(pair.first, pair.second) + 1, cap});
        for (std::size_t b = 0; b < branches.size(); ++b) {
            load[static_cast<std::size_t>(branches[b].terminal)] += red.self_loading_f[b];
            ground_legs[static_cast<std::size_t>(branches[b].terminal)] +=
                red.ground_shunt_f[b];
        }
    }
    std::sort(couplings.begin(), couplings.end(),
              [](const Netlist::Capacitor& a, const Netlist::Capacitor& b) {
                  return std::pair{a.n1, a.n2} < std::pair{b.n1, b.n2};
              });

    {
        std::vector<int> sorted(port_vertices.begin(), port_vertices.end());
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw std::invalid_argument("synthesize_coupler_netlist: duplicate port vertex");
        for (int v : sorted)
            if (v < 0 || v >= n)
                throw std::invalid_argument(
                    "synthesize_coupler_netlist: port vertex out of range");
    }
    if (!port_vertices.empty() && !(options.port_coupling_f > 0.0))
        throw std::invalid_argument("synthesize_coupler_netlist: port coupling must be positive");
    for (int v : port_vertices)
        load[static_cast<std::size_t>(v)] += options.port_coupling_f;

    const double c_res = options.resonator.capacitance_f();
    const double l_res = options.resonator.inductance_h();

    SynthesizedCircuit circuit;
    circuit.netlist.node_count = 1 + n + static_cast<int>(port_vertices.size());
    circuit.vertex_node.resize(static_cast<std::size_t>(n));
    circuit.shunt_capacitance_f.resize(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v) {
        circuit.vertex_node[static_cast<std::size_t>(v)] = v + 1;
        double shunt = c_res;
        if (options.compensate_loading) {
            // The reduction's ground legs are folded into the stamped shunt
            // below, so they count toward the node total and the trim uses
            // the full self-loading.
            shunt = c_res - load[static_cast<std::size_t>(v)];
            if (!(shunt > 0.0))
                throw std::invalid_argument(
                    "synthesize_coupler_netlist: island loading exceeds the resonator budget");
        }
        circuit.shunt_capacitance_f[static_cast<std::size_t>(v)] = shunt;
        circuit.netlist.capacitors.push_back(
            {0, v + 1, shunt + ground_legs[static_cast<std::size_t>(v)]});
        circuit.netlist.inductors.push_back({0, v + 1, l_res});
    }
    for (const Netlist::Capacitor& c : couplings)
        circuit.netlist.capacitors.push_back(c);

    int next_node = n + 1;
    for (int v : port_vertices) {
        circuit.port_vertices.push_back(v);
        circuit.port_nodes.push_back(next_node);
        circuit.netlist.capacitors.push_back({v + 1, next_node, options.port_coupling_f});
        circuit.netlist.ports.push_back({next_node, options.resonator.impedance_ohm});
        ++next_node;
    }
    circuit.netlist.validate();
    return circuit;
}

struct SweepOptions {
    double shunt_conductance_s = 0.0; ///< optional loss at every inductor-bearing node
};

struct SweepResult {
    std::vector<double> frequency_hz;
    std::vector<Eigen::MatrixXcd> s_parameters; ///< port-count square matrix per point
    std::vector<int> failed_indices;            ///< grid points whose solve was singular
    int port_count = 0;
};

/// Uniformly spaced frequency grid, inclusive of both ends.
inline std::vector<double> frequency_grid(double start_hz, double stop_hz, int points) {
    if (!(start_hz > 0.0) || !(stop_hz > start_hz) || points < 2)
        throw std::invalid_argument("frequency_grid: need 0 < start < stop and >= 2 points");
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(points));
    const double step = (stop_hz - start_hz) / (points - 1);
    for (int k = 0; k < points; ++k)
        grid.push_back(start_hz + step * k);
    grid.back() = stop_hz;
    return grid;
}

/// Modified-nodal-analysis AC sweep returning the S-parameter matrix at each
/// grid point (reference impedance = the ports' common impedance).
///
/// The nodal admittance Y(w) = jwC + G + 1/(jw) * Gamma is assembled over
/// the non-ground nodes, internal nodes are Schur-eliminated, and
/// S = (I - Z0 Yp)(I + Z0 Yp)^{-1}.  Singular points are recorded in
/// `failed_indices` with NaN matrices rather than aborting the sweep.
inline SweepResult ac_sweep(const Netlist& netlist, std::span<const double> frequencies_hz,
                            const SweepOptions& options = {}) {
    netlist.validate();
    if (netlist.ports.empty())
        throw std::invalid_argument("ac_sweep: netlist has no ports");
    if (frequencies_hz.empty())
        throw std::invalid_argument("ac_sweep: empty frequency grid");
    if (!(options.shunt_conductance_s >= 0.0))
        throw std::invalid_argument("ac_sweep: loss conductance must be non-negative");
    const double z0 = netlist.ports.front().ohms;
    for (const Netlist::Port& p : netlist.ports)
        if (p.ohms != z0)
            throw std::invalid_argument("ac_sweep: ports must share one reference impedance");

    const int n = netlist.node_count - 1; // non-ground nodes
    const int np = static_cast<int>(netlist.ports.size());

    // Order unknowns internal-first, ports last.
    std::vector<int> order(static_cast<std::size_t>(n), -1);
    {
        std::vector<char> is_port(static_cast<std::size_t>(n), 0);
        for (const Netlist::Port& p : netlist.ports)
            is_port[static_cast<std::size_t>(p.node - 1)] = 1;
        int slot = 0;
        for (int k = 0; k < n; ++k)
            if (!is_port[static_cast<std::size_t>(k)])
                order[static_cast<std::size_t>(k)] = slot++;
        for (const Netlist::Port& p : netlist.ports)
            order[static_cast<std::size_t>(p.node - 1)] = slot++;
    }
    const int ni = n - np;

    // Frequency-independent stamps.
    Eigen::MatrixXd cmat = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd gmat = Eigen::MatrixXd::Zero(n, n);
    auto stamp = [&](Eigen::MatrixXd& m, int n1, int n2, double value) {
        const int a = n1 == 0 ? -1 : order[static_cast<std::size_t>(n1 - 1)];
        const int b = n2 == 0 ? -1 : order[static_cast<std::size_t>(n2 - 1)];
        if (a >= 0)
            m(a, a) += value;
        if (b >= 0)
            m(b, b) += value;
        if (a >= 0 && b >= 0) {
            m(a, b) -= value;
            m(b, a) -= value;
        }
    };
    for (const Netlist::Capacitor& c : netlist.capacitors)
        stamp(cmat, c.n1, c.n2, c.farads);
    for (const Netlist::Inductor& l : netlist.inductors) {
        stamp(gamma, l.n1, l.n2, 1.0 / l.henries);
        if (options.shunt_conductance_s > 0.0) {
            if (l.n1 != 0)
                gmat(order[static_cast<std::size_t>(l.n1 - 1)],
                     order[static_cast<std::size_t>(l.n1 - 1)]) += options.shunt_conductance_s;
            if (l.n2 != 0)
                gmat(order[static_cast<std::size_t>(l.n2 - 1)],
                     order[static_cast<std::size_t>(l.n2 - 1)]) += options.shunt_conductance_s;
        }
    }

    SweepResult result;
    result.port_count = np;
    result.frequency_hz.assign(frequencies_hz.begin(), frequencies_hz.end());
    result.s_parameters.reserve(frequencies_hz.size());

    const Eigen::MatrixXcd cc = cmat.cast<std::complex<double>>();
    const Eigen::MatrixXcd gc = gamma.cast<std::complex<double>>();
    const Eigen::MatrixXcd rc = gmat.cast<std::complex<double>>();
    const Eigen::MatrixXcd identity = Eigen::MatrixXcd::Identity(np, np);
    for (std::size_t fi = 0; fi < frequencies_hz.size(); ++fi) {
        const double f = frequencies_hz[fi];
        if (!(f > 0.0))
            throw std::invalid_argument("ac_sweep: frequencies must be positive");
        const double w = 2.0 * std::numbers::pi * f;
        const std::complex<double> jw(0.0, w);
        Eigen::MatrixXcd y = jw * cc + gc / jw + rc;

        bool ok = true;
        Eigen::MatrixXcd yp;
        if (ni > 0) {
            const auto yii = y.topLeftCorner(ni, ni);
            Eigen::PartialPivLU<Eigen::MatrixXcd> lu(yii);
            const double pivot_floor =
                yii.cwiseAbs().maxCoeff() * std::numeric_limits<double>::epsilon() * 1e3;
            if (lu.matrixLU().diagonal().cwiseAbs().minCoeff() <= pivot_floor)
                ok = false;
            else
                yp = y.bottomRightCorner(np, np) -
                     y.bottomLeftCorner(np, ni) * lu.solve(y.topRightCorner(ni, np));
        } else {
            yp = y;
        }

        if (ok) {
            const Eigen::MatrixXcd denom = identity + z0 * yp;
            Eigen::PartialPivLU<Eigen::MatrixXcd> lu(denom);
            const double pivot_floor =
                denom.cwiseAbs().maxCoeff() * std::numeric_limits<double>::epsilon() * 1e3;
            // (I + Z0 Yp)^{-1} and (I - Z0 Yp) commute, so this is S.
            if (lu.matrixLU().diagonal().cwiseAbs().minCoeff() <= pivot_floor)
                ok = false;
            else
                result.s_parameters.push_back(lu.solve(identity - z0 * yp));
        }
        if (!ok) {
            result.failed_indices.push_back(static_cast<int>(fi));
            result.s_parameters.push_back(Eigen::MatrixXcd::Constant(
                np, np, std::complex<double>(std::numeric_limits<double>::quiet_NaN(),
                                             std::numeric_limits<double>::quiet_NaN())));
        }
    }
    return result;
}

/// Undriven resonance frequencies of the lossless network: the generalized
/// eigenproblem Gamma v = w^2 C v over non-ground nodes (port resistors are
/// terminations, not part of the resonant network).  Zero modes from
/// inductor-free nodes are dropped.
inline std::vector<double> modal_frequencies(const Netlist& netlist) {
    netlist.validate();
    const int n = netlist.node_count - 1;
    if (n == 0)
        return {};
    Eigen::MatrixXd cmat = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(n, n);
    auto stamp = [&](Eigen::MatrixXd& m, int n1, int n2, double value) {
        const int a = n1 - 1, b = n2 - 1;
        if (a >= 0)
            m(a, a) += value;
        if (b >= 0)
            m(b, b) += value;
        if (a >= 0 && b >= 0) {
            m(a, b) -= value;
            m(b, a) -= value;
        }
    };
    for (const Netlist::Capacitor& c : netlist.capacitors)
        stamp(cmat, c.n1, c.n2, c.farads);
    for (const Netlist::Inductor& l : netlist.inductors)
        stamp(gamma, l.n1, l.n2, 1.0 / l.henries);

    Eigen::LLT<Eigen::MatrixXd> llt(cmat);
    if (llt.info() != Eigen::Success)
        throw numerical_error(
            "modal_frequencies: capacitance matrix is not positive definite "
            "(some node lacks a capacitive path to ground)");
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(gamma, cmat);
    if (solver.info() != Eigen::Success)
        throw numerical_error("modal_frequencies: generalized eigensolver failed");

    std::vector<double> freqs;
    const double floor = solver.eigenvalues().cwiseAbs().maxCoeff() * 1e-12;
    for (Eigen::Index k = 0; k < solver.eigenvalues().size(); ++k) {
        const double w2 = solver.eigenvalues()(k);
        if (w2 > floor)
            freqs.push_back(std::sqrt(w2) / (2.0 * std::numbers::pi));
    }
    std::sort(freqs.begin(), freqs.end());
    return freqs;
}

/// Transmission trace 20 log10 |S(out,in)| for one port pair, skipping
/// failed grid points.
inline analysis::Trace transmission_trace(const SweepResult& sweep, int out_port, int in_port) {
    if (out_port < 0 || in_port < 0 || out_port >= sweep.port_count ||
        in_port >= sweep.port_count)
        throw std::invalid_argument("transmission_trace: port index out of range");
    if (out_port == in_port)
        throw std::invalid_argument("transmission_trace: choose two distinct ports");
    analysis::Trace trace;
    std::vector<char> failed(sweep.frequency_hz.size(), 0);
    for (int k : sweep.failed_indices)
        failed[static_cast<std::size_t>(k)] = 1;
    for (std::size_t k = 0; k < sweep.frequency_hz.size(); ++k) {
        if (failed[k])
            continue;
        const double mag = std::abs(sweep.s_parameters[k](out_port, in_port));
        trace.frequency_hz.push_back(sweep.frequency_hz[k]);
        trace.value_db.push_back(20.0 * std::log10(std::max(mag, 1e-300)));
    }
    return trace;
}

} // namespace hyperlat
