#pragma once

/// Named lattice/coupling presets for the device families studied by the
/// toolkit, plus deterministic automatic port placement.

#include <algorithm>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hyperlat/circuit.hpp"
#include "hyperlat/lattice.hpp"
#include "hyperlat/tiling.hpp"

namespace hyperlat {

struct PresetDefinition {
    std::string name;
    TilingSpec tiling;
    FlakeSpec flake;
    bool medial = false;               ///< target lattice is the medial (kagome-like) graph
    DistanceBasis basis = DistanceBasis::euclidean; ///< coupling basis for design
};

/// The built-in presets:
///  - paper-83:           {8,3} flake, central octagon + its 8 edge neighbours
///  - paper-124:          {12,4} flake, central dodecagon + 4 corner-attached faces
///  - paper-83-kagome:    medial lattice of paper-83
///  - paper-124-kagome:   medial lattice of paper-124
///  - euclidean-83-kagome, euclidean-124-kagome: same graphs with uniform
///    (distance-independent) couplings, the flat-coupling controls
inline const std::vector<PresetDefinition>& presets() {
    static const std::vector<PresetDefinition> defs = [] {
        std::vector<PresetDefinition> list;

        FlakeSpec flake83;
        flake83.selection = FlakeSpec::Selection::edge_neighbors;

        FlakeSpec flake124;
        flake124.selection = FlakeSpec::Selection::vertex_attached;
        flake124.corner_positions = {0, 3, 6, 9};

        list.push_back({"paper-83", {8, 3, 1}, flake83, false, DistanceBasis::euclidean});
        list.push_back({"paper-124", {12, 4, 1}, flake124, false, DistanceBasis::euclidean});
        list.push_back({"paper-83-kagome", {8, 3, 1}, flake83, true, DistanceBasis::euclidean});
        list.push_back(
            {"paper-124-kagome", {12, 4, 1}, flake124, true, DistanceBasis::euclidean});
        list.push_back(
            {"euclidean-83-kagome", {8, 3, 1}, flake83, true, DistanceBasis::uniform});
        list.push_back(
            {"euclidean-124-kagome", {12, 4, 1}, flake124, true, DistanceBasis::uniform});
        return list;
    }();
    return defs;
}

inline const PresetDefinition& find_preset(const std::string& name) {
    for (const PresetDefinition& def : presets())
        if (def.name == name)
            return def;
    std::string known;
    for (const PresetDefinition& def : presets())
        known += (known.empty() ? "" : ", ") + def.name;
    throw std::invalid_argument("unknown preset '" + name + "' (known: " + known + ")");
}

/// A preset instantiated into graphs: the parent flake always, the medial
/// lattice when the preset targets it.
struct BuiltPreset {
    PresetDefinition definition;
    LatticeGraph parent;
    std::optional<LatticeGraph> medial;

    const LatticeGraph& target() const { return medial ? *medial : parent; }
};

inline BuiltPreset build_preset(const std::string& name) {
    BuiltPreset built;
    built.definition = find_preset(name);
    const Tiling tiling = generate_tiling(built.definition.tiling);
    built.parent = build_flake(tiling, built.definition.flake);
    if (built.definition.medial)
        built.medial = medial_lattice(built.parent);
    return built;
}

/// Deterministic automatic port placement: boundary vertices (degree below
/// the graph's maximum) chosen greedily for maximal mutual Euclidean
/// separation, seeded at the outermost boundary vertex; ties resolve to the
/// lowest vertex index.
inline std::vector<int> auto_ports(const LatticeGraph& graph, int count) {
    if (count < 1)
        throw std::invalid_argument("auto_ports: need at least one port");
    const std::vector<int> deg = graph.degrees();
    const int max_deg = *std::max_element(deg.begin(), deg.end());
    std::vector<int> boundary;
    for (int v = 0; v < graph.vertex_count(); ++v)
        if (deg[static_cast<std::size_t>(v)] < max_deg)
            boundary.push_back(v);
    if (boundary.empty()) // regular graph: every vertex qualifies
        for (int v = 0; v < graph.vertex_count(); ++v)
            boundary.push_back(v);
    if (static_cast<int>(boundary.size()) < count)
        throw std::invalid_argument("auto_ports: fewer boundary vertices than requested ports");

    auto radius2 = [&graph](int v) {
        return abs2(graph.vertices[static_cast<std::size_t>(v)].position);
    };
    std::vector<int> chosen;
    int seed = boundary.front();
    for (int v : boundary)
        if (radius2(v) > radius2(seed) + 1e-15)
            seed = v;
    chosen.push_back(seed);

    while (static_cast<int>(chosen.size()) < count) {
        int best = -1;
        double best_dist = -1.0;
        for (int v : boundary) {
            if (std::find(chosen.begin(), chosen.end(), v) != chosen.end())
                continue;
            double nearest = std::numeric_limits<double>::infinity();
            for (int c : chosen) {
                const DiskPoint& a = graph.vertices[static_cast<std::size_t>(v)].position;
                const DiskPoint& b = graph.vertices[static_cast<std::size_t>(c)].position;
                const double dre = a.re - b.re, dim = a.im - b.im;
                nearest = std::min(nearest, dre * dre + dim * dim);
            }
            if (nearest > best_dist + 1e-15) {
                best_dist = nearest;
                best = v;
            }
        }
        chosen.push_back(best);
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

} // namespace hyperlat
