#pragma once

/// Finite lattice graphs cut from tilings (flakes) and their medial
/// (kagome-like) companions.
///
/// A LatticeGraph stores embedded vertices, length-annotated edges and the
/// plaquette faces that survive the cut.  The medial construction is the
/// line graph: one vertex per parent edge placed at its hyperbolic midpoint,
/// with cliques among edges meeting at a parent vertex.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "hyperlat/common.hpp"
#include "hyperlat/disk.hpp"
#include "hyperlat/tiling.hpp"

namespace hyperlat {

enum class GraphKind { parent, medial };

struct LatticeVertex {
    int id = 0;
    DiskPoint position;
};

/// Undirected edge (i < j) annotated with both metrics' lengths.
struct LatticeEdge {
    int i = 0;
    int j = 0;
    double euclidean_length = 0.0;
    double hyperbolic_length = 0.0;
};

struct LatticeGraph {
    GraphKind kind = GraphKind::parent;
    std::vector<LatticeVertex> vertices;
    std::vector<LatticeEdge> edges;
    std::vector<std::vector<int>> faces;

    int vertex_count() const { return static_cast<int>(vertices.size()); }
    int edge_count() const { return static_cast<int>(edges.size()); }
    int face_count() const { return static_cast<int>(faces.size()); }

    std::vector<std::vector<int>> adjacency_list() const {
        std::vector<std::vector<int>> adj(vertices.size());
        for (const LatticeEdge& e : edges) {
            adj[static_cast<std::size_t>(e.i)].push_back(e.j);
            adj[static_cast<std::size_t>(e.j)].push_back(e.i);
        }
        return adj;
    }

    std::vector<int> degrees() const {
        std::vector<int> deg(vertices.size(), 0);
        for (const LatticeEdge& e : edges) {
            ++deg[static_cast<std::size_t>(e.i)];
            ++deg[static_cast<std::size_t>(e.j)];
        }
        return deg;
    }

    /// Structural sanity: contiguous ids, ordered unique edges, indices in
    /// range, faces that are closed walks over existing edges.
    void validate() const {
        const int n = vertex_count();
        for (int v = 0; v < n; ++v)
            if (vertices[static_cast<std::size_t>(v)].id != v)
                throw std::invalid_argument("LatticeGraph: vertex ids must be 0..n-1 in order");
        std::unordered_map<std::uint64_t, int> seen;
        for (const LatticeEdge& e : edges) {
            if (e.i < 0 || e.j < 0 || e.i >= n || e.j >= n)
                throw std::invalid_argument("LatticeGraph: edge endpoint out of range");
            if (e.i >= e.j)
                throw std::invalid_argument("LatticeGraph: edges must satisfy i < j");
            if (!seen.emplace(edge_key(e.i, e.j), 1).second)
                throw std::invalid_argument("LatticeGraph: duplicate edge");
            if (!(e.euclidean_length > 0.0) || !(e.hyperbolic_length > 0.0))
                throw std::invalid_argument("LatticeGraph: edge lengths must be positive");
        }
        for (const std::vector<int>& face : faces) {
            if (face.size() < 3)
                throw std::invalid_argument("LatticeGraph: face with fewer than 3 vertices");
            for (std::size_t k = 0; k < face.size(); ++k) {
                const int a = face[k];
                const int b = face[(k + 1) % face.size()];
                if (a < 0 || b < 0 || a >= n || b >= n)
                    throw std::invalid_argument("LatticeGraph: face vertex out of range");
                if (seen.find(edge_key(std::min(a, b), std::max(a, b))) == seen.end())
                    throw std::invalid_argument("LatticeGraph: face boundary misses an edge");
            }
        }
    }

    static std::uint64_t edge_key(int i, int j) {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(i)) << 32) |
               static_cast<std::uint64_t>(static_cast<std::uint32_t>(j));
    }
};

/// Which tiling faces make up a flake.
struct FlakeSpec {
    enum class Selection {
        edge_neighbors,   ///< central face plus every face sharing an edge with it
        vertex_attached,  ///< central face plus the faces attached at chosen corners
        explicit_faces,   ///< caller-supplied face indices
    };

    Selection selection = Selection::edge_neighbors;
    std::vector<int> corner_positions; ///< vertex_attached: corner indices into the central cycle
    std::vector<int> face_indices;     ///< explicit_faces: indices into Tiling::faces
};

namespace detail {

inline bool faces_share_edge(const std::vector<int>& a, const std::vector<int>& b) {
    const std::size_t na = a.size(), nb = b.size();
    for (std::size_t i = 0; i < na; ++i) {
        const int u = a[i], v = a[(i + 1) % na];
        for (std::size_t j = 0; j < nb; ++j) {
            const int x = b[j], y = b[(j + 1) % nb];
            if ((u == x && v == y) || (u == y && v == x))
                return true;
        }
    }
    return false;
}

inline bool face_contains(const std::vector<int>& face, int vertex) {
    return std::find(face.begin(), face.end(), vertex) != face.end();
}

} // namespace detail

/// Cuts a flake out of a tiling: the union of the selected faces' boundary
/// graphs, with vertices re-indexed to 0..V-1 (ascending tiling index).
///
/// Throws std::invalid_argument when the selection is malformed, ambiguous
/// or yields a disconnected graph.
inline LatticeGraph build_flake(const Tiling& tiling, const FlakeSpec& spec) {
    if (tiling.faces.empty())
        throw std::invalid_argument("build_flake: tiling has no faces");

    int central = -1;
    for (std::size_t f = 0; f < tiling.faces.size(); ++f)
        if (tiling.faces[f].generation == 0) {
            central = static_cast<int>(f);
            break;
        }
    if (central < 0)
        throw std::invalid_argument("build_flake: tiling has no generation-0 face");
    const std::vector<int>& central_cycle = tiling.faces[static_cast<std::size_t>(central)].vertices;

    std::vector<int> selected;
    switch (spec.selection) {
    case FlakeSpec::Selection::edge_neighbors: {
        selected.push_back(central);
        for (std::size_t f = 0; f < tiling.faces.size(); ++f)
            if (static_cast<int>(f) != central &&
                detail::faces_share_edge(tiling.faces[f].vertices, central_cycle))
                selected.push_back(static_cast<int>(f));
        break;
    }
    case FlakeSpec::Selection::vertex_attached: {
        if (spec.corner_positions.empty())
            throw std::invalid_argument("build_flake: vertex_attached needs corner positions");
        selected.push_back(central);
        for (int corner : spec.corner_positions) {
            if (corner < 0 || corner >= static_cast<int>(central_cycle.size()))
                throw std::invalid_argument("build_flake: corner position out of range");
            const int v = central_cycle[static_cast<std::size_t>(corner)];
            std::optional<int> attached;
            for (std::size_t f = 0; f < tiling.faces.size(); ++f) {
                if (static_cast<int>(f) == central)
                    continue;
                const std::vector<int>& cycle = tiling.faces[f].vertices;
                if (!detail::face_contains(cycle, v) ||
                    detail::faces_share_edge(cycle, central_cycle))
                    continue;
                if (attached)
                    throw std::invalid_argument(
                        "build_flake: corner " + std::to_string(corner) +
                        " has multiple vertex-attached faces");
                attached = static_cast<int>(f);
            }
            if (!attached)
                throw std::invalid_argument("build_flake: corner " + std::to_string(corner) +
                                            " has no vertex-attached face");
            selected.push_back(*attached);
        }
        break;
    }
    case FlakeSpec::Selection::explicit_faces: {
        if (spec.face_indices.empty())
            throw std::invalid_argument("build_flake: explicit selection is empty");
        for (int f : spec.face_indices) {
            if (f < 0 || f >= static_cast<int>(tiling.faces.size()))
                throw std::invalid_argument("build_flake: face index out of range");
            selected.push_back(f);
        }
        break;
    }
    }

    std::sort(selected.begin(), selected.end());
    if (std::adjacent_find(selected.begin(), selected.end()) != selected.end())
        throw std::invalid_argument("build_flake: face selected twice");

    // Collect vertices (ascending tiling index) and remap.
    std::vector<int> used;
    for (int f : selected)
        for (int v : tiling.faces[static_cast<std::size_t>(f)].vertices)
            used.push_back(v);
    std::sort(used.begin(), used.end());
    used.erase(std::unique(used.begin(), used.end()), used.end());
    std::unordered_map<int, int> remap;
    remap.reserve(used.size());
    for (std::size_t k = 0; k < used.size(); ++k)
        remap[used[k]] = static_cast<int>(k);

    LatticeGraph graph;
    graph.kind = GraphKind::parent;
    graph.vertices.reserve(used.size());
    for (std::size_t k = 0; k < used.size(); ++k)
        graph.vertices.push_back(
            {static_cast<int>(k), tiling.vertices[static_cast<std::size_t>(used[k])]});

    std::vector<std::pair<int, int>> edge_pairs;
    for (int f : selected) {
        const std::vector<int>& cycle = tiling.faces[static_cast<std::size_t>(f)].vertices;
        std::vector<int> mapped;
        mapped.reserve(cycle.size());
        for (int v : cycle)
            mapped.push_back(remap.at(v));
        for (std::size_t k = 0; k < mapped.size(); ++k) {
            const int a = mapped[k];
            const int b = mapped[(k + 1) % mapped.size()];
            edge_pairs.emplace_back(std::min(a, b), std::max(a, b));
        }
        graph.faces.push_back(std::move(mapped));
    }
    std::sort(edge_pairs.begin(), edge_pairs.end());
    edge_pairs.erase(std::unique(edge_pairs.begin(), edge_pairs.end()), edge_pairs.end());

    graph.edges.reserve(edge_pairs.size());
    for (const auto& [i, j] : edge_pairs) {
        const DiskPoint& a = graph.vertices[static_cast<std::size_t>(i)].position;
        const DiskPoint& b = graph.vertices[static_cast<std::size_t>(j)].position;
        const double dre = a.re - b.re, dim = a.im - b.im;
        graph.edges.push_back(
            {i, j, std::sqrt(dre * dre + dim * dim), hyperbolic_distance(a, b)});
    }

    // Flakes must be connected to be meaningful lattices.
    std::vector<char> reached(graph.vertices.size(), 0);
    std::queue<int> frontier;
    frontier.push(0);
    reached[0] = 1;
    const auto adj = graph.adjacency_list();
    while (!frontier.empty()) {
        const int v = frontier.front();
        frontier.pop();
        for (int w : adj[static_cast<std::size_t>(v)])
            if (!reached[static_cast<std::size_t>(w)]) {
                reached[static_cast<std::size_t>(w)] = 1;
                frontier.push(w);
            }
    }
    if (std::find(reached.begin(), reached.end(), 0) != reached.end())
        throw std::invalid_argument("build_flake: selection yields a disconnected graph");

    return graph;
}

/// Medial (line-graph) lattice of a parent flake.
///
/// Medial vertex k sits at the hyperbolic midpoint of parent edge k — the
/// index correspondence is part of the contract and is relied upon by the
/// flat-band state construction.  Medial faces are the parent plaquettes
/// (as cycles of their boundary-edge midpoints, in boundary order) plus one
/// triangle per degree-3 parent vertex.
inline LatticeGraph medial_lattice(const LatticeGraph& parent) {
    if (parent.kind != GraphKind::parent)
        throw std::invalid_argument("medial_lattice: input must be a parent lattice");
    if (parent.edges.empty())
        throw std::invalid_argument("medial_lattice: parent has no edges");

    LatticeGraph medial;
    medial.kind = GraphKind::medial;
    medial.vertices.reserve(parent.edges.size());
    for (std::size_t k = 0; k < parent.edges.size(); ++k) {
        const LatticeEdge& e = parent.edges[k];
        const DiskPoint mid = hyperbolic_midpoint(
            parent.vertices[static_cast<std::size_t>(e.i)].position,
            parent.vertices[static_cast<std::size_t>(e.j)].position);
        medial.vertices.push_back({static_cast<int>(k), mid});
    }

    // Incident-edge lists; each pair at a shared parent vertex couples.
    std::vector<std::vector<int>> incident(parent.vertices.size());
    for (std::size_t k = 0; k < parent.edges.size(); ++k) {
        incident[static_cast<std::size_t>(parent.edges[k].i)].push_back(static_cast<int>(k));
        incident[static_cast<std::size_t>(parent.edges[k].j)].push_back(static_cast<int>(k));
    }

    std::vector<std::pair<int, int>> edge_pairs;
    for (const std::vector<int>& inc : incident)
        for (std::size_t a = 0; a < inc.size(); ++a)
            for (std::size_t b = a + 1; b < inc.size(); ++b)
                edge_pairs.emplace_back(std::min(inc[a], inc[b]), std::max(inc[a], inc[b]));
    std::sort(edge_pairs.begin(), edge_pairs.end());

    medial.edges.reserve(edge_pairs.size());
    for (const auto& [i, j] : edge_pairs) {
        const DiskPoint& a = medial.vertices[static_cast<std::size_t>(i)].position;
        const DiskPoint& b = medial.vertices[static_cast<std::size_t>(j)].position;
        const double dre = a.re - b.re, dim = a.im - b.im;
        medial.edges.push_back(
            {i, j, std::sqrt(dre * dre + dim * dim), hyperbolic_distance(a, b)});
    }

    std::unordered_map<std::uint64_t, int> parent_edge_index;
    parent_edge_index.reserve(parent.edges.size());
    for (std::size_t k = 0; k < parent.edges.size(); ++k)
        parent_edge_index[LatticeGraph::edge_key(parent.edges[k].i, parent.edges[k].j)] =
            static_cast<int>(k);

    for (const std::vector<int>& face : parent.faces) {
        std::vector<int> cycle;
        cycle.reserve(face.size());
        for (std::size_t k = 0; k < face.size(); ++k) {
            const int a = face[k];
            const int b = face[(k + 1) % face.size()];
            cycle.push_back(
                parent_edge_index.at(LatticeGraph::edge_key(std::min(a, b), std::max(a, b))));
        }
        medial.faces.push_back(std::move(cycle));
    }
    for (const std::vector<int>& inc : incident)
        if (inc.size() == 3)
            medial.faces.push_back(inc);

    return medial;
}

/// Cycle-space dimension E - V + components.
inline int cycle_rank(const LatticeGraph& graph) {
    const int n = graph.vertex_count();
    if (n == 0)
        return 0;
    const auto adj = graph.adjacency_list();
    std::vector<char> reached(static_cast<std::size_t>(n), 0);
    int components = 0;
    for (int s = 0; s < n; ++s) {
        if (reached[static_cast<std::size_t>(s)])
            continue;
        ++components;
        std::queue<int> frontier;
        frontier.push(s);
        reached[static_cast<std::size_t>(s)] = 1;
        while (!frontier.empty()) {
            const int v = frontier.front();
            frontier.pop();
            for (int w : adj[static_cast<std::size_t>(v)])
                if (!reached[static_cast<std::size_t>(w)]) {
                    reached[static_cast<std::size_t>(w)] = 1;
                    frontier.push(w);
                }
        }
    }
    return graph.edge_count() - n + components;
}

/// The stored plaquette cycles, verified against the edge set.
inline std::vector<std::vector<int>> plaquette_cycles(const LatticeGraph& graph) {
    graph.validate();
    return graph.faces;
}

struct BipartiteResult {
    bool bipartite = false;
    std::vector<int> coloring; ///< 0/1 per vertex; meaningful only when bipartite
};

/// Two-colours the graph by BFS; reports failure on any odd cycle.
inline BipartiteResult is_bipartite(const LatticeGraph& graph) {
    const int n = graph.vertex_count();
    BipartiteResult result;
    result.bipartite = true;
    result.coloring.assign(static_cast<std::size_t>(n), -1);
    const auto adj = graph.adjacency_list();
    for (int s = 0; s < n; ++s) {
        if (result.coloring[static_cast<std::size_t>(s)] != -1)
            continue;
        result.coloring[static_cast<std::size_t>(s)] = 0;
        std::queue<int> frontier;
        frontier.push(s);
        while (!frontier.empty()) {
            const int v = frontier.front();
            frontier.pop();
            for (int w : adj[static_cast<std::size_t>(v)]) {
                if (result.coloring[static_cast<std::size_t>(w)] == -1) {
                    result.coloring[static_cast<std::size_t>(w)] =
                        1 - result.coloring[static_cast<std::size_t>(v)];
                    frontier.push(w);
                } else if (result.coloring[static_cast<std::size_t>(w)] ==
                           result.coloring[static_cast<std::size_t>(v)]) {
                    result.bipartite = false;
                    return result;
                }
            }
        }
    }
    return result;
}

} // namespace hyperlat
