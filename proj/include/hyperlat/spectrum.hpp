#pragma once

/// Tight-binding spectra of lattice graphs: exact diagonalization of the
/// (optionally weighted) adjacency matrix plus the derived observables used
/// throughout the toolkit — density of states, spectral gaps, degeneracy
/// grouping, inverse participation ratios and flat-band compact localized
/// states on medial lattices.
///
/// Energies are reported in units of the hopping magnitude |t|; the
/// convention is E_k = lambda_k(A) in ascending order.

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hyperlat/common.hpp"
#include "hyperlat/lattice.hpp"

namespace hyperlat {

/// Eigenvalues (ascending) and matching eigenvector columns.
struct Spectrum {
    std::vector<double> energies;
    Eigen::MatrixXd vectors;
    bool weighted = false;

    int size() const { return static_cast<int>(energies.size()); }
};

/// Dense adjacency matrix with unit weights.
inline Eigen::MatrixXd adjacency_matrix(const LatticeGraph& graph) {
    const int n = graph.vertex_count();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (const LatticeEdge& e : graph.edges) {
        a(e.i, e.j) = 1.0;
        a(e.j, e.i) = 1.0;
    }
    return a;
}

/// Dense adjacency matrix with one positive weight per edge (aligned with
/// `graph.edges`).
inline Eigen::MatrixXd adjacency_matrix(const LatticeGraph& graph,
                                        std::span<const double> edge_weights) {
    if (static_cast<int>(edge_weights.size()) != graph.edge_count())
        throw std::invalid_argument("adjacency_matrix: one weight per edge required");
    const int n = graph.vertex_count();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t k = 0; k < edge_weights.size(); ++k) {
        if (!(edge_weights[k] > 0.0))
            throw std::invalid_argument("adjacency_matrix: weights must be positive");
        const LatticeEdge& e = graph.edges[k];
        a(e.i, e.j) = edge_weights[k];
        a(e.j, e.i) = edge_weights[k];
    }
    return a;
}

namespace detail {

inline Spectrum diagonalize(const Eigen::MatrixXd& a, bool weighted) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
    if (solver.info() != Eigen::Success)
        throw numerical_error("adjacency_energies: eigensolver failed to converge");
    Spectrum spectrum;
    spectrum.weighted = weighted;
    spectrum.energies.assign(solver.eigenvalues().data(),
                             solver.eigenvalues().data() + solver.eigenvalues().size());
    spectrum.vectors = solver.eigenvectors();
    return spectrum;
}

} // namespace detail

/// Uniform-hopping spectrum.
inline Spectrum adjacency_energies(const LatticeGraph& graph) {
    if (graph.vertex_count() == 0)
        throw std::invalid_argument("adjacency_energies: empty graph");
    return detail::diagonalize(adjacency_matrix(graph), false);
}

/// Weighted-hopping spectrum (weights aligned with `graph.edges`).
inline Spectrum adjacency_energies(const LatticeGraph& graph,
                                   std::span<const double> edge_weights) {
    if (graph.vertex_count() == 0)
        throw std::invalid_argument("adjacency_energies: empty graph");
    return detail::diagonalize(adjacency_matrix(graph, edge_weights), true);
}

/// Normalized density-of-states histogram: bins of width `bin_width`
/// anchored at the lowest energy, last bin closed above.
struct DosHistogram {
    double bin_width = 0.0;
    double origin = 0.0;           ///< lower edge of bin 0 (the lowest energy)
    std::vector<double> centers;   ///< bin centres
    std::vector<int> counts;       ///< states per bin
    std::vector<double> fractions; ///< counts / total, summing to 1
};

inline DosHistogram dos(const Spectrum& spectrum, double bin_width = 0.03) {
    if (!(bin_width > 0.0))
        throw std::invalid_argument("dos: bin width must be positive");
    if (spectrum.energies.empty())
        throw std::invalid_argument("dos: empty spectrum");

    DosHistogram hist;
    hist.bin_width = bin_width;
    hist.origin = spectrum.energies.front();
    const double span = spectrum.energies.back() - hist.origin;
    const int nbins = static_cast<int>(std::floor(span / bin_width)) + 1;
    hist.counts.assign(static_cast<std::size_t>(nbins), 0);
    for (double e : spectrum.energies) {
        int bin = static_cast<int>(std::floor((e - hist.origin) / bin_width));
        bin = std::clamp(bin, 0, nbins - 1);
        ++hist.counts[static_cast<std::size_t>(bin)];
    }
    const double total = static_cast<double>(spectrum.energies.size());
    hist.centers.reserve(static_cast<std::size_t>(nbins));
    hist.fractions.reserve(static_cast<std::size_t>(nbins));
    for (int b = 0; b < nbins; ++b) {
        hist.centers.push_back(hist.origin + (b + 0.5) * bin_width);
        hist.fractions.push_back(hist.counts[static_cast<std::size_t>(b)] / total);
    }
    return hist;
}

/// An open spectral interval free of eigenvalues.
struct SpectralGap {
    double lower = 0.0; ///< highest eigenvalue below the gap
    double upper = 0.0; ///< lowest eigenvalue above the gap

    double width() const { return upper - lower; }
};

struct GapList {
    double threshold = 0.0;
    std::vector<SpectralGap> gaps;
};

/// Consecutive-eigenvalue differences exceeding `threshold`, in ascending
/// order.  A threshold larger than the spectral span yields no gaps.
inline GapList detect_gaps(const Spectrum& spectrum, double threshold) {
    if (!(threshold > 0.0))
        throw std::invalid_argument("detect_gaps: threshold must be positive");
    GapList list;
    list.threshold = threshold;
    for (std::size_t k = 0; k + 1 < spectrum.energies.size(); ++k)
        if (spectrum.energies[k + 1] - spectrum.energies[k] > threshold)
            list.gaps.push_back({spectrum.energies[k], spectrum.energies[k + 1]});
    return list;
}

/// A maximal run of eigenvalues equal within tolerance.
struct DegenerateGroup {
    double energy = 0.0; ///< group mean
    int multiplicity = 0;
    int first_index = 0; ///< index of the lowest member in the spectrum
};

inline std::vector<DegenerateGroup> group_degeneracies(const Spectrum& spectrum,
                                                       double tolerance = 1e-8) {
    if (!(tolerance >= 0.0))
        throw std::invalid_argument("group_degeneracies: tolerance must be non-negative");
    std::vector<DegenerateGroup> groups;
    const std::size_t n = spectrum.energies.size();
    std::size_t start = 0;
    while (start < n) {
        std::size_t stop = start + 1;
        while (stop < n &&
               spectrum.energies[stop] - spectrum.energies[stop - 1] <= tolerance)
            ++stop;
        double sum = 0.0;
        for (std::size_t k = start; k < stop; ++k)
            sum += spectrum.energies[k];
        groups.push_back({sum / static_cast<double>(stop - start),
                          static_cast<int>(stop - start), static_cast<int>(start)});
        start = stop;
    }
    return groups;
}

/// Inverse participation ratio sum_i |psi_i|^4 of each (normalized)
/// eigenvector; 1/N for a uniform state, 1 for a single-site state.
inline std::vector<double> inverse_participation_ratios(const Spectrum& spectrum) {
    std::vector<double> ipr;
    ipr.reserve(static_cast<std::size_t>(spectrum.vectors.cols()));
    for (Eigen::Index c = 0; c < spectrum.vectors.cols(); ++c) {
        double sum = 0.0;
        for (Eigen::Index r = 0; r < spectrum.vectors.rows(); ++r) {
            const double v = spectrum.vectors(r, c);
            sum += v * v * v * v;
        }
        ipr.push_back(sum);
    }
    return ipr;
}

/// A flat-band eigenstate supported on one plaquette's medial vertices with
/// alternating-sign amplitudes.
struct CompactLocalizedState {
    int parent_face = 0;
    std::vector<std::pair<int, double>> amplitudes; ///< (medial vertex, value), normalized
};

struct ClsSet {
    double energy = -2.0; ///< the flat-band eigenvalue of the uniform medial lattice
    std::vector<CompactLocalizedState> states;
};

/// Builds one compact localized state per parent plaquette: amplitudes
/// (+,-,+,-,...)/sqrt(m) on the plaquette's medial cycle.  Requires the
/// medial lattice produced by `medial_lattice(parent)` (vertex k at parent
/// edge k) and even-length plaquettes; each state is verified to satisfy
/// A psi = -2 psi on the uniform medial adjacency to 1e-9.
inline ClsSet construct_cls(const LatticeGraph& parent, const LatticeGraph& medial) {
    if (parent.kind != GraphKind::parent || medial.kind != GraphKind::medial)
        throw std::invalid_argument("construct_cls: expects a parent and its medial lattice");
    if (medial.vertex_count() != parent.edge_count())
        throw std::invalid_argument(
            "construct_cls: medial lattice does not correspond to the parent");
    for (std::size_t k = 0; k < parent.edges.size(); ++k) {
        const LatticeEdge& e = parent.edges[k];
        const DiskPoint mid = hyperbolic_midpoint(
            parent.vertices[static_cast<std::size_t>(e.i)].position,
            parent.vertices[static_cast<std::size_t>(e.j)].position);
        const DiskPoint& at = medial.vertices[k].position;
        const double dre = mid.re - at.re, dim = mid.im - at.im;
        if (dre * dre + dim * dim > 1e-18)
            throw std::invalid_argument(
                "construct_cls: medial vertex positions do not match parent edge midpoints");
    }

    std::unordered_map<std::uint64_t, int> parent_edge_index;
    parent_edge_index.reserve(parent.edges.size());
    for (std::size_t k = 0; k < parent.edges.size(); ++k)
        parent_edge_index[LatticeGraph::edge_key(parent.edges[k].i, parent.edges[k].j)] =
            static_cast<int>(k);

    const auto medial_adj = medial.adjacency_list();

    ClsSet set;
    for (std::size_t f = 0; f < parent.faces.size(); ++f) {
        const std::vector<int>& face = parent.faces[f];
        if (face.size() % 2 != 0)
            throw std::invalid_argument(
                "construct_cls: plaquette has odd length; alternating state is inconsistent");
        const double amp = 1.0 / std::sqrt(static_cast<double>(face.size()));
        CompactLocalizedState state;
        state.parent_face = static_cast<int>(f);
        for (std::size_t k = 0; k < face.size(); ++k) {
            const int a = face[k];
            const int b = face[(k + 1) % face.size()];
            const int mv =
                parent_edge_index.at(LatticeGraph::edge_key(std::min(a, b), std::max(a, b)));
            state.amplitudes.emplace_back(mv, (k % 2 == 0) ? amp : -amp);
        }

        // Verify A psi = -2 psi on the uniform medial adjacency.
        std::unordered_map<int, double> psi;
        for (const auto& [v, x] : state.amplitudes)
            psi[v] = x;
        for (const auto& [v, x] : psi) {
            (void)x;
            for (int w : medial_adj[static_cast<std::size_t>(v)]) {
                double acc = 0.0;
                for (int u : medial_adj[static_cast<std::size_t>(w)]) {
                    auto it = psi.find(u);
                    if (it != psi.end())
                        acc += it->second;
                }
                auto self = psi.find(w);
                const double target = (self != psi.end()) ? -2.0 * self->second : 0.0;
                if (std::abs(acc - target) > 1e-9)
                    throw numerical_error(
                        "construct_cls: constructed state violates the flat-band relation");
            }
        }
        set.states.push_back(std::move(state));
    }
    return set;
}

} // namespace hyperlat
