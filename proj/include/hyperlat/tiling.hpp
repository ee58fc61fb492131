#pragma once

/// Regular {p,q} tilings of the hyperbolic plane, generated on the Poincaré
/// disk by reflecting faces across their edges.
///
/// Faces carry a generation label: the central polygon is generation 0 and a
/// face belongs to generation g when it shares at least one vertex with a
/// face of generation <= g-1 (vertex-adjacency rings).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "hyperlat/common.hpp"
#include "hyperlat/disk.hpp"

namespace hyperlat {

/// Schläfli symbol plus expansion depth.
struct TilingSpec {
    int p = 8;     ///< polygon side count
    int q = 3;     ///< polygons meeting at each vertex
    int depth = 1; ///< number of vertex-adjacency rings around the centre

    /// Throws std::invalid_argument unless {p,q} is hyperbolic and depth >= 0.
    void validate() const {
        if (p < 3 || q < 3)
            throw std::invalid_argument("TilingSpec: p and q must be at least 3");
        if ((p - 2) * (q - 2) <= 4)
            throw std::invalid_argument(
                "TilingSpec: {p,q} is not hyperbolic ((p-2)(q-2) must exceed 4)");
        if (depth < 0)
            throw std::invalid_argument("TilingSpec: depth must be non-negative");
    }
};

/// One polygonal face: vertex indices in cyclic order plus its ring label.
struct TilingFace {
    std::vector<int> vertices;
    int generation = 0;
};

/// A generated patch of a {p,q} tiling.
struct Tiling {
    TilingSpec spec;
    std::vector<DiskPoint> vertices;
    std::vector<TilingFace> faces;
};

/// Resource and tolerance knobs for the generator.
struct TilingOptions {
    std::size_t max_vertices = 250000; ///< hard cap; exceeded => capacity_error
    double merge_tolerance = 1e-6;     ///< hyperbolic distance below which vertices merge
};

/// Vertices of the central polygon: circumradius
/// r0 = sqrt(cos(pi/p + pi/q) / cos(pi/p - pi/q)) at angles (2k+1)·pi/p.
inline std::vector<DiskPoint> central_polygon_vertices(const TilingSpec& spec) {
    spec.validate();
    const double pi = std::numbers::pi;
    const double r0 = std::sqrt(std::cos(pi / spec.p + pi / spec.q) /
                                std::cos(pi / spec.p - pi / spec.q));
    std::vector<DiskPoint> verts;
    verts.reserve(static_cast<std::size_t>(spec.p));
    for (int k = 0; k < spec.p; ++k) {
        const double theta = pi * (2.0 * k + 1.0) / spec.p;
        verts.push_back({r0 * std::cos(theta), r0 * std::sin(theta)});
    }
    return verts;
}

namespace detail {

/// Deduplicating vertex store backed by a uniform spatial hash grid.
///
/// Candidate matches are gathered from the 3x3 cell neighbourhood with a
/// Euclidean prefilter, then confirmed with the hyperbolic metric.  Cell size
/// is far larger than the merge tolerance, so no true match can be missed.
class VertexPool {
public:
    explicit VertexPool(double tolerance) : tol_(tolerance) {}

    int find_or_insert(const DiskPoint& p) {
        const std::int64_t ix = cell_index(p.re);
        const std::int64_t iy = cell_index(p.im);
        for (std::int64_t dx = -1; dx <= 1; ++dx) {
            for (std::int64_t dy = -1; dy <= 1; ++dy) {
                auto it = grid_.find(key(ix + dx, iy + dy));
                if (it == grid_.end())
                    continue;
                for (int idx : it->second) {
                    const DiskPoint& q = points_[static_cast<std::size_t>(idx)];
                    const double dre = q.re - p.re;
                    const double dim = q.im - p.im;
                    if (dre * dre + dim * dim > cell_ * cell_)
                        continue;
                    if (hyperbolic_distance(p, q) < tol_)
                        return idx;
                }
            }
        }
        const int idx = static_cast<int>(points_.size());
        points_.push_back(p);
        grid_[key(ix, iy)].push_back(idx);
        return idx;
    }

    std::size_t size() const { return points_.size(); }
    const std::vector<DiskPoint>& points() const { return points_; }

private:
    std::int64_t cell_index(double v) const {
        return static_cast<std::int64_t>(std::floor(v / cell_));
    }
    static std::uint64_t key(std::int64_t ix, std::int64_t iy) {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(ix)) << 32) |
               static_cast<std::uint64_t>(static_cast<std::uint32_t>(iy));
    }

    double cell_ = 1e-3;
    double tol_;
    std::vector<DiskPoint> points_;
    std::unordered_map<std::uint64_t, std::vector<int>> grid_;
};

/// Canonical key of a cyclic vertex sequence: rotated to start at the
/// smallest index, direction chosen to make the sequence lexicographically
/// least.  Two copies of a face always share one key.
inline std::vector<int> canonical_cycle(const std::vector<int>& cycle) {
    const std::size_t n = cycle.size();
    const std::size_t start = static_cast<std::size_t>(
        std::min_element(cycle.begin(), cycle.end()) - cycle.begin());
    std::vector<int> fwd(n), rev(n);
    for (std::size_t k = 0; k < n; ++k) {
        fwd[k] = cycle[(start + k) % n];
        rev[k] = cycle[(start + n - k) % n];
    }
    return std::min(fwd, rev);
}

} // namespace detail

/// Generates the tiling patch within `spec.depth` vertex-adjacency rings of
/// the central polygon.
///
/// Ring g is grown to a fixed point by reflecting every known face across
/// each of its edges that touches an anchor vertex (a vertex of some face of
/// generation <= g-1).  Reflecting a face across one of its edges yields
/// exactly the neighbouring face, so this enumerates each ring completely
/// without wandering beyond it.
///
/// Throws capacity_error if the vertex budget is exhausted first.
inline Tiling generate_tiling(const TilingSpec& spec, const TilingOptions& options = {}) {
    spec.validate();
    if (options.merge_tolerance <= 0.0)
        throw std::invalid_argument("generate_tiling: merge tolerance must be positive");

    detail::VertexPool pool(options.merge_tolerance);
    std::vector<TilingFace> faces;
    std::map<std::vector<int>, int> face_keys;

    auto add_face = [&](const std::vector<int>& cycle, int generation) -> bool {
        auto [it, inserted] = face_keys.try_emplace(detail::canonical_cycle(cycle),
                                                    static_cast<int>(faces.size()));
        if (inserted)
            faces.push_back({cycle, generation});
        return inserted;
    };

    std::vector<int> central;
    for (const DiskPoint& v : central_polygon_vertices(spec))
        central.push_back(pool.find_or_insert(v));
    add_face(central, 0);

    for (int g = 1; g <= spec.depth; ++g) {
        // Vertices of all faces from previous rings anchor this ring.
        std::vector<char> anchor(pool.size(), 0);
        for (const TilingFace& f : faces)
            for (int v : f.vertices)
                anchor[static_cast<std::size_t>(v)] = 1;

        bool grew = true;
        while (grew) {
            grew = false;
            const std::size_t known = faces.size();
            for (std::size_t fi = 0; fi < known; ++fi) {
                const std::vector<int> cycle = faces[fi].vertices; // copy: faces may grow
                const std::size_t n = cycle.size();
                for (std::size_t e = 0; e < n; ++e) {
                    const int va = cycle[e];
                    const int vb = cycle[(e + 1) % n];
                    const bool anchored =
                        (static_cast<std::size_t>(va) < anchor.size() && anchor[va]) ||
                        (static_cast<std::size_t>(vb) < anchor.size() && anchor[vb]);
                    if (!anchored)
                        continue;
                    const Geodesic mirror{pool.points()[static_cast<std::size_t>(va)],
                                          pool.points()[static_cast<std::size_t>(vb)]};
                    std::vector<int> image;
                    image.reserve(n);
                    for (int v : cycle) {
                        const DiskPoint r =
                            reflect(mirror, pool.points()[static_cast<std::size_t>(v)]);
                        image.push_back(pool.find_or_insert(r));
                        if (pool.size() > options.max_vertices)
                            throw capacity_error(
                                "generate_tiling: vertex budget exceeded before reaching depth");
                    }
                    if (add_face(image, g))
                        grew = true;
                }
            }
        }
    }

    Tiling tiling;
    tiling.spec = spec;
    tiling.vertices = pool.points();
    tiling.faces = std::move(faces);
    return tiling;
}

} // namespace hyperlat
