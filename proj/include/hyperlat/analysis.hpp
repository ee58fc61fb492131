#pragma once

/// Post-processing of transmission traces: max-hold aggregation, prominence
/// peak picking, single-linkage peak clustering, the affine
/// eigenvalue-to-frequency map and the theory/measurement comparison report.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "hyperlat/common.hpp"
#include "hyperlat/spectrum.hpp"

namespace hyperlat {
namespace analysis {

/// A sampled magnitude trace, values in dB on a strictly increasing grid.
struct Trace {
    std::vector<double> frequency_hz;
    std::vector<double> value_db;

    std::size_t size() const { return frequency_hz.size(); }

    void validate() const {
        if (frequency_hz.empty() || frequency_hz.size() != value_db.size())
            throw std::invalid_argument("Trace: frequency and value arrays must match, non-empty");
        for (std::size_t k = 0; k < frequency_hz.size(); ++k) {
            if (!std::isfinite(frequency_hz[k]) || !std::isfinite(value_db[k]))
                throw std::invalid_argument("Trace: non-finite sample");
            if (k > 0 && !(frequency_hz[k] > frequency_hz[k - 1]))
                throw std::invalid_argument("Trace: frequency grid must be strictly increasing");
        }
    }
};

/// Pointwise maximum of traces sharing one frequency grid exactly.
inline Trace aggregate_max(std::span<const Trace> traces) {
    if (traces.empty())
        throw std::invalid_argument("aggregate_max: no traces");
    traces.front().validate();
    Trace out = traces.front();
    for (std::size_t t = 1; t < traces.size(); ++t) {
        traces[t].validate();
        if (traces[t].frequency_hz != out.frequency_hz)
            throw std::invalid_argument(
                "aggregate_max: traces are not on a common grid (resample explicitly first)");
        for (std::size_t k = 0; k < out.value_db.size(); ++k)
            out.value_db[k] = std::max(out.value_db[k], traces[t].value_db[k]);
    }
    return out;
}

/// Linear interpolation of a trace onto a new strictly increasing grid that
/// lies within the original span.  Resampling is always explicit.
inline Trace resample(const Trace& trace, std::span<const double> grid_hz) {
    trace.validate();
    if (grid_hz.empty())
        throw std::invalid_argument("resample: empty target grid");
    Trace out;
    out.frequency_hz.assign(grid_hz.begin(), grid_hz.end());
    out.value_db.reserve(grid_hz.size());
    for (std::size_t k = 0; k < grid_hz.size(); ++k) {
        const double f = grid_hz[k];
        if (k > 0 && !(f > grid_hz[k - 1]))
            throw std::invalid_argument("resample: target grid must be strictly increasing");
        if (f < trace.frequency_hz.front() || f > trace.frequency_hz.back())
            throw std::invalid_argument("resample: target grid leaves the trace span");
        const auto hi = std::lower_bound(trace.frequency_hz.begin(), trace.frequency_hz.end(), f);
        if (hi == trace.frequency_hz.begin()) {
            out.value_db.push_back(trace.value_db.front());
            continue;
        }
        const std::size_t j = static_cast<std::size_t>(hi - trace.frequency_hz.begin());
        if (j == trace.frequency_hz.size() || trace.frequency_hz[j] == f) {
            out.value_db.push_back(trace.value_db[std::min(j, trace.frequency_hz.size() - 1)]);
            continue;
        }
        const double f0 = trace.frequency_hz[j - 1], f1 = trace.frequency_hz[j];
        const double w = (f - f0) / (f1 - f0);
        out.value_db.push_back((1.0 - w) * trace.value_db[j - 1] + w * trace.value_db[j]);
    }
    return out;
}

struct Peak {
    int sample_index = 0;
    double frequency_hz = 0.0;
    double height_db = 0.0;
    double prominence_db = 0.0;
};

struct PeakSet {
    std::vector<Peak> peaks; ///< ascending in frequency
};

/// Prominence-based peak picking.
///
/// A local maximum's prominence is its height minus the higher of the two
/// interval minima reached before the trace next exceeds it on either side
/// (trace ends count as walls).  Peaks below `min_prominence_db` are
/// dropped; survivors closer than `min_separation_hz` are thinned
/// highest-first.  Plateau maxima are represented by their middle sample.
inline PeakSet find_peaks(const Trace& trace, double min_prominence_db,
                          double min_separation_hz) {
    trace.validate();
    if (!(min_prominence_db >= 0.0) || !(min_separation_hz >= 0.0))
        throw std::invalid_argument("find_peaks: thresholds must be non-negative");

    const std::vector<double>& v = trace.value_db;
    const std::size_t n = v.size();
    std::vector<Peak> candidates;

    std::size_t i = 1;
    while (n >= 3 && i + 1 < n) {
        if (v[i] > v[i - 1]) {
            std::size_t j = i; // plateau [i, j]
            while (j + 1 < n && v[j + 1] == v[i])
                ++j;
            if (j + 1 < n && v[j + 1] < v[i]) {
                const std::size_t mid = (i + j) / 2;

                // Walk left and right to the next strictly higher sample,
                // tracking the minimum along the way.
                double left_min = v[i];
                for (std::size_t k = i; k-- > 0;) {
                    if (v[k] > v[i])
                        break;
                    left_min = std::min(left_min, v[k]);
                }
                double right_min = v[j];
                for (std::size_t k = j + 1; k < n; ++k) {
                    if (v[k] > v[j])
                        break;
                    right_min = std::min(right_min, v[k]);
                }
                const double prominence = v[i] - std::max(left_min, right_min);
                candidates.push_back({static_cast<int>(mid), trace.frequency_hz[mid], v[i],
                                      prominence});
            }
            i = j + 1;
        } else {
            ++i;
        }
    }

    std::vector<Peak> kept;
    std::vector<Peak> by_height;
    for (const Peak& p : candidates)
        if (p.prominence_db >= min_prominence_db)
            by_height.push_back(p);
    std::stable_sort(by_height.begin(), by_height.end(), [](const Peak& a, const Peak& b) {
        if (a.height_db != b.height_db)
            return a.height_db > b.height_db;
        return a.frequency_hz < b.frequency_hz;
    });
    for (const Peak& p : by_height) {
        bool clear = true;
        for (const Peak& q : kept)
            if (std::abs(p.frequency_hz - q.frequency_hz) < min_separation_hz) {
                clear = false;
                break;
            }
        if (clear)
            kept.push_back(p);
    }
    std::sort(kept.begin(), kept.end(),
              [](const Peak& a, const Peak& b) { return a.frequency_hz < b.frequency_hz; });

    PeakSet set;
    set.peaks = std::move(kept);
    return set;
}

struct PeakCluster {
    std::vector<int> peak_indices; ///< indices into the PeakSet, ascending
    double lower_hz = 0.0;
    double upper_hz = 0.0;
    double center_hz = 0.0; ///< mean member frequency
    double max_height_db = 0.0;
};

struct Clustering {
    double height_threshold_db = 0.0;
    double separation_hz = 0.0;
    std::vector<PeakCluster> clusters;  ///< ascending in frequency
    std::vector<int> unclustered;       ///< peaks belonging to no cluster
};

/// Single-linkage clustering of peaks along the frequency axis.
///
/// A group of neighbouring peaks forms a cluster when (1) it has more than
/// one member, (2) its tallest member exceeds `height_threshold_db`, and
/// (3) it is separated from neighbouring groups by more than
/// `separation_hz` (enforced by cutting links at larger spacings).
inline Clustering cluster_peaks(const PeakSet& peaks, double height_threshold_db,
                                double separation_hz) {
    if (!(separation_hz > 0.0))
        throw std::invalid_argument("cluster_peaks: separation must be positive");

    Clustering out;
    out.height_threshold_db = height_threshold_db;
    out.separation_hz = separation_hz;

    const std::vector<Peak>& p = peaks.peaks;
    std::size_t start = 0;
    while (start < p.size()) {
        std::size_t stop = start + 1;
        while (stop < p.size() &&
               p[stop].frequency_hz - p[stop - 1].frequency_hz < separation_hz)
            ++stop;

        double max_height = -std::numeric_limits<double>::infinity();
        for (std::size_t k = start; k < stop; ++k)
            max_height = std::max(max_height, p[k].height_db);

        if (stop - start > 1 && max_height > height_threshold_db) {
            PeakCluster cluster;
            double sum = 0.0;
            for (std::size_t k = start; k < stop; ++k) {
                cluster.peak_indices.push_back(static_cast<int>(k));
                sum += p[k].frequency_hz;
            }
            cluster.lower_hz = p[start].frequency_hz;
            cluster.upper_hz = p[stop - 1].frequency_hz;
            cluster.center_hz = sum / static_cast<double>(stop - start);
            cluster.max_height_db = max_height;
            out.clusters.push_back(std::move(cluster));
        } else {
            for (std::size_t k = start; k < stop; ++k)
                out.unclustered.push_back(static_cast<int>(k));
        }
        start = stop;
    }
    return out;
}

/// Affine eigenvalue-to-frequency map anchored at two reference pairs:
/// f(lambda) = f1 + (lambda - lambda1) (f2 - f1) / (lambda2 - lambda1).
inline std::vector<double> map_eigenvalues(std::span<const double> energies, double lambda1,
                                           double lambda2, double f1_hz, double f2_hz) {
    if (!(std::abs(lambda2 - lambda1) > 1e-12))
        throw std::invalid_argument(
            "map_eigenvalues: degenerate anchors (anchor eigenvalues must be distinct)");
    if (!(f2_hz > f1_hz))
        throw std::invalid_argument("map_eigenvalues: anchor frequencies must satisfy f2 > f1");
    const double slope = (f2_hz - f1_hz) / (lambda2 - lambda1);
    std::vector<double> mapped;
    mapped.reserve(energies.size());
    for (double e : energies)
        mapped.push_back(f1_hz + (e - lambda1) * slope);
    return mapped;
}

/// Convenience form anchoring at the two lowest energies in the list.
inline std::vector<double> map_eigenvalues(std::span<const double> energies, double f1_hz,
                                           double f2_hz) {
    if (energies.size() < 2)
        throw std::invalid_argument("map_eigenvalues: need at least two energies");
    return map_eigenvalues(energies, energies[0], energies[1], f1_hz, f2_hz);
}

/// First two distinct values of an ascending energy list — the anchor pair
/// used when the lowest level is degenerate (a degenerate level produces a
/// single resonance, so it pairs with a single measured peak).
inline std::pair<double, double> anchor_energies(std::span<const double> energies,
                                                 double tolerance = 1e-8) {
    if (energies.empty())
        throw std::invalid_argument("anchor_energies: empty energy list");
    for (std::size_t k = 1; k < energies.size(); ++k)
        if (energies[k] - energies.front() > tolerance)
            return {energies.front(), energies[k]};
    throw std::invalid_argument("anchor_energies: all energies coincide");
}

struct EigenvalueMatch {
    int index = 0;            ///< position in the input energy list
    double energy = 0.0;
    double mapped_hz = 0.0;
    int peak_index = -1;      ///< nearest peak within the window, or -1
    double residual_hz = 0.0; ///< |mapped - peak| when matched
    int cluster_index = -1;   ///< cluster whose span contains the mapping, or -1
};

struct GapAlignment {
    double theory_lower_hz = 0.0;
    double theory_upper_hz = 0.0;
    double trace_lower_hz = 0.0; ///< enclosing inter-cluster void (0 when absent)
    double trace_upper_hz = 0.0;
    bool aligned = false;
};

struct MappingReport {
    double lambda1 = 0.0, lambda2 = 0.0;
    double f1_hz = 0.0, f2_hz = 0.0;
    double match_window_hz = 0.0;
    std::vector<double> mapped_hz;
    std::vector<EigenvalueMatch> matches;
    std::vector<int> unmatched;          ///< eigenvalue indices with no peak in window
    std::vector<GapAlignment> gap_alignment;
};

/// Matches mapped eigenvalues against detected peaks and clusters, and
/// aligns theory gaps with the voids between consecutive clusters.
inline MappingReport compare(std::span<const double> energies, double lambda1, double lambda2,
                             double f1_hz, double f2_hz, const PeakSet& peaks,
                             const Clustering& clusters, const GapList& theory_gaps,
                             double match_window_hz) {
    if (!(match_window_hz > 0.0))
        throw std::invalid_argument("compare: match window must be positive");

    MappingReport report;
    report.lambda1 = lambda1;
    report.lambda2 = lambda2;
    report.f1_hz = f1_hz;
    report.f2_hz = f2_hz;
    report.match_window_hz = match_window_hz;
    report.mapped_hz = map_eigenvalues(energies, lambda1, lambda2, f1_hz, f2_hz);

    for (std::size_t k = 0; k < report.mapped_hz.size(); ++k) {
        EigenvalueMatch match;
        match.index = static_cast<int>(k);
        match.energy = energies[k];
        match.mapped_hz = report.mapped_hz[k];

        double best = std::numeric_limits<double>::infinity();
        for (std::size_t pi = 0; pi < peaks.peaks.size(); ++pi) {
            const double d = std::abs(peaks.peaks[pi].frequency_hz - match.mapped_hz);
            if (d < best) {
                best = d;
                match.peak_index = static_cast<int>(pi);
            }
        }
        if (match.peak_index >= 0 && best <= match_window_hz) {
            match.residual_hz = best;
        } else {
            match.peak_index = -1;
            match.residual_hz = std::numeric_limits<double>::quiet_NaN();
            report.unmatched.push_back(match.index);
        }
        for (std::size_t ci = 0; ci < clusters.clusters.size(); ++ci)
            if (match.mapped_hz >= clusters.clusters[ci].lower_hz &&
                match.mapped_hz <= clusters.clusters[ci].upper_hz) {
                match.cluster_index = static_cast<int>(ci);
                break;
            }
        report.matches.push_back(match);
    }

    const double slope = (f2_hz - f1_hz) / (lambda2 - lambda1);
    for (const SpectralGap& gap : theory_gaps.gaps) {
        GapAlignment align;
        align.theory_lower_hz = f1_hz + (gap.lower - lambda1) * slope;
        align.theory_upper_hz = f1_hz + (gap.upper - lambda1) * slope;
        for (std::size_t ci = 0; ci + 1 < clusters.clusters.size(); ++ci) {
            const double lo = clusters.clusters[ci].upper_hz;
            const double hi = clusters.clusters[ci + 1].lower_hz;
            if (align.theory_lower_hz < hi && align.theory_upper_hz > lo) {
                align.trace_lower_hz = lo;
                align.trace_upper_hz = hi;
                align.aligned = true;
                break;
            }
        }
        report.gap_alignment.push_back(align);
    }
    return report;
}

} // namespace analysis
} // namespace hyperlat
