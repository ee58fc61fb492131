#pragma once

/// Geometry primitives on the Poincaré disk model of the hyperbolic plane.
///
/// Points live in the open unit disk of the complex plane.  Geodesics are
/// diameters or circular arcs meeting the unit circle at right angles;
/// reflections across geodesics are circle inversions (or Euclidean line
/// reflections for diameters) and are the isometries used to grow tilings.

#include <cmath>
#include <complex>
#include <stdexcept>

#include "hyperlat/common.hpp"

namespace hyperlat {

/// A point of the Poincaré disk, |z| < 1.
struct DiskPoint {
    double re = 0.0;
    double im = 0.0;

    friend bool operator==(const DiskPoint&, const DiskPoint&) = default;
};

inline std::complex<double> to_complex(const DiskPoint& p) { return {p.re, p.im}; }

inline DiskPoint to_point(const std::complex<double>& z) { return {z.real(), z.imag()}; }

/// Squared Euclidean norm from the disk centre.
inline double abs2(const DiskPoint& p) { return p.re * p.re + p.im * p.im; }

/// Throws std::domain_error unless `p` lies strictly inside the unit disk.
inline void require_in_disk(const DiskPoint& p, const char* what) {
    if (!(abs2(p) < 1.0))
        throw std::domain_error(std::string(what) + ": point lies outside the open unit disk");
}

/// Hyperbolic (geodesic) distance between two disk points:
/// arccosh(1 + 2|a-b|^2 / ((1-|a|^2)(1-|b|^2))).
inline double hyperbolic_distance(const DiskPoint& a, const DiskPoint& b) {
    require_in_disk(a, "hyperbolic_distance");
    require_in_disk(b, "hyperbolic_distance");
    const double dre = a.re - b.re;
    const double dim = a.im - b.im;
    const double num = 2.0 * (dre * dre + dim * dim);
    const double den = (1.0 - abs2(a)) * (1.0 - abs2(b));
    return std::acosh(1.0 + num / den);
}

/// A geodesic specified by two distinct points it passes through.
struct Geodesic {
    DiskPoint a;
    DiskPoint b;
};

/// Reflects `z` across the geodesic through `g.a` and `g.b`.
///
/// For a geodesic through the origin (a diameter) this is a Euclidean line
/// reflection.  Otherwise the geodesic lies on the unique circle orthogonal
/// to the unit circle through both points, with centre c solving
/// 2 Re(conj(c) a) = |a|^2 + 1 and 2 Re(conj(c) b) = |b|^2 + 1, and radius
/// r^2 = |c|^2 - 1; the reflection is inversion z -> c + r^2 / conj(z - c).
inline DiskPoint reflect(const Geodesic& g, const DiskPoint& z) {
    require_in_disk(g.a, "reflect");
    require_in_disk(g.b, "reflect");
    const std::complex<double> a = to_complex(g.a);
    const std::complex<double> b = to_complex(g.b);
    const std::complex<double> w = to_complex(z);

    const std::complex<double> chord = b - a;
    if (std::norm(chord) < 1e-28)
        throw std::invalid_argument("reflect: geodesic endpoints coincide");

    // a and b collinear with the origin => the geodesic is a diameter.
    const double cross = g.a.re * g.b.im - g.a.im * g.b.re;
    const double scale = std::abs(a) * std::abs(b);
    if (std::abs(cross) <= 1e-12 * std::max(scale, 1e-12)) {
        const std::complex<double> u = chord / std::abs(chord);
        return to_point(u * u * std::conj(w));
    }

    // Solve the 2x2 linear system for the orthogonal circle's centre.
    const double det = 4.0 * cross;
    const double rhs_a = abs2(g.a) + 1.0;
    const double rhs_b = abs2(g.b) + 1.0;
    const double cre = (2.0 * (g.b.im * rhs_a - g.a.im * rhs_b)) / det;
    const double cim = (2.0 * (g.a.re * rhs_b - g.b.re * rhs_a)) / det;
    const std::complex<double> c{cre, cim};
    const double r2 = std::norm(c) - 1.0;
    if (r2 <= 0.0)
        throw numerical_error("reflect: degenerate orthogonal circle");

    return to_point(c + r2 / std::conj(w - c));
}

/// Hyperbolic midpoint of the geodesic segment from `a` to `b`.
///
/// Computed by Möbius-translating `a` to the origin with
/// T(z) = (z - a) / (1 - conj(a) z), halving the radial distance there
/// (tanh(artanh(x)/2) = x / (1 + sqrt(1 - x^2))), and mapping back with
/// T^{-1}(w) = (w + a) / (1 + conj(a) w).
inline DiskPoint hyperbolic_midpoint(const DiskPoint& pa, const DiskPoint& pb) {
    require_in_disk(pa, "hyperbolic_midpoint");
    require_in_disk(pb, "hyperbolic_midpoint");
    const std::complex<double> a = to_complex(pa);
    const std::complex<double> b = to_complex(pb);
    const std::complex<double> bp = (b - a) / (1.0 - std::conj(a) * b);
    const double r = std::abs(bp);
    if (r == 0.0)
        return pa;
    const double half = r / (1.0 + std::sqrt(std::max(0.0, 1.0 - r * r)));
    const std::complex<double> mp = bp * (half / r);
    return to_point((mp + a) / (1.0 + std::conj(a) * mp));
}

} // namespace hyperlat
