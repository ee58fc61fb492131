#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "hyperlat/lattice.hpp"
#include "hyperlat/presets.hpp"
#include "hyperlat/spectrum.hpp"

using Catch::Approx;
using hyperlat::adjacency_energies;
using hyperlat::detect_gaps;
using hyperlat::group_degeneracies;
using hyperlat::LatticeGraph;
using hyperlat::Spectrum;

namespace {

bool symmetric_about_zero(const std::vector<double>& energies, double tol) {
    const std::size_t n = energies.size();
    for (std::size_t k = 0; k < n; ++k)
        if (std::abs(energies[k] + energies[n - 1 - k]) > tol)
            return false;
    return true;
}

int multiplicity_at(const std::vector<hyperlat::DegenerateGroup>& groups, double energy,
                    double tol = 1e-8) {
    for (const auto& g : groups)
        if (std::abs(g.energy - energy) <= tol)
            return g.multiplicity;
    return 0;
}

} // namespace

TEST_CASE("{8,3} flake spectrum") {
    const LatticeGraph flake = hyperlat::build_preset("paper-83").parent;
    const Spectrum spectrum = adjacency_energies(flake);
    REQUIRE(spectrum.size() == 48);
    REQUIRE_FALSE(spectrum.weighted);

    REQUIRE(std::is_sorted(spectrum.energies.begin(), spectrum.energies.end()));
    REQUIRE(spectrum.energies.front() == Approx(-2.6180339887498949).margin(1e-9));
    REQUIRE(spectrum.energies.back() == Approx(2.6180339887498949).margin(1e-9));
    REQUIRE(symmetric_about_zero(spectrum.energies, 1e-9)); // bipartite

    const auto groups = group_degeneracies(spectrum);
    REQUIRE(groups.size() == 28);
    int max_multiplicity = 0;
    int total = 0;
    for (const auto& g : groups) {
        max_multiplicity = std::max(max_multiplicity, g.multiplicity);
        total += g.multiplicity;
    }
    REQUIRE(max_multiplicity == 2);
    REQUIRE(total == 48);
}

TEST_CASE("{8,3} flake gap structure at threshold 0.25") {
    const Spectrum spectrum =
        adjacency_energies(hyperlat::build_preset("paper-83").parent);
    const hyperlat::GapList gaps = detect_gaps(spectrum, 0.25);
    // The raw consecutive-difference rule finds seven openings, mirror
    // symmetric, including a narrow one straddling zero.
    REQUIRE(gaps.gaps.size() == 7);
    REQUIRE(gaps.threshold == 0.25);

    std::vector<hyperlat::SpectralGap> widest(gaps.gaps.begin(), gaps.gaps.end());
    std::sort(widest.begin(), widest.end(),
              [](const auto& a, const auto& b) { return a.width() > b.width(); });
    // The two widest bracket -1 and +1.
    const auto& w0 = widest[0];
    const auto& w1 = widest[1];
    REQUIRE(w0.width() == Approx(0.58543112016743).margin(1e-9));
    REQUIRE(w1.width() == Approx(0.58543112016743).margin(1e-9));
    const bool w0_plus = w0.lower < 1.0 && 1.0 < w0.upper;
    const bool w0_minus = w0.lower < -1.0 && -1.0 < w0.upper;
    const bool w1_plus = w1.lower < 1.0 && 1.0 < w1.upper;
    const bool w1_minus = w1.lower < -1.0 && -1.0 < w1.upper;
    REQUIRE(((w0_plus && w1_minus) || (w0_minus && w1_plus)));

    // The extra opening relative to the six annotated ones is the central gap.
    const auto& central = gaps.gaps[3];
    REQUIRE(central.lower == Approx(-0.13761742438538174).margin(1e-9));
    REQUIRE(central.upper == Approx(0.13761742438538160).margin(1e-9));
}

TEST_CASE("{12,4} flake spectrum and degeneracy table") {
    const LatticeGraph flake = hyperlat::build_preset("paper-124").parent;
    const Spectrum spectrum = adjacency_energies(flake);
    REQUIRE(spectrum.size() == 56);
    REQUIRE(symmetric_about_zero(spectrum.energies, 1e-9));
    REQUIRE(spectrum.energies.front() == Approx(-2.4371709560794592).margin(1e-9));
    REQUIRE(spectrum.energies.back() == Approx(2.4371709560794592).margin(1e-9));

    const auto groups = group_degeneracies(spectrum);
    REQUIRE(groups.size() == 29);
    REQUIRE(multiplicity_at(groups, 0.0) == 6);
    REQUIRE(multiplicity_at(groups, 1.0) == 5);
    REQUIRE(multiplicity_at(groups, -1.0) == 5);
    REQUIRE(multiplicity_at(groups, std::sqrt(3.0)) == 4);
    REQUIRE(multiplicity_at(groups, -std::sqrt(3.0)) == 4);
    REQUIRE(multiplicity_at(groups, 2.2784136094964449) == 2);
    REQUIRE(multiplicity_at(groups, 1.8912198487102918) == 2);
    REQUIRE(multiplicity_at(groups, 1.3174306079809748) == 2);
    REQUIRE(multiplicity_at(groups, 0.70462436876712697) == 2);

    // sqrt(3) hit to 1e-9 on the eigenvalue itself.
    bool found_sqrt3 = false;
    for (double e : spectrum.energies)
        found_sqrt3 = found_sqrt3 || std::abs(e - std::numbers::sqrt3) < 1e-9;
    REQUIRE(found_sqrt3);

    const hyperlat::GapList gaps = detect_gaps(spectrum, 0.2);
    REQUIRE(gaps.gaps.size() == 10); // raw rule; figure annotates four
}

TEST_CASE("kagome-like {8,3} flat band") {
    const hyperlat::BuiltPreset preset = hyperlat::build_preset("paper-83-kagome");
    const Spectrum spectrum = adjacency_energies(*preset.medial);
    REQUIRE(spectrum.size() == 56);

    REQUIRE(spectrum.energies.front() == Approx(-2.0).margin(1e-9));
    REQUIRE(spectrum.energies.back() == Approx(3.5289179572943609).margin(1e-9));
    REQUIRE(spectrum.energies.back() < 4.0); // spectrum within [-2, 4)

    const auto groups = group_degeneracies(spectrum);
    REQUIRE(groups.front().energy == Approx(-2.0).margin(1e-9));
    REQUIRE(groups.front().multiplicity == 9);

    // First level above the flat band.
    REQUIRE(groups[1].energy == Approx(-1.9169982138256085).margin(1e-9));

    const hyperlat::DosHistogram hist = hyperlat::dos(spectrum, 0.03);
    REQUIRE(hist.counts.front() == 9); // bins anchored at E_min = -2
    REQUIRE(hist.fractions.front() == Approx(9.0 / 56.0).margin(1e-12));
    double total_fraction = 0.0;
    int total_count = 0;
    for (std::size_t k = 0; k < hist.counts.size(); ++k) {
        total_fraction += hist.fractions[k];
        total_count += hist.counts[k];
    }
    REQUIRE(total_count == 56);
    REQUIRE(total_fraction == Approx(1.0).margin(1e-12));
}

TEST_CASE("kagome-like {12,4} flat band") {
    const hyperlat::BuiltPreset preset = hyperlat::build_preset("paper-124-kagome");
    const Spectrum spectrum = adjacency_energies(*preset.medial);
    REQUIRE(spectrum.size() == 60);
    REQUIRE(spectrum.energies.front() == Approx(-2.0).margin(1e-9));
    REQUIRE(spectrum.energies.back() == Approx(3.4533302711825060).margin(1e-9));
    const auto groups = group_degeneracies(spectrum);
    REQUIRE(groups.front().multiplicity == 5);
}

TEST_CASE("weighted adjacency spectra") {
    const LatticeGraph flake = hyperlat::build_preset("paper-83").parent;
    const std::vector<double> unit(flake.edges.size(), 1.0);
    const Spectrum weighted = adjacency_energies(flake, unit);
    const Spectrum uniform = adjacency_energies(flake);
    REQUIRE(weighted.weighted);
    for (std::size_t k = 0; k < uniform.energies.size(); ++k)
        REQUIRE(weighted.energies[k] == Approx(uniform.energies[k]).margin(1e-12));

    std::vector<double> bad(flake.edges.size(), 1.0);
    bad[3] = 0.0;
    REQUIRE_THROWS_AS(adjacency_energies(flake, bad), std::invalid_argument);
    bad[3] = -1.0;
    REQUIRE_THROWS_AS(adjacency_energies(flake, bad), std::invalid_argument);
    REQUIRE_THROWS_AS(adjacency_energies(flake, std::vector<double>(3, 1.0)),
                      std::invalid_argument);
}

TEST_CASE("gap detection edge cases") {
    const Spectrum spectrum = adjacency_energies(hyperlat::build_preset("paper-83").parent);
    REQUIRE(detect_gaps(spectrum, 10.0).gaps.empty());
    REQUIRE_THROWS_AS(detect_gaps(spectrum, 0.0), std::invalid_argument);
    REQUIRE(detect_gaps(spectrum, 1e-6).gaps.size() > 7);
    for (const auto& gap : detect_gaps(spectrum, 0.25).gaps)
        REQUIRE(gap.width() > 0.25);
}

TEST_CASE("degeneracy grouping is a partition") {
    const Spectrum spectrum = adjacency_energies(hyperlat::build_preset("paper-124").parent);
    const auto groups = group_degeneracies(spectrum, 1e-8);
    int index = 0;
    for (const auto& g : groups) {
        REQUIRE(g.first_index == index);
        index += g.multiplicity;
    }
    REQUIRE(index == spectrum.size());
}

TEST_CASE("inverse participation ratios lie in [1/N, 1]") {
    const hyperlat::BuiltPreset preset = hyperlat::build_preset("paper-83-kagome");
    const Spectrum spectrum = adjacency_energies(*preset.medial);
    const std::vector<double> ipr = hyperlat::inverse_participation_ratios(spectrum);
    REQUIRE(ipr.size() == spectrum.energies.size());
    const double n = static_cast<double>(spectrum.size());
    for (double x : ipr) {
        REQUIRE(x >= 1.0 / n - 1e-12);
        REQUIRE(x <= 1.0 + 1e-12);
    }
}

TEST_CASE("compact localized states on the kagome-like {8,3} lattice") {
    const hyperlat::BuiltPreset preset = hyperlat::build_preset("paper-83-kagome");
    const LatticeGraph& parent = preset.parent;
    const LatticeGraph& medial = *preset.medial;
    const hyperlat::ClsSet cls = hyperlat::construct_cls(parent, medial);

    REQUIRE(cls.energy == Approx(-2.0).margin(1e-15));
    REQUIRE(cls.states.size() == 9); // one per parent plaquette

    const Eigen::MatrixXd a = hyperlat::adjacency_matrix(medial);
    const int n = medial.vertex_count();
    Eigen::MatrixXd basis(n, static_cast<int>(cls.states.size()));
    basis.setZero();
    for (std::size_t s = 0; s < cls.states.size(); ++s) {
        const auto& state = cls.states[s];
        REQUIRE(state.amplitudes.size() == 8); // one per plaquette boundary edge

        Eigen::VectorXd psi = Eigen::VectorXd::Zero(n);
        double ipr = 0.0;
        for (const auto& [site, amplitude] : state.amplitudes) {
            REQUIRE(std::abs(std::abs(amplitude) - 1.0 / std::sqrt(8.0)) < 1e-12);
            psi[site] = amplitude;
            ipr += amplitude * amplitude * amplitude * amplitude;
        }
        REQUIRE(psi.norm() == Approx(1.0).margin(1e-12));
        REQUIRE(ipr == Approx(1.0 / 8.0).margin(1e-12)); // maximal localization
        REQUIRE((a * psi + 2.0 * psi).lpNorm<Eigen::Infinity>() < 1e-9);
        basis.col(static_cast<int>(s)) = psi;
    }

    // The 9 states are linearly independent and span the numerical E = -2
    // eigenspace: compare orthogonal projectors.
    const Eigen::MatrixXd gram = basis.transpose() * basis;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> gram_es(gram);
    REQUIRE(gram_es.eigenvalues().minCoeff() > 1e-6); // full rank

    const Eigen::MatrixXd p_cls =
        basis * gram.ldlt().solve(basis.transpose());

    const Spectrum spectrum = adjacency_energies(medial);
    Eigen::MatrixXd flat(n, 9);
    int found = 0;
    for (int k = 0; k < n; ++k)
        if (std::abs(spectrum.energies[static_cast<std::size_t>(k)] + 2.0) < 1e-8)
            flat.col(found++) = spectrum.vectors.col(k);
    REQUIRE(found == 9);
    const Eigen::MatrixXd p_eig = flat * flat.transpose();
    REQUIRE((p_cls - p_eig).lpNorm<Eigen::Infinity>() < 1e-8);
}

TEST_CASE("CLS construction rejects invalid inputs") {
    const hyperlat::BuiltPreset preset = hyperlat::build_preset("paper-83-kagome");
    const LatticeGraph& parent = preset.parent;
    const LatticeGraph& medial = *preset.medial;

    REQUIRE_THROWS_AS(hyperlat::construct_cls(medial, medial), std::invalid_argument);
    REQUIRE_THROWS_AS(hyperlat::construct_cls(parent, parent), std::invalid_argument);

    // Odd plaquettes admit no alternating state.
    hyperlat::LatticeGraph triangle;
    triangle.kind = hyperlat::GraphKind::parent;
    for (int k = 0; k < 3; ++k) {
        const double angle = 2.0 * std::numbers::pi * k / 3.0;
        triangle.vertices.push_back({k, {0.3 * std::cos(angle), 0.3 * std::sin(angle)}});
    }
    auto edge_len = [&triangle](int i, int j) {
        const auto& a = triangle.vertices[static_cast<std::size_t>(i)].position;
        const auto& b = triangle.vertices[static_cast<std::size_t>(j)].position;
        return std::pair{std::hypot(a.re - b.re, a.im - b.im),
                         hyperlat::hyperbolic_distance(a, b)};
    };
    for (const auto& [i, j] : {std::pair{0, 1}, std::pair{0, 2}, std::pair{1, 2}}) {
        const auto [eu, hyp] = edge_len(i, j);
        triangle.edges.push_back({i, j, eu, hyp});
    }
    triangle.faces.push_back({0, 1, 2});
    const LatticeGraph tri_medial = hyperlat::medial_lattice(triangle);
    REQUIRE_THROWS_AS(hyperlat::construct_cls(triangle, tri_medial), std::invalid_argument);
}

TEST_CASE("dos input validation") {
    const Spectrum spectrum = adjacency_energies(hyperlat::build_preset("paper-83").parent);
    REQUIRE_THROWS_AS(hyperlat::dos(spectrum, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(hyperlat::dos(spectrum, -0.1), std::invalid_argument);
}
