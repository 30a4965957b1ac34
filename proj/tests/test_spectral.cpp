// Copyright 2026 The Hyperscar Authors
// SPDX-License-Identifier: Apache-2.0

#include "hyperscar/errors.hpp"
#include "hyperscar/lattice.hpp"
#include "hyperscar/spectral.hpp"
#include "hyperscar/symmetry.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

using namespace hyperscar;

namespace {

FockState occ(std::vector<int> z) { return FockState::from_occupations(z); }

std::vector<double> ascending(const Eigen::VectorXd& v) {
    std::vector<double> out(v.data(), v.data() + v.size());
    std::sort(out.begin(), out.end());
    return out;
}

// Reduced density matrix by explicit partial trace over B, computed from the
// full state without any block structure.
double brute_entropy(const Eigen::VectorXd& psi, const BasisSector& sec, const std::vector<int>& cut) {
    Bits mask_a = 0;
    for (int s : cut) mask_a |= Bits{1} << s;
    std::vector<Bits> a_patterns;
    for (std::size_t r = 0; r < sec.size(); ++r) a_patterns.push_back(sec.state(r) & mask_a);
    std::sort(a_patterns.begin(), a_patterns.end());
    a_patterns.erase(std::unique(a_patterns.begin(), a_patterns.end()), a_patterns.end());
    const auto na = static_cast<Eigen::Index>(a_patterns.size());
    Eigen::MatrixXd rho = Eigen::MatrixXd::Zero(na, na);
    auto idx = [&](Bits a) {
        return static_cast<Eigen::Index>(std::lower_bound(a_patterns.begin(), a_patterns.end(), a) - a_patterns.begin());
    };
    for (std::size_t r = 0; r < sec.size(); ++r)
        for (std::size_t q = 0; q < sec.size(); ++q) {
            const Bits sr = sec.state(r);
            const Bits sq = sec.state(q);
            if ((sr & ~mask_a) != (sq & ~mask_a)) continue;
            rho(idx(sr & mask_a), idx(sq & mask_a)) +=
                psi[static_cast<Eigen::Index>(r)] * psi[static_cast<Eigen::Index>(q)];
        }
    const Eigen::VectorXd p = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(rho).eigenvalues();
    double s = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i)
        if (p[i] > 1e-15) s -= p[i] * std::log(p[i]);
    return s;
}

}  // namespace

TEST_CASE("single dimer spectrum and overlaps") {
    const BasisSector sec(2, 1);
    const EigenSystem es = diagonalize(SparseHamiltonian(2, {0, 1, 2}, {1, 0}, {1.3, 1.3}));
    REQUIRE(es.size() == 2);
    CHECK(es.energies[0] == doctest::Approx(-1.3));
    CHECK(es.energies[1] == doctest::Approx(1.3));
    const auto w = overlaps(occ({1, 0}), sec, es);
    CHECK(w[0].weight == doctest::Approx(0.5));
    CHECK(w[1].weight == doctest::Approx(0.5));
    CHECK(w[0].energy == doctest::Approx(-1.3));
    const Eigen::VectorXd v = es.vectors.col(0);
    CHECK(eigenstate_entropy({v.data(), 2}, std::vector<int>{0}, sec) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("decoupled two-dimer spectrum") {
    const LatticeSpec spec = build_ssh_chain(2, 1.0, 0.0, 0.0, Boundary::open);
    const BasisSector sec(4, 2);
    const EigenSystem es = diagonalize(assemble_hamiltonian(spec, sec));
    const std::vector<double> expected{-2, 0, 0, 0, 0, 2};
    for (int k = 0; k < 6; ++k) CHECK(es.energies[k] == doctest::Approx(expected[static_cast<std::size_t>(k)]).epsilon(1e-12));
}

TEST_CASE("diagonal input returns the diagonal and unit vectors") {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(4, 4);
    d.diagonal() << 3.0, -1.0, 2.0, 0.5;
    const EigenSystem es = diagonalize_dense(d);
    CHECK(es.energies[0] == -1.0);
    CHECK(es.energies[3] == 3.0);
    CHECK(std::abs(es.vectors(1, 0)) == doctest::Approx(1.0));
    CHECK(std::abs(es.vectors(0, 3)) == doctest::Approx(1.0));
    const EigenSystem ev = diagonalize_dense(d, false);
    CHECK_FALSE(ev.has_vectors());
}

TEST_CASE("capacity error above the dense cap") {
    const LatticeSpec spec = build_ssh_chain(5, 1.0, 0.5, 0.0, Boundary::open);
    const BasisSector sec(10, 5);
    CHECK_THROWS_AS((void)diagonalize(assemble_hamiltonian(spec, sec), {100, true}), CapacityError);
}

TEST_CASE("property: orthonormality, residuals and completeness") {
    std::mt19937_64 rng(99);
    const std::vector<LatticeSpec> specs{build_ssh_chain(5, 1.0, 0.6, 0.1, Boundary::open), build_comb(5, 1.5, 0.8),
                                         build_tetramer_grid(2, 1, 1.0, 0.4),
                                         build_random_cluster(5, 1.0, 0.7, 11)};
    for (const LatticeSpec& spec : specs) {
        const BasisSector sec(spec.sites, spec.half_filling());
        const SparseHamiltonian h = assemble_hamiltonian(spec, sec);
        const EigenSystem es = diagonalize(h);
        const auto n = static_cast<Eigen::Index>(es.size());
        CHECK((es.vectors.transpose() * es.vectors - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-8);
        const Eigen::MatrixXd hd = h.to_dense();
        const double res = (hd * es.vectors - es.vectors * es.energies.asDiagonal()).colwise().norm().maxCoeff();
        CHECK(res <= 1e-8 * h.norm_bound());
        for (int t = 0; t < 100; ++t) {
            const std::size_t r = std::uniform_int_distribution<std::size_t>(0, sec.size() - 1)(rng);
            double sum = 0.0;
            for (const auto& p : overlaps(r, es)) sum += p.weight;
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
        }
    }
}

TEST_CASE("particle-hole pairing of the half-filled spectrum") {
    const std::vector<LatticeSpec> specs{build_ssh_chain(5, 1.0, 0.6, 0.2, Boundary::open),
                                         build_ssh_chain(4, 1.0, 0.6, 0.2, Boundary::periodic), build_comb(6, 1.5, 0.8),
                                         build_tetramer_grid(2, 1, 1.0, 0.4)};
    for (const LatticeSpec& spec : specs) {
        const BasisSector sec(spec.sites, spec.half_filling());
        const std::vector<double> e = ascending(diagonalize(assemble_hamiltonian(spec, sec), {20000, false}).energies);
        for (std::size_t k = 0; k < e.size(); ++k) CHECK(std::abs(e[k] + e[e.size() - 1 - k]) < 1e-9);
    }
}

TEST_CASE("symmetry-resolved diagonalization matches the dense spectrum") {
    const std::vector<LatticeSpec> specs{build_ssh_chain(5, 1.0, 0.6, 0.2, Boundary::open), build_comb(5, 1.5, 0.8),
                                         build_tetramer_grid(2, 1, 1.0, 0.4)};
    for (const LatticeSpec& spec : specs) {
        const BasisSector sec(spec.sites, spec.half_filling());
        const SparseHamiltonian h = assemble_hamiltonian(spec, sec);
        const SymmetryGroup g = SymmetryGroup::detect(spec, spec.half_filling());
        CHECK(g.generator_count() >= 1);
        const EigenSystem full = diagonalize(h);
        const EigenSystem res = diagonalize_resolved(h, sec, g);
        REQUIRE(res.size() == full.size());
        for (Eigen::Index k = 0; k < full.energies.size(); ++k)
            CHECK(res.energies[k] == doctest::Approx(full.energies[k]).epsilon(1e-10));
        const Eigen::MatrixXd hd = h.to_dense();
        CHECK((hd * res.vectors - res.vectors * res.energies.asDiagonal()).cwiseAbs().maxCoeff() < 1e-9);
        for (int s : res.sector) CHECK((s >= 0 && static_cast<std::size_t>(s) < g.sector_count()));

        // Streaming observables agree with the stored eigenvectors.
        const std::size_t probe = sec.size() / 3;
        const std::vector<int> cut = half_cut(spec);
        const Bipartition bp(sec, cut);
        const auto rec = eigen_observables(h, sec, g, probe, &bp);
        REQUIRE(rec.size() == res.size());
        double total = 0.0;
        for (std::size_t k = 0; k < rec.size(); ++k) {
            const auto kk = static_cast<Eigen::Index>(k);
            CHECK(rec[k].energy == doctest::Approx(res.energies[kk]).epsilon(1e-10));
            total += rec[k].overlap;
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
        for (std::size_t k = 0; k < rec.size(); k += 17) {
            const auto kk = static_cast<Eigen::Index>(k);
            const Eigen::VectorXd v = res.vectors.col(kk);
            // Degenerate levels may mix across sectors; compare nondegenerate ones only.
            const bool isolated = (k == 0 || res.energies[kk] - res.energies[kk - 1] > 1e-8) &&
                                  (k + 1 == rec.size() || res.energies[kk + 1] - res.energies[kk] > 1e-8);
            if (!isolated) continue;
            CHECK(rec[k].overlap == doctest::Approx(v[static_cast<Eigen::Index>(probe)] * v[static_cast<Eigen::Index>(probe)]).epsilon(1e-9));
            CHECK(rec[k].entropy == doctest::Approx(brute_entropy(v, sec, cut)).epsilon(1e-8));
        }
    }
}

TEST_CASE("energy window eigenpairs of one block") {
    const LatticeSpec spec = build_ssh_chain(5, 1.0, 0.6, 0.2, Boundary::open);
    const BasisSector sec(10, 5);
    const SparseHamiltonian h = assemble_hamiltonian(spec, sec);
    const SymmetryGroup g = SymmetryGroup::detect(spec, 5);
    const EigenSystem res = diagonalize_resolved(h, sec, g);
    const std::size_t block = 1;
    const EigenSystem win = diagonalize_window(h, sec, g, block, -1.0, 0.5);
    std::vector<double> expected;
    for (std::size_t k = 0; k < res.size(); ++k) {
        const double e = res.energies[static_cast<Eigen::Index>(k)];
        if (res.sector[k] == static_cast<int>(block) && e > -1.0 && e <= 0.5) expected.push_back(e);
    }
    REQUIRE(win.size() == expected.size());
    const Eigen::MatrixXd hd = h.to_dense();
    for (std::size_t k = 0; k < expected.size(); ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        CHECK(win.energies[kk] == doctest::Approx(expected[k]).epsilon(1e-10));
        CHECK((hd * win.vectors.col(kk) - win.energies[kk] * win.vectors.col(kk)).norm() < 1e-8);
        CHECK(win.vectors.col(kk).norm() == doctest::Approx(1.0));
    }
    CHECK_THROWS_AS((void)diagonalize_window(h, sec, g, block, 1.0, 0.0), ContractError);
}

TEST_CASE("entropy examples and properties") {
    const BasisSector sec(8, 4);
    std::vector<double> basis(sec.size(), 0.0);
    basis[7] = 1.0;
    CHECK(eigenstate_entropy(basis, std::vector<int>{0, 1, 2, 3}, sec) == doctest::Approx(0.0));

    std::mt19937_64 rng(5);
    std::normal_distribution<double> gauss;
    const std::vector<int> a{0, 2, 5};
    const std::vector<int> b{1, 3, 4, 6, 7};
    for (int t = 0; t < 20; ++t) {
        Eigen::VectorXd psi(static_cast<Eigen::Index>(sec.size()));
        for (Eigen::Index i = 0; i < psi.size(); ++i) psi[i] = gauss(rng);
        psi.normalize();
        const std::span<const double> view(psi.data(), static_cast<std::size_t>(psi.size()));
        const double sa = eigenstate_entropy(view, a, sec);
        const double sb = eigenstate_entropy(view, b, sec);
        CHECK(std::abs(sa - sb) < 1e-9);
        CHECK(sa >= 0.0);
        CHECK(sa <= 3.0 * std::log(2.0) + 1e-12);
        CHECK(sa == doctest::Approx(brute_entropy(psi, sec, a)).epsilon(1e-9));
    }

    Bipartition bp(sec, a);
    std::vector<std::complex<double>> z(sec.size());
    for (auto& c : z) c = {gauss(rng), gauss(rng)};
    double nrm = 0.0;
    for (const auto& c : z) nrm += std::norm(c);
    for (auto& c : z) c /= std::sqrt(nrm);
    const double s = bp.entropy(std::span<const std::complex<double>>(z));
    CHECK(s > 0.0);
    CHECK(s <= 3.0 * std::log(2.0) + 1e-12);
    CHECK_THROWS_AS(Bipartition(sec, std::vector<int>{}), ContractError);
    CHECK_THROWS_AS(Bipartition(sec, std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7}), ContractError);
}

TEST_CASE("gap ratio of Poisson and GOE surrogates") {
    std::mt19937_64 rng(2024);
    std::exponential_distribution<double> expo(1.0);
    std::vector<double> levels(1000001);
    levels[0] = 0.0;
    for (std::size_t k = 1; k < levels.size(); ++k) levels[k] = levels[k - 1] + expo(rng);
    const GapRatioStats poisson = mean_gap_ratio(levels);
    const double poisson_oracle = 2.0 * std::log(2.0) - 1.0;
    CHECK(std::abs(poisson.mean - poisson_oracle) < 0.01);

    std::normal_distribution<double> gauss;
    Eigen::MatrixXd m(2000, 2000);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = gauss(rng);
    const Eigen::MatrixXd sym = (m + m.transpose()) / 2.0;
    const EigenSystem es = diagonalize_dense(sym, false);
    const std::vector<double> e = ascending(es.energies);
    const GapRatioStats goe = mean_gap_ratio(e);
    CHECK(std::abs(goe.mean - 0.5307) < 0.01);
    CHECK_FALSE(goe.low_statistics);

    const std::vector<double> few{0.0, 1.0, 3.0, 3.5};
    const GapRatioStats small = mean_gap_ratio(few);
    CHECK(small.low_statistics);
    CHECK_FALSE(small.warning.empty());
}

TEST_CASE("resolved gap ratio is not below the unresolved one") {
    const LatticeSpec spec = build_ssh_chain(6, 1.0, 0.6, 0.3, Boundary::open);
    const BasisSector sec(12, 6);
    const SparseHamiltonian h = assemble_hamiltonian(spec, sec);
    const SymmetryGroup g = SymmetryGroup::detect(spec, 6);
    const EigenSystem res = diagonalize_resolved(h, sec, g);
    const GapRatioStats resolved = level_spacing_ratio(res, true, g, sec);
    const GapRatioStats mixed = level_spacing_ratio(res, false, g, sec);
    CHECK(resolved.mean >= mixed.mean);
    CHECK(resolved.per_sector.size() == g.sector_count());

    // Binning by expectation values gives the same statistics as exact labels.
    EigenSystem unlabeled = diagonalize(h);
    const GapRatioStats binned = level_spacing_ratio(unlabeled, true, g, sec);
    CHECK(binned.mean == doctest::Approx(resolved.mean).epsilon(0.05));
}

TEST_CASE("towers of the decoupled chain sit at integer multiples of J0") {
    const double j0 = 1.2;
    const LatticeSpec spec = build_ssh_chain(4, j0, 0.0, 0.0, Boundary::open);
    const BasisSector sec(8, 4);
    const EigenSystem es = diagonalize(assemble_hamiltonian(spec, sec));
    const auto pts = overlaps(collective_state(spec, "C"), sec, es);
    const auto towers = extract_towers(pts, {1e-3, j0 / 2});
    REQUIRE(towers.size() == 5);
    for (std::size_t k = 0; k < towers.size(); ++k)
        CHECK(towers[k].center == doctest::Approx(j0 * (2.0 * static_cast<double>(k) - 4.0)).epsilon(1e-9));
    CHECK(tower_spacing(towers) == doctest::Approx(2.0 * j0));
    const auto near = towers_near(towers, 0.1, 3);
    REQUIRE(near.size() == 3);
    CHECK(near[0].center == doctest::Approx(-2.0 * j0));
    CHECK(near[2].center == doctest::Approx(2.0 * j0));

    const std::vector<OverlapPoint> two{{-1.0, 0.5}, {1.0, 0.5}};
    CHECK_THROWS_AS((void)extract_towers(two), FitError);
}

TEST_CASE("comb towers are wider than the decoupled spacing") {
    const LatticeSpec spec = build_comb(6, 1.5, 1.0);
    const BasisSector sec(12, 6);
    const EigenSystem es = diagonalize(assemble_hamiltonian(spec, sec));
    const auto towers = extract_towers(overlaps(collective_state(spec, "C"), sec, es), {1e-3, 0.75});
    CHECK(towers.size() >= 3);
    CHECK(tower_spacing(towers_near(towers, 0.0, 5)) / 1.5 > 2.0);

    TowerOptions all{1e-3, 0.75, 0.0};
    CHECK(extract_towers(overlaps(collective_state(spec, "C"), sec, es), all).size() > towers.size());
}

TEST_CASE("lambda fit") {
    std::vector<std::pair<double, double>> s;
    for (double x : {0.0, 0.3, 0.6, 0.9, 1.2}) s.emplace_back(x, 3.0 * x * x + 2.0);
    const TowerFit fit = fit_lambda(s);
    CHECK(fit.lambda == doctest::Approx(3.0));
    CHECK(fit.residual == doctest::Approx(0.0));
    CHECK(fit.samples == 5);
    CHECK(fit.predict(0.0) == 2.0);

    const std::vector<std::pair<double, double>> zeros{{0, 2}, {0, 2}, {0, 2}, {0, 2}};
    CHECK_THROWS_AS((void)fit_lambda(zeros), FitError);
    const std::vector<std::pair<double, double>> few{{0.1, 2}, {0.2, 2}, {0.3, 2}};
    CHECK_THROWS_AS((void)fit_lambda(few), FitError);
    const std::vector<std::pair<double, double>> wide{{0.1, 2}, {0.2, 2}, {0.3, 2}, {1.5, 2}};
    CHECK_THROWS_AS((void)fit_lambda(wide), ContractError);
}
