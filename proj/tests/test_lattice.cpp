// Copyright 2026 The Hyperscar Authors
// SPDX-License-Identifier: Apache-2.0

#include "hyperscar/errors.hpp"
#include "hyperscar/lattice.hpp"
#include "hyperscar/spectral.hpp"
#include "hyperscar/subspace.hpp"

#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

using namespace hyperscar;

namespace {

using Bond = std::tuple<int, int, EdgeClass>;

std::map<Bond, double> bonds(const LatticeSpec& spec) {
    std::map<Bond, double> out;
    for (const Edge& e : spec.edges) out[{std::min(e.u, e.v), std::max(e.u, e.v), e.kind}] += e.amplitude;
    return out;
}

int count_class(const LatticeSpec& spec, EdgeClass c) {
    return static_cast<int>(std::count_if(spec.edges.begin(), spec.edges.end(), [c](const Edge& e) { return e.kind == c; }));
}

// a_alpha and b_alpha for 1-based alpha.
int a(int alpha) { return 2 * (alpha - 1); }
int b(int alpha) { return 2 * (alpha - 1) + 1; }

LatticeSpec single_dimer(double j0) {
    LatticeSpec s;
    s.sites = 2;
    s.units = {{0, 1}};
    s.edges = {{0, 1, j0, EdgeClass::intra}};
    s.onsite = {0.0, 0.0};
    s.site_labels = {"a1", "b1"};
    return s;
}

}  // namespace

TEST_CASE("SSH N=2 open chain edges") {
    const LatticeSpec s = build_ssh_chain(2, 1.6, 1.0, -0.3, Boundary::open);
    const std::map<Bond, double> expected{{{a(1), b(1), EdgeClass::intra}, 1.6},
                                          {{a(2), b(2), EdgeClass::intra}, 1.6},
                                          {{b(1), a(2), EdgeClass::inter}, 1.0},
                                          {{a(1), b(2), EdgeClass::long_range}, -0.3}};
    CHECK(bonds(s) == expected);
    CHECK(count_class(build_ssh_chain(4, 1.6, 1.0, 0.0, Boundary::open), EdgeClass::long_range) == 0);
}

TEST_CASE("SSH N=3 periodic wraps every class") {
    const double j3 = 0.25;
    const LatticeSpec s = build_ssh_chain(3, 1.0, 0.5, j3, Boundary::periodic);
    // Cyclic rule, term by term: inter (b1,a2),(b2,a3),(b3,a1); long-range
    // (a1,b2),(a2,b3),(a3,b1),(b1,a3),(b2,a1),(b3,a2).
    std::map<Bond, double> expected;
    auto add = [&](int u, int v, EdgeClass c, double w) { expected[{std::min(u, v), std::max(u, v), c}] += w; };
    for (int al = 1; al <= 3; ++al) add(a(al), b(al), EdgeClass::intra, 1.0);
    add(b(1), a(2), EdgeClass::inter, 0.5);
    add(b(2), a(3), EdgeClass::inter, 0.5);
    add(b(3), a(1), EdgeClass::inter, 0.5);
    add(a(1), b(2), EdgeClass::long_range, j3);
    add(a(2), b(3), EdgeClass::long_range, j3);
    add(a(3), b(1), EdgeClass::long_range, j3);
    add(b(1), a(3), EdgeClass::long_range, j3);
    add(b(2), a(1), EdgeClass::long_range, j3);
    add(b(3), a(2), EdgeClass::long_range, j3);
    CHECK(bonds(s) == expected);
    CHECK_THROWS_AS((void)build_ssh_chain(2, 1, 1, 0, Boundary::periodic), GeometryError);
    CHECK_THROWS_AS((void)build_ssh_chain(1, 1, 1, 0, Boundary::open), GeometryError);
}

TEST_CASE("comb edges") {
    const LatticeSpec s = build_comb(2, 1.5, 0.8);
    const std::map<Bond, double> expected{{{a(1), b(1), EdgeClass::intra}, 1.5},
                                          {{a(2), b(2), EdgeClass::intra}, 1.5},
                                          {{a(1), a(2), EdgeClass::inter}, 0.8}};
    CHECK(bonds(s) == expected);
    const LatticeSpec s8 = build_comb(8, 1.5, 0.8);
    CHECK(count_class(s8, EdgeClass::intra) == 8);
    CHECK(count_class(s8, EdgeClass::inter) == 7);
    CHECK_THROWS_AS((void)build_comb(1, 1, 1), GeometryError);
}

TEST_CASE("tetramer and octamer grid edge counts") {
    const LatticeSpec t1 = build_tetramer_grid(1, 1, 2.5, 1.0);
    CHECK(t1.sites == 4);
    CHECK(count_class(t1, EdgeClass::intra) == 4);
    CHECK(count_class(t1, EdgeClass::inter) == 0);
    const LatticeSpec t2 = build_tetramer_grid(2, 2, 2.5, 1.0);
    CHECK(t2.sites == 16);
    CHECK(count_class(t2, EdgeClass::intra) == 16);
    CHECK(count_class(t2, EdgeClass::inter) == 8);
    // TL=0, TR=1, BL=2, BR=3: the 4-cycle has no diagonals.
    const auto tb = bonds(t1);
    CHECK_FALSE(tb.contains({0, 3, EdgeClass::intra}));
    CHECK_FALSE(tb.contains({1, 2, EdgeClass::intra}));
    CHECK_THROWS_AS((void)build_tetramer_grid(0, 1, 1, 1), GeometryError);

    const LatticeSpec o1 = build_octamer_grid(1, 1, 1, 1, 1);
    CHECK(o1.sites == 8);
    CHECK(count_class(o1, EdgeClass::intra) == 12);
    CHECK(count_class(o1, EdgeClass::inter) == 0);
    CHECK(count_class(build_octamer_grid(2, 1, 1, 1, 1), EdgeClass::inter) == 4);
    const LatticeSpec o8 = build_octamer_grid(2, 2, 2, 1, 1);
    CHECK(count_class(o8, EdgeClass::inter) == 4 * (3 * 8 - 4 - 4 - 4));
    CHECK(count_class(o8, EdgeClass::intra) == 96);
    CHECK_THROWS_AS((void)build_octamer_grid(1, 0, 1, 1, 1), GeometryError);
}

TEST_CASE("collective states") {
    const auto ssh = collective_states(build_ssh_chain(2, 1.6, 1.0, 0.0, Boundary::open));
    CHECK(ssh.at("C").to_string() == "1001");
    CHECK(ssh.at("C'").to_string() == "0110");

    const auto comb = collective_states(build_comb(4, 1.5, 0.8));
    CHECK(comb.at("C").to_string() == "01010101");
    CHECK(comb.at("C'").to_string() == "10101010");

    const auto t = collective_states(build_tetramer_grid(1, 1, 2.5, 1.0));
    CHECK(t.at("C_x").bits == 0b1001);
    CHECK(t.at("C_x'").bits == 0b0110);

    const LatticeSpec grid = build_tetramer_grid(2, 2, 2.5, 1.0);
    const auto g = collective_states(grid);
    for (const char* label : {"C_par", "C_par'", "C_eq", "C_eq'", "C_x", "C_x'"}) {
        REQUIRE(g.contains(label));
        CHECK(is_hyper_state(grid, g.at(label).bits));
        CHECK(escape_coupling(grid, g.at(label).bits) == 0.0);
    }
    const LatticeSpec cube = build_octamer_grid(2, 1, 1, 1.0, 0.5);
    const auto o = collective_states(cube);
    REQUIRE(o.contains("C_star"));
    CHECK(escape_coupling(cube, o.at("C_star").bits) == 0.0);
    CHECK_THROWS_AS((void)collective_state(cube, "C"), ContractError);
}

TEST_CASE("single dimer and decoupled Hamiltonians") {
    const LatticeSpec d = single_dimer(0.7);
    const BasisSector s1(2, 1);
    const Eigen::MatrixXd h = assemble_hamiltonian(d, s1).to_dense();
    CHECK(h(0, 0) == 0.0);
    CHECK(h(0, 1) == 0.7);
    CHECK(h(1, 0) == 0.7);

    const LatticeSpec two = build_ssh_chain(2, 1.3, 0.0, 0.0, Boundary::open);
    const BasisSector s2(4, 2);
    const EigenSystem es = diagonalize(assemble_hamiltonian(two, s2));
    const std::vector<double> expected{-2.6, 0, 0, 0, 0, 2.6};
    for (std::size_t k = 0; k < expected.size(); ++k) CHECK(es.energies[static_cast<Eigen::Index>(k)] == doctest::Approx(expected[k]).epsilon(1e-12));
    CHECK_THROWS_AS((void)assemble_hamiltonian(two, BasisSector(6, 3)), ContractError);
}

TEST_CASE("Hamiltonians are symmetric for every builder") {
    const std::vector<LatticeSpec> specs{build_ssh_chain(4, 1.6, 1.0, -0.3, Boundary::open),
                                         build_ssh_chain(5, 1.6, 1.0, -0.3, Boundary::periodic),
                                         build_comb(5, 1.5, 0.8),
                                         build_random_cluster(5, 1.0, 0.6, 3),
                                         build_tetramer_grid(2, 1, 2.5, 1.0),
                                         build_octamer_grid(1, 1, 1, 1.0, 1.0)};
    for (const auto& spec : specs) {
        const BasisSector sector(spec.sites, spec.half_filling());
        const SparseHamiltonian h = assemble_hamiltonian(spec, sector);
        CHECK(h.is_symmetric());
        // Every hop lands inside the sector.
        for (std::size_t r = 0; r < sector.size(); ++r) {
            for (const Edge& e : spec.edges) {
                if (auto t = apply_hop(sector.unrank(r), e.u, e.v)) CHECK(sector.rank(*t).has_value());
            }
        }
    }
}

TEST_CASE("random clusters") {
    const LatticeSpec two = build_random_cluster(2, 1.0, 0.5, 99);
    CHECK(count_class(two, EdgeClass::inter) == 1);
    for (int n = 2; n <= 9; ++n) {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const LatticeSpec s = build_random_cluster(n, 1.0, 0.5, seed);
            CHECK(s == build_random_cluster(n, 1.0, 0.5, seed));
            CHECK_NOTHROW(s.validate());
            // Inter-dimer graph is connected.
            std::vector<int> parent(static_cast<std::size_t>(n));
            for (int k = 0; k < n; ++k) parent[static_cast<std::size_t>(k)] = k;
            std::function<int(int)> find = [&](int x) {
                return parent[static_cast<std::size_t>(x)] == x ? x : parent[static_cast<std::size_t>(x)] = find(parent[static_cast<std::size_t>(x)]);
            };
            std::map<int, int> degree;
            for (const Edge& e : s.edges) {
                if (e.kind != EdgeClass::inter) continue;
                parent[static_cast<std::size_t>(find(s.unit_of(e.u)))] = find(s.unit_of(e.v));
                ++degree[e.u];
                ++degree[e.v];
            }
            std::set<int> roots;
            for (int k = 0; k < n; ++k) roots.insert(find(k));
            CHECK(roots.size() == 1);
            for (const auto& [site, d] : degree) CHECK(d <= 2);
            const auto cs = collective_states(s);
            REQUIRE(cs.contains("C"));
            CHECK(escape_coupling(s, cs.at("C").bits) == 0.0);
            CHECK(escape_coupling(s, cs.at("C'").bits) == 0.0);
        }
    }
}

TEST_CASE("lattice JSON round trip") {
    const std::vector<LatticeSpec> specs{build_ssh_chain(4, 1.6, 1.0, -0.3, Boundary::periodic),
                                         build_random_cluster(6, 1.0, 0.5, 17), build_tetramer_grid(2, 2, 2.5, 1.0),
                                         build_octamer_grid(2, 1, 1, 1.0, 0.5)};
    for (const auto& s : specs) CHECK(lattice_from_json(to_json(s)) == s);
    CHECK_THROWS_AS((void)lattice_from_json("{}"), ConfigError);
    CHECK_THROWS_AS((void)lattice_from_json("not json"), ConfigError);
}

TEST_CASE("half cut takes the first half of the units") {
    CHECK(half_cut(build_ssh_chain(4, 1, 1, 0, Boundary::open)) == std::vector<int>{0, 1, 2, 3});
    CHECK(half_cut(build_ssh_chain(5, 1, 1, 0, Boundary::open)) == std::vector<int>{0, 1, 2, 3, 4, 5});
    CHECK(half_cut(build_tetramer_grid(2, 2, 1, 1)).size() == 8);
}
