// Copyright 2026 The Hyperscar Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file lattice.hpp
 * @brief Dimer, tetramer and octamer lattices, their collective Fock states,
 *        and the hop Hamiltonian on a particle-number sector.
 *
 * Site layouts (0-based bit positions):
 *  - dimer families: a_α = 2(α-1), b_α = 2(α-1)+1;
 *  - tetramer (i,j):  unit u = i + Nx*j, sites 4u + {TL, TR, BL, BR} = 4u + x + 2y
 *    with x = 0 left / 1 right and y = 0 top / 1 bottom;
 *  - octamer (i,j,k): unit u = i + Nx*(j + Ny*k), sites 8u + x + 2y + 4z.
 * Reversing the global site order is the point inversion of every geometry
 * except the comb, whose mirror reverses the unit order instead.
 */

#pragma once

#include "hyperscar/hilbert.hpp"
#include "hyperscar/operator.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hyperscar {

enum class EdgeClass { intra, inter, long_range };
enum class Boundary { open, periodic };
enum class Geometry { ssh, comb, random_cluster, tetramer_grid, octamer_grid, custom };
enum class UnitKind { dimer, tetramer, octamer };

[[nodiscard]] std::string_view to_string(EdgeClass c) noexcept;
[[nodiscard]] std::string_view to_string(Boundary b) noexcept;
[[nodiscard]] std::string_view to_string(Geometry g) noexcept;
[[nodiscard]] std::string_view to_string(UnitKind k) noexcept;

/// Undirected hop u <-> v with amplitude J.
struct Edge {
    int u = 0;
    int v = 0;
    double amplitude = 0.0;
    EdgeClass kind = EdgeClass::intra;

    friend bool operator==(const Edge&, const Edge&) = default;
};

struct LatticeSpec {
    Geometry geometry = Geometry::custom;
    UnitKind unit_kind = UnitKind::dimer;
    Boundary boundary = Boundary::open;
    int nx = 0;  ///< dimer count for 1D families, x extent for grids
    int ny = 1;
    int nz = 1;
    std::uint64_t seed = 0;  ///< random clusters only
    int sites = 0;
    std::vector<std::vector<int>> units;
    std::vector<Edge> edges;
    std::vector<double> onsite;
    std::vector<std::string> site_labels;

    [[nodiscard]] int unit_count() const noexcept { return static_cast<int>(units.size()); }
    [[nodiscard]] int unit_of(int site) const;
    /// Particles per unit at half filling (1, 2 or 4).
    [[nodiscard]] int unit_half_filling() const noexcept;
    [[nodiscard]] int half_filling() const noexcept { return sites / 2; }

    /// Throws GeometryError if any structural invariant is broken.
    void validate() const;

    friend bool operator==(const LatticeSpec&, const LatticeSpec&) = default;
};

/// SSH chain a1 b1 a2 b2 ...: J0 on (aα,bα), J1 on (bα,aα+1), J3 on (aα,bα+1) and (bα,aα+2).
/// Long-range edges are omitted when J3 == 0. Periodic chains wrap all three
/// classes and need N >= 3; terms that land on the same bond are merged.
[[nodiscard]] LatticeSpec build_ssh_chain(int dimers, double j0, double j1, double j3, Boundary boundary);

/// Comb: backbone (aα,aα+1) at J1, teeth (aα,bα) at J0.
[[nodiscard]] LatticeSpec build_comb(int dimers, double j0, double j1);

/// Connected random dimer cluster, deterministic in (dimers, seed).
[[nodiscard]] LatticeSpec build_random_cluster(int dimers, double j0, double j1, std::uint64_t seed);

[[nodiscard]] LatticeSpec build_tetramer_grid(int nx, int ny, double j0, double j1);
[[nodiscard]] LatticeSpec build_octamer_grid(int nx, int ny, int nz, double j0, double j1);

/// Labels: C, C', C_par, C_par', C_eq, C_eq', C_x, C_x', C_star.
using CollectiveStateSet = std::map<std::string, FockState>;

/// Collective states of a geometry. For dimer lattices C is the member of the
/// pair with the last site occupied. Frustrated dimer lattices yield an empty
/// set unless `allow_frustrated`, in which case the pair satisfying every
/// inter edge except those closing an inconsistent cycle is returned.
[[nodiscard]] CollectiveStateSet collective_states(const LatticeSpec& spec, bool allow_frustrated = false);

/// Looks up a collective-state label; throws ContractError when absent.
[[nodiscard]] FockState collective_state(const LatticeSpec& spec, const std::string& label,
                                         bool allow_frustrated = false);

/// Sites of units 1..ceil(N/2) (dimers) or of the left half columns (grids).
[[nodiscard]] std::vector<int> half_cut(const LatticeSpec& spec);

/// Hop Hamiltonian of `spec` on `sector`; zero-amplitude edges are skipped.
[[nodiscard]] SparseHamiltonian assemble_hamiltonian(const LatticeSpec& spec, const BasisSector& sector);

[[nodiscard]] std::string to_json(const LatticeSpec& spec);
[[nodiscard]] LatticeSpec lattice_from_json(std::string_view text);

}  // namespace hyperscar
