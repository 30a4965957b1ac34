// Copyright 2026 The Hyperscar Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file subspace.hpp
 * @brief Hypercube (hyperpolyhedron) versus thermal split of a sector, escape
 *        couplings and the internal/escape hopping-sum ratio.
 *
 * A state is in the hypercube when every unit holds exactly half of its sites
 * occupied. Intra-unit hops keep a state inside; every inter-unit hop from a
 * hypercube state leaves it.
 */

#pragma once

#include "hyperscar/hilbert.hpp"
#include "hyperscar/lattice.hpp"
#include "hyperscar/operator.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace hyperscar {

struct SubspaceSplit {
    std::vector<std::size_t> hyper;    ///< ascending sector ranks
    std::vector<std::size_t> thermal;  ///< ascending sector ranks
    std::vector<double> gamma;         ///< escape coupling per hyper state

    [[nodiscard]] std::size_t dim_hyper() const noexcept { return hyper.size(); }
    [[nodiscard]] std::size_t dim_thermal() const noexcept { return thermal.size(); }
    /// Position of a sector rank within `hyper`.
    [[nodiscard]] std::optional<std::size_t> hyper_index(std::size_t rank) const noexcept;
};

/// True when each unit of `spec` is half-filled in `s`.
[[nodiscard]] bool is_hyper_state(const LatticeSpec& spec, Bits s);

/// Closed-form hypercube dimension: product of C(k, k/2) over units of size k.
[[nodiscard]] std::uint64_t hyper_dimension(const LatticeSpec& spec);

/// Calls `fn` for every hypercube state (product order over units, not sorted).
void for_each_hyper_state(const LatticeSpec& spec, const std::function<void(Bits)>& fn);

[[nodiscard]] SubspaceSplit identify_hyperpolyhedron(const LatticeSpec& spec, const BasisSector& sector);
[[nodiscard]] SubspaceSplit identify_hyperpolyhedron(const LatticeSpec& spec, const BasisSector& sector,
                                                     const SparseHamiltonian& h);

/// gamma_p = sum over thermal q of |<p|H|q>|, for each hyper state p.
[[nodiscard]] std::vector<double> escape_coupling(const SubspaceSplit& split, const SparseHamiltonian& h);
[[nodiscard]] std::vector<double> escape_coupling(const SubspaceSplit& split, const LatticeSpec& spec,
                                                  const BasisSector& sector);

/// Escape coupling of a single hypercube state, from the edge list.
[[nodiscard]] double escape_coupling(const LatticeSpec& spec, Bits s);

struct HoppingSums {
    double theta = 0.0;      ///< sum of |H| over unordered hyper-hyper pairs
    double gamma_sum = 0.0;  ///< sum of |H| over hyper-thermal pairs
    double ratio = 0.0;      ///< theta / gamma_sum, +inf when gamma_sum == 0
};

[[nodiscard]] HoppingSums hopping_sums(const SubspaceSplit& split, const SparseHamiltonian& h);
[[nodiscard]] HoppingSums hopping_sums(const SubspaceSplit& split, const LatticeSpec& spec, const BasisSector& sector);

/// Integer pair counts per edge of `spec.edges`: unordered hyper-hyper pairs
/// for intra edges, hyper-thermal pairs for the others.
struct HoppingCounts {
    std::vector<std::uint64_t> per_edge;
    std::uint64_t intra = 0;
    std::uint64_t inter = 0;
    std::uint64_t long_range = 0;

    /// Weighted sums using the edge amplitudes of `spec`.
    [[nodiscard]] HoppingSums sums(const LatticeSpec& spec) const;
    friend bool operator==(const HoppingCounts&, const HoppingCounts&) = default;
};

/// Counts by walking every hypercube state and every edge.
[[nodiscard]] HoppingCounts enumerate_hopping_pairs(const LatticeSpec& spec);

/// Same counts from per-unit local configurations, without visiting the
/// product space.
[[nodiscard]] HoppingCounts count_hopping_pairs(const LatticeSpec& spec);

__extension__ typedef __int128 WideInt;

struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    [[nodiscard]] double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
    friend bool operator==(const Rational& a, const Rational& b) noexcept {
        return static_cast<WideInt>(a.num) * b.den == static_cast<WideInt>(b.num) * a.den;
    }
};

/// Reduced fraction; throws ContractError for a zero denominator.
[[nodiscard]] Rational make_rational(std::int64_t num, std::int64_t den);

enum class RatioKind { chain, grid2d, grid3d, md_limit };

struct RatioShape {
    RatioKind kind = RatioKind::chain;
    int nx = 0;  ///< N for chains, M for the M-dimensional limit
    int ny = 1;
    int nz = 1;
};

/// Coefficient c of ratio = c * J0/J1:
///  chain N/(N-1); 2D 4n/(3(2n-Nx-Ny)); 3D 12n/(7(3n-NxNy-NyNz-NzNx));
///  M-D limit 2^(M-1)/(2^M-1), with n the unit count.
/// Throws GeometryError for shapes without inter-unit bonds.
[[nodiscard]] Rational ratio_coefficient(const RatioShape& shape);
[[nodiscard]] double ratio_closed_form(const RatioShape& shape, double j0, double j1);

/// Exact comparison of enumerated counts against the closed form, valid when
/// every intra edge carries J0 and every other edge J1.
[[nodiscard]] bool counts_match_closed_form(const HoppingCounts& counts, const RatioShape& shape);

}  // namespace hyperscar
