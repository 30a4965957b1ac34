// Copyright 2026 The Hyperscar Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "hyperscar/hilbert.hpp"
#include "hyperscar/lattice.hpp"

#include <Eigen/SparseCore>

#include <cstddef>
#include <string>
#include <vector>

namespace hyperscar {

/// Abelian group generated by commuting involutions of the Fock basis: at most
/// one site mirror (a permutation of sites mapping the edge set onto itself)
/// and, at half filling with uniform on-site energies, particle-hole
/// conjugation. Sectors are labelled by one sign per generator.
class SymmetryGroup {
public:
    /// Group with no generators (a single sector).
    explicit SymmetryGroup(int sites = 0) : sites_(sites) {}

    /// Tests site reversal, then unit-order reversal, for invariance of the
    /// lattice; adds particle-hole conjugation when it preserves the sector.
    [[nodiscard]] static SymmetryGroup detect(const LatticeSpec& spec, int particles);

    [[nodiscard]] int generator_count() const noexcept { return static_cast<int>(names_.size()); }
    [[nodiscard]] std::size_t sector_count() const noexcept { return std::size_t{1} << names_.size(); }
    [[nodiscard]] const std::vector<std::string>& generator_names() const noexcept { return names_; }

    /// Image of `s` under generator `g`.
    [[nodiscard]] Bits apply_generator(int g, Bits s) const;
    /// Image under the group element whose bit i selects generator i.
    [[nodiscard]] Bits apply_element(unsigned element, Bits s) const;

    /// Character of `element` in `sector`: (-1)^popcount(sector & element).
    [[nodiscard]] static int character(std::size_t sector, unsigned element) noexcept;

    /// e.g. "inversion+ particle-hole-".
    [[nodiscard]] std::string sector_label(std::size_t sector) const;

    /// Orthonormal symmetry-adapted basis of one sector, as a sparse
    /// (sector size) x (block size) matrix.
    [[nodiscard]] Eigen::SparseMatrix<double> projector(const BasisSector& sector, std::size_t index) const;

private:
    int sites_ = 0;
    std::vector<std::string> names_;
    std::vector<std::vector<int>> perms_;  ///< empty vector marks particle-hole conjugation
};

}  // namespace hyperscar
