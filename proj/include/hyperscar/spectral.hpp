// Copyright 2026 The Hyperscar Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file spectral.hpp
 * @brief Exact diagonalization and eigenstate observables: overlap spectra,
 *        bipartite entanglement, gap-ratio statistics, overlap towers and the
 *        quadratic tower-spacing fit.
 */

#pragma once

#include "hyperscar/hilbert.hpp"
#include "hyperscar/lattice.hpp"
#include "hyperscar/operator.hpp"
#include "hyperscar/symmetry.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hyperscar {

/// Ascending spectrum with (optionally) orthonormal eigenvectors as columns.
struct EigenSystem {
    Eigen::VectorXd energies;
    Eigen::MatrixXd vectors;
    std::vector<int> sector;  ///< symmetry sector per eigenpair, -1 when unresolved
    std::vector<std::string> sector_labels;

    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(energies.size()); }
    [[nodiscard]] bool has_vectors() const noexcept { return vectors.cols() == energies.size() && vectors.size() > 0; }
};

struct DiagOptions {
    std::size_t cap = 20000;  ///< largest dense dimension accepted
    bool vectors = true;
};

/// Dense symmetric eigendecomposition (divide and conquer, or MRRR for large
/// matrices with vectors).
[[nodiscard]] EigenSystem diagonalize_dense(Eigen::MatrixXd matrix, bool vectors = true);

/// Full spectrum of a sector Hamiltonian. Throws CapacityError above `cap`.
[[nodiscard]] EigenSystem diagonalize(const SparseHamiltonian& h, const DiagOptions& options = {});

/// Full spectrum assembled block by block over the symmetry sectors of
/// `group`. Eigenvectors are returned in the original Fock basis and every
/// eigenpair carries its sector index.
[[nodiscard]] EigenSystem diagonalize_resolved(const SparseHamiltonian& h, const BasisSector& sector,
                                               const SymmetryGroup& group, const DiagOptions& options = {});

/// Per-eigenstate energy, sector, overlap with one basis state and (with a
/// cut) half-system entropy, computed block by block so that the full
/// eigenvector matrix is never stored. Ascending in energy.
struct EigenRecord {
    double energy = 0.0;
    int sector = -1;
    double overlap = 0.0;
    double entropy = 0.0;
};

class Bipartition;

[[nodiscard]] std::vector<EigenRecord> eigen_observables(const SparseHamiltonian& h, const BasisSector& sector,
                                                         const SymmetryGroup& group, std::size_t probe_rank,
                                                         const Bipartition* cut, std::size_t cap = 20000);

/// Eigenpairs of one symmetry block with energies in (lo, hi], by bisection
/// and inverse iteration on the tridiagonal form.
[[nodiscard]] EigenSystem diagonalize_window(const SparseHamiltonian& h, const BasisSector& sector,
                                             const SymmetryGroup& group, std::size_t block, double lo,
                                             double hi, std::size_t cap = 20000);

/// Symmetry block Q^T H Q as a dense matrix.
[[nodiscard]] Eigen::MatrixXd symmetry_block(const SparseHamiltonian& h, const Eigen::SparseMatrix<double>& q);

struct OverlapPoint {
    double energy = 0.0;
    double weight = 0.0;
};

/// |<s|E_k>|^2 for every eigenpair, ordered by energy.
[[nodiscard]] std::vector<OverlapPoint> overlaps(std::size_t rank, const EigenSystem& es);
[[nodiscard]] std::vector<OverlapPoint> overlaps(const FockState& s, const BasisSector& sector, const EigenSystem& es);

/// Schmidt structure of a fixed-particle-number sector split into sites A | B.
///
/// Precomputes for every basis state its (block, row, column) position in the
/// block-diagonal coefficient matrix so repeated entropies are cheap.
class Bipartition {
public:
    Bipartition(const BasisSector& sector, std::span<const int> cut);

    [[nodiscard]] double entropy(std::span<const double> psi) const;
    [[nodiscard]] double entropy(std::span<const std::complex<double>> psi) const;

    [[nodiscard]] std::size_t size_a() const noexcept { return size_a_; }
    [[nodiscard]] std::size_t size_b() const noexcept { return size_b_; }

private:
    template <typename Scalar>
    double entropy_impl(std::span<const Scalar> psi) const;

    struct Slot {
        std::uint32_t block;
        std::uint32_t row;
        std::uint32_t col;
    };
    std::size_t dim_ = 0;
    std::size_t size_a_ = 0;
    std::size_t size_b_ = 0;
    std::vector<Slot> slots_;
    std::vector<std::pair<std::size_t, std::size_t>> block_shape_;
};

/// von Neumann entropy (nats) of the reduced state on `cut`.
[[nodiscard]] double eigenstate_entropy(std::span<const double> v, std::span<const int> cut, const BasisSector& sector);

struct GapRatioStats {
    double mean = 0.0;
    std::size_t ratios = 0;
    bool low_statistics = false;
    std::string warning;
    std::vector<std::pair<std::string, double>> per_sector;
};

/// Mean of min(s_n, s_n+1) / max(s_n, s_n+1) over an ascending level list.
/// Pairs of exactly degenerate gaps (0/0) are skipped.
[[nodiscard]] GapRatioStats mean_gap_ratio(std::span<const double> levels);

/// <r> of a spectrum. With `resolve` the levels are first split by symmetry
/// sector: exact sector labels are used when the EigenSystem carries them;
/// otherwise eigenvectors are binned by the sign of <v|g|v> for each
/// generator g, discarding vectors with |<v|g|v>| <= 0.99. Sector results are
/// averaged with weights equal to their ratio counts.
[[nodiscard]] GapRatioStats level_spacing_ratio(const EigenSystem& es, bool resolve, const SymmetryGroup& group,
                                                const BasisSector& sector);

struct TowerOptions {
    double threshold = 1e-3;  ///< minimum overlap of a tower member
    double window = 0.5;      ///< half-width of the local-maximum test and of tower membership
    double satellite = 0.25;  ///< drop towers lighter than this fraction of the heaviest tower on each side (0 keeps all)
};

struct Tower {
    double center = 0.0;  ///< weight-averaged energy
    double weight = 0.0;  ///< summed overlap
    double peak_energy = 0.0;
    double peak_weight = 0.0;
    std::size_t members = 0;
};

/// Overlap towers: local maxima (within +-window) above threshold, each
/// absorbing the above-threshold points within +-window. Ascending in energy.
/// Weak satellite towers lying under the envelope of heavier towers on both sides are discarded.
/// Throws FitError when fewer than three towers are found.
[[nodiscard]] std::vector<Tower> extract_towers(std::span<const OverlapPoint> points, const TowerOptions& options = {});

/// Mean spacing of consecutive tower centers.
[[nodiscard]] double tower_spacing(std::span<const Tower> towers);

/// The `count` towers whose centers are closest to `energy`, ascending.
[[nodiscard]] std::vector<Tower> towers_near(std::span<const Tower> towers, double energy, std::size_t count);

/// Least-squares fit of dE/J0 = lambda x^2 + 2 (intercept pinned at 2).
struct TowerFit {
    double lambda = 0.0;
    double residual = 0.0;  ///< root-mean-square deviation
    std::size_t samples = 0;

    [[nodiscard]] double predict(double x) const noexcept { return lambda * x * x + 2.0; }
};

/// Needs >= 4 samples with x in [0, 1.2], not all zero.
[[nodiscard]] TowerFit fit_lambda(std::span<const std::pair<double, double>> samples);

}  // namespace hyperscar
