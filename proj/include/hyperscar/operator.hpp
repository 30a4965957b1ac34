// Copyright 2026 The Hyperscar Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace hyperscar {

/// Real symmetric operator on a sector basis, stored row-compressed.
///
/// Columns within a row are ascending. Immutable once built; `apply` is safe
/// to call concurrently.
class SparseHamiltonian {
public:
    struct Entry {
        std::uint32_t col;
        double value;
    };

    SparseHamiltonian() = default;

    /// Takes ownership of CSR arrays. `row_ptr` has dimension+1 entries.
    SparseHamiltonian(std::size_t dimension, std::vector<std::size_t> row_ptr,
                      std::vector<std::uint32_t> cols, std::vector<double> values);

    [[nodiscard]] std::size_t dimension() const noexcept { return dim_; }
    [[nodiscard]] std::size_t nonzeros() const noexcept { return vals_.size(); }

    [[nodiscard]] std::span<const std::uint32_t> row_cols(std::size_t r) const;
    [[nodiscard]] std::span<const double> row_values(std::size_t r) const;

    /// <r|H|c>, zero when absent.
    [[nodiscard]] double element(std::size_t r, std::size_t c) const;

    void apply(std::span<const double> x, std::span<double> y) const;
    void apply(std::span<const std::complex<double>> x, std::span<std::complex<double>> y) const;

    [[nodiscard]] Eigen::VectorXd operator*(const Eigen::VectorXd& x) const;
    [[nodiscard]] Eigen::VectorXcd operator*(const Eigen::VectorXcd& x) const;

    /// Maximum absolute row sum; an upper bound on the spectral radius.
    [[nodiscard]] double norm_bound() const noexcept;

    /// Exact structural and numerical symmetry check.
    [[nodiscard]] bool is_symmetric() const;

    [[nodiscard]] Eigen::MatrixXd to_dense() const;
    [[nodiscard]] Eigen::SparseMatrix<double> to_eigen() const;

private:
    std::size_t dim_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<std::uint32_t> cols_;
    std::vector<double> vals_;
};

}  // namespace hyperscar
