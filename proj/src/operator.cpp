// Copyright 2026 The Hyperscar Authors
// SPDX-License-Identifier: Apache-2.0

#include "hyperscar/operator.hpp"

#include "hyperscar/errors.hpp"

#include <algorithm>
#include <cmath>

namespace hyperscar {

SparseHamiltonian::SparseHamiltonian(std::size_t dimension, std::vector<std::size_t> row_ptr,
                                     std::vector<std::uint32_t> cols, std::vector<double> values)
    : dim_(dimension), row_ptr_(std::move(row_ptr)), cols_(std::move(cols)), vals_(std::move(values)) {
    if (row_ptr_.size() != dim_ + 1 || cols_.size() != vals_.size() || row_ptr_.back() != cols_.size()) {
        throw ContractError("SparseHamiltonian: inconsistent CSR arrays");
    }
}

std::span<const std::uint32_t> SparseHamiltonian::row_cols(std::size_t r) const {
    return {cols_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
}

std::span<const double> SparseHamiltonian::row_values(std::size_t r) const {
    return {vals_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
}

double SparseHamiltonian::element(std::size_t r, std::size_t c) const {
    auto cols = row_cols(r);
    auto it = std::lower_bound(cols.begin(), cols.end(), static_cast<std::uint32_t>(c));
    if (it == cols.end() || *it != c) return 0.0;
    return row_values(r)[static_cast<std::size_t>(it - cols.begin())];
}

namespace {

template <typename T>
void csr_apply(std::size_t dim, const std::vector<std::size_t>& ptr, const std::vector<std::uint32_t>& cols,
               const std::vector<double>& vals, std::span<const T> x, std::span<T> y) {
    if (x.size() != dim || y.size() != dim) {
        throw ContractError("SparseHamiltonian::apply: vector length does not match dimension");
    }
    for (std::size_t r = 0; r < dim; ++r) {
        T acc{};
        for (std::size_t k = ptr[r]; k < ptr[r + 1]; ++k) acc += vals[k] * x[cols[k]];
        y[r] = acc;
    }
}

}  // namespace

void SparseHamiltonian::apply(std::span<const double> x, std::span<double> y) const {
    csr_apply(dim_, row_ptr_, cols_, vals_, x, y);
}

void SparseHamiltonian::apply(std::span<const std::complex<double>> x,
                              std::span<std::complex<double>> y) const {
    csr_apply(dim_, row_ptr_, cols_, vals_, x, y);
}

Eigen::VectorXd SparseHamiltonian::operator*(const Eigen::VectorXd& x) const {
    Eigen::VectorXd y(static_cast<Eigen::Index>(dim_));
    apply(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
          std::span<double>(y.data(), dim_));
    return y;
}

Eigen::VectorXcd SparseHamiltonian::operator*(const Eigen::VectorXcd& x) const {
    Eigen::VectorXcd y(static_cast<Eigen::Index>(dim_));
    apply(std::span<const std::complex<double>>(x.data(), static_cast<std::size_t>(x.size())),
          std::span<std::complex<double>>(y.data(), dim_));
    return y;
}

double SparseHamiltonian::norm_bound() const noexcept {
    double best = 0.0;
    for (std::size_t r = 0; r < dim_; ++r) {
        double s = 0.0;
        for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) s += std::abs(vals_[k]);
        best = std::max(best, s);
    }
    return best;
}

bool SparseHamiltonian::is_symmetric() const {
    for (std::size_t r = 0; r < dim_; ++r) {
        auto cols = row_cols(r);
        auto vals = row_values(r);
        for (std::size_t k = 0; k < cols.size(); ++k) {
            if (element(cols[k], r) != vals[k]) return false;
        }
    }
    return true;
}

Eigen::MatrixXd SparseHamiltonian::to_dense() const {
    const auto n = static_cast<Eigen::Index>(dim_);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t r = 0; r < dim_; ++r) {
        for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
            m(static_cast<Eigen::Index>(r), cols_[k]) = vals_[k];
        }
    }
    return m;
}

Eigen::SparseMatrix<double> SparseHamiltonian::to_eigen() const {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(vals_.size());
    for (std::size_t r = 0; r < dim_; ++r) {
        for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
            trips.emplace_back(static_cast<int>(r), static_cast<int>(cols_[k]), vals_[k]);
        }
    }
    const auto n = static_cast<Eigen::Index>(dim_);
    Eigen::SparseMatrix<double> m(n, n);
    m.setFromTriplets(trips.begin(), trips.end());
    return m;
}

}  // namespace hyperscar
