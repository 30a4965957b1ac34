// Copyright 2026 The Hyperscar Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file hda.hpp
 * @brief Hypercube decay approximation: the thermal region is replaced by a
 *        diagonal self-energy on the hypercube, found per state from
 *
 *            sigma_p(E) = gamma_p^2 [(E + i eta) - H_H - sigma_p |p><p|]^{-1}_pp,
 *
 *        and the local density A_p(E) = -Im G_pp(E) / pi follows from
 *        G(E) = [(E + i eta) - H_H - diag(sigma)]^{-1}.
 */

#pragma once

#include "hyperscar/hilbert.hpp"
#include "hyperscar/lattice.hpp"
#include "hyperscar/operator.hpp"
#include "hyperscar/subspace.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <vector>

namespace hyperscar {

struct HdaConfig {
    std::vector<double> grid;  ///< strictly ascending energies
    double eta = 0.05;         ///< broadening standing in for 0+
    double tol = 1e-10;        ///< fixed-point residual
    double damping = 0.5;      ///< sigma <- (1-d) sigma + d update
    int max_iters = 500;

    /// 2001 points over +-(units*J0 + 2 J0), eta = 0.05 J0.
    [[nodiscard]] static HdaConfig defaults(int units, double j0);
    /// Throws ConfigError on an empty or unsorted grid, eta <= 0 or damping outside (0, 1].
    void validate() const;
};

/// Hypercube states with their restricted Hamiltonian and escape couplings,
/// built from the edge list without touching the full sector.
struct HypercubeModel {
    std::vector<Bits> states;  ///< ascending
    Eigen::MatrixXd h;
    std::vector<double> gamma;

    [[nodiscard]] std::size_t dimension() const noexcept { return states.size(); }
    /// Index of a hypercube state; throws ContractError when absent.
    [[nodiscard]] std::size_t index_of(Bits s) const;
};

/// Throws CapacityError above `cap` hypercube states.
[[nodiscard]] HypercubeModel hypercube_model(const LatticeSpec& spec, std::size_t cap = 4096);

/// Full Hamiltonian restricted to the hyper ranks of `split`.
[[nodiscard]] Eigen::MatrixXd hypercube_hamiltonian(const SubspaceSplit& split, const SparseHamiltonian& h);

struct DysonSolution {
    std::vector<double> grid;
    Eigen::MatrixXcd sigma;          ///< hypercube state x grid point
    std::vector<int> iterations;     ///< worst case over states, per grid point
    std::vector<double> residual;    ///< worst case over states, per grid point
    std::vector<char> converged;     ///< per grid point
    std::vector<char> causal;        ///< Im sigma <= 0 at every state, per grid point
};

/// Scalar damped fixed point per state and energy, started from sigma = 0.
/// States with gamma = 0 keep sigma = 0.
[[nodiscard]] DysonSolution solve_dyson(const Eigen::MatrixXd& hh, const std::vector<double>& gamma,
                                        const HdaConfig& config);

struct HdaResult {
    std::vector<double> grid;
    std::vector<std::size_t> probes;
    std::vector<std::vector<double>> dos;  ///< A_p(E) per probe
    std::vector<int> iterations;
    std::vector<double> residual;
    std::vector<char> converged;  ///< Dyson converged and G finite, per grid point

    [[nodiscard]] double converged_fraction() const;
};

/// Local densities of the probe states (hypercube indices).
[[nodiscard]] HdaResult spectral_density(const Eigen::MatrixXd& hh, const DysonSolution& sigma, const HdaConfig& config,
                                         const std::vector<std::size_t>& probes);

/// Sum over hypercube eigenpairs of |<p|v_k>|^2 times a Lorentzian of width eta.
[[nodiscard]] std::vector<double> lorentzian_density(const Eigen::MatrixXd& hh, std::size_t probe,
                                                     const std::vector<double>& grid, double eta);

struct Peak {
    double energy = 0.0;  ///< parabolic refinement of the grid maximum
    double height = 0.0;
};

/// Local maxima of A_probe with height >= min_prominence * max A. Requires at
/// least 90% of the grid converged.
[[nodiscard]] std::vector<Peak> tower_peaks(const HdaResult& result, std::size_t probe_slot,
                                            double min_prominence = 1e-3);

/// Trapezoid integral of A_probe over [lo, hi] (whole grid by default).
[[nodiscard]] double integrated_weight(const HdaResult& result, std::size_t probe_slot, double lo, double hi);
[[nodiscard]] double sum_rule(const HdaResult& result, std::size_t probe_slot);

}  // namespace hyperscar
