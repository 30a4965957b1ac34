// Copyright 2026 The Hyperscar Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file dynamics.hpp
 * @brief Real-time evolution |psi(t)> = exp(-iHt)|psi(0)>: fidelity and
 *        entanglement traces, first-revival detection and size scaling.
 */

#pragma once

#include "hyperscar/hilbert.hpp"
#include "hyperscar/lattice.hpp"
#include "hyperscar/operator.hpp"
#include "hyperscar/spectral.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace hyperscar {

struct KrylovOptions {
    int max_dim = 30;     ///< Lanczos vectors per step
    double tol = 1e-10;   ///< a-posteriori error bound per step
    int max_halvings = 40;
};

struct EvolveOptions {
    KrylovOptions krylov;
    const Bipartition* cut = nullptr;  ///< entropies are recorded when set
    bool keep_snapshots = false;
};

struct DynamicsTrace {
    std::vector<double> times;
    std::vector<double> fidelity;  ///< |<psi(0)|psi(t)>|^2
    std::vector<double> entropy;   ///< nats, empty without a cut
    double norm_drift = 0.0;       ///< max | ||psi(t)|| - 1 |
    double energy_drift = 0.0;     ///< max |<H>(t) - <H>(0)| / max(|<H>(0)|, ||H||)
    std::size_t krylov_steps = 0;
    std::vector<Eigen::VectorXcd> snapshots;
};

/// Evenly spaced samples 0, t_max/(points-1), ..., t_max.
[[nodiscard]] std::vector<double> time_grid(double t_max, std::size_t points);

/// Unit vector on a basis state.
[[nodiscard]] Eigen::VectorXcd basis_vector(const BasisSector& sector, const FockState& s);

/// Krylov (Lanczos) propagation between consecutive sample times. A step is
/// halved until beta_m |[exp(-iT dt)]_{m,1}| <= tol; NumericalError after
/// `max_halvings`.
[[nodiscard]] DynamicsTrace evolve(const SparseHamiltonian& h, const Eigen::VectorXcd& psi0,
                                   std::span<const double> times, const EvolveOptions& options = {});

/// Propagation in a full eigenbasis; the reference path for small sectors.
[[nodiscard]] DynamicsTrace evolve_exact(const EigenSystem& es, const Eigen::VectorXcd& psi0,
                                         std::span<const double> times, const EvolveOptions& options = {});

/// S(t) for each stored snapshot of a trace.
[[nodiscard]] std::vector<double> entropy_trace(const DynamicsTrace& trace, const Bipartition& cut);

struct RevivalReport {
    double t1 = 0.0;
    double f1 = 0.0;
    double log_density = 0.0;  ///< ln(F1) / sites
    double window_lo = 0.0;
    double window_hi = 0.0;
};

/// Largest sampled fidelity in [0.5, 1.5] * 2pi/delta_e, ties going to the sample
/// nearest 2pi/delta_e. Throws ContractError
/// when the trace ends before the window does.
[[nodiscard]] RevivalReport first_revival(const DynamicsTrace& trace, double delta_e, int sites);

/// Uniform sample without replacement of sector states not in `exclude`,
/// deterministic in `seed`.
[[nodiscard]] std::vector<FockState> random_fock_states(const BasisSector& sector, std::size_t count,
                                                        std::uint64_t seed, std::span<const FockState> exclude = {});

/// Gauss-quadrature nodes and weights of the spectral measure of `psi`
/// after `steps` Lanczos iterations with full reorthogonalization.
[[nodiscard]] std::vector<OverlapPoint> local_spectral_measure(const SparseHamiltonian& h, const Eigen::VectorXd& psi,
                                                               int steps);

/// Smallest gap between distinct levels of one half-filled unit (2 J0 for a dimer).
[[nodiscard]] double unit_level_spacing(const LatticeSpec& spec);

/// Revival frequency estimate for a basis state: spacing of the three heaviest
/// towers of its spectral measure, falling back to the unit level spacing.
[[nodiscard]] double revival_spacing(const SparseHamiltonian& h, const BasisSector& sector, const FockState& s,
                                     const LatticeSpec& spec, int lanczos_steps = 300);

struct ScalingParams {
    Geometry family = Geometry::ssh;  ///< ssh, comb or random_cluster
    double j0 = 1.6;
    double j1 = 1.0;
    double j3 = 0.0;
    Boundary boundary = Boundary::open;
    std::size_t seeds = 20;  ///< clusters averaged per size
    std::uint64_t seed = 1;
    std::size_t points_per_period = 400;
    KrylovOptions krylov;
};

struct ScalingPoint {
    int size = 0;
    int sites = 0;
    double inv_sites = 0.0;
    double log_density = 0.0;  ///< mean of ln(F1)/sites
    double std_error = 0.0;    ///< standard error over cluster seeds
    double thermal = 0.0;      ///< ln(1/D)/sites
    double t1 = 0.0;
    double f1 = 0.0;
    std::size_t samples = 0;
};

/// Evolves the collective state C per size and reports its revival density.
[[nodiscard]] std::vector<ScalingPoint> scaling_sweep(const ScalingParams& params, std::span<const int> sizes);

/// Revival of collective state `label` on one lattice.
[[nodiscard]] RevivalReport collective_revival(const LatticeSpec& spec, const std::string& label,
                                               std::size_t points_per_period = 400, const KrylovOptions& krylov = {});

}  // namespace hyperscar
