// Copyright 2026 The Hyperscar Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file experiment.hpp
 * @brief Config-driven experiment runs behind the command-line tool.
 *
 * Config files are `key = value` lines; `#` starts a comment. The first
 * setting must be `version = 1` and unknown keys are errors.
 *
 *   model            ssh | comb | random-cluster | tetramer-2d | octamer-3d
 *   N                dimer count (1D families)
 *   Nx, Ny, Nz       grid extents
 *   J0, J1, J3       couplings
 *   boundary         obc | pbc
 *   seed             RNG seed (random clusters, random states)
 *   lattice          path of a lattice JSON file, overrides the builders
 *   initial          collective label (C, C', C_par, C_eq, C_x, C_star, ...)
 *   initial_bits     explicit occupations, site 1 first, e.g. 1001
 *   t_max, t_points  time grid
 *   random_states    random Fock states evolved next to the initial state
 *   cluster_seeds    random clusters averaged per size in scaling runs
 *   sizes            comma-separated sizes for scaling runs
 *   sweep.parameter  J0 | J1 | J3 | N | seed
 *   sweep.values     comma-separated values
 *   hda.eta, hda.points, hda.half_width, hda.tol, hda.damping, hda.max_iters
 *   eigen_cap        largest dense dimension
 *   out              output directory
 */

#pragma once

#include "hyperscar/lattice.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hyperscar {

struct ExperimentConfig {
    int version = 1;
    std::string model = "ssh";
    int n = 4;
    int nx = 2;
    int ny = 2;
    int nz = 1;
    double j0 = 1.6;
    double j1 = 1.0;
    double j3 = 0.0;
    Boundary boundary = Boundary::open;
    std::uint64_t seed = 1;
    std::string lattice_file;
    std::optional<std::string> initial;
    std::optional<std::string> initial_bits;
    double t_max = 40.0;
    std::size_t t_points = 2000;
    std::size_t random_states = 10;
    std::size_t cluster_seeds = 20;
    std::vector<int> sizes;
    std::string sweep_parameter;
    std::vector<double> sweep_values;
    double hda_eta = 0.0;         ///< 0 selects 0.05 J0
    std::size_t hda_points = 2001;
    double hda_half_width = 0.0;  ///< 0 selects units*J0 + 2 J0
    double hda_tol = 1e-10;
    double hda_damping = 0.5;
    int hda_max_iters = 500;
    std::size_t eigen_cap = 20000;
    std::string out = "out";

    /// Parses config text; throws ConfigError with the offending line.
    [[nodiscard]] static ExperimentConfig parse(std::string_view text);
    [[nodiscard]] static ExperimentConfig load(const std::filesystem::path& path);
    /// Canonical text form; parse(to_text()) reproduces the config.
    [[nodiscard]] std::string to_text() const;
    /// Throws ConfigError on inconsistent settings.
    void validate() const;

    /// Copy with one sweep parameter set to `value`.
    [[nodiscard]] ExperimentConfig with_parameter(const std::string& name, double value) const;
    /// One config per sweep value, or just this one without a sweep.
    [[nodiscard]] std::vector<ExperimentConfig> sweep_points() const;

    [[nodiscard]] LatticeSpec build_lattice() const;
    /// The requested initial state, defaulting to the first collective state.
    [[nodiscard]] FockState initial_state(const LatticeSpec& spec) const;
    [[nodiscard]] std::string initial_label() const;
};

struct RunOptions {
    std::filesystem::path out_dir;
    std::size_t threads = 1;
    std::optional<std::uint64_t> seed;
    std::string command;
};

/// Output files written by a run, relative to the output directory.
struct RunResult {
    std::vector<std::string> files;
};

[[nodiscard]] RunResult run_spectrum(const ExperimentConfig& cfg, const RunOptions& opts);
[[nodiscard]] RunResult run_dynamics(const ExperimentConfig& cfg, const RunOptions& opts);
[[nodiscard]] RunResult run_scaling(const ExperimentConfig& cfg, const RunOptions& opts);
[[nodiscard]] RunResult run_hda(const ExperimentConfig& cfg, const RunOptions& opts);
[[nodiscard]] RunResult run_ratio(const ExperimentConfig& cfg, const RunOptions& opts);
[[nodiscard]] RunResult run_cluster_gen(const ExperimentConfig& cfg, const RunOptions& opts);

/// Dispatches by subcommand name and writes manifest.json. Returns the process
/// exit code: 0 success, 2 config error, 3 capacity error, 4 numerical failure.
int run_command(const std::string& command, const ExperimentConfig& cfg, const RunOptions& opts);

/// Lower-case hex SHA-256 of a file.
[[nodiscard]] std::string sha256_file(const std::filesystem::path& path);

/// %.17g formatting used in every CSV.
[[nodiscard]] std::string format_double(double x);

}  // namespace hyperscar
