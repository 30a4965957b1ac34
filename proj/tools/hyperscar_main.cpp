// Copyright 2026 The Hyperscar Authors
// SPDX-License-Identifier: Apache-2.0

#include "hyperscar/errors.hpp"
#include "hyperscar/experiment.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <optional>
#include <string>

int main(int argc, char** argv) {
    CLI::App app{"Hilbert-space scar experiments on dimer, tetramer and octamer lattices"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::size_t threads = 1;
    std::optional<std::uint64_t> seed;

    const char* names[] = {"spectrum", "dynamics", "scaling", "hda", "ratio", "cluster-gen"};
    const char* help[] = {"overlaps, entropies, towers and gap ratios of the sector spectrum",
                          "fidelity and entanglement traces of the initial and random Fock states",
                          "first-revival fidelity density versus system size",
                          "hypercube decay approximation of the initial state's local density of states",
                          "hypercube internal versus escape hopping sums against the closed forms",
                          "write a random dimer cluster as lattice JSON"};
    for (int k = 0; k < 6; ++k) {
        CLI::App* sub = app.add_subcommand(names[k], help[k]);
        sub->add_option("--config", config_path, "experiment config file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory (defaults to the config's 'out')");
        sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--seed", seed, "RNG seed, overrides the config");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    hyperscar::ExperimentConfig cfg;
    try {
        cfg = hyperscar::ExperimentConfig::load(config_path);
    } catch (const hyperscar::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    }
    hyperscar::RunOptions opts;
    opts.out_dir = out_dir.empty() ? cfg.out : out_dir;
    opts.threads = threads;
    opts.seed = seed;
    opts.command = command;
    return hyperscar::run_command(command, cfg, opts);
}
