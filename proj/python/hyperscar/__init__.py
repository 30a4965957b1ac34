# Copyright 2026 The Hyperscar Authors
# SPDX-License-Identifier: Apache-2.0
"""Hilbert-space scars of hard-core bosons on dimer, tetramer and octamer lattices."""

from ._hyperscar import (
    CapacityError,
    ConfigError,
    ContractError,
    Edge,
    Error,
    FitError,
    GeometryError,
    Lattice,
    NumericalError,
    __version__,
    binomial,
    comb,
    eigh,
    escape_coupling,
    evolve,
    fit_lambda,
    hamiltonian,
    hda,
    hyper_dimension,
    mean_gap_ratio,
    octamer_grid,
    random_cluster,
    ratio_closed_form,
    run,
    sector_states,
    spectrum,
    split,
    ssh_chain,
    tetramer_grid,
    tower_centers,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
