# Copyright 2026 The Hyperscar Authors
# SPDX-License-Identifier: Apache-2.0

import json
import math

import numpy as np
import pytest

import hyperscar as hs


def test_single_dimer_levels():
    a = np.array([[0.0, 1.3], [1.3, 0.0]])
    e, v = hs.eigh(a)
    assert np.allclose(e, [-1.3, 1.3], atol=1e-12)
    assert np.allclose(np.abs(v) ** 2, 0.5)


def test_sector_and_split():
    assert hs.sector_states(4, 2) == [0b0011, 0b0101, 0b0110, 0b1001, 0b1010, 0b1100]
    s = hs.split(hs.ssh_chain(2, 1.0, 0.3))
    assert (s["dim_hyper"], s["dim_thermal"]) == (4, 2)
    assert s["theta"] == pytest.approx(4.0)
    assert s["gamma_sum"] == pytest.approx(0.6)
    assert hs.hyper_dimension(hs.tetramer_grid(2, 2, 1.0, 0.5)) == 1296


def test_collective_states_are_scars():
    for lat in (hs.ssh_chain(5, 1.6, 1.0), hs.comb(5, 1.5, 0.8), hs.tetramer_grid(2, 1, 2.5, 1.0)):
        states = lat.collective_states()
        assert states
        for bits in states.values():
            assert hs.escape_coupling(lat, bits) == 0.0


def test_ratio_closed_form():
    assert hs.ratio_closed_form("chain", 5) == pytest.approx(1.25)
    assert hs.ratio_closed_form("md", 3) == pytest.approx(4.0 / 7.0)
    with pytest.raises(hs.GeometryError):
        hs.ratio_closed_form("chain", 1)


def test_hamiltonian_is_sparse_and_paired():
    lat = hs.ssh_chain(4, 1.6, 1.0, -0.18)
    h = hs.hamiltonian(lat)
    assert h.shape == (70, 70)
    e, _ = hs.eigh(h.toarray(), vectors=False)
    assert np.allclose(np.sort(e), -np.sort(e)[::-1], atol=1e-9)


def test_spectrum_completeness():
    out = hs.spectrum(hs.comb(5, 1.5, 0.8))
    assert sum(out["overlaps"]) == pytest.approx(1.0, abs=1e-10)
    assert min(out["entropies"]) >= 0.0
    centers = hs.tower_centers(out["energies"], out["overlaps"], 1e-3, 0.75)
    assert len(centers) >= 3


def test_dynamics_trace():
    tr = hs.evolve(hs.ssh_chain(4, 1.6, 1.0, -0.18), t_max=5.0, points=51)
    assert tr["fidelity"][0] == pytest.approx(1.0)
    assert tr["entropy"][0] == 0.0
    assert tr["norm_drift"] < 1e-8


def test_hda_decoupled_peaks():
    out = hs.hda(hs.ssh_chain(2, 1.0, 0.0))
    assert np.allclose(out["peaks"], [-2.0, 0.0, 2.0], atol=1e-3)
    assert out["converged_fraction"] == 1.0
    assert 0.95 <= out["sum_rule"] <= 1.0


def test_lattice_json_round_trip():
    lat = hs.random_cluster(5, 1.6, 1.0, 3)
    again = hs.Lattice.from_json(lat.to_json())
    assert again == lat
    assert json.loads(lat.to_json())["sites"] == 10


def test_run_writes_manifest(tmp_path):
    cfg = "version = 1\nmodel = ssh\nJ0 = 1\nJ1 = 1\nsweep.parameter = N\nsweep.values = 2,3,4\n"
    assert hs.run("ratio", cfg, tmp_path) == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert [o["file"] for o in manifest["outputs"]] == ["ratio.csv", "md_limit.csv"]
    rows = (tmp_path / "ratio.csv").read_text().strip().splitlines()
    assert len(rows) == 4
    assert all(",1,enumerated" in r for r in rows[1:])
    with pytest.raises(hs.ConfigError):
        hs.run("ratio", "version = 1\nbogus = 2\n", tmp_path)


def test_capacity_error():
    with pytest.raises(hs.CapacityError):
        hs.sector_states(64, 1)
    assert math.isfinite(hs.binomial(40, 20))
