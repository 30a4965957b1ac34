// Copyright 2026 The Hyperscar Authors
// SPDX-License-Identifier: Apache-2.0

#include "hyperscar/dynamics.hpp"
#include "hyperscar/errors.hpp"
#include "hyperscar/experiment.hpp"
#include "hyperscar/hda.hpp"
#include "hyperscar/hilbert.hpp"
#include "hyperscar/lattice.hpp"
#include "hyperscar/spectral.hpp"
#include "hyperscar/subspace.hpp"
#include "hyperscar/symmetry.hpp"

#include <pybind11/eigen.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <map>
#include <string>
#include <vector>

namespace py = pybind11;
using namespace hyperscar;

namespace {

Boundary boundary_of(const std::string& b) {
    if (b == "obc") return Boundary::open;
    if (b == "pbc") return Boundary::periodic;
    throw ConfigError("boundary must be 'obc' or 'pbc'");
}

std::map<std::string, Bits> collective_bits(const LatticeSpec& spec, bool allow_frustrated) {
    std::map<std::string, Bits> out;
    for (const auto& [label, s] : collective_states(spec, allow_frustrated)) out[label] = s.bits;
    return out;
}

BasisSector half_sector(const LatticeSpec& spec) { return BasisSector(spec.sites, spec.half_filling()); }

py::dict split_summary(const LatticeSpec& spec) {
    const BasisSector sec = half_sector(spec);
    const SparseHamiltonian h = assemble_hamiltonian(spec, sec);
    const SubspaceSplit split = identify_hyperpolyhedron(spec, sec, h);
    const HoppingSums sums = hopping_sums(split, h);
    std::vector<Bits> states;
    for (std::size_t r : split.hyper) states.push_back(sec.state(r));
    py::dict d;
    d["dim"] = sec.size();
    d["dim_hyper"] = split.dim_hyper();
    d["dim_thermal"] = split.dim_thermal();
    d["hyper_states"] = states;
    d["gamma"] = split.gamma;
    d["theta"] = sums.theta;
    d["gamma_sum"] = sums.gamma_sum;
    d["ratio"] = sums.ratio;
    return d;
}

py::dict spectrum(const LatticeSpec& spec, std::optional<Bits> probe, std::size_t cap) {
    const BasisSector sec = half_sector(spec);
    const SparseHamiltonian h = assemble_hamiltonian(spec, sec);
    const SymmetryGroup group = SymmetryGroup::detect(spec, spec.half_filling());
    const Bits s = probe ? *probe : collective_state(spec, "C", true).bits;
    const auto rank = sec.rank(FockState{s, spec.sites});
    if (!rank) throw ContractError("probe state is not in the half-filled sector");
    const std::vector<int> cut = half_cut(spec);
    const Bipartition bp(sec, cut);
    const auto rec = eigen_observables(h, sec, group, *rank, &bp, cap);
    std::vector<double> e, w, ent;
    std::vector<int> sector;
    for (const auto& r : rec) {
        e.push_back(r.energy);
        w.push_back(r.overlap);
        ent.push_back(r.entropy);
        sector.push_back(r.sector);
    }
    py::dict d;
    d["energies"] = e;
    d["overlaps"] = w;
    d["entropies"] = ent;
    d["sectors"] = sector;
    return d;
}

py::dict fidelity_trace(const LatticeSpec& spec, std::optional<Bits> initial, double t_max, std::size_t points) {
    const BasisSector sec = half_sector(spec);
    const SparseHamiltonian h = assemble_hamiltonian(spec, sec);
    const FockState s = initial ? FockState{*initial, spec.sites} : collective_state(spec, "C", true);
    const std::vector<int> cut = half_cut(spec);
    const Bipartition bp(sec, cut);
    EvolveOptions opts;
    opts.cut = &bp;
    const auto times = time_grid(t_max, points);
    const DynamicsTrace tr = evolve(h, basis_vector(sec, s), times, opts);
    py::dict d;
    d["times"] = tr.times;
    d["fidelity"] = tr.fidelity;
    d["entropy"] = tr.entropy;
    d["norm_drift"] = tr.norm_drift;
    d["energy_drift"] = tr.energy_drift;
    return d;
}

py::dict hda_density(const LatticeSpec& spec, std::optional<Bits> probe, double eta, std::size_t points) {
    const HypercubeModel m = hypercube_model(spec);
    double j0 = 0.0;
    for (const Edge& e : spec.edges) {
        if (e.kind == EdgeClass::intra) j0 = std::max(j0, std::abs(e.amplitude));
    }
    HdaConfig cfg = HdaConfig::defaults(spec.unit_count(), j0 > 0.0 ? j0 : 1.0);
    if (eta > 0.0) cfg.eta = eta;
    if (points > 1) {
        const double lo = cfg.grid.front();
        const double hi = cfg.grid.back();
        cfg.grid.resize(points);
        for (std::size_t k = 0; k < points; ++k)
            cfg.grid[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1);
    }
    const Bits s = probe ? *probe : collective_state(spec, "C", true).bits;
    const std::size_t slot = m.index_of(s);
    const HdaResult res = spectral_density(m.h, solve_dyson(m.h, m.gamma, cfg), cfg, {slot});
    std::vector<double> peaks;
    for (const Peak& p : tower_peaks(res, 0)) peaks.push_back(p.energy);
    py::dict d;
    d["grid"] = res.grid;
    d["dos"] = res.dos[0];
    d["peaks"] = peaks;
    d["sum_rule"] = sum_rule(res, 0);
    d["converged_fraction"] = res.converged_fraction();
    return d;
}

}  // namespace

PYBIND11_MODULE(_hyperscar, m) {
    m.doc() = "Hilbert-space scar toolkit: lattices, hypercube subspaces, spectra, dynamics and the HDA";

    static py::exception<Error> base(m, "Error");
    py::register_exception<CapacityError>(m, "CapacityError", base.ptr());
    py::register_exception<GeometryError>(m, "GeometryError", base.ptr());
    py::register_exception<ContractError>(m, "ContractError", base.ptr());
    py::register_exception<FitError>(m, "FitError", base.ptr());
    py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

    py::class_<Edge>(m, "Edge")
        .def_readonly("u", &Edge::u)
        .def_readonly("v", &Edge::v)
        .def_readonly("amplitude", &Edge::amplitude)
        .def_property_readonly("kind", [](const Edge& e) { return std::string(to_string(e.kind)); })
        .def("__repr__", [](const Edge& e) {
            return "Edge(" + std::to_string(e.u) + ", " + std::to_string(e.v) + ", " + std::to_string(e.amplitude) +
                   ", " + std::string(to_string(e.kind)) + ")";
        });

    py::class_<LatticeSpec>(m, "Lattice")
        .def_readonly("sites", &LatticeSpec::sites)
        .def_readonly("units", &LatticeSpec::units)
        .def_readonly("edges", &LatticeSpec::edges)
        .def_property_readonly("geometry", [](const LatticeSpec& s) { return std::string(to_string(s.geometry)); })
        .def_property_readonly("unit_count", &LatticeSpec::unit_count)
        .def("to_json", [](const LatticeSpec& s) { return to_json(s); })
        .def_static("from_json", [](const std::string& text) { return lattice_from_json(text); })
        .def("collective_states", &collective_bits, py::arg("allow_frustrated") = false)
        .def("half_cut", [](const LatticeSpec& s) { return half_cut(s); })
        .def(py::self == py::self);

    m.def("ssh_chain", [](int n, double j0, double j1, double j3, const std::string& b) {
        return build_ssh_chain(n, j0, j1, j3, boundary_of(b));
    }, py::arg("dimers"), py::arg("j0"), py::arg("j1"), py::arg("j3") = 0.0, py::arg("boundary") = "obc");
    m.def("comb", &build_comb, py::arg("dimers"), py::arg("j0"), py::arg("j1"));
    m.def("random_cluster", &build_random_cluster, py::arg("dimers"), py::arg("j0"), py::arg("j1"), py::arg("seed"));
    m.def("tetramer_grid", &build_tetramer_grid, py::arg("nx"), py::arg("ny"), py::arg("j0"), py::arg("j1"));
    m.def("octamer_grid", &build_octamer_grid, py::arg("nx"), py::arg("ny"), py::arg("nz"), py::arg("j0"),
          py::arg("j1"));

    m.def("sector_states",
          [](int sites, int particles) {
              const BasisSector sector = enumerate_sector(sites, particles);
              return std::vector<Bits>(sector.states().begin(), sector.states().end());
          },
          py::arg("sites"), py::arg("particles"));
    m.def("binomial", &binomial);
    m.def("hamiltonian", [](const LatticeSpec& s) { return assemble_hamiltonian(s, half_sector(s)).to_eigen(); },
          "Half-filled sector Hamiltonian as a scipy.sparse matrix.");

    m.def("split", &split_summary, py::arg("lattice"), "Hypercube versus thermal split of the half-filled sector.");
    m.def("hyper_dimension", &hyper_dimension);
    m.def("escape_coupling", [](const LatticeSpec& s, Bits state) { return escape_coupling(s, state); });
    m.def("ratio_closed_form", [](const std::string& kind, int nx, int ny, int nz, double j0, double j1) {
        static const std::map<std::string, RatioKind> kinds{{"chain", RatioKind::chain}, {"2d", RatioKind::grid2d},
                                                            {"3d", RatioKind::grid3d}, {"md", RatioKind::md_limit}};
        const auto it = kinds.find(kind);
        if (it == kinds.end()) throw ConfigError("ratio kind must be chain, 2d, 3d or md");
        return ratio_closed_form({it->second, nx, ny, nz}, j0, j1);
    }, py::arg("kind"), py::arg("nx"), py::arg("ny") = 1, py::arg("nz") = 1, py::arg("j0") = 1.0, py::arg("j1") = 1.0);

    m.def("eigh", [](const Eigen::MatrixXd& a, bool vectors) {
        const EigenSystem es = diagonalize_dense(a, vectors);
        return py::make_tuple(es.energies, es.vectors);
    }, py::arg("matrix"), py::arg("vectors") = true);
    m.def("spectrum", &spectrum, py::arg("lattice"), py::arg("probe") = py::none(), py::arg("cap") = 20000,
          "Energies, probe overlaps, half-cut entropies and symmetry sectors of every eigenstate.");
    m.def("mean_gap_ratio", [](const std::vector<double>& levels) { return mean_gap_ratio(levels).mean; });
    m.def("tower_centers", [](const std::vector<double>& e, const std::vector<double>& w, double threshold,
                              double window) {
        if (e.size() != w.size()) throw ContractError("energies and weights differ in length");
        std::vector<OverlapPoint> pts;
        for (std::size_t k = 0; k < e.size(); ++k) pts.push_back({e[k], w[k]});
        std::vector<double> out;
        for (const Tower& t : extract_towers(pts, {threshold, window})) out.push_back(t.center);
        return out;
    }, py::arg("energies"), py::arg("weights"), py::arg("threshold") = 1e-3, py::arg("window") = 0.5);
    m.def("fit_lambda", [](const std::vector<std::pair<double, double>>& s) {
        const TowerFit f = fit_lambda(s);
        return py::make_tuple(f.lambda, f.residual);
    });

    m.def("evolve", &fidelity_trace, py::arg("lattice"), py::arg("initial") = py::none(), py::arg("t_max") = 40.0,
          py::arg("points") = 2000, "Fidelity and half-cut entropy of a Fock state under Krylov propagation.");
    m.def("hda", &hda_density, py::arg("lattice"), py::arg("probe") = py::none(), py::arg("eta") = 0.0,
          py::arg("points") = 0, "Hypercube decay approximation of a probe state's local density of states.");

    m.def("run", [](const std::string& command, const std::string& config, const std::filesystem::path& out,
                    std::size_t threads) {
        RunOptions o;
        o.out_dir = out;
        o.threads = threads;
        o.command = command;
        py::gil_scoped_release release;
        return run_command(command, ExperimentConfig::parse(config), o);
    }, py::arg("command"), py::arg("config"), py::arg("out"), py::arg("threads") = 1,
       "Runs a CLI subcommand from config text; returns the exit code.");

    m.attr("__version__") = "1.0.0";
}
