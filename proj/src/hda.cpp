// Copyright 2026 The Hyperscar Authors
// SPDX-License-Identifier: Apache-2.0

#include "hyperscar/hda.hpp"

#include "hyperscar/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hyperscar {

namespace {

using cplx = std::complex<double>;

}  // namespace

HdaConfig HdaConfig::defaults(int units, double j0) {
    HdaConfig cfg;
    const double half = std::abs(j0) * (units + 2);
    const std::size_t points = 2001;
    cfg.grid.resize(points);
    for (std::size_t k = 0; k < points; ++k) {
        cfg.grid[k] = -half + 2.0 * half * static_cast<double>(k) / static_cast<double>(points - 1);
    }
    cfg.eta = 0.05 * std::abs(j0);
    return cfg;
}

void HdaConfig::validate() const {
    if (grid.empty()) throw ConfigError("hda grid is empty");
    for (std::size_t k = 1; k < grid.size(); ++k) {
        if (!(grid[k] > grid[k - 1])) throw ConfigError("hda grid must be strictly ascending");
    }
    if (!(eta > 0.0)) throw ConfigError("hda eta must be positive");
    if (!(damping > 0.0 && damping <= 1.0)) throw ConfigError("hda damping must lie in (0, 1]");
    if (!(tol > 0.0)) throw ConfigError("hda tol must be positive");
    if (max_iters < 1) throw ConfigError("hda max_iters must be at least 1");
}

std::size_t HypercubeModel::index_of(Bits s) const {
    const auto it = std::lower_bound(states.begin(), states.end(), s);
    if (it == states.end() || *it != s) throw ContractError("state is not in the hypercube");
    return static_cast<std::size_t>(it - states.begin());
}

HypercubeModel hypercube_model(const LatticeSpec& spec, std::size_t cap) {
    const std::uint64_t dim = hyper_dimension(spec);
    if (dim == 0) throw GeometryError("lattice has no hypercube");
    if (dim > cap) {
        throw CapacityError("hypercube dimension " + std::to_string(dim) + " exceeds the cap of " + std::to_string(cap));
    }
    HypercubeModel m;
    m.states.reserve(dim);
    for_each_hyper_state(spec, [&](Bits s) { m.states.push_back(s); });
    std::sort(m.states.begin(), m.states.end());
    const auto n = static_cast<Eigen::Index>(m.states.size());
    m.h = Eigen::MatrixXd::Zero(n, n);
    m.gamma.assign(m.states.size(), 0.0);
    for (Eigen::Index p = 0; p < n; ++p) {
        const Bits s = m.states[static_cast<std::size_t>(p)];
        m.h(p, p) = 0.0;
        for (int site = 0; site < spec.sites; ++site) {
            if ((s >> site) & 1U) m.h(p, p) += spec.onsite[static_cast<std::size_t>(site)];
        }
        for (const Edge& e : spec.edges) {
            if (e.amplitude == 0.0 || ((s >> e.u) & 1U) == ((s >> e.v) & 1U)) continue;
            const Bits t = s ^ ((Bits{1} << e.u) | (Bits{1} << e.v));
            const auto it = std::lower_bound(m.states.begin(), m.states.end(), t);
            if (it != m.states.end() && *it == t) {
                m.h(p, it - m.states.begin()) += e.amplitude;
            } else {
                m.gamma[static_cast<std::size_t>(p)] += std::abs(e.amplitude);
            }
        }
    }
    return m;
}

Eigen::MatrixXd hypercube_hamiltonian(const SubspaceSplit& split, const SparseHamiltonian& h) {
    const auto n = static_cast<Eigen::Index>(split.hyper.size());
    Eigen::MatrixXd hh = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto cols = h.row_cols(split.hyper[static_cast<std::size_t>(i)]);
        const auto vals = h.row_values(split.hyper[static_cast<std::size_t>(i)]);
        for (std::size_t k = 0; k < cols.size(); ++k) {
            if (const auto j = split.hyper_index(cols[k])) hh(i, static_cast<Eigen::Index>(*j)) = vals[k];
        }
    }
    return hh;
}

DysonSolution solve_dyson(const Eigen::MatrixXd& hh, const std::vector<double>& gamma, const HdaConfig& config) {
    config.validate();
    const auto n = hh.rows();
    if (hh.cols() != n || static_cast<Eigen::Index>(gamma.size()) != n) {
        throw ContractError("solve_dyson: gamma is not aligned with the hypercube Hamiltonian");
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hh);
    const Eigen::VectorXd& eps = eig.eigenvalues();
    const Eigen::MatrixXd weights = eig.eigenvectors().array().square().matrix();  // U_pk^2

    DysonSolution sol;
    sol.grid = config.grid;
    const auto ng = static_cast<Eigen::Index>(config.grid.size());
    sol.sigma = Eigen::MatrixXcd::Zero(n, ng);
    sol.iterations.assign(config.grid.size(), 0);
    sol.residual.assign(config.grid.size(), 0.0);
    sol.converged.assign(config.grid.size(), 1);
    sol.causal.assign(config.grid.size(), 1);

    Eigen::VectorXcd inv(n);
    for (Eigen::Index g = 0; g < ng; ++g) {
        const cplx z(config.grid[static_cast<std::size_t>(g)], config.eta);
        for (Eigen::Index k = 0; k < n; ++k) inv[k] = 1.0 / (z - eps[k]);
        const Eigen::VectorXcd g0 = weights.cast<cplx>() * inv;
        for (Eigen::Index p = 0; p < n; ++p) {
            const double gp = gamma[static_cast<std::size_t>(p)];
            if (gp == 0.0) continue;
            const double g2 = gp * gp;
            // Sherman-Morrison: [(z - H - s|p><p|)^{-1}]_pp = g0 / (1 - s g0).
            cplx s = 0.0;
            double res = 0.0;
            int it = 0;
            for (; it < config.max_iters; ++it) {
                const cplx update = g2 * g0[p] / (1.0 - s * g0[p]);
                res = std::abs(update - s);
                if (res <= config.tol) {
                    s = update;
                    break;
                }
                s = (1.0 - config.damping) * s + config.damping * update;
            }
            res = std::abs(g2 * g0[p] / (1.0 - s * g0[p]) - s);
            sol.sigma(p, g) = s;
            auto& iters = sol.iterations[static_cast<std::size_t>(g)];
            iters = std::max(iters, it + 1);
            auto& worst = sol.residual[static_cast<std::size_t>(g)];
            worst = std::max(worst, res);
            if (!(res <= config.tol)) sol.converged[static_cast<std::size_t>(g)] = 0;
            if (s.imag() > 1e-14) sol.causal[static_cast<std::size_t>(g)] = 0;
        }
    }
    return sol;
}

double HdaResult::converged_fraction() const {
    if (converged.empty()) return 0.0;
    const auto ok = std::count(converged.begin(), converged.end(), char{1});
    return static_cast<double>(ok) / static_cast<double>(converged.size());
}

HdaResult spectral_density(const Eigen::MatrixXd& hh, const DysonSolution& sigma, const HdaConfig& config,
                           const std::vector<std::size_t>& probes) {
    const auto n = hh.rows();
    if (sigma.sigma.rows() != n || sigma.grid != config.grid) {
        throw ContractError("spectral_density: self-energies were solved on a different grid or basis");
    }
    for (std::size_t p : probes) {
        if (p >= static_cast<std::size_t>(n)) throw ContractError("spectral_density: probe outside the hypercube");
    }
    HdaResult out;
    out.grid = config.grid;
    out.probes = probes;
    out.dos.assign(probes.size(), std::vector<double>(config.grid.size(), 0.0));
    out.iterations = sigma.iterations;
    out.residual = sigma.residual;
    out.converged.resize(config.grid.size());
    Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(n, static_cast<Eigen::Index>(probes.size()));
    for (std::size_t j = 0; j < probes.size(); ++j) rhs(static_cast<Eigen::Index>(probes[j]), static_cast<Eigen::Index>(j)) = 1.0;
    for (std::size_t g = 0; g < config.grid.size(); ++g) {
        const cplx z(config.grid[g], config.eta);
        Eigen::MatrixXcd a = -hh.cast<cplx>();
        for (Eigen::Index p = 0; p < n; ++p) a(p, p) += z - sigma.sigma(p, static_cast<Eigen::Index>(g));
        const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
        const Eigen::MatrixXcd x = lu.solve(rhs);
        bool finite = x.allFinite();
        for (std::size_t j = 0; j < probes.size() && finite; ++j) {
            out.dos[j][g] = -x(static_cast<Eigen::Index>(probes[j]), static_cast<Eigen::Index>(j)).imag() / std::numbers::pi;
        }
        if (!finite) {
            for (auto& d : out.dos) d[g] = 0.0;
        }
        out.converged[g] = static_cast<char>(finite && sigma.converged[g] && sigma.causal[g]);
    }
    return out;
}

std::vector<double> lorentzian_density(const Eigen::MatrixXd& hh, std::size_t probe, const std::vector<double>& grid,
                                       double eta) {
    if (probe >= static_cast<std::size_t>(hh.rows())) throw ContractError("lorentzian_density: probe outside the hypercube");
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hh);
    std::vector<double> out(grid.size(), 0.0);
    const auto p = static_cast<Eigen::Index>(probe);
    for (std::size_t g = 0; g < grid.size(); ++g) {
        double a = 0.0;
        for (Eigen::Index k = 0; k < hh.rows(); ++k) {
            const double w = eig.eigenvectors()(p, k) * eig.eigenvectors()(p, k);
            const double d = grid[g] - eig.eigenvalues()[k];
            a += w * eta / (std::numbers::pi * (d * d + eta * eta));
        }
        out[g] = a;
    }
    return out;
}

std::vector<Peak> tower_peaks(const HdaResult& result, std::size_t probe_slot, double min_prominence) {
    if (probe_slot >= result.dos.size()) throw ContractError("tower_peaks: probe slot out of range");
    if (result.converged_fraction() < 0.9) throw ContractError("tower_peaks: fewer than 90% of grid points converged");
    const auto& a = result.dos[probe_slot];
    const auto& e = result.grid;
    const double top = *std::max_element(a.begin(), a.end());
    std::vector<Peak> peaks;
    for (std::size_t k = 1; k + 1 < a.size(); ++k) {
        if (!result.converged[k]) continue;
        if (!(a[k] > a[k - 1] && a[k] >= a[k + 1])) continue;
        if (a[k] < min_prominence * top) continue;
        // Vertex of the parabola through the three samples.
        const double x0 = e[k - 1];
        const double x1 = e[k];
        const double x2 = e[k + 1];
        const double d1 = (a[k] - a[k - 1]) / (x1 - x0);
        const double d2 = (a[k + 1] - a[k]) / (x2 - x1);
        const double curv = (d2 - d1) / (x2 - x0);
        Peak pk{x1, a[k]};
        if (curv < 0.0) {
            pk.energy = 0.5 * (x0 + x1) - d1 / (2.0 * curv);
            pk.energy = std::clamp(pk.energy, x0, x2);
        }
        peaks.push_back(pk);
    }
    return peaks;
}

double integrated_weight(const HdaResult& result, std::size_t probe_slot, double lo, double hi) {
    if (probe_slot >= result.dos.size()) throw ContractError("integrated_weight: probe slot out of range");
    const auto& a = result.dos[probe_slot];
    const auto& e = result.grid;
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < e.size(); ++k) {
        const double x0 = std::max(e[k], lo);
        const double x1 = std::min(e[k + 1], hi);
        if (x1 <= x0) continue;
        const double h = e[k + 1] - e[k];
        const double f0 = a[k] + (a[k + 1] - a[k]) * (x0 - e[k]) / h;
        const double f1 = a[k] + (a[k + 1] - a[k]) * (x1 - e[k]) / h;
        total += 0.5 * (f0 + f1) * (x1 - x0);
    }
    return total;
}

double sum_rule(const HdaResult& result, std::size_t probe_slot) {
    return integrated_weight(result, probe_slot, result.grid.front(), result.grid.back());
}

}  // namespace hyperscar
