// Copyright 2026 The Hyperscar Authors
// SPDX-License-Identifier: Apache-2.0

#include "hyperscar/dynamics.hpp"

#include "hyperscar/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <set>

namespace hyperscar {

namespace {

using cplx = std::complex<double>;

double expectation(const SparseHamiltonian& h, const Eigen::VectorXcd& psi, Eigen::VectorXcd& work) {
    h.apply(std::span<const cplx>(psi.data(), static_cast<std::size_t>(psi.size())),
            std::span<cplx>(work.data(), static_cast<std::size_t>(work.size())));
    return psi.dot(work).real();
}

// Lanczos basis of the Krylov space of psi with full reorthogonalization.
struct KrylovBasis {
    Eigen::MatrixXcd v;
    Eigen::VectorXd alpha;
    Eigen::VectorXd beta;  // beta[j] couples v_j and v_{j+1}; beta[m-1] is the residual norm
    double norm0 = 0.0;
    int m = 0;
};

void build_krylov(const SparseHamiltonian& h, const Eigen::VectorXcd& psi, int max_dim, KrylovBasis& kb) {
    const auto n = psi.size();
    const int mmax = static_cast<int>(std::min<Eigen::Index>(max_dim, n));
    kb.v.resize(n, mmax);
    kb.alpha.setZero(mmax);
    kb.beta.setZero(mmax);
    kb.norm0 = psi.norm();
    kb.v.col(0) = psi / kb.norm0;
    Eigen::VectorXcd w(n);
    kb.m = mmax;
    for (int j = 0; j < mmax; ++j) {
        h.apply(std::span<const cplx>(kb.v.col(j).data(), static_cast<std::size_t>(n)),
                std::span<cplx>(w.data(), static_cast<std::size_t>(n)));
        kb.alpha[j] = kb.v.col(j).dot(w).real();
        for (int pass = 0; pass < 2; ++pass) {
            const Eigen::VectorXcd c = kb.v.leftCols(j + 1).adjoint() * w;
            w.noalias() -= kb.v.leftCols(j + 1) * c;
        }
        kb.beta[j] = w.norm();
        if (kb.beta[j] < 1e-13 * std::max(1.0, std::abs(kb.alpha[j]))) {
            kb.beta[j] = 0.0;
            kb.m = j + 1;
            return;
        }
        if (j + 1 < mmax) kb.v.col(j + 1) = w / kb.beta[j];
    }
}

// exp(-i T dt) e_1 for the tridiagonal Lanczos matrix.
Eigen::VectorXcd krylov_exp(const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>& eig, double dt) {
    const Eigen::MatrixXd& u = eig.eigenvectors();
    Eigen::VectorXcd phase(u.cols());
    for (Eigen::Index k = 0; k < u.cols(); ++k) phase[k] = std::exp(cplx(0.0, -eig.eigenvalues()[k] * dt)) * u(0, k);
    return u.cast<cplx>() * phase;
}

void advance(const SparseHamiltonian& h, Eigen::VectorXcd& psi, double dt, const KrylovOptions& opt, KrylovBasis& kb,
             std::size_t& steps) {
    double remaining = dt;
    while (remaining > 0.0) {
        build_krylov(h, psi, opt.max_dim, kb);
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(kb.m, kb.m);
        for (int j = 0; j < kb.m; ++j) {
            t(j, j) = kb.alpha[j];
            if (j + 1 < kb.m) t(j, j + 1) = t(j + 1, j) = kb.beta[j];
        }
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(t);
        const double residual = kb.beta[kb.m - 1];
        double step = remaining;
        Eigen::VectorXcd c;
        int halvings = 0;
        while (true) {
            c = krylov_exp(eig, step);
            const double err = kb.norm0 * residual * std::abs(c[kb.m - 1]);
            if (err <= opt.tol) break;
            if (++halvings > opt.max_halvings) {
                throw NumericalError("Krylov propagation did not reach tolerance " + std::to_string(opt.tol));
            }
            step *= 0.5;
        }
        psi = kb.norm0 * (kb.v.leftCols(kb.m) * c);
        remaining -= step;
        if (remaining < 1e-14 * dt) remaining = 0.0;
        ++steps;
    }
}

void check_times(std::span<const double> times) {
    if (times.empty()) throw ContractError("time grid is empty");
    if (times.front() != 0.0) throw ContractError("time grid must start at 0");
    for (std::size_t k = 1; k < times.size(); ++k) {
        if (!(times[k] > times[k - 1])) throw ContractError("time grid must be strictly ascending");
    }
}

}  // namespace

std::vector<double> time_grid(double t_max, std::size_t points) {
    if (points < 2 || !(t_max > 0.0)) throw ContractError("time grid needs t_max > 0 and at least 2 points");
    std::vector<double> t(points);
    for (std::size_t k = 0; k < points; ++k) {
        t[k] = t_max * static_cast<double>(k) / static_cast<double>(points - 1);
    }
    return t;
}

Eigen::VectorXcd basis_vector(const BasisSector& sector, const FockState& s) {
    const auto r = sector.rank(s);
    if (!r) throw ContractError("state " + s.to_string() + " is not in the sector");
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(sector.size()));
    v[static_cast<Eigen::Index>(*r)] = 1.0;
    return v;
}

DynamicsTrace evolve(const SparseHamiltonian& h, const Eigen::VectorXcd& psi0, std::span<const double> times,
                     const EvolveOptions& options) {
    check_times(times);
    if (static_cast<std::size_t>(psi0.size()) != h.dimension()) throw ContractError("evolve: state dimension mismatch");
    if (std::abs(psi0.norm() - 1.0) > 1e-10) throw ContractError("evolve: initial state is not normalized");
    DynamicsTrace tr;
    tr.times.assign(times.begin(), times.end());
    Eigen::VectorXcd psi = psi0;
    Eigen::VectorXcd work(psi0.size());
    const double e0 = expectation(h, psi0, work);
    const double scale = std::max(std::abs(e0), std::max(h.norm_bound(), 1e-300));
    KrylovBasis kb;
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (k > 0) advance(h, psi, times[k] - times[k - 1], options.krylov, kb, tr.krylov_steps);
        tr.fidelity.push_back(std::norm(psi0.dot(psi)));
        if (options.cut != nullptr) {
            tr.entropy.push_back(
                options.cut->entropy(std::span<const cplx>(psi.data(), static_cast<std::size_t>(psi.size()))));
        }
        tr.norm_drift = std::max(tr.norm_drift, std::abs(psi.norm() - 1.0));
        tr.energy_drift = std::max(tr.energy_drift, std::abs(expectation(h, psi, work) - e0) / scale);
        if (options.keep_snapshots) tr.snapshots.push_back(psi);
    }
    return tr;
}

DynamicsTrace evolve_exact(const EigenSystem& es, const Eigen::VectorXcd& psi0, std::span<const double> times,
                           const EvolveOptions& options) {
    check_times(times);
    if (!es.has_vectors()) throw ContractError("evolve_exact needs eigenvectors");
    if (psi0.size() != es.vectors.rows()) throw ContractError("evolve_exact: state dimension mismatch");
    DynamicsTrace tr;
    tr.times.assign(times.begin(), times.end());
    const Eigen::VectorXcd c = es.vectors.transpose().cast<cplx>() * psi0;
    const double e0 = (c.cwiseAbs2().array() * es.energies.array()).sum();
    const bool need_state = options.cut != nullptr || options.keep_snapshots;
    for (double t : times) {
        Eigen::VectorXcd ct(c.size());
        for (Eigen::Index k = 0; k < c.size(); ++k) ct[k] = std::exp(cplx(0.0, -es.energies[k] * t)) * c[k];
        tr.fidelity.push_back(std::norm(c.dot(ct)));
        tr.norm_drift = std::max(tr.norm_drift, std::abs(ct.norm() - 1.0));
        if (need_state) {
            const Eigen::VectorXcd psi = es.vectors.cast<cplx>() * ct;
            if (options.cut != nullptr) {
                tr.entropy.push_back(
                    options.cut->entropy(std::span<const cplx>(psi.data(), static_cast<std::size_t>(psi.size()))));
            }
            if (options.keep_snapshots) tr.snapshots.push_back(psi);
        }
        const double e = (ct.cwiseAbs2().array() * es.energies.array()).sum();
        const double scale = std::max(std::abs(e0), std::max(es.energies.cwiseAbs().maxCoeff(), 1e-300));
        tr.energy_drift = std::max(tr.energy_drift, std::abs(e - e0) / scale);
    }
    return tr;
}

std::vector<double> entropy_trace(const DynamicsTrace& trace, const Bipartition& cut) {
    if (trace.snapshots.size() != trace.times.size()) throw ContractError("entropy_trace needs stored snapshots");
    std::vector<double> s;
    s.reserve(trace.snapshots.size());
    for (const auto& psi : trace.snapshots) {
        s.push_back(cut.entropy(std::span<const cplx>(psi.data(), static_cast<std::size_t>(psi.size()))));
    }
    return s;
}

RevivalReport first_revival(const DynamicsTrace& trace, double delta_e, int sites) {
    if (!(delta_e > 0.0)) throw ContractError("first_revival: level spacing must be positive");
    if (sites <= 0) throw ContractError("first_revival: site count must be positive");
    const double period = 2.0 * std::numbers::pi / delta_e;
    RevivalReport rep;
    rep.window_lo = 0.5 * period;
    rep.window_hi = 1.5 * period;
    if (trace.times.empty() || trace.times.back() < rep.window_hi * (1.0 - 1e-12)) {
        throw ContractError("first_revival: trace ends before the revival window [" + std::to_string(rep.window_lo) +
                            ", " + std::to_string(rep.window_hi) + "]");
    }
    bool found = false;
    for (std::size_t k = 0; k < trace.times.size(); ++k) {
        const double t = trace.times[k];
        if (t < rep.window_lo || t > rep.window_hi * (1.0 + 1e-12)) continue;
        const double f = trace.fidelity[k];
        const bool tie = found && std::abs(f - rep.f1) <= 1e-12 && std::abs(t - period) < std::abs(rep.t1 - period);
        if (!found || f > rep.f1 + 1e-12 || tie) {
            rep.t1 = t;
            rep.f1 = trace.fidelity[k];
            found = true;
        }
    }
    if (!found) throw ContractError("first_revival: no samples inside the revival window");
    rep.log_density = std::log(rep.f1) / static_cast<double>(sites);
    return rep;
}

std::vector<FockState> random_fock_states(const BasisSector& sector, std::size_t count, std::uint64_t seed,
                                          std::span<const FockState> exclude) {
    std::set<Bits> skip;
    for (const FockState& s : exclude) skip.insert(s.bits);
    std::vector<Bits> pool;
    pool.reserve(sector.size());
    for (Bits b : sector.states()) {
        if (!skip.contains(b)) pool.push_back(b);
    }
    if (count > pool.size()) throw ContractError("random_fock_states: more states requested than available");
    std::mt19937_64 rng(seed);
    std::vector<FockState> out;
    out.reserve(count);
    // Partial Fisher-Yates with an explicit index draw keeps the sample portable.
    for (std::size_t k = 0; k < count; ++k) {
        const std::uint64_t span = pool.size() - k;
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % span;
        std::uint64_t draw = rng();
        while (draw >= limit) draw = rng();
        std::swap(pool[k], pool[k + draw % span]);
        out.push_back({pool[k], sector.sites()});
    }
    return out;
}

std::vector<OverlapPoint> local_spectral_measure(const SparseHamiltonian& h, const Eigen::VectorXd& psi, int steps) {
    const auto n = psi.size();
    if (static_cast<std::size_t>(n) != h.dimension()) throw ContractError("spectral measure: dimension mismatch");
    const int m = static_cast<int>(std::min<Eigen::Index>(steps, n));
    Eigen::MatrixXd v(n, m);
    std::vector<double> alpha;
    std::vector<double> beta;
    v.col(0) = psi.normalized();
    Eigen::VectorXd w(n);
    int used = m;
    for (int j = 0; j < m; ++j) {
        h.apply(std::span<const double>(v.col(j).data(), static_cast<std::size_t>(n)),
                std::span<double>(w.data(), static_cast<std::size_t>(n)));
        alpha.push_back(v.col(j).dot(w));
        for (int pass = 0; pass < 2; ++pass) {
            const Eigen::VectorXd c = v.leftCols(j + 1).transpose() * w;
            w.noalias() -= v.leftCols(j + 1) * c;
        }
        const double b = w.norm();
        if (j + 1 == m || b < 1e-12) {
            used = j + 1;
            break;
        }
        beta.push_back(b);
        v.col(j + 1) = w / b;
    }
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(used, used);
    for (int j = 0; j < used; ++j) {
        t(j, j) = alpha[static_cast<std::size_t>(j)];
        if (j + 1 < used) t(j, j + 1) = t(j + 1, j) = beta[static_cast<std::size_t>(j)];
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(t);
    std::vector<OverlapPoint> out(static_cast<std::size_t>(used));
    for (int k = 0; k < used; ++k) {
        const double u0 = eig.eigenvectors()(0, k);
        out[static_cast<std::size_t>(k)] = {eig.eigenvalues()[k], u0 * u0};
    }
    return out;
}

double unit_level_spacing(const LatticeSpec& spec) {
    if (spec.units.empty()) throw GeometryError("lattice has no units");
    const auto& unit = spec.units.front();
    std::vector<int> local(static_cast<std::size_t>(spec.sites), -1);
    for (std::size_t k = 0; k < unit.size(); ++k) local[static_cast<std::size_t>(unit[k])] = static_cast<int>(k);
    LatticeSpec single;
    single.unit_kind = spec.unit_kind;
    single.sites = static_cast<int>(unit.size());
    single.units = {std::vector<int>(unit.size())};
    std::iota(single.units[0].begin(), single.units[0].end(), 0);
    single.onsite.assign(unit.size(), 0.0);
    single.site_labels.assign(unit.size(), "");
    for (const Edge& e : spec.edges) {
        if (e.kind != EdgeClass::intra || local[static_cast<std::size_t>(e.u)] < 0) continue;
        single.edges.push_back({local[static_cast<std::size_t>(e.u)], local[static_cast<std::size_t>(e.v)], e.amplitude,
                                EdgeClass::intra});
    }
    const BasisSector sector(single.sites, single.sites / 2);
    const EigenSystem es = diagonalize(assemble_hamiltonian(single, sector), {.cap = 4096, .vectors = false});
    double gap = 0.0;
    for (Eigen::Index k = 1; k < es.energies.size(); ++k) {
        const double d = es.energies[k] - es.energies[k - 1];
        if (d > 1e-9 && (gap == 0.0 || d < gap)) gap = d;
    }
    if (gap == 0.0) throw GeometryError("single unit has a degenerate spectrum");
    return gap;
}

double revival_spacing(const SparseHamiltonian& h, const BasisSector& sector, const FockState& s,
                       const LatticeSpec& spec, int lanczos_steps) {
    const double fallback = unit_level_spacing(spec);
    const auto r = sector.rank(s);
    if (!r) throw ContractError("revival_spacing: state is not in the sector");
    Eigen::VectorXd psi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sector.size()));
    psi[static_cast<Eigen::Index>(*r)] = 1.0;
    try {
        const auto measure = local_spectral_measure(h, psi, lanczos_steps);
        auto towers = extract_towers(measure, {.threshold = 1e-3, .window = fallback / 4.0});
        std::stable_sort(towers.begin(), towers.end(),
                         [](const Tower& a, const Tower& b) { return a.weight > b.weight; });
        towers.resize(3);
        std::sort(towers.begin(), towers.end(),
                  [](const Tower& a, const Tower& b) { return a.center < b.center; });
        const double spacing = tower_spacing(towers);
        if (spacing > 0.5 * fallback && spacing < 2.0 * fallback) return spacing;
    } catch (const FitError&) {
    }
    return fallback;
}

RevivalReport collective_revival(const LatticeSpec& spec, const std::string& label, std::size_t points_per_period,
                                 const KrylovOptions& krylov) {
    const BasisSector sector(spec.sites, spec.half_filling());
    const SparseHamiltonian h = assemble_hamiltonian(spec, sector);
    const FockState c = collective_state(spec, label, true);
    const double de = revival_spacing(h, sector, c, spec);
    const double period = 2.0 * std::numbers::pi / de;
    const auto points = static_cast<std::size_t>(1.5 * static_cast<double>(points_per_period)) + 1;
    const auto times = time_grid(1.5 * period, points);
    EvolveOptions opts;
    opts.krylov = krylov;
    const DynamicsTrace tr = evolve(h, basis_vector(sector, c), times, opts);
    return first_revival(tr, de, spec.sites);
}

std::vector<ScalingPoint> scaling_sweep(const ScalingParams& params, std::span<const int> sizes) {
    std::vector<ScalingPoint> out;
    for (int n : sizes) {
        std::vector<LatticeSpec> lattices;
        switch (params.family) {
            case Geometry::ssh:
                lattices.push_back(build_ssh_chain(n, params.j0, params.j1, params.j3, params.boundary));
                break;
            case Geometry::comb:
                lattices.push_back(build_comb(n, params.j0, params.j1));
                break;
            case Geometry::random_cluster:
                if (params.seeds == 0) throw ContractError("scaling_sweep: at least one cluster seed is needed");
                for (std::size_t k = 0; k < params.seeds; ++k) {
                    lattices.push_back(build_random_cluster(n, params.j0, params.j1, params.seed + k));
                }
                break;
            default:
                throw ContractError("scaling_sweep supports the ssh, comb and random-cluster families");
        }
        ScalingPoint pt;
        pt.size = n;
        pt.sites = lattices.front().sites;
        pt.inv_sites = 1.0 / pt.sites;
        pt.thermal = -std::log(static_cast<double>(binomial(pt.sites, pt.sites / 2))) / pt.sites;
        std::vector<double> dens;
        for (const LatticeSpec& spec : lattices) {
            const RevivalReport rep = collective_revival(spec, "C", params.points_per_period, params.krylov);
            dens.push_back(rep.log_density);
            pt.t1 += rep.t1;
            pt.f1 += rep.f1;
        }
        const double count = static_cast<double>(dens.size());
        pt.samples = dens.size();
        pt.log_density = std::accumulate(dens.begin(), dens.end(), 0.0) / count;
        pt.t1 /= count;
        pt.f1 /= count;
        if (dens.size() > 1) {
            double ss = 0.0;
            for (double d : dens) ss += (d - pt.log_density) * (d - pt.log_density);
            pt.std_error = std::sqrt(ss / (count - 1.0)) / std::sqrt(count);
        }
        out.push_back(pt);
    }
    return out;
}

}  // namespace hyperscar
