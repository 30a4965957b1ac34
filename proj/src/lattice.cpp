// Copyright 2026 The Hyperscar Authors
// SPDX-License-Identifier: Apache-2.0

#include "hyperscar/lattice.hpp"

#include "hyperscar/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <utility>

namespace hyperscar {

std::string_view to_string(EdgeClass c) noexcept {
    switch (c) {
        case EdgeClass::intra: return "intra";
        case EdgeClass::inter: return "inter";
        case EdgeClass::long_range: return "long-range";
    }
    return "?";
}

std::string_view to_string(Boundary b) noexcept { return b == Boundary::open ? "obc" : "pbc"; }

std::string_view to_string(Geometry g) noexcept {
    switch (g) {
        case Geometry::ssh: return "ssh";
        case Geometry::comb: return "comb";
        case Geometry::random_cluster: return "random-cluster";
        case Geometry::tetramer_grid: return "tetramer-2d";
        case Geometry::octamer_grid: return "octamer-3d";
        case Geometry::custom: return "custom";
    }
    return "?";
}

std::string_view to_string(UnitKind k) noexcept {
    switch (k) {
        case UnitKind::dimer: return "dimer";
        case UnitKind::tetramer: return "tetramer";
        case UnitKind::octamer: return "octamer";
    }
    return "?";
}

int LatticeSpec::unit_of(int site) const {
    for (std::size_t u = 0; u < units.size(); ++u) {
        if (std::find(units[u].begin(), units[u].end(), site) != units[u].end()) return static_cast<int>(u);
    }
    throw ContractError("site " + std::to_string(site) + " belongs to no unit");
}

int LatticeSpec::unit_half_filling() const noexcept {
    switch (unit_kind) {
        case UnitKind::dimer: return 1;
        case UnitKind::tetramer: return 2;
        case UnitKind::octamer: return 4;
    }
    return 1;
}

void LatticeSpec::validate() const {
    if (sites <= 0 || sites > kMaxLatticeSites) throw GeometryError("lattice needs 1..64 sites");
    std::vector<int> owner(static_cast<std::size_t>(sites), -1);
    for (std::size_t u = 0; u < units.size(); ++u) {
        for (int s : units[u]) {
            if (s < 0 || s >= sites) throw GeometryError("unit lists a site out of range");
            if (owner[static_cast<std::size_t>(s)] != -1) throw GeometryError("site assigned to two units");
            owner[static_cast<std::size_t>(s)] = static_cast<int>(u);
        }
    }
    if (std::find(owner.begin(), owner.end(), -1) != owner.end()) {
        throw GeometryError("site assigned to no unit");
    }
    std::set<std::pair<int, int>> seen;
    std::set<std::pair<int, int>> inter_units;
    std::vector<int> inter_degree(static_cast<std::size_t>(sites), 0);
    for (const Edge& e : edges) {
        if (e.u == e.v || e.u < 0 || e.v < 0 || e.u >= sites || e.v >= sites) {
            throw GeometryError("edge endpoints invalid");
        }
        if (!seen.insert(std::minmax(e.u, e.v)).second) throw GeometryError("duplicate undirected edge");
        const bool same = owner[static_cast<std::size_t>(e.u)] == owner[static_cast<std::size_t>(e.v)];
        if ((e.kind == EdgeClass::intra) != same) {
            throw GeometryError("edge class does not match unit membership");
        }
        if (!std::isfinite(e.amplitude)) throw GeometryError("non-finite hop amplitude");
        if (e.kind == EdgeClass::inter) {
            ++inter_degree[static_cast<std::size_t>(e.u)];
            ++inter_degree[static_cast<std::size_t>(e.v)];
            inter_units.insert(std::minmax(owner[static_cast<std::size_t>(e.u)], owner[static_cast<std::size_t>(e.v)]));
        }
    }
    if (geometry == Geometry::random_cluster) {
        if (std::any_of(inter_degree.begin(), inter_degree.end(), [](int d) { return d > 2; })) {
            throw GeometryError("random cluster site with more than two inter-dimer links");
        }
        std::size_t inter_count = 0;
        for (const Edge& e : edges) inter_count += e.kind == EdgeClass::inter ? 1 : 0;
        if (inter_count != inter_units.size()) throw GeometryError("two links between one dimer pair");
    }
    if (onsite.size() != static_cast<std::size_t>(sites)) throw GeometryError("onsite energies size mismatch");
}

namespace {

LatticeSpec dimer_skeleton(Geometry g, int dimers, double j0) {
    LatticeSpec spec;
    spec.geometry = g;
    spec.unit_kind = UnitKind::dimer;
    spec.nx = dimers;
    spec.sites = 2 * dimers;
    if (spec.sites > kMaxSites) throw CapacityError("more than 31 dimers do not fit a 63-bit state");
    spec.onsite.assign(static_cast<std::size_t>(spec.sites), 0.0);
    for (int a = 0; a < dimers; ++a) {
        spec.units.push_back({2 * a, 2 * a + 1});
        spec.site_labels.push_back("a" + std::to_string(a + 1));
        spec.site_labels.push_back("b" + std::to_string(a + 1));
        spec.edges.push_back({2 * a, 2 * a + 1, j0, EdgeClass::intra});
    }
    return spec;
}

int site_a(int dimer) { return 2 * dimer; }
int site_b(int dimer) { return 2 * dimer + 1; }

/// Adds an edge, merging same-class terms that land on an existing bond.
void add_or_merge(LatticeSpec& spec, Edge e) {
    for (Edge& f : spec.edges) {
        if (std::minmax(f.u, f.v) == std::minmax(e.u, e.v)) {
            if (f.kind != e.kind) throw GeometryError("hop terms of different classes coincide");
            f.amplitude += e.amplitude;
            return;
        }
    }
    spec.edges.push_back(e);
}

}  // namespace

LatticeSpec build_ssh_chain(int dimers, double j0, double j1, double j3, Boundary boundary) {
    if (dimers < 2) throw GeometryError("SSH chain needs at least 2 dimers");
    if (boundary == Boundary::periodic && dimers < 3) throw GeometryError("periodic SSH chain needs at least 3 dimers");
    LatticeSpec spec = dimer_skeleton(Geometry::ssh, dimers, j0);
    spec.boundary = boundary;
    const bool pbc = boundary == Boundary::periodic;
    auto wrap = [dimers](int a) { return a % dimers; };
    for (int a = 0; a < dimers; ++a) {
        if (a + 1 < dimers || pbc) add_or_merge(spec, {site_b(a), site_a(wrap(a + 1)), j1, EdgeClass::inter});
    }
    if (j3 != 0.0) {
        for (int a = 0; a < dimers; ++a) {
            if (a + 1 < dimers || pbc) add_or_merge(spec, {site_a(a), site_b(wrap(a + 1)), j3, EdgeClass::long_range});
        }
        for (int a = 0; a < dimers; ++a) {
            if (a + 2 < dimers || pbc) add_or_merge(spec, {site_b(a), site_a(wrap(a + 2)), j3, EdgeClass::long_range});
        }
    }
    spec.validate();
    return spec;
}

LatticeSpec build_comb(int dimers, double j0, double j1) {
    if (dimers < 2) throw GeometryError("comb needs at least 2 dimers");
    LatticeSpec spec = dimer_skeleton(Geometry::comb, dimers, j0);
    for (int a = 0; a + 1 < dimers; ++a) spec.edges.push_back({site_a(a), site_a(a + 1), j1, EdgeClass::inter});
    spec.validate();
    return spec;
}

LatticeSpec build_random_cluster(int dimers, double j0, double j1, std::uint64_t seed) {
    if (dimers < 2) throw GeometryError("random cluster needs at least 2 dimers");
    constexpr int kAttempts = 64;
    for (int attempt = 0; attempt < kAttempts; ++attempt) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(dimers), static_cast<std::uint32_t>(attempt)};
        std::mt19937_64 rng(seq);
        LatticeSpec spec = dimer_skeleton(Geometry::random_cluster, dimers, j0);
        spec.seed = seed;
        // x[d] = occupation of a_d in the collective state C; z(b_d) = 1 - x[d].
        std::vector<int> x(static_cast<std::size_t>(dimers), 0);
        std::vector<int> degree(static_cast<std::size_t>(spec.sites), 0);
        std::set<std::pair<int, int>> linked;
        auto occ = [&](int site) { return site % 2 == 0 ? x[static_cast<std::size_t>(site / 2)] : 1 - x[static_cast<std::size_t>(site / 2)]; };
        auto free_sites = [&](int d) {
            std::vector<int> out;
            for (int s : {site_a(d), site_b(d)}) {
                if (degree[static_cast<std::size_t>(s)] < 2) out.push_back(s);
            }
            return out;
        };
        auto pick = [&rng](const std::vector<int>& v) {
            return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
        };
        auto link = [&](int s, int t) {
            spec.edges.push_back({std::min(s, t), std::max(s, t), j1, EdgeClass::inter});
            ++degree[static_cast<std::size_t>(s)];
            ++degree[static_cast<std::size_t>(t)];
            linked.insert(std::minmax(s / 2, t / 2));
        };

        bool ok = true;
        // Spanning tree: each new dimer hangs off a random earlier dimer with a free site.
        for (int d = 1; d < dimers && ok; ++d) {
            std::vector<int> hosts;
            for (int h = 0; h < d; ++h) {
                if (!free_sites(h).empty()) hosts.push_back(h);
            }
            if (hosts.empty()) {
                ok = false;
                break;
            }
            const int host = pick(hosts);
            const int t = pick(free_sites(host));
            const int s = std::uniform_int_distribution<int>(0, 1)(rng) == 0 ? site_a(d) : site_b(d);
            // Fix the new dimer's parity so the link joins equal occupations.
            x[static_cast<std::size_t>(d)] = (s % 2 == 0) ? occ(t) : 1 - occ(t);
            link(s, t);
        }
        if (!ok) continue;
        // Extra links only where they keep the collective state consistent.
        const int extra_tries = dimers;
        for (int k = 0; k < extra_tries; ++k) {
            const int p = std::uniform_int_distribution<int>(0, dimers - 1)(rng);
            const int q = std::uniform_int_distribution<int>(0, dimers - 1)(rng);
            if (p == q || linked.count(std::minmax(p, q)) != 0) continue;
            const auto fp = free_sites(p);
            if (fp.empty()) continue;
            const int s = pick(fp);
            const int t = occ(site_a(q)) == occ(s) ? site_a(q) : site_b(q);
            if (degree[static_cast<std::size_t>(t)] >= 2) continue;
            link(s, t);
        }
        try {
            spec.validate();
        } catch (const GeometryError&) {
            continue;
        }
        return spec;
    }
    LatticeSpec chain = build_ssh_chain(dimers, j0, j1, 0.0, Boundary::open);
    chain.geometry = Geometry::random_cluster;
    chain.seed = seed;
    return chain;
}

LatticeSpec build_tetramer_grid(int nx, int ny, double j0, double j1) {
    if (nx < 1 || ny < 1) throw GeometryError("tetramer grid extents must be >= 1");
    LatticeSpec spec;
    spec.geometry = Geometry::tetramer_grid;
    spec.unit_kind = UnitKind::tetramer;
    spec.nx = nx;
    spec.ny = ny;
    spec.sites = 4 * nx * ny;
    if (spec.sites > kMaxLatticeSites) throw CapacityError("tetramer grid exceeds 64 sites");
    spec.onsite.assign(static_cast<std::size_t>(spec.sites), 0.0);
    auto site = [nx](int i, int j, int x, int y) { return 4 * (i + nx * j) + x + 2 * y; };
    static constexpr const char* kCorner[] = {"TL", "TR", "BL", "BR"};
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            std::vector<int> unit;
            for (int c = 0; c < 4; ++c) {
                unit.push_back(site(i, j, 0, 0) + c);
                spec.site_labels.push_back(std::string(kCorner[c]) + "(" + std::to_string(i) + "," + std::to_string(j) + ")");
            }
            spec.units.push_back(unit);
            spec.edges.push_back({site(i, j, 0, 0), site(i, j, 1, 0), j0, EdgeClass::intra});
            spec.edges.push_back({site(i, j, 0, 1), site(i, j, 1, 1), j0, EdgeClass::intra});
            spec.edges.push_back({site(i, j, 0, 0), site(i, j, 0, 1), j0, EdgeClass::intra});
            spec.edges.push_back({site(i, j, 1, 0), site(i, j, 1, 1), j0, EdgeClass::intra});
        }
    }
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            if (i + 1 < nx) {
                spec.edges.push_back({site(i, j, 1, 0), site(i + 1, j, 0, 0), j1, EdgeClass::inter});
                spec.edges.push_back({site(i, j, 1, 1), site(i + 1, j, 0, 1), j1, EdgeClass::inter});
            }
            if (j + 1 < ny) {
                spec.edges.push_back({site(i, j, 0, 1), site(i, j + 1, 0, 0), j1, EdgeClass::inter});
                spec.edges.push_back({site(i, j, 1, 1), site(i, j + 1, 1, 0), j1, EdgeClass::inter});
            }
        }
    }
    spec.validate();
    return spec;
}

LatticeSpec build_octamer_grid(int nx, int ny, int nz, double j0, double j1) {
    if (nx < 1 || ny < 1 || nz < 1) throw GeometryError("octamer grid extents must be >= 1");
    LatticeSpec spec;
    spec.geometry = Geometry::octamer_grid;
    spec.unit_kind = UnitKind::octamer;
    spec.nx = nx;
    spec.ny = ny;
    spec.nz = nz;
    spec.sites = 8 * nx * ny * nz;
    if (spec.sites > kMaxLatticeSites) throw CapacityError("octamer grid exceeds 64 sites");
    spec.onsite.assign(static_cast<std::size_t>(spec.sites), 0.0);
    auto unit = [nx, ny](int i, int j, int k) { return i + nx * (j + ny * k); };
    auto site = [&](int i, int j, int k, int c) { return 8 * unit(i, j, k) + c; };
    for (int k = 0; k < nz; ++k) {
        for (int j = 0; j < ny; ++j) {
            for (int i = 0; i < nx; ++i) {
                std::vector<int> members;
                for (int c = 0; c < 8; ++c) {
                    members.push_back(site(i, j, k, c));
                    spec.site_labels.push_back("o(" + std::to_string(i) + "," + std::to_string(j) + "," +
                                               std::to_string(k) + ")[" + std::to_string(c & 1) +
                                               std::to_string((c >> 1) & 1) + std::to_string((c >> 2) & 1) + "]");
                }
                spec.units.push_back(members);
            }
        }
    }
    for (int u = 0; u < nx * ny * nz; ++u) {
        for (int c = 0; c < 8; ++c) {
            for (int bit : {1, 2, 4}) {
                if ((c & bit) == 0) spec.edges.push_back({8 * u + c, 8 * u + (c | bit), j0, EdgeClass::intra});
            }
        }
    }
    for (int k = 0; k < nz; ++k) {
        for (int j = 0; j < ny; ++j) {
            for (int i = 0; i < nx; ++i) {
                for (int c = 0; c < 8; ++c) {
                    if ((c & 1) && i + 1 < nx) spec.edges.push_back({site(i, j, k, c), site(i + 1, j, k, c & ~1), j1, EdgeClass::inter});
                    if ((c & 2) && j + 1 < ny) spec.edges.push_back({site(i, j, k, c), site(i, j + 1, k, c & ~2), j1, EdgeClass::inter});
                    if ((c & 4) && k + 1 < nz) spec.edges.push_back({site(i, j, k, c), site(i, j, k + 1, c & ~4), j1, EdgeClass::inter});
                }
            }
        }
    }
    spec.validate();
    return spec;
}

namespace {

/// Union-find over dimers carrying the parity x_d XOR x_root.
struct ParityForest {
    std::vector<int> parent;
    std::vector<int> parity;

    explicit ParityForest(int n) : parent(static_cast<std::size_t>(n)), parity(static_cast<std::size_t>(n), 0) {
        std::iota(parent.begin(), parent.end(), 0);
    }

    std::pair<int, int> find(int d) {
        int p = 0;
        int r = d;
        while (parent[static_cast<std::size_t>(r)] != r) {
            p ^= parity[static_cast<std::size_t>(r)];
            r = parent[static_cast<std::size_t>(r)];
        }
        return {r, p};
    }

    /// Imposes x_a XOR x_b == rel; returns false on contradiction.
    bool unite(int a, int b, int rel) {
        auto [ra, pa] = find(a);
        auto [rb, pb] = find(b);
        if (ra == rb) return (pa ^ pb) == rel;
        parent[static_cast<std::size_t>(rb)] = ra;
        parity[static_cast<std::size_t>(rb)] = pa ^ pb ^ rel;
        return true;
    }
};

CollectiveStateSet dimer_collective(const LatticeSpec& spec, bool allow_frustrated) {
    const int n = spec.unit_count();
    ParityForest forest(n);
    bool frustrated = false;
    for (const Edge& e : spec.edges) {
        if (e.kind != EdgeClass::inter) continue;
        const int du = spec.unit_of(e.u);
        const int dv = spec.unit_of(e.v);
        // z(site) = x_d when the site is the unit's first member, 1 - x_d otherwise.
        const int fu = e.u == spec.units[static_cast<std::size_t>(du)][0] ? 0 : 1;
        const int fv = e.v == spec.units[static_cast<std::size_t>(dv)][0] ? 0 : 1;
        if (!forest.unite(du, dv, fu ^ fv)) frustrated = true;
    }
    if (frustrated && !allow_frustrated) return {};
    FockState c{0, spec.sites};
    for (int d = 0; d < n; ++d) {
        auto [root, p] = forest.find(d);
        const int xd = p ^ 1;  // roots occupy their first site
        const auto& u = spec.units[static_cast<std::size_t>(d)];
        c.bits |= Bits{1} << (xd ? u[0] : u[1]);
        (void)root;
    }
    const Bits all = spec.sites == 64 ? ~Bits{0} : (Bits{1} << spec.sites) - 1;
    FockState cp{all & ~c.bits, spec.sites};
    if (cp.bits > c.bits) std::swap(c, cp);
    return {{"C", c}, {"C'", cp}};
}

FockState from_rule(const LatticeSpec& spec, auto occupied) {
    FockState s{0, spec.sites};
    for (int site = 0; site < spec.sites; ++site) {
        if (occupied(site)) s.bits |= Bits{1} << site;
    }
    return s;
}

}  // namespace

CollectiveStateSet collective_states(const LatticeSpec& spec, bool allow_frustrated) {
    CollectiveStateSet out;
    const Bits all = spec.sites == 64 ? ~Bits{0} : (Bits{1} << spec.sites) - 1;
    auto add_pair = [&](const std::string& label, FockState s) {
        out[label] = s;
        out[label + "'"] = FockState{all & ~s.bits, spec.sites};
    };
    switch (spec.unit_kind) {
        case UnitKind::dimer:
            return dimer_collective(spec, allow_frustrated);
        case UnitKind::tetramer: {
            const int nx = spec.nx;
            auto coords = [nx](int site) {
                const int u = site / 4;
                const int c = site % 4;
                return std::array<int, 4>{u % nx, u / nx, c & 1, (c >> 1) & 1};
            };
            add_pair("C_par", from_rule(spec, [&](int s) {
                         auto [i, j, x, y] = coords(s);
                         return (x ^ (i & 1)) == 0;
                     }));
            add_pair("C_eq", from_rule(spec, [&](int s) {
                         auto [i, j, x, y] = coords(s);
                         return (y ^ (j & 1)) == 0;
                     }));
            add_pair("C_x", from_rule(spec, [&](int s) {
                         auto [i, j, x, y] = coords(s);
                         return (1 ^ x ^ y ^ (i & 1) ^ (j & 1)) == 1;
                     }));
            return out;
        }
        case UnitKind::octamer: {
            const int nx = spec.nx;
            const int ny = spec.ny;
            auto coords = [nx, ny](int site) {
                const int u = site / 8;
                const int c = site % 8;
                return std::array<int, 6>{u % nx, (u / nx) % ny, u / (nx * ny), c & 1, (c >> 1) & 1, (c >> 2) & 1};
            };
            out["C_star"] = from_rule(spec, [&](int s) {
                auto [i, j, k, x, y, z] = coords(s);
                return ((x ^ y ^ z ^ i ^ j ^ k) & 1) == 1;
            });
            add_pair("C_par", from_rule(spec, [&](int s) {
                         auto [i, j, k, x, y, z] = coords(s);
                         return (x ^ (i & 1)) == 0;
                     }));
            add_pair("C_eq", from_rule(spec, [&](int s) {
                         auto [i, j, k, x, y, z] = coords(s);
                         return (y ^ (j & 1)) == 0;
                     }));
            add_pair("C_x", from_rule(spec, [&](int s) {
                         auto [i, j, k, x, y, z] = coords(s);
                         return (1 ^ x ^ y ^ (i & 1) ^ (j & 1)) == 1;
                     }));
            return out;
        }
    }
    return out;
}

FockState collective_state(const LatticeSpec& spec, const std::string& label, bool allow_frustrated) {
    auto set = collective_states(spec, allow_frustrated);
    auto it = set.find(label);
    if (it == set.end()) {
        throw ContractError("collective state '" + label + "' does not exist for this " +
                            std::string(to_string(spec.geometry)) + " lattice");
    }
    return it->second;
}

std::vector<int> half_cut(const LatticeSpec& spec) {
    std::vector<int> cut;
    switch (spec.unit_kind) {
        case UnitKind::dimer: {
            const std::size_t half = (spec.units.size() + 1) / 2;
            for (std::size_t u = 0; u < half; ++u) cut.insert(cut.end(), spec.units[u].begin(), spec.units[u].end());
            std::sort(cut.begin(), cut.end());
            break;
        }
        case UnitKind::tetramer:
        case UnitKind::octamer: {
            const int per = spec.unit_kind == UnitKind::tetramer ? 4 : 8;
            const int half_x = (spec.nx + 1) / 2;
            for (int s = 0; s < spec.sites; ++s) {
                const int i = (s / per) % spec.nx;
                if (spec.nx > 1 ? i < half_x : (s % 2) == 0) cut.push_back(s);
            }
            break;
        }
    }
    return cut;
}

SparseHamiltonian assemble_hamiltonian(const LatticeSpec& spec, const BasisSector& sector) {
    if (sector.sites() != spec.sites) {
        throw ContractError("assemble_hamiltonian: sector has " + std::to_string(sector.sites()) +
                            " sites, lattice has " + std::to_string(spec.sites));
    }
    const std::size_t dim = sector.size();
    if (dim > std::size_t{0xFFFFFFFFu}) throw CapacityError("sector too large for 32-bit column indices");
    std::vector<Edge> hops;
    for (const Edge& e : spec.edges) {
        if (e.amplitude != 0.0) hops.push_back(e);
    }
    std::vector<std::size_t> row_ptr;
    row_ptr.reserve(dim + 1);
    row_ptr.push_back(0);
    std::vector<std::uint32_t> cols;
    std::vector<double> vals;
    std::vector<std::pair<std::uint32_t, double>> row;
    const auto states = sector.states();
    for (std::size_t r = 0; r < dim; ++r) {
        row.clear();
        const Bits s = states[r];
        double diag = 0.0;
        for (int i = 0; i < spec.sites; ++i) {
            if ((s >> i) & 1U) diag += spec.onsite[static_cast<std::size_t>(i)];
        }
        if (diag != 0.0) row.emplace_back(static_cast<std::uint32_t>(r), diag);
        for (const Edge& e : hops) {
            const Bits bu = (s >> e.u) & 1U;
            const Bits bv = (s >> e.v) & 1U;
            if (bu == bv) continue;
            const Bits t = s ^ ((Bits{1} << e.u) | (Bits{1} << e.v));
            const auto c = sector.rank(t);
            if (!c) throw ContractError("hop left the particle-number sector");
            row.emplace_back(static_cast<std::uint32_t>(*c), e.amplitude);
        }
        std::sort(row.begin(), row.end());
        for (const auto& [c, v] : row) {
            cols.push_back(c);
            vals.push_back(v);
        }
        row_ptr.push_back(cols.size());
    }
    return SparseHamiltonian(dim, std::move(row_ptr), std::move(cols), std::move(vals));
}

std::string to_json(const LatticeSpec& spec) {
    nlohmann::ordered_json j;
    j["format"] = "hyperscar.lattice";
    j["version"] = 1;
    j["geometry"] = to_string(spec.geometry);
    j["unit_kind"] = to_string(spec.unit_kind);
    j["boundary"] = to_string(spec.boundary);
    j["extent"] = {spec.nx, spec.ny, spec.nz};
    j["seed"] = spec.seed;
    j["sites"] = spec.sites;
    j["site_labels"] = spec.site_labels;
    j["units"] = spec.units;
    j["onsite"] = spec.onsite;
    auto edges = nlohmann::ordered_json::array();
    for (const Edge& e : spec.edges) {
        edges.push_back({{"u", e.u}, {"v", e.v}, {"J", e.amplitude}, {"class", to_string(e.kind)}});
    }
    j["edges"] = std::move(edges);
    return j.dump(2);
}

namespace {

template <typename Enum, std::size_t N>
Enum parse_enum(const std::string& text, const std::array<Enum, N>& options, const char* what) {
    for (Enum e : options) {
        if (to_string(e) == text) return e;
    }
    throw ConfigError(std::string("unknown ") + what + " '" + text + "'");
}

}  // namespace

LatticeSpec lattice_from_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("lattice JSON: ") + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != "hyperscar.lattice") throw ConfigError("not a hyperscar lattice file");
        if (j.at("version").get<int>() != 1) throw ConfigError("unsupported lattice file version");
        LatticeSpec spec;
        spec.geometry = parse_enum(j.at("geometry").get<std::string>(),
                                   std::array{Geometry::ssh, Geometry::comb, Geometry::random_cluster,
                                              Geometry::tetramer_grid, Geometry::octamer_grid, Geometry::custom},
                                   "geometry");
        spec.unit_kind = parse_enum(j.at("unit_kind").get<std::string>(),
                                    std::array{UnitKind::dimer, UnitKind::tetramer, UnitKind::octamer}, "unit kind");
        spec.boundary = parse_enum(j.at("boundary").get<std::string>(),
                                   std::array{Boundary::open, Boundary::periodic}, "boundary");
        const auto ext = j.at("extent").get<std::vector<int>>();
        if (ext.size() != 3) throw ConfigError("extent must have three entries");
        spec.nx = ext[0];
        spec.ny = ext[1];
        spec.nz = ext[2];
        spec.seed = j.value("seed", std::uint64_t{0});
        spec.sites = j.at("sites").get<int>();
        spec.site_labels = j.at("site_labels").get<std::vector<std::string>>();
        spec.units = j.at("units").get<std::vector<std::vector<int>>>();
        spec.onsite = j.at("onsite").get<std::vector<double>>();
        for (const auto& e : j.at("edges")) {
            spec.edges.push_back({e.at("u").get<int>(), e.at("v").get<int>(), e.at("J").get<double>(),
                                  parse_enum(e.at("class").get<std::string>(),
                                             std::array{EdgeClass::intra, EdgeClass::inter, EdgeClass::long_range},
                                             "edge class")});
        }
        spec.validate();
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("lattice JSON: ") + e.what());
    }
}

}  // namespace hyperscar
