// Copyright 2026 The Hyperscar Authors
// SPDX-License-Identifier: Apache-2.0

#include "hyperscar/subspace.hpp"

#include "hyperscar/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

namespace hyperscar {

namespace {

std::vector<Bits> unit_masks(const LatticeSpec& spec) {
    std::vector<Bits> masks;
    masks.reserve(spec.units.size());
    for (const auto& unit : spec.units) {
        Bits m = 0;
        for (int s : unit) m |= Bits{1} << s;
        masks.push_back(m);
    }
    return masks;
}

// Half-filled local configurations of one unit, in global bit positions.
std::vector<Bits> local_configs(Bits mask) {
    const int k = std::popcount(mask);
    if (k % 2 != 0) throw GeometryError("units with an odd number of sites have no half filling");
    std::vector<Bits> out;
    const int size = k;
    for (Bits local = 0; local < (Bits{1} << size); ++local) {
        if (std::popcount(local) != size / 2) continue;
        Bits global = 0;
        Bits m = mask;
        for (int i = 0; i < size; ++i) {
            const int site = std::countr_zero(m);
            if ((local >> i) & 1U) global |= Bits{1} << site;
            m &= m - 1;
        }
        out.push_back(global);
    }
    return out;
}

Bits edge_mask(const Edge& e) { return (Bits{1} << e.u) | (Bits{1} << e.v); }

bool hoppable(Bits s, const Edge& e) { return ((s >> e.u) & 1U) != ((s >> e.v) & 1U); }

void tally_classes(HoppingCounts& c, const LatticeSpec& spec) {
    c.intra = c.inter = c.long_range = 0;
    for (std::size_t k = 0; k < spec.edges.size(); ++k) {
        switch (spec.edges[k].kind) {
            case EdgeClass::intra: c.intra += c.per_edge[k]; break;
            case EdgeClass::inter: c.inter += c.per_edge[k]; break;
            case EdgeClass::long_range: c.long_range += c.per_edge[k]; break;
        }
    }
}

}  // namespace

std::optional<std::size_t> SubspaceSplit::hyper_index(std::size_t rank) const noexcept {
    const auto it = std::lower_bound(hyper.begin(), hyper.end(), rank);
    if (it == hyper.end() || *it != rank) return std::nullopt;
    return static_cast<std::size_t>(it - hyper.begin());
}

bool is_hyper_state(const LatticeSpec& spec, Bits s) {
    for (const auto& unit : spec.units) {
        int occ = 0;
        for (int site : unit) occ += static_cast<int>((s >> site) & 1U);
        if (2 * occ != static_cast<int>(unit.size())) return false;
    }
    return true;
}

std::uint64_t hyper_dimension(const LatticeSpec& spec) {
    std::uint64_t d = 1;
    for (const auto& unit : spec.units) {
        const int k = static_cast<int>(unit.size());
        if (k % 2 != 0) return 0;
        d *= binomial(k, k / 2);
    }
    return d;
}

void for_each_hyper_state(const LatticeSpec& spec, const std::function<void(Bits)>& fn) {
    const auto masks = unit_masks(spec);
    std::vector<std::vector<Bits>> configs;
    configs.reserve(masks.size());
    for (Bits m : masks) configs.push_back(local_configs(m));
    const std::size_t nu = configs.size();
    if (nu == 0) return;
    std::vector<std::size_t> digit(nu, 0);
    std::vector<Bits> prefix(nu + 1, 0);
    for (std::size_t u = 0; u < nu; ++u) prefix[u + 1] = prefix[u] | configs[u][0];
    while (true) {
        fn(prefix[nu]);
        std::size_t u = nu;
        while (u > 0) {
            --u;
            if (++digit[u] < configs[u].size()) break;
            digit[u] = 0;
            if (u == 0) return;
        }
        for (std::size_t w = u; w < nu; ++w) prefix[w + 1] = prefix[w] | configs[w][digit[w]];
    }
}

SubspaceSplit identify_hyperpolyhedron(const LatticeSpec& spec, const BasisSector& sector) {
    return identify_hyperpolyhedron(spec, sector, assemble_hamiltonian(spec, sector));
}

SubspaceSplit identify_hyperpolyhedron(const LatticeSpec& spec, const BasisSector& sector, const SparseHamiltonian& h) {
    if (sector.sites() != spec.sites) throw ContractError("identify_hyperpolyhedron: sector does not match the lattice");
    if (h.dimension() != sector.size()) throw ContractError("identify_hyperpolyhedron: operator does not match the sector");
    SubspaceSplit split;
    const auto states = sector.states();
    for (std::size_t r = 0; r < states.size(); ++r) {
        (is_hyper_state(spec, states[r]) ? split.hyper : split.thermal).push_back(r);
    }
    split.gamma = escape_coupling(split, h);
    return split;
}

std::vector<double> escape_coupling(const SubspaceSplit& split, const SparseHamiltonian& h) {
    std::vector<char> in_hyper(h.dimension(), 0);
    for (std::size_t r : split.hyper) in_hyper.at(r) = 1;
    std::vector<double> gamma(split.hyper.size(), 0.0);
    for (std::size_t i = 0; i < split.hyper.size(); ++i) {
        const auto cols = h.row_cols(split.hyper[i]);
        const auto vals = h.row_values(split.hyper[i]);
        for (std::size_t k = 0; k < cols.size(); ++k) {
            if (!in_hyper[cols[k]]) gamma[i] += std::abs(vals[k]);
        }
    }
    return gamma;
}

std::vector<double> escape_coupling(const SubspaceSplit& split, const LatticeSpec& spec, const BasisSector& sector) {
    return escape_coupling(split, assemble_hamiltonian(spec, sector));
}

double escape_coupling(const LatticeSpec& spec, Bits s) {
    double gamma = 0.0;
    for (const Edge& e : spec.edges) {
        if (e.amplitude == 0.0 || !hoppable(s, e)) continue;
        if (!is_hyper_state(spec, s ^ edge_mask(e))) gamma += std::abs(e.amplitude);
    }
    return gamma;
}

HoppingSums hopping_sums(const SubspaceSplit& split, const SparseHamiltonian& h) {
    std::vector<char> in_hyper(h.dimension(), 0);
    for (std::size_t r : split.hyper) in_hyper.at(r) = 1;
    HoppingSums out;
    for (std::size_t p : split.hyper) {
        const auto cols = h.row_cols(p);
        const auto vals = h.row_values(p);
        for (std::size_t k = 0; k < cols.size(); ++k) {
            const std::size_t q = cols[k];
            if (q == p) continue;
            if (!in_hyper[q]) {
                out.gamma_sum += std::abs(vals[k]);
            } else if (q > p) {
                out.theta += std::abs(vals[k]);
            }
        }
    }
    out.ratio = out.gamma_sum > 0.0 ? out.theta / out.gamma_sum : std::numeric_limits<double>::infinity();
    return out;
}

HoppingSums hopping_sums(const SubspaceSplit& split, const LatticeSpec& spec, const BasisSector& sector) {
    return hopping_sums(split, assemble_hamiltonian(spec, sector));
}

HoppingSums HoppingCounts::sums(const LatticeSpec& spec) const {
    if (per_edge.size() != spec.edges.size()) throw ContractError("hopping counts do not match the edge list");
    HoppingSums out;
    for (std::size_t k = 0; k < per_edge.size(); ++k) {
        const double w = std::abs(spec.edges[k].amplitude) * static_cast<double>(per_edge[k]);
        (spec.edges[k].kind == EdgeClass::intra ? out.theta : out.gamma_sum) += w;
    }
    out.ratio = out.gamma_sum > 0.0 ? out.theta / out.gamma_sum : std::numeric_limits<double>::infinity();
    return out;
}

HoppingCounts enumerate_hopping_pairs(const LatticeSpec& spec) {
    HoppingCounts c;
    c.per_edge.assign(spec.edges.size(), 0);
    std::vector<Bits> masks;
    for (const Edge& e : spec.edges) masks.push_back(edge_mask(e));
    for_each_hyper_state(spec, [&](Bits s) {
        for (std::size_t k = 0; k < masks.size(); ++k) {
            const Bits m = s & masks[k];
            if (m != 0 && m != masks[k]) ++c.per_edge[k];
        }
    });
    for (std::size_t k = 0; k < spec.edges.size(); ++k) {
        if (spec.edges[k].kind == EdgeClass::intra) c.per_edge[k] /= 2;
    }
    tally_classes(c, spec);
    return c;
}

HoppingCounts count_hopping_pairs(const LatticeSpec& spec) {
    const auto masks = unit_masks(spec);
    std::vector<std::vector<Bits>> configs;
    for (Bits m : masks) configs.push_back(local_configs(m));
    const std::uint64_t total = hyper_dimension(spec);
    auto occupied_count = [&](int unit, int site, bool occ) {
        std::uint64_t n = 0;
        for (Bits s : configs[static_cast<std::size_t>(unit)]) n += (((s >> site) & 1U) == static_cast<Bits>(occ)) ? 1 : 0;
        return n;
    };
    HoppingCounts c;
    c.per_edge.assign(spec.edges.size(), 0);
    for (std::size_t k = 0; k < spec.edges.size(); ++k) {
        const Edge& e = spec.edges[k];
        const int uu = spec.unit_of(e.u);
        const int uv = spec.unit_of(e.v);
        const auto hu = static_cast<std::uint64_t>(configs[static_cast<std::size_t>(uu)].size());
        if (uu == uv) {
            std::uint64_t differ = 0;
            for (Bits s : configs[static_cast<std::size_t>(uu)]) differ += hoppable(s, e) ? 1 : 0;
            c.per_edge[k] = differ * (total / hu) / 2;
            if (e.kind != EdgeClass::intra) throw GeometryError("non-intra edge inside a unit");
        } else {
            const auto hv = static_cast<std::uint64_t>(configs[static_cast<std::size_t>(uv)].size());
            const std::uint64_t local = occupied_count(uu, e.u, true) * occupied_count(uv, e.v, false) +
                                        occupied_count(uu, e.u, false) * occupied_count(uv, e.v, true);
            c.per_edge[k] = local * (total / (hu * hv));
        }
    }
    tally_classes(c, spec);
    return c;
}

Rational make_rational(std::int64_t num, std::int64_t den) {
    if (den == 0) throw ContractError("rational with zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const std::int64_t g = std::gcd(num, den);
    return {num / g, den / g};
}

Rational ratio_coefficient(const RatioShape& shape) {
    const std::int64_t nx = shape.nx;
    const std::int64_t ny = shape.ny;
    const std::int64_t nz = shape.nz;
    switch (shape.kind) {
        case RatioKind::chain:
            if (nx < 2) throw GeometryError("chain ratio needs N >= 2");
            return make_rational(nx, nx - 1);
        case RatioKind::grid2d: {
            if (nx < 1 || ny < 1) throw GeometryError("2D ratio needs positive extents");
            const std::int64_t n = nx * ny;
            const std::int64_t bonds = 2 * n - nx - ny;
            if (bonds <= 0) throw GeometryError("2D ratio needs at least one tetramer adjacency");
            return make_rational(4 * n, 3 * bonds);
        }
        case RatioKind::grid3d: {
            if (nx < 1 || ny < 1 || nz < 1) throw GeometryError("3D ratio needs positive extents");
            const std::int64_t n = nx * ny * nz;
            const std::int64_t bonds = 3 * n - nx * ny - ny * nz - nz * nx;
            if (bonds <= 0) throw GeometryError("3D ratio needs at least one octamer adjacency");
            return make_rational(12 * n, 7 * bonds);
        }
        case RatioKind::md_limit:
            if (nx < 1 || nx > 62) throw GeometryError("M-D limit needs 1 <= M <= 62");
            return make_rational(std::int64_t{1} << (nx - 1), (std::int64_t{1} << nx) - 1);
    }
    throw GeometryError("unknown ratio kind");
}

double ratio_closed_form(const RatioShape& shape, double j0, double j1) {
    if (j1 == 0.0) return std::numeric_limits<double>::infinity();
    return ratio_coefficient(shape).value() * j0 / j1;
}

bool counts_match_closed_form(const HoppingCounts& counts, const RatioShape& shape) {
    const Rational c = ratio_coefficient(shape);
    const auto escape = static_cast<WideInt>(counts.inter) + counts.long_range;
    return static_cast<WideInt>(counts.intra) * c.den == escape * c.num;
}

}  // namespace hyperscar
