// Copyright 2026 The Hyperscar Authors
// SPDX-License-Identifier: Apache-2.0

#include "hyperscar/symmetry.hpp"

#include "hyperscar/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>
#include <tuple>

namespace hyperscar {

namespace {

bool preserves_lattice(const LatticeSpec& spec, const std::vector<int>& perm) {
    using Key = std::tuple<int, int, double, EdgeClass>;
    std::set<Key> original;
    std::set<Key> mapped;
    for (const Edge& e : spec.edges) {
        auto [u, v] = std::minmax(e.u, e.v);
        original.emplace(u, v, e.amplitude, e.kind);
        auto [pu, pv] = std::minmax(perm[static_cast<std::size_t>(e.u)], perm[static_cast<std::size_t>(e.v)]);
        mapped.emplace(pu, pv, e.amplitude, e.kind);
    }
    if (original != mapped) return false;
    for (int s = 0; s < spec.sites; ++s) {
        if (spec.onsite[static_cast<std::size_t>(s)] != spec.onsite[static_cast<std::size_t>(perm[static_cast<std::size_t>(s)])]) {
            return false;
        }
    }
    return true;
}

}  // namespace

SymmetryGroup SymmetryGroup::detect(const LatticeSpec& spec, int particles) {
    SymmetryGroup group(spec.sites);
    std::vector<int> reverse_sites(static_cast<std::size_t>(spec.sites));
    for (int s = 0; s < spec.sites; ++s) reverse_sites[static_cast<std::size_t>(s)] = spec.sites - 1 - s;

    std::vector<int> reverse_units(static_cast<std::size_t>(spec.sites));
    const int nu = spec.unit_count();
    bool units_uniform = nu > 0;
    for (const auto& u : spec.units) units_uniform = units_uniform && u.size() == spec.units.front().size();
    if (units_uniform) {
        for (int u = 0; u < nu; ++u) {
            const auto& from = spec.units[static_cast<std::size_t>(u)];
            const auto& to = spec.units[static_cast<std::size_t>(nu - 1 - u)];
            for (std::size_t k = 0; k < from.size(); ++k) reverse_units[static_cast<std::size_t>(from[k])] = to[k];
        }
    }

    if (preserves_lattice(spec, reverse_sites)) {
        group.names_.emplace_back("inversion");
        group.perms_.push_back(reverse_sites);
    } else if (units_uniform && nu > 1 && preserves_lattice(spec, reverse_units)) {
        group.names_.emplace_back("mirror");
        group.perms_.push_back(reverse_units);
    }
    const bool uniform_onsite = std::all_of(spec.onsite.begin(), spec.onsite.end(),
                                            [&](double w) { return w == spec.onsite.front(); });
    if (2 * particles == spec.sites && uniform_onsite) {
        group.names_.emplace_back("particle-hole");
        group.perms_.emplace_back();
    }
    return group;
}

Bits SymmetryGroup::apply_generator(int g, Bits s) const {
    const auto& perm = perms_.at(static_cast<std::size_t>(g));
    const Bits mask = sites_ >= 64 ? ~Bits{0} : (Bits{1} << sites_) - 1;
    if (perm.empty()) return ~s & mask;
    Bits out = 0;
    while (s != 0) {
        const int i = std::countr_zero(s);
        out |= Bits{1} << perm[static_cast<std::size_t>(i)];
        s &= s - 1;
    }
    return out;
}

Bits SymmetryGroup::apply_element(unsigned element, Bits s) const {
    for (int g = 0; g < generator_count(); ++g) {
        if ((element >> g) & 1U) s = apply_generator(g, s);
    }
    return s;
}

int SymmetryGroup::character(std::size_t sector, unsigned element) noexcept {
    return (std::popcount(static_cast<unsigned>(sector) & element) & 1) ? -1 : 1;
}

std::string SymmetryGroup::sector_label(std::size_t sector) const {
    if (names_.empty()) return "all";
    std::string out;
    for (std::size_t g = 0; g < names_.size(); ++g) {
        if (!out.empty()) out += ' ';
        out += names_[g];
        out += ((sector >> g) & 1U) ? '-' : '+';
    }
    return out;
}

Eigen::SparseMatrix<double> SymmetryGroup::projector(const BasisSector& sector, std::size_t index) const {
    if (index >= sector_count()) throw ContractError("symmetry sector index out of range");
    const unsigned order = 1U << generator_count();
    std::vector<Eigen::Triplet<double>> trips;
    std::vector<std::pair<Bits, double>> images;
    int column = 0;
    const auto states = sector.states();
    for (std::size_t r = 0; r < states.size(); ++r) {
        const Bits s = states[r];
        images.clear();
        bool representative = true;
        for (unsigned g = 0; g < order; ++g) {
            const Bits t = apply_element(g, s);
            if (t < s) {
                representative = false;
                break;
            }
            auto it = std::find_if(images.begin(), images.end(), [t](const auto& p) { return p.first == t; });
            const double chi = character(index, g);
            if (it == images.end()) {
                images.emplace_back(t, chi);
            } else {
                it->second += chi;
            }
        }
        if (!representative) continue;
        double norm2 = 0.0;
        for (const auto& [t, c] : images) norm2 += c * c;
        if (norm2 < 0.5) continue;  // character incompatible with the stabilizer
        const double inv = 1.0 / std::sqrt(norm2);
        for (const auto& [t, c] : images) {
            if (c == 0.0) continue;
            const auto k = sector.rank(t);
            if (!k) throw ContractError("symmetry maps a state out of the sector");
            trips.emplace_back(static_cast<int>(*k), column, c * inv);
        }
        ++column;
    }
    Eigen::SparseMatrix<double> q(static_cast<Eigen::Index>(sector.size()), column);
    q.setFromTriplets(trips.begin(), trips.end());
    return q;
}

}  // namespace hyperscar
