// Copyright 2026 The Hyperscar Authors
// SPDX-License-Identifier: Apache-2.0

#include "hyperscar/hilbert.hpp"

#include "hyperscar/errors.hpp"

#include <algorithm>

namespace hyperscar {

FockState FockState::from_occupations(std::span<const int> z) {
    if (z.size() > static_cast<std::size_t>(kMaxSites)) {
        throw CapacityError("FockState: more than 63 sites");
    }
    FockState s{0, static_cast<int>(z.size())};
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (z[i] != 0) s.bits |= Bits{1} << i;
    }
    return s;
}

std::string FockState::to_string() const {
    std::string out(static_cast<std::size_t>(sites), '0');
    for (int i = 0; i < sites; ++i) {
        if (occupied(i)) out[static_cast<std::size_t>(i)] = '1';
    }
    return out;
}

std::uint64_t binomial(int n, int k) {
    if (k < 0 || n < 0 || k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t r = 1;
    // r * (n - k + i) / i stays integral at every step.
    for (int i = 1; i <= k; ++i) {
        r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    }
    return r;
}

BasisSector::BasisSector(int sites, int particles) : sites_(sites), particles_(particles) {
    if (sites < 0 || sites > kMaxSites || particles < 0 || particles > sites) {
        throw CapacityError("sector (L=" + std::to_string(sites) + ", n=" +
                            std::to_string(particles) + ") outside 0 <= n <= L <= 63");
    }
    states_.reserve(binomial(sites, particles));
    if (particles == 0) {
        states_.push_back(0);
        return;
    }
    const Bits limit = Bits{1} << sites;
    Bits v = (Bits{1} << particles) - 1;
    // Gosper's hack walks fixed-popcount words in ascending order.
    while (v < limit) {
        states_.push_back(v);
        const Bits c = v & (~v + 1);
        const Bits r = v + c;
        if (r == 0) break;
        v = (((r ^ v) >> 2) / c) | r;
    }
}

std::optional<std::size_t> BasisSector::rank(Bits bits) const noexcept {
    auto it = std::lower_bound(states_.begin(), states_.end(), bits);
    if (it == states_.end() || *it != bits) return std::nullopt;
    return static_cast<std::size_t>(it - states_.begin());
}

std::optional<std::size_t> BasisSector::rank(const FockState& s) const noexcept {
    if (s.sites != sites_) return std::nullopt;
    return rank(s.bits);
}

BasisSector enumerate_sector(int sites, int particles) { return BasisSector(sites, particles); }

std::optional<FockState> apply_hop(const FockState& s, int from, int to) {
    if (from == to || from < 0 || to < 0 || from >= s.sites || to >= s.sites) return std::nullopt;
    if (!s.occupied(from) || s.occupied(to)) return std::nullopt;
    FockState out = s;
    out.bits ^= (Bits{1} << from) | (Bits{1} << to);
    return out;
}

}  // namespace hyperscar
