// Copyright 2026 The Hyperscar Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file hilbert.hpp
 * @brief Fixed-particle-number Fock sectors of hard-core bosons.
 *
 * Site i (1-based, as in the documentation) lives in bit i-1 of the state
 * word. All library APIs take 0-based site indices, i.e. bit positions.
 * Sectors list their states in ascending integer order, so ranking is a
 * binary search.
 */

#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hyperscar {

using Bits = std::uint64_t;

inline constexpr int kMaxSites = 63;
inline constexpr int kMaxLatticeSites = 64;  ///< geometry only; sectors stop at kMaxSites

/// Occupation pattern of `sites` hard-core sites.
struct FockState {
    Bits bits = 0;
    int sites = 0;

    [[nodiscard]] bool occupied(int site) const noexcept { return (bits >> site) & 1U; }
    [[nodiscard]] int particles() const noexcept { return std::popcount(bits); }

    /// Builds a state from per-site occupations listed site 1 first.
    static FockState from_occupations(std::span<const int> z);

    /// Occupations as a string, site 1 first, e.g. "1001".
    [[nodiscard]] std::string to_string() const;

    friend bool operator==(const FockState&, const FockState&) = default;
};

/// Binomial coefficient C(n, k); zero outside 0 <= k <= n.
[[nodiscard]] std::uint64_t binomial(int n, int k);

/// All states with `particles` bosons on `sites` sites, ascending by integer value.
class BasisSector {
public:
    BasisSector(int sites, int particles);

    [[nodiscard]] int sites() const noexcept { return sites_; }
    [[nodiscard]] int particles() const noexcept { return particles_; }
    [[nodiscard]] std::size_t size() const noexcept { return states_.size(); }
    [[nodiscard]] std::span<const Bits> states() const noexcept { return states_; }

    [[nodiscard]] Bits state(std::size_t k) const { return states_.at(k); }
    [[nodiscard]] FockState unrank(std::size_t k) const { return {states_.at(k), sites_}; }

    /// Position of `bits` in the sector, or nullopt if it does not belong.
    [[nodiscard]] std::optional<std::size_t> rank(Bits bits) const noexcept;
    [[nodiscard]] std::optional<std::size_t> rank(const FockState& s) const noexcept;

private:
    int sites_;
    int particles_;
    std::vector<Bits> states_;
};

/// Throws CapacityError unless 0 <= particles <= sites <= 63.
[[nodiscard]] BasisSector enumerate_sector(int sites, int particles);

/// Moves the particle on `from` to the empty site `to`. Hard-core hops carry no sign.
[[nodiscard]] std::optional<FockState> apply_hop(const FockState& s, int from, int to);

}  // namespace hyperscar
