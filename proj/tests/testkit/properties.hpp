// SPDX-License-Identifier: Apache-2.0
//
// Randomized property checks shared by the unit tests and the acceptance
// binary. Each returns how many cases ran and the first failure, if any.
#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>

#include "quicwall/firewall.hpp"
#include "quicwall/wire.hpp"

namespace quicwall::testkit {

struct PropertyReport {
  std::size_t cases = 0;
  std::size_t failures = 0;
  std::string first_failure;

  void fail(const std::string& what) {
    if (failures++ == 0) first_failure = what;
  }
  bool ok() const { return cases > 0 && failures == 0; }
};

// Random valid long or short header with a random opaque payload.
struct GeneratedPacket {
  QuicHeader expected;  // spans relative to this packet
  Bytes bytes;
  Bytes payload;
};

GeneratedPacket random_packet(std::mt19937_64& rng, bool allow_terminal, std::size_t short_dcid_len);

// build -> parse yields the header, the payload bytes and identical re-encoding.
PropertyReport codec_roundtrip(std::size_t n, std::uint64_t seed);
// Concatenations of 1..5 packets split back into the same headers and spans.
PropertyReport codec_coalesced(std::size_t n, std::uint64_t seed);
// Random and mutated byte strings: only WireError, spans stay in bounds.
PropertyReport codec_fuzz(std::size_t n, std::uint64_t seed);

// Reset-shaped packets parse as one Short header for every DCID length that
// fits, and the shape report flags exactly the >= 21-byte 0b01 inputs.
PropertyReport reset_indistinguishable(std::size_t n, std::uint64_t seed);
PropertyReport reset_shape_exact(std::size_t n, std::uint64_t seed);

// Verdict actions are invariant under permutation; matched rules are
// invariant for non-overlapping sets; duplicating rules changes nothing.
PropertyReport firewall_permutation(std::size_t n, std::uint64_t seed);

Rule random_rule(std::mt19937_64& rng);
bool rules_overlap(const Rule& a, const Rule& b);

}  // namespace quicwall::testkit
