// SPDX-License-Identifier: Apache-2.0
//
// QUIC-aware tracking over the header fields visible on the wire. The client
// Initial opens the entry and binds its SCID; the server Initial must be
// addressed to that SCID and contributes the server SCID; the next matching
// client Initial or Handshake establishes the connection. Afterwards every
// packet's DCID is checked against the SCID stored for its direction.
#pragma once

#include <cstdint>
#include <set>
#include <span>

#include "quicwall/conntable.hpp"
#include "quicwall/quic_extra.hpp"
#include "quicwall/tracker.hpp"
#include "quicwall/wire.hpp"

namespace quicwall {

struct QuicTrackerConfig {
  QuicMode mode = QuicMode::StrictDcid;
  std::set<std::uint32_t> accepted_versions{kQuicDraft29};
};

std::string_view to_string(QuicMode mode);

// Parse context for a datagram on `tuple`: accepted versions from `config`
// and, when the tuple is tracked, the short-header DCID length for the
// datagram's direction.
ParseContext quic_parse_context(const ConnTable& table, const FiveTuple& tuple,
                                const QuicTrackerConfig& config);

// `headers` are the coalesced packets of one datagram in wire order. They are
// evaluated against a working copy of the entry; if any is refused nothing is
// committed and the most severe refusal is reported.
Outcome quic_step(ConnTable& table, const FiveTuple& tuple, std::span<const QuicHeader> headers,
                  Direction dir, Millis now, const QuicTrackerConfig& config = {},
                  const TtlPolicy& policy = {});

// Severity used to pick among refusals of one datagram; higher wins.
int refusal_severity(Refusal refusal);

}  // namespace quicwall
