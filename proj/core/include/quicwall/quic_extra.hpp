// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>

#include "quicwall/wire.hpp"

namespace quicwall {

enum class QuicMode {
  // Post-handshake packets must carry the stored peer SCID as their DCID.
  StrictDcid,
  // Any well-formed QUIC packet on a tracked tuple is accepted, which
  // tolerates connection ID changes the middlebox cannot see.
  TupleFallback,
};

// Connection IDs bound to a tracked QUIC 5-tuple.
struct QuicConnExtra {
  ConnectionId client_scid;
  std::optional<ConnectionId> server_scid;  // empty until the server's Initial

  // Packets towards the client carry the client's SCID and vice versa.
  std::size_t dcid_len_to_client() const noexcept { return client_scid.size(); }
  std::optional<std::size_t> dcid_len_to_server() const noexcept {
    if (!server_scid) return std::nullopt;
    return server_scid->size();
  }

  friend bool operator==(const QuicConnExtra&, const QuicConnExtra&) = default;
};

}  // namespace quicwall
