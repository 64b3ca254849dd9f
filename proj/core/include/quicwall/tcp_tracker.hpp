// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>

#include "quicwall/conntable.hpp"
#include "quicwall/tracker.hpp"

namespace quicwall {

struct TcpFlags {
  bool syn = false;
  bool ack = false;
  bool fin = false;
  bool rst = false;

  friend bool operator==(const TcpFlags&, const TcpFlags&) = default;
};

// "SYN,ACK" style; "NONE" when no flag is set.
std::string to_string(TcpFlags flags);
// Comma separated SYN/ACK/FIN/RST, case-insensitive. Throws std::invalid_argument.
TcpFlags parse_tcp_flags(std::string_view text);

// Flag-driven TCP tracking. `tuple` is the segment as seen on the wire. The
// direction of an existing entry comes from the table; `dir` only says
// whether an untracked segment may open a connection.
Outcome tcp_step(ConnTable& table, const FiveTuple& tuple, TcpFlags flags, Direction dir, Millis now,
                 const TtlPolicy& policy = {});

}  // namespace quicwall
