// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <variant>

#include "quicwall/bytes.hpp"
#include "quicwall/tcp_tracker.hpp"

namespace quicwall {

// What the trackers see of a packet: TCP flags or an opaque UDP payload.
using Packet = std::variant<TcpFlags, Bytes>;

}  // namespace quicwall
