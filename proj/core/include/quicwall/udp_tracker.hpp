// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "quicwall/conntable.hpp"
#include "quicwall/tracker.hpp"

namespace quicwall {

// Naive per-datagram UDP tracking: NEW -> REPLIED -> ASSURED, refreshed by
// every matching datagram from either side, removed only by TTL expiry.
// Payload bytes are not an input.
Outcome udp_step(ConnTable& table, const FiveTuple& tuple, Direction dir, Millis now,
                 const TtlPolicy& policy = {});

}  // namespace quicwall
