// SPDX-License-Identifier: Apache-2.0
#include "quicwall/udp_tracker.hpp"

#include <stdexcept>

namespace quicwall {

Outcome udp_step(ConnTable& table, const FiveTuple& tuple, Direction dir, Millis now,
                 const TtlPolicy& policy) {
  if (tuple.proto != Proto::UDP) throw std::invalid_argument("udp_step on a non-UDP tuple");

  Outcome o;
  auto match = table.lookup(tuple);
  if (!match) {
    if (dir != Direction::Original) {
      o.refusal = Refusal::NoEntry;
      o.classification = CtClass::INVALID;
      return o;
    }
    o.state = CtState::UDP_NEW;
    o.event = table.apply(tuple, CtState::UDP_NEW, {.unreplied = true, .assured = false},
                          policy.ttl(Proto::UDP, CtState::UDP_NEW), now);
    o.classification = CtClass::NEW;
    return o;
  }

  const ConnEntry& entry = match->entry;
  CtState next = entry.state;
  EntryFlags ef{.unreplied = entry.unreplied, .assured = entry.assured};
  if (match->direction == Direction::Reply && entry.unreplied) {
    next = CtState::UDP_REPLIED;
    ef.unreplied = false;
  } else if (match->direction == Direction::Original && !entry.unreplied) {
    next = CtState::UDP_ASSURED;
    ef.assured = true;
  }

  o.state = next;
  o.event = table.apply(tuple, next, ef, policy.ttl(Proto::UDP, next), now);
  o.classification = CtClass::ESTABLISHED;
  return o;
}

}  // namespace quicwall
