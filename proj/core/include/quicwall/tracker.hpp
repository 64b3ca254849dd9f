// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "quicwall/conntable.hpp"

namespace quicwall {

// Why a tracker refused a packet. The set is closed; each value maps to a
// DROP whose trace reason is the name below.
enum class Refusal {
  NoEntry,            // nothing tracked for the tuple and the packet cannot open it
  InvalidTransition,  // TCP flags that advance no legal transition
  TimeWaitSyn,        // SYN on a tuple quarantined in TIME_WAIT
  NotInitial,         // QUIC handshake expected an Initial packet
  DcidMismatch,       // QUIC DCID differs from the connection ID bound to the tuple
  BadVersion,         // QUIC long header with a version outside the accepted set
  MalformedQuic,      // datagram is not a well-formed QUIC wire image
};

inline constexpr Refusal kAllRefusals[] = {
    Refusal::NoEntry,     Refusal::InvalidTransition, Refusal::TimeWaitSyn, Refusal::NotInitial,
    Refusal::DcidMismatch, Refusal::BadVersion,       Refusal::MalformedQuic,
};

std::string_view to_string(Refusal refusal);
std::optional<Refusal> refusal_from_string(std::string_view name);
std::string_view describe(Refusal refusal);

// ctstate classification handed to the rule engine.
enum class CtClass { NEW, ESTABLISHED, RELATED, INVALID };

std::string_view to_string(CtClass cls);

struct Outcome {
  // Entry state after the step: NONE when nothing is tracked, CLOSE when the
  // step destroyed the entry.
  CtState state = CtState::NONE;
  std::optional<Event> event;
  std::optional<Refusal> refusal;
  CtClass classification = CtClass::INVALID;
  std::optional<std::string> note;

  bool accepted() const noexcept { return !refusal.has_value(); }
};

}  // namespace quicwall
