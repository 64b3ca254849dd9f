// SPDX-License-Identifier: Apache-2.0
#include "quicwall/tracker.hpp"

namespace quicwall {

std::string_view to_string(Refusal refusal) {
  switch (refusal) {
    case Refusal::NoEntry: return "NoEntry";
    case Refusal::InvalidTransition: return "InvalidTransition";
    case Refusal::TimeWaitSyn: return "TimeWaitSyn";
    case Refusal::NotInitial: return "NotInitial";
    case Refusal::DcidMismatch: return "DcidMismatch";
    case Refusal::BadVersion: return "BadVersion";
    case Refusal::MalformedQuic: return "MalformedQuic";
  }
  return "?";
}

std::optional<Refusal> refusal_from_string(std::string_view name) {
  for (Refusal r : kAllRefusals) {
    if (to_string(r) == name) return r;
  }
  return std::nullopt;
}

std::string_view describe(Refusal refusal) {
  switch (refusal) {
    case Refusal::NoEntry:
      return "no tracked connection matches and the packet cannot open one";
    case Refusal::InvalidTransition:
      return "TCP flags advance no legal transition from the current state";
    case Refusal::TimeWaitSyn:
      return "SYN on a 5-tuple that is still in TIME_WAIT";
    case Refusal::NotInitial:
      return "QUIC handshake phase expects an Initial packet";
    case Refusal::DcidMismatch:
      return "QUIC destination connection ID differs from the ID bound to the 5-tuple";
    case Refusal::BadVersion:
      return "QUIC long header version is not accepted";
    case Refusal::MalformedQuic:
      return "datagram is not a well-formed QUIC packet sequence";
  }
  return "";
}

std::string_view to_string(CtClass cls) {
  switch (cls) {
    case CtClass::NEW: return "NEW";
    case CtClass::ESTABLISHED: return "ESTABLISHED";
    case CtClass::RELATED: return "RELATED";
    case CtClass::INVALID: return "INVALID";
  }
  return "?";
}

}  // namespace quicwall
