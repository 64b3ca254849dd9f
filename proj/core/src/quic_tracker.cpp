// SPDX-License-Identifier: Apache-2.0
#include "quicwall/quic_tracker.hpp"

#include <stdexcept>

namespace quicwall {

namespace {

// Working copy of one entry while the packets of a datagram are evaluated.
struct Working {
  bool exists = false;
  bool created = false;
  CtState state = CtState::NONE;
  bool unreplied = true;
  bool assured = false;
  QuicConnExtra extra;
};

bool is_neutral(HeaderVariant v) {
  return v == HeaderVariant::LongRetry || v == HeaderVariant::VersionNegotiation ||
         v == HeaderVariant::LongZeroRtt;
}

bool is_handshake_long(HeaderVariant v) {
  return v == HeaderVariant::LongInitial || v == HeaderVariant::LongHandshake;
}

void add_note(std::optional<std::string>& note, const std::string& text) {
  if (note) {
    *note += "; " + text;
  } else {
    note = text;
  }
}

// Expected DCID of a packet travelling in `dir`: the peer's SCID.
const ConnectionId* expected_dcid(const QuicConnExtra& extra, Direction dir) {
  if (dir == Direction::Reply) return &extra.client_scid;
  return extra.server_scid ? &*extra.server_scid : nullptr;
}

bool dcid_matches(const QuicHeader& h, const QuicConnExtra& extra, Direction dir) {
  const ConnectionId* want = expected_dcid(extra, dir);
  if (!want) return false;
  if (h.dcid_ambiguous) return want->empty();
  return h.dcid == *want;
}

// Returns a refusal or advances `w` for one packet.
std::optional<Refusal> step_one(Working& w, const QuicHeader& h, Direction dir, const QuicTrackerConfig& config,
                                std::optional<std::string>& note) {
  if (is_neutral(h.variant)) {
    if (!w.exists) return Refusal::NoEntry;
    add_note(note, std::string(to_string(h.variant)) + " packet ignored");
    return std::nullopt;
  }
  if (is_long(h.variant) && !config.accepted_versions.contains(h.version)) return Refusal::BadVersion;

  if (!w.exists) {
    if (h.variant != HeaderVariant::LongInitial || dir != Direction::Original) return Refusal::NoEntry;
    w.exists = true;
    w.created = true;
    w.state = CtState::SYN_SENT;
    w.unreplied = true;
    w.extra.client_scid = h.scid;
    w.extra.server_scid.reset();
    if (h.scid.empty()) add_note(note, "zero-length client SCID, DCID checks towards the client are vacuous");
    return std::nullopt;
  }

  switch (w.state) {
    case CtState::SYN_SENT:
      if (h.variant != HeaderVariant::LongInitial) return Refusal::NotInitial;
      if (dir == Direction::Original) {
        // Another client Initial before the server answered.
        return h.scid == w.extra.client_scid ? std::nullopt : std::optional(Refusal::DcidMismatch);
      }
      if (h.dcid != w.extra.client_scid) return Refusal::DcidMismatch;
      w.extra.server_scid = h.scid;
      w.state = CtState::SYN_RECV;
      w.unreplied = false;
      if (h.scid.empty()) add_note(note, "zero-length server SCID, DCID checks towards the server are vacuous");
      return std::nullopt;

    case CtState::SYN_RECV:
      if (!dcid_matches(h, w.extra, dir)) return Refusal::DcidMismatch;
      if (dir == Direction::Original && is_handshake_long(h.variant)) {
        w.state = CtState::ESTABLISHED;
        w.assured = true;
      }
      return std::nullopt;

    case CtState::ESTABLISHED:
      if (config.mode == QuicMode::TupleFallback) return std::nullopt;
      if (!dcid_matches(h, w.extra, dir)) return Refusal::DcidMismatch;
      return std::nullopt;

    default:
      return Refusal::MalformedQuic;
  }
}

}  // namespace

std::string_view to_string(QuicMode mode) {
  return mode == QuicMode::StrictDcid ? "strict" : "fallback";
}

int refusal_severity(Refusal refusal) {
  switch (refusal) {
    case Refusal::MalformedQuic: return 5;
    case Refusal::BadVersion: return 4;
    case Refusal::DcidMismatch: return 3;
    case Refusal::NotInitial: return 2;
    case Refusal::NoEntry: return 1;
    default: return 0;
  }
}

ParseContext quic_parse_context(const ConnTable& table, const FiveTuple& tuple,
                                const QuicTrackerConfig& config) {
  ParseContext ctx;
  ctx.accepted_versions = config.accepted_versions;
  if (auto match = table.lookup(tuple); match && match->entry.quic) {
    const QuicConnExtra& extra = *match->entry.quic;
    std::optional<std::size_t> len = match->direction == Direction::Reply ? std::optional(extra.dcid_len_to_client())
                                                                           : extra.dcid_len_to_server();
    if (len) ctx.expected_dcid_lengths[tuple] = *len;
  }
  return ctx;
}

Outcome quic_step(ConnTable& table, const FiveTuple& tuple, std::span<const QuicHeader> headers, Direction dir,
                  Millis now, const QuicTrackerConfig& config, const TtlPolicy& policy) {
  if (tuple.proto != Proto::UDP) throw std::invalid_argument("quic_step on a non-UDP tuple");

  Outcome o;
  auto match = table.lookup(tuple);
  Working w;
  if (match) {
    const ConnEntry& e = match->entry;
    dir = match->direction;
    w.exists = true;
    w.state = e.state;
    w.unreplied = e.unreplied;
    w.assured = e.assured;
    // An entry without QUIC data was not opened by this tracker.
    if (!e.quic) {
      o.state = e.state;
      o.refusal = Refusal::MalformedQuic;
      return o;
    }
    w.extra = *e.quic;
  }
  o.state = w.state;

  std::optional<Refusal> worst;
  if (headers.empty()) worst = Refusal::MalformedQuic;
  bool advanced = false;
  for (const QuicHeader& h : headers) {
    auto refusal = step_one(w, h, dir, config, o.note);
    if (refusal) {
      if (!worst || refusal_severity(*refusal) > refusal_severity(*worst)) worst = refusal;
    } else if (!is_neutral(h.variant)) {
      advanced = true;
    }
  }

  if (worst) {
    o.refusal = worst;
    o.classification = CtClass::INVALID;
    return o;
  }

  o.state = w.state;
  o.classification = w.created ? CtClass::NEW : CtClass::ESTABLISHED;
  if (advanced) {
    o.event = table.apply(tuple, w.state, {.unreplied = w.unreplied, .assured = w.assured},
                          policy.ttl(Proto::UDP, w.state), now, w.extra);
  }
  return o;
}

}  // namespace quicwall
