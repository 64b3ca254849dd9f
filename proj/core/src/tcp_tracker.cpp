// SPDX-License-Identifier: Apache-2.0
#include "quicwall/tcp_tracker.hpp"

#include <cctype>
#include <stdexcept>

namespace quicwall {

namespace {

enum class Segment { Syn, SynAck, Ack, Fin, FinAck, Rst, Other };

Segment classify(TcpFlags f) {
  if (f.rst) return Segment::Rst;
  if (f.syn && f.fin) return Segment::Other;
  if (f.syn) return f.ack ? Segment::SynAck : Segment::Syn;
  if (f.fin) return f.ack ? Segment::FinAck : Segment::Fin;
  if (f.ack) return Segment::Ack;
  return Segment::Other;
}

Outcome refuse(std::optional<CtState> current, Refusal why) {
  Outcome o;
  o.state = current.value_or(CtState::NONE);
  o.refusal = why;
  o.classification = CtClass::INVALID;
  return o;
}

// Next state for a segment on an existing entry, or nullopt if illegal.
std::optional<CtState> next_state(CtState state, Segment seg, Direction dir) {
  switch (state) {
    case CtState::SYN_SENT:
      if (seg == Segment::SynAck && dir == Direction::Reply) return CtState::SYN_RECV;
      break;
    case CtState::SYN_RECV:
      if (seg == Segment::Ack && dir == Direction::Original) return CtState::ESTABLISHED;
      break;
    case CtState::ESTABLISHED:
      if (seg == Segment::Ack) return CtState::ESTABLISHED;
      if (seg == Segment::Fin || seg == Segment::FinAck) return CtState::FIN_WAIT;
      break;
    case CtState::FIN_WAIT:
      if (seg == Segment::Ack) return CtState::CLOSE_WAIT;
      // Piggybacked ACK of the first FIN: CLOSE_WAIT is skipped.
      if (seg == Segment::FinAck) return CtState::LAST_ACK;
      break;
    case CtState::CLOSE_WAIT:
      if (seg == Segment::Ack) return CtState::CLOSE_WAIT;
      if (seg == Segment::Fin || seg == Segment::FinAck) return CtState::LAST_ACK;
      break;
    case CtState::LAST_ACK:
      if (seg == Segment::Ack) return CtState::TIME_WAIT;
      break;
    default:
      break;
  }
  return std::nullopt;
}

}  // namespace

std::string to_string(TcpFlags flags) {
  std::string out;
  auto add = [&out](bool set, const char* name) {
    if (!set) return;
    if (!out.empty()) out += ',';
    out += name;
  };
  add(flags.syn, "SYN");
  add(flags.ack, "ACK");
  add(flags.fin, "FIN");
  add(flags.rst, "RST");
  return out.empty() ? "NONE" : out;
}

TcpFlags parse_tcp_flags(std::string_view text) {
  TcpFlags flags;
  if (text == "NONE" || text == "none") return flags;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find_first_of(",|", start);
    if (end == std::string_view::npos) end = text.size();
    std::string token;
    for (char c : text.substr(start, end - start)) {
      token.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
    if (token == "SYN") flags.syn = true;
    else if (token == "ACK") flags.ack = true;
    else if (token == "FIN") flags.fin = true;
    else if (token == "RST") flags.rst = true;
    else throw std::invalid_argument("unknown TCP flag '" + token + "'");
    start = end + 1;
  }
  return flags;
}

Outcome tcp_step(ConnTable& table, const FiveTuple& tuple, TcpFlags flags, Direction dir, Millis now,
                 const TtlPolicy& policy) {
  if (tuple.proto != Proto::TCP) throw std::invalid_argument("tcp_step on a non-TCP tuple");

  const Segment seg = classify(flags);
  auto match = table.lookup(tuple);

  if (!match) {
    if (seg != Segment::Syn || dir != Direction::Original) return refuse(std::nullopt, Refusal::NoEntry);
    Outcome o;
    o.state = CtState::SYN_SENT;
    o.event = table.apply(tuple, CtState::SYN_SENT, {.unreplied = true, .assured = false},
                          policy.ttl(Proto::TCP, CtState::SYN_SENT), now);
    o.classification = CtClass::NEW;
    return o;
  }

  const ConnEntry& entry = match->entry;
  if (seg == Segment::Rst) {
    Outcome o;
    o.state = CtState::CLOSE;
    o.event = table.destroy(tuple, now, CtState::CLOSE);
    o.classification = CtClass::ESTABLISHED;
    return o;
  }
  if (entry.state == CtState::TIME_WAIT && seg == Segment::Syn) {
    return refuse(entry.state, Refusal::TimeWaitSyn);
  }

  auto next = next_state(entry.state, seg, match->direction);
  if (!next) return refuse(entry.state, Refusal::InvalidTransition);

  EntryFlags ef{.unreplied = entry.unreplied, .assured = entry.assured};
  if (*next == CtState::SYN_RECV) ef.unreplied = false;
  if (*next == CtState::ESTABLISHED) ef.assured = true;

  Outcome o;
  o.state = *next;
  o.event = table.apply(tuple, *next, ef, policy.ttl(Proto::TCP, *next), now);
  o.classification = CtClass::ESTABLISHED;
  return o;
}

}  // namespace quicwall
