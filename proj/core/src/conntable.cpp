// SPDX-License-Identifier: Apache-2.0
#include "quicwall/conntable.hpp"

#include <algorithm>
#include <array>

namespace quicwall {

namespace {

constexpr std::array<std::pair<CtState, std::string_view>, 12> kStateNames{{
    {CtState::NONE, "NONE"},
    {CtState::SYN_SENT, "SYN_SENT"},
    {CtState::SYN_RECV, "SYN_RECV"},
    {CtState::ESTABLISHED, "ESTABLISHED"},
    {CtState::FIN_WAIT, "FIN_WAIT"},
    {CtState::CLOSE_WAIT, "CLOSE_WAIT"},
    {CtState::LAST_ACK, "LAST_ACK"},
    {CtState::TIME_WAIT, "TIME_WAIT"},
    {CtState::CLOSE, "CLOSE"},
    {CtState::UDP_NEW, "UDP_NEW"},
    {CtState::UDP_REPLIED, "UDP_REPLIED"},
    {CtState::UDP_ASSURED, "UDP_ASSURED"},
}};

}  // namespace

std::string_view to_string(CtState state) {
  for (const auto& [s, name] : kStateNames) {
    if (s == state) return name;
  }
  return "?";
}

std::optional<CtState> ct_state_from_string(std::string_view name) {
  for (const auto& [s, n] : kStateNames) {
    if (n == name) return s;
  }
  return std::nullopt;
}

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::NEW: return "NEW";
    case EventKind::UPDATE: return "UPDATE";
    case EventKind::DESTROY: return "DESTROY";
  }
  return "?";
}

std::string format_event(const Event& event) {
  const ConnEntry& e = event.snapshot;
  std::string line = "[" + std::string(to_string(event.kind)) + "] " +
                     std::string(to_string(e.tuple.proto)) + " " + std::string(to_string(e.state)) +
                     " " + endpoints(e.tuple);
  if (e.unreplied) line += " UNREPLIED";
  if (e.assured) line += " ASSURED";
  line += " t=" + std::to_string(event.at.count());
  return line;
}

TtlPolicy::TtlPolicy() = default;

std::chrono::seconds TtlPolicy::ttl(Proto proto, CtState state) const {
  if (auto it = overrides_.find({proto, state}); it != overrides_.end()) return it->second;
  if (proto == Proto::UDP) return udp_;
  switch (state) {
    case CtState::ESTABLISHED: return tcp_established_;
    case CtState::TIME_WAIT: return tcp_time_wait_;
    default: return tcp_transient_;
  }
}

void TtlPolicy::set(Proto proto, CtState state, std::chrono::seconds ttl) {
  if (ttl <= std::chrono::seconds::zero()) throw std::invalid_argument("TTL must be positive");
  overrides_[{proto, state}] = ttl;
}

void TtlPolicy::set_udp(std::chrono::seconds ttl) {
  if (ttl <= std::chrono::seconds::zero()) throw std::invalid_argument("TTL must be positive");
  udp_ = ttl;
  std::erase_if(overrides_, [](const auto& kv) { return kv.first.first == Proto::UDP; });
}

std::map<FiveTuple, ConnEntry>::iterator ConnTable::find(const FiveTuple& tuple) {
  auto it = entries_.find(tuple);
  if (it != entries_.end()) return it;
  return entries_.find(tuple.reversed());
}

std::optional<Match> ConnTable::lookup(const FiveTuple& tuple) const {
  if (auto it = entries_.find(tuple); it != entries_.end()) {
    return Match{it->second, Direction::Original};
  }
  if (auto it = entries_.find(tuple.reversed()); it != entries_.end()) {
    return Match{it->second, Direction::Reply};
  }
  return std::nullopt;
}

Event ConnTable::apply(const FiveTuple& tuple, CtState state, EntryFlags flags, std::chrono::seconds ttl,
                       Millis now, std::optional<QuicConnExtra> quic) {
  if (ttl <= std::chrono::seconds::zero()) throw std::invalid_argument("TTL must be positive");

  EventKind kind = EventKind::UPDATE;
  auto it = find(tuple);
  if (it == entries_.end()) {
    kind = EventKind::NEW;
    ConnEntry fresh;
    fresh.tuple = tuple;
    it = entries_.emplace(tuple, std::move(fresh)).first;
  }
  ConnEntry& e = it->second;
  e.state = state;
  e.unreplied = flags.unreplied;
  e.assured = flags.assured && !flags.unreplied;
  e.expiry = now + ttl;
  if (quic) e.quic = std::move(quic);

  log_.push_back(Event{kind, now, e});
  return log_.back();
}

std::optional<Event> ConnTable::destroy(const FiveTuple& tuple, Millis now, CtState final_state) {
  auto it = find(tuple);
  if (it == entries_.end()) return std::nullopt;
  ConnEntry snapshot = it->second;
  snapshot.state = final_state;
  entries_.erase(it);
  log_.push_back(Event{EventKind::DESTROY, now, std::move(snapshot)});
  return log_.back();
}

std::vector<Event> ConnTable::sweep(Millis now) {
  if (last_sweep_ && now < *last_sweep_) {
    throw ClockWentBackwards("sweep at t=" + std::to_string(now.count()) + " after sweep at t=" +
                             std::to_string(last_sweep_->count()));
  }
  last_sweep_ = now;

  std::vector<Event> destroyed;
  for (auto it = entries_.begin(); it != entries_.end();) {
    if (it->second.expiry <= now) {
      destroyed.push_back(Event{EventKind::DESTROY, now, it->second});
      log_.push_back(destroyed.back());
      it = entries_.erase(it);
    } else {
      ++it;
    }
  }
  return destroyed;
}

std::vector<ConnEntry> ConnTable::entries() const {
  std::vector<ConnEntry> out;
  out.reserve(entries_.size());
  for (const auto& [key, entry] : entries_) out.push_back(entry);
  return out;
}

std::optional<Millis> ConnTable::last_expiry() const {
  std::optional<Millis> latest;
  for (const auto& [key, entry] : entries_) {
    if (!latest || entry.expiry > *latest) latest = entry.expiry;
  }
  return latest;
}

}  // namespace quicwall
