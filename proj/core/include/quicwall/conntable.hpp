// SPDX-License-Identifier: Apache-2.0
//
// Conntrack-style state table shared by every tracker. Entries are keyed by
// the tuple of the packet that created them and are found from either
// direction. All mutation goes through apply/destroy/sweep so the event log
// sees every change.
#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "quicwall/quic_extra.hpp"
#include "quicwall/tuple.hpp"

namespace quicwall {

// Logical clock. Nothing in the core reads the wall clock.
using Millis = std::chrono::milliseconds;

enum class CtState {
  NONE,
  SYN_SENT,
  SYN_RECV,
  ESTABLISHED,
  FIN_WAIT,
  CLOSE_WAIT,
  LAST_ACK,
  TIME_WAIT,
  CLOSE,
  UDP_NEW,
  UDP_REPLIED,
  UDP_ASSURED,
};

std::string_view to_string(CtState state);
std::optional<CtState> ct_state_from_string(std::string_view name);

struct ConnEntry {
  FiveTuple tuple;  // original direction
  CtState state = CtState::NONE;
  bool unreplied = true;
  bool assured = false;
  Millis expiry{0};
  std::optional<QuicConnExtra> quic;

  friend bool operator==(const ConnEntry&, const ConnEntry&) = default;
};

struct EntryFlags {
  bool unreplied = false;
  bool assured = false;
};

enum class EventKind { NEW, UPDATE, DESTROY };

std::string_view to_string(EventKind kind);

struct Event {
  EventKind kind = EventKind::NEW;
  Millis at{0};
  ConnEntry snapshot;

  friend bool operator==(const Event&, const Event&) = default;
};

// [NEW] udp UDP_NEW src=192.168.79.132:50000 dst=192.168.79.128:443 UNREPLIED t=0
std::string format_event(const Event& event);

class ClockWentBackwards : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// TTL per (protocol, state).
class TtlPolicy {
 public:
  TtlPolicy();

  std::chrono::seconds ttl(Proto proto, CtState state) const;
  void set(Proto proto, CtState state, std::chrono::seconds ttl);
  // Applies to every UDP state, which QUIC tracking also uses.
  void set_udp(std::chrono::seconds ttl);

 private:
  std::map<std::pair<Proto, CtState>, std::chrono::seconds> overrides_;
  std::chrono::seconds udp_{30};
  std::chrono::seconds tcp_established_{7440};
  std::chrono::seconds tcp_time_wait_{120};
  std::chrono::seconds tcp_transient_{60};
};

struct Match {
  ConnEntry entry;
  Direction direction;
};

class ConnTable {
 public:
  // Matches the tuple as given (Original) or reversed (Reply).
  std::optional<Match> lookup(const FiveTuple& tuple) const;

  // Inserts a new entry with `tuple` as its original direction (NEW) or
  // mutates the entry matching `tuple` in either direction (UPDATE).
  // expiry := now + ttl. Throws std::invalid_argument unless ttl > 0.
  Event apply(const FiveTuple& tuple, CtState state, EntryFlags flags, std::chrono::seconds ttl,
              Millis now, std::optional<QuicConnExtra> quic = std::nullopt);

  // Removes the entry matching `tuple` right away. The DESTROY snapshot
  // carries `final_state`. Returns nullopt when nothing matches.
  std::optional<Event> destroy(const FiveTuple& tuple, Millis now, CtState final_state = CtState::CLOSE);

  // Destroys every entry with expiry <= now, in key order.
  // Throws ClockWentBackwards if now precedes an earlier sweep.
  std::vector<Event> sweep(Millis now);

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  std::vector<ConnEntry> entries() const;
  const std::vector<Event>& events() const noexcept { return log_; }
  // Latest expiry of any live entry, or nullopt when empty.
  std::optional<Millis> last_expiry() const;

 private:
  std::map<FiveTuple, ConnEntry>::iterator find(const FiveTuple& tuple);

  std::map<FiveTuple, ConnEntry> entries_;
  std::vector<Event> log_;
  std::optional<Millis> last_sweep_;
};

}  // namespace quicwall
