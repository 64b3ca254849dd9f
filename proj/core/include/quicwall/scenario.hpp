// SPDX-License-Identifier: Apache-2.0
//
// Deterministic replay of scripted client/server/attacker traffic through a
// tracker and the rule engine. Each step advances the logical clock, sweeps
// expired entries, classifies the packet and records the verdict.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "quicwall/bytes.hpp"
#include "quicwall/conntable.hpp"
#include "quicwall/firewall.hpp"
#include "quicwall/packet.hpp"
#include "quicwall/quic_tracker.hpp"
#include "quicwall/tcp_tracker.hpp"

namespace quicwall {

enum class Actor { Client, Server, Attacker };

std::string_view to_string(Actor actor);
std::optional<Actor> actor_from_string(std::string_view name);

// Which tracker handles UDP datagrams. TCP segments always go through the
// TCP tracker; with TrackerKind::TCP datagrams get conntrack's naive UDP
// handling, as in the kernel.
enum class TrackerKind { TCP, UDP, QUIC };

std::string_view to_string(TrackerKind kind);
std::optional<TrackerKind> tracker_from_string(std::string_view name);

struct Step {
  Millis at{0};
  Actor actor = Actor::Client;
  FiveTuple tuple;
  Packet packet;
  std::string label;

  friend bool operator==(const Step&, const Step&) = default;
};

struct ScenarioConfig {
  TtlPolicy ttl;
  QuicTrackerConfig quic;
};

inline const Ipv4Address kClientIp{0xc0a84f84};  // 192.168.79.132
inline const Ipv4Address kServerIp{0xc0a84f80};  // 192.168.79.128

struct Scenario {
  std::string name;
  std::map<Actor, Ipv4Address> actors{
      {Actor::Client, kClientIp}, {Actor::Server, kServerIp}, {Actor::Attacker, kServerIp}};
  std::vector<Step> steps;
  TrackerKind tracker = TrackerKind::UDP;
  Ruleset ruleset = load_rules(kDefaultRules);
  ScenarioConfig config;
};

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TraceRecord {
  std::size_t index = 0;
  Millis at{0};
  Actor actor = Actor::Client;
  FiveTuple tuple;
  std::string packet;  // "SYN,ACK", "Initial+Handshake", "Short", ...
  Chain chain = Chain::INPUT;
  CtClass classification = CtClass::INVALID;
  Verdict verdict;
  CtState state = CtState::NONE;
  std::optional<Refusal> refusal;
  std::string label;
  std::optional<std::string> note;
};

struct Trace {
  std::string scenario;
  TrackerKind tracker = TrackerKind::UDP;
  QuicMode mode = QuicMode::StrictDcid;
  std::vector<TraceRecord> records;
  std::vector<Event> events;
  std::vector<ConnEntry> final_table;
};

struct RunOptions {
  // After the last step, advance the clock past every remaining expiry.
  bool advance_to_end = false;
};

// Throws ScenarioError for an ill-formed scenario. Malformed datagrams are
// recorded as INVALID drops, not errors.
Trace run(const Scenario& scenario, const RunOptions& options = {});

struct TimelinePoint {
  Millis at{0};
  CtState state = CtState::NONE;

  friend bool operator==(const TimelinePoint&, const TimelinePoint&) = default;
};

struct Metrics {
  std::size_t attacker_accepted = 0;
  std::size_t attacker_dropped = 0;
  // Last accepted attacker packet minus the last legitimate packet before it.
  Millis hole_open_duration{0};
  std::vector<TimelinePoint> state_timeline;
};

Metrics metrics(const Trace& trace);

// Builtin scenarios.

enum class AttackerDcid {
  RandomPerPacket,
  FixedRandom,
  // Reuses the client's real SCID, i.e. an attacker on the compromised server.
  CopyValid,
};

std::string_view to_string(AttackerDcid strategy);
std::optional<AttackerDcid> attacker_dcid_from_string(std::string_view name);

struct BuiltinOptions {
  AttackerDcid attacker_dcid = AttackerDcid::RandomPerPacket;
  std::uint64_t seed = 0x5eed;
};

const std::vector<std::string_view>& builtin_names();
bool is_builtin(std::string_view name);
// Throws ScenarioError for an unknown name.
Scenario builtin(std::string_view name, const BuiltinOptions& options = {});

// Scenario scripts: line-oriented text, see scenario_script.cpp for the
// grammar. Throws ScenarioError with the line number.
Scenario parse_scenario(std::string_view text);
// Writes header directives and one `at` line per step; UDP payloads are
// written as udp-raw so the script reproduces the exact bytes.
std::string to_script(const Scenario& scenario);

// Output.

enum class OutputFormat { Table, Records };

// step=<i> t=<ms> actor=<a> proto=<p> src=<ip:port> dst=<ip:port> packet=<p>
// chain=<c> ct=<cls> verdict=<v> reason=<r> rule=<n|-> state=<s> label=<l>
// [note="..."]
std::string format_record(const TraceRecord& record);

void write_trace(std::ostream& os, const Trace& trace, OutputFormat format);
void write_metrics(std::ostream& os, const Metrics& m);
void write_events(std::ostream& os, const Trace& trace);
void write_table(std::ostream& os, const std::vector<ConnEntry>& entries);

// Best-effort, human readable summary of one UDP payload ("Initial",
// "Initial+Handshake", "Short", "udp"). Does not affect tracking.
std::string describe_datagram(ByteView payload);

}  // namespace quicwall
