// SPDX-License-Identifier: Apache-2.0
#include "quicwall/scenario.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include "quicwall/udp_tracker.hpp"

namespace quicwall {

std::string_view to_string(Actor actor) {
  switch (actor) {
    case Actor::Client: return "client";
    case Actor::Server: return "server";
    case Actor::Attacker: return "attacker";
  }
  return "?";
}

std::optional<Actor> actor_from_string(std::string_view name) {
  if (name == "client") return Actor::Client;
  if (name == "server") return Actor::Server;
  if (name == "attacker") return Actor::Attacker;
  return std::nullopt;
}

std::string_view to_string(TrackerKind kind) {
  switch (kind) {
    case TrackerKind::TCP: return "tcp";
    case TrackerKind::UDP: return "udp";
    case TrackerKind::QUIC: return "quic";
  }
  return "?";
}

std::optional<TrackerKind> tracker_from_string(std::string_view name) {
  if (name == "tcp") return TrackerKind::TCP;
  if (name == "udp") return TrackerKind::UDP;
  if (name == "quic") return TrackerKind::QUIC;
  return std::nullopt;
}

std::string_view to_string(AttackerDcid strategy) {
  switch (strategy) {
    case AttackerDcid::RandomPerPacket: return "random";
    case AttackerDcid::FixedRandom: return "fixed";
    case AttackerDcid::CopyValid: return "copy";
  }
  return "?";
}

std::optional<AttackerDcid> attacker_dcid_from_string(std::string_view name) {
  if (name == "random") return AttackerDcid::RandomPerPacket;
  if (name == "fixed") return AttackerDcid::FixedRandom;
  if (name == "copy") return AttackerDcid::CopyValid;
  return std::nullopt;
}

std::string describe_datagram(ByteView payload) {
  try {
    ParseContext ctx;
    ctx.default_dcid_length = std::nullopt;
    auto headers = parse_datagram(payload, ctx);
    std::string out;
    for (const auto& h : headers) {
      if (!out.empty()) out += '+';
      out += to_string(h.variant);
    }
    return out;
  } catch (const WireError&) {
    return "udp";
  }
}

namespace {

void validate(const Scenario& s) {
  Millis previous{0};
  for (std::size_t i = 0; i < s.steps.size(); ++i) {
    const Step& step = s.steps[i];
    auto where = [&] { return "step " + std::to_string(i) + ": "; };
    if (i > 0 && step.at < previous) throw ScenarioError(where() + "time goes backwards");
    if (step.at < Millis{0}) throw ScenarioError(where() + "negative time");
    previous = step.at;

    auto actor = s.actors.find(step.actor);
    if (actor == s.actors.end()) {
      throw ScenarioError(where() + "actor " + std::string(to_string(step.actor)) + " has no address");
    }
    if (step.tuple.src_ip != actor->second) {
      throw ScenarioError(where() + std::string(to_string(step.actor)) + " is " + actor->second.str() +
                          " but the packet comes from " + step.tuple.src_ip.str());
    }
    if (step.tuple.src_port == 0 || step.tuple.dst_port == 0) throw ScenarioError(where() + "zero port");
    bool is_tcp = std::holds_alternative<TcpFlags>(step.packet);
    if (is_tcp != (step.tuple.proto == Proto::TCP)) {
      throw ScenarioError(where() + "packet kind does not match protocol " + std::string(to_string(step.tuple.proto)));
    }
  }
}

Chain chain_for(const FiveTuple& t, Ipv4Address server) {
  if (t.dst_ip == server) return Chain::INPUT;
  if (t.src_ip == server) return Chain::OUTPUT;
  return Chain::FORWARD;
}

}  // namespace

Trace run(const Scenario& scenario, const RunOptions& options) {
  validate(scenario);
  const Ipv4Address server = scenario.actors.at(Actor::Server);
  const ScenarioConfig& cfg = scenario.config;

  Trace trace;
  trace.scenario = scenario.name;
  trace.tracker = scenario.tracker;
  trace.mode = cfg.quic.mode;

  ConnTable table;
  for (std::size_t i = 0; i < scenario.steps.size(); ++i) {
    const Step& step = scenario.steps[i];
    table.sweep(step.at);

    // The server side only ever answers; anything it sends is a reply candidate.
    const Direction claim = step.actor == Actor::Client ? Direction::Original : Direction::Reply;

    TraceRecord rec;
    rec.index = i;
    rec.at = step.at;
    rec.actor = step.actor;
    rec.tuple = step.tuple;
    rec.label = step.label;
    rec.chain = chain_for(step.tuple, server);

    Outcome out;
    if (const auto* flags = std::get_if<TcpFlags>(&step.packet)) {
      rec.packet = to_string(*flags);
      out = tcp_step(table, step.tuple, *flags, claim, step.at, cfg.ttl);
    } else {
      const Bytes& payload = std::get<Bytes>(step.packet);
      rec.packet = describe_datagram(payload);
      if (scenario.tracker == TrackerKind::QUIC) {
        ParseContext ctx = quic_parse_context(table, step.tuple, cfg.quic);
        try {
          auto headers = parse_datagram(payload, ctx, step.tuple);
          out = quic_step(table, step.tuple, headers, claim, step.at, cfg.quic, cfg.ttl);
        } catch (const WireError& e) {
          auto current = table.lookup(step.tuple);
          out.state = current ? current->entry.state : CtState::NONE;
          out.refusal = e.code() == WireErrc::UnsupportedVersion ? Refusal::BadVersion : Refusal::MalformedQuic;
          out.classification = CtClass::INVALID;
          out.note = e.what();
        }
      } else {
        out = udp_step(table, step.tuple, claim, step.at, cfg.ttl);
      }
    }

    rec.classification = out.classification;
    rec.state = out.state;
    rec.refusal = out.refusal;
    rec.note = out.note;
    rec.verdict = evaluate(scenario.ruleset, rec.chain, step.tuple, out.classification);
    if (rec.verdict.action == Action::DROP && out.refusal) rec.verdict.reason = std::string(to_string(*out.refusal));
    trace.records.push_back(std::move(rec));
  }

  if (options.advance_to_end) {
    if (auto last = table.last_expiry()) table.sweep(*last);
  }
  trace.events = table.events();
  trace.final_table = table.entries();
  return trace;
}

Metrics metrics(const Trace& trace) {
  Metrics m;
  std::optional<Millis> last_legit;
  std::optional<Millis> idle_start_at_last_accept;
  std::optional<Millis> last_attacker_accept;
  CtState previous = CtState::NONE;
  for (const TraceRecord& r : trace.records) {
    if (r.actor == Actor::Attacker) {
      if (r.verdict.action == Action::ACCEPT) {
        ++m.attacker_accepted;
        last_attacker_accept = r.at;
        idle_start_at_last_accept = last_legit;
      } else {
        ++m.attacker_dropped;
      }
    } else {
      last_legit = r.at;
    }
    if (r.state != previous) {
      m.state_timeline.push_back({r.at, r.state});
      previous = r.state;
    }
  }
  if (last_attacker_accept) {
    Millis idle_start = idle_start_at_last_accept.value_or(Millis{0});
    m.hole_open_duration = std::max(Millis{0}, *last_attacker_accept - idle_start);
  }
  return m;
}

// Builtins ------------------------------------------------------------------

namespace {

constexpr std::uint16_t kClientPort = 50000;
constexpr std::uint16_t kServerPort = 443;

// Bytes straight from the engine: mt19937_64 output is fully specified, the
// standard distributions are not.
class Filler {
 public:
  explicit Filler(std::uint64_t seed) : rng_(seed) {}

  Bytes bytes(std::size_t n) {
    Bytes out;
    out.reserve(n);
    while (out.size() < n) {
      std::uint64_t v = rng_();
      for (int i = 0; i < 8 && out.size() < n; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    return out;
  }

  ConnectionId cid(std::size_t n) { return ConnectionId(bytes(n)); }

  std::uint8_t byte() { return static_cast<std::uint8_t>(rng_()); }

 private:
  std::mt19937_64 rng_;
};

struct Builder {
  Scenario s;
  FiveTuple up;  // client -> server

  Builder(std::string name, Proto proto, TrackerKind tracker) {
    s.name = std::move(name);
    s.tracker = tracker;
    up = {proto, kClientIp, kServerIp, kClientPort, kServerPort};
  }

  FiveTuple down() const { return up.reversed(); }

  void add(std::int64_t ms, Actor actor, Packet packet, std::string label) {
    FiveTuple t = actor == Actor::Client ? up : down();
    s.steps.push_back(Step{Millis{ms}, actor, t, std::move(packet), std::move(label)});
  }
};

struct HandshakeIds {
  ConnectionId original_dcid;
  ConnectionId client_scid;
  ConnectionId server_scid;
};

HandshakeIds make_ids(Filler& f) { return {f.cid(8), f.cid(8), f.cid(8)}; }

Bytes initial(const ConnectionId& dcid, const ConnectionId& scid, Filler& f, std::size_t n = 64) {
  return build_long_header(HeaderVariant::LongInitial, kQuicDraft29, dcid, scid, f.bytes(n));
}

Bytes handshake(const ConnectionId& dcid, const ConnectionId& scid, Filler& f, std::size_t n = 64) {
  return build_long_header(HeaderVariant::LongHandshake, kQuicDraft29, dcid, scid, f.bytes(n));
}

Bytes short_packet(const ConnectionId& dcid, Filler& f, std::size_t n = 32) {
  return build_short_header(dcid, f.bytes(n));
}

// Initial/Handshake bursts followed by protected payload both ways. Returns
// the time of the last packet.
std::int64_t add_quic_handshake(Builder& b, const HandshakeIds& ids, Filler& f) {
  b.add(0, Actor::Client, initial(ids.original_dcid, ids.client_scid, f), "client-initial");
  b.add(12, Actor::Server, initial(ids.client_scid, ids.server_scid, f), "server-initial");
  b.add(12, Actor::Server, handshake(ids.client_scid, ids.server_scid, f), "server-handshake");
  b.add(13, Actor::Server, handshake(ids.client_scid, ids.server_scid, f), "server-handshake");
  Bytes coalesced = initial(ids.server_scid, ids.client_scid, f, 24);
  Bytes hs = handshake(ids.server_scid, ids.client_scid, f, 48);
  coalesced.insert(coalesced.end(), hs.begin(), hs.end());
  b.add(25, Actor::Client, std::move(coalesced), "client-initial-ack+handshake");
  b.add(26, Actor::Client, short_packet(ids.server_scid, f, 48), "client-request");
  b.add(38, Actor::Server, short_packet(ids.client_scid, f, 24), "server-handshake-done");
  b.add(38, Actor::Server, short_packet(ids.client_scid, f, 96), "server-response");
  b.add(39, Actor::Server, short_packet(ids.client_scid, f, 256), "server-response");
  b.add(40, Actor::Client, short_packet(ids.server_scid, f, 16), "client-ack");
  return 40;
}

ConnectionId attacker_dcid(AttackerDcid strategy, const HandshakeIds& ids, const ConnectionId& fixed, Filler& f) {
  switch (strategy) {
    case AttackerDcid::RandomPerPacket: return f.cid(8);
    case AttackerDcid::FixedRandom: return fixed;
    case AttackerDcid::CopyValid: return ids.client_scid;
  }
  return fixed;
}

Scenario http3_handshake(const BuiltinOptions& opt) {
  Builder b("http3_handshake", Proto::UDP, TrackerKind::QUIC);
  Filler f(opt.seed);
  add_quic_handshake(b, make_ids(f), f);
  return b.s;
}

Scenario udp_hole_punch(const BuiltinOptions& opt) {
  Builder b("udp_hole_punch", Proto::UDP, TrackerKind::UDP);
  Filler f(opt.seed);
  HandshakeIds ids = make_ids(f);
  const std::int64_t idle = add_quic_handshake(b, ids, f);
  const ConnectionId fixed = f.cid(8);

  // The client has gone quiet. The attacker on the server keeps the pinhole
  // alive every 10 s for 600 s and pushes 50 exfiltration datagrams through it.
  struct Send {
    std::int64_t at;
    bool keepalive;
  };
  std::vector<Send> sends;
  for (int k = 1; k <= 60; ++k) sends.push_back({idle + 10'000 * k, true});
  for (int j = 0; j < 50; ++j) sends.push_back({idle + 5'000 + 12'000 * j, false});
  std::stable_sort(sends.begin(), sends.end(), [](const Send& a, const Send& c) { return a.at < c.at; });
  for (const Send& s : sends) {
    ConnectionId dcid = attacker_dcid(opt.attacker_dcid, ids, fixed, f);
    b.add(s.at, Actor::Attacker, short_packet(dcid, f, s.keepalive ? 16 : 200),
          s.keepalive ? "keepalive" : "exfiltration");
  }
  return b.s;
}

Scenario tcp_timewait_probe(const BuiltinOptions&) {
  Builder b("tcp_timewait_probe", Proto::TCP, TrackerKind::TCP);
  auto flags = [](std::string_view s) { return Packet{parse_tcp_flags(s)}; };
  b.add(0, Actor::Client, flags("SYN"), "client-syn");
  b.add(10, Actor::Server, flags("SYN,ACK"), "server-syn-ack");
  b.add(11, Actor::Client, flags("ACK"), "client-ack");
  b.add(20, Actor::Client, flags("ACK"), "client-request");
  b.add(30, Actor::Server, flags("ACK"), "server-response");
  b.add(40, Actor::Server, flags("FIN"), "server-fin");
  b.add(41, Actor::Client, flags("FIN,ACK"), "client-fin-ack");
  b.add(42, Actor::Server, flags("ACK"), "server-last-ack");
  // TIME_WAIT until 42 ms + 120 s.
  b.add(5'042, Actor::Attacker, flags("SYN"), "attacker-syn-in-time-wait");
  b.add(60'000, Actor::Attacker, flags("SYN"), "attacker-syn-in-time-wait");
  b.add(120'050, Actor::Attacker, flags("SYN"), "attacker-syn-after-expiry");
  b.add(120'100, Actor::Client, flags("SYN"), "client-fresh-syn");
  b.add(120'110, Actor::Server, flags("SYN,ACK"), "server-syn-ack");
  b.add(120'111, Actor::Client, flags("ACK"), "client-ack");
  b.add(120'200, Actor::Client, flags("RST"), "client-rst");
  return b.s;
}

Scenario stateless_reset_forgery(const BuiltinOptions& opt) {
  Builder b("stateless_reset_forgery", Proto::UDP, TrackerKind::QUIC);
  Filler f(opt.seed);
  HandshakeIds ids = make_ids(f);
  std::int64_t t = add_quic_handshake(b, ids, f);
  // Ongoing exchange every 5 s with forged resets injected towards the client
  // in between: 0b01 fixed bits, unpredictable bits, a guessed 16-byte token.
  for (int i = 0; i < 10; ++i) {
    t += 5'000;
    b.add(t, Actor::Client, short_packet(ids.server_scid, f, 40), "client-data");
    b.add(t + 10, Actor::Server, short_packet(ids.client_scid, f, 120), "server-data");
    Bytes reset;
    reset.push_back(static_cast<std::uint8_t>(0x40 | (f.byte() & 0x3f)));
    Bytes rest = f.bytes(kMinStatelessResetLength - 1);
    reset.insert(reset.end(), rest.begin(), rest.end());
    b.add(t + 2'000, Actor::Attacker, std::move(reset), "forged-stateless-reset");
  }
  b.add(t + 5'000, Actor::Client, short_packet(ids.server_scid, f, 40), "client-data");
  b.add(t + 5'010, Actor::Server, short_packet(ids.client_scid, f, 120), "server-data");
  return b.s;
}

}  // namespace

const std::vector<std::string_view>& builtin_names() {
  static const std::vector<std::string_view> names{"http3_handshake", "udp_hole_punch", "tcp_timewait_probe",
                                                   "stateless_reset_forgery"};
  return names;
}

bool is_builtin(std::string_view name) {
  const auto& names = builtin_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

Scenario builtin(std::string_view name, const BuiltinOptions& options) {
  if (name == "http3_handshake") return http3_handshake(options);
  if (name == "udp_hole_punch") return udp_hole_punch(options);
  if (name == "tcp_timewait_probe") return tcp_timewait_probe(options);
  if (name == "stateless_reset_forgery") return stateless_reset_forgery(options);
  throw ScenarioError("unknown builtin scenario '" + std::string(name) + "'");
}

// Output --------------------------------------------------------------------

std::string format_record(const TraceRecord& r) {
  std::ostringstream os;
  os << "step=" << r.index << " t=" << r.at.count() << " actor=" << to_string(r.actor)
     << " proto=" << to_string(r.tuple.proto) << " " << endpoints(r.tuple) << " packet=" << r.packet
     << " chain=" << to_string(r.chain) << " ct=" << to_string(r.classification)
     << " verdict=" << to_string(r.verdict.action) << " reason=" << r.verdict.reason << " rule=";
  if (r.verdict.rule_index) {
    os << *r.verdict.rule_index;
  } else {
    os << '-';
  }
  os << " state=" << to_string(r.state) << " label=" << (r.label.empty() ? "-" : r.label);
  if (r.note) os << " note=\"" << *r.note << '"';
  return os.str();
}

void write_trace(std::ostream& os, const Trace& trace, OutputFormat format) {
  if (format == OutputFormat::Records) {
    os << "scenario=" << trace.scenario << " tracker=" << to_string(trace.tracker)
       << " mode=" << to_string(trace.mode) << '\n';
    for (const auto& r : trace.records) os << format_record(r) << '\n';
    return;
  }
  os << "scenario " << trace.scenario << " (tracker " << to_string(trace.tracker);
  if (trace.tracker == TrackerKind::QUIC) os << ", " << to_string(trace.mode);
  os << ")\n";
  os << std::left << std::setw(9) << "t(ms)" << std::setw(9) << "actor" << std::setw(7) << "chain"
     << std::setw(20) << "packet" << std::setw(46) << "src -> dst" << std::setw(12) << "ct" << std::setw(7)
     << "verdict" << ' ' << std::setw(18) << "reason" << std::setw(13) << "state"
     << "label\n";
  for (const auto& r : trace.records) {
    std::string flow = r.tuple.src_ip.str() + ":" + std::to_string(r.tuple.src_port) + " -> " +
                       r.tuple.dst_ip.str() + ":" + std::to_string(r.tuple.dst_port);
    std::string reason = r.verdict.reason;
    if (r.verdict.rule_index) reason += " " + std::to_string(*r.verdict.rule_index);
    os << std::left << std::setw(9) << r.at.count() << std::setw(9) << to_string(r.actor) << std::setw(7)
       << to_string(r.chain) << std::setw(20) << r.packet << std::setw(46) << flow << std::setw(12)
       << to_string(r.classification) << std::setw(7) << to_string(r.verdict.action) << ' ' << std::setw(18)
       << reason << std::setw(13) << to_string(r.state) << r.label << '\n';
    if (r.note) os << "         note: " << *r.note << '\n';
  }
}

void write_metrics(std::ostream& os, const Metrics& m) {
  os << "metrics attacker_accepted=" << m.attacker_accepted << " attacker_dropped=" << m.attacker_dropped
     << " hole_open_duration=" << m.hole_open_duration.count() / 1000 << '.' << std::setw(3)
     << std::setfill('0') << std::right << m.hole_open_duration.count() % 1000 << std::setfill(' ') << "s\n";
  os << "timeline";
  for (const auto& p : m.state_timeline) os << ' ' << p.at.count() << ':' << to_string(p.state);
  os << '\n';
}

void write_events(std::ostream& os, const Trace& trace) {
  for (const auto& e : trace.events) os << format_event(e) << '\n';
}

void write_table(std::ostream& os, const std::vector<ConnEntry>& entries) {
  os << "table entries=" << entries.size() << '\n';
  for (const auto& e : entries) {
    os << "  " << to_string(e.tuple.proto) << ' ' << to_string(e.state) << ' ' << endpoints(e.tuple);
    if (e.unreplied) os << " UNREPLIED";
    if (e.assured) os << " ASSURED";
    os << " expiry=" << e.expiry.count();
    if (e.quic) {
      os << " client_scid=" << (e.quic->client_scid.empty() ? "-" : e.quic->client_scid.hex());
      os << " server_scid="
         << (e.quic->server_scid ? (e.quic->server_scid->empty() ? "-" : e.quic->server_scid->hex()) : "pending");
    }
    os << '\n';
  }
}

}  // namespace quicwall
