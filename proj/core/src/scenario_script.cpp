// SPDX-License-Identifier: Apache-2.0
//
// Scenario script grammar, one directive per line, '#' starts a comment line:
//
//   name <word>
//   tracker tcp|udp|quic
//   mode strict|fallback
//   ttl-udp <seconds>
//   seed <integer>                      filler bytes for synthesized payloads
//   actor client|server|attacker <ipv4>
//   at <ms> <actor> <proto> <src>:<sport> -> <dst>:<dport> <kind> [args] [label=<word>]
//
// kinds:
//   tcp <FLAGS>                                   e.g. tcp SYN,ACK
//   udp-raw <HEX>                                 exact UDP payload
//   quic-initial dcid=<HEX> scid=<HEX> [version=<HEX>] [len=<n>]
//   quic-handshake dcid=<HEX> scid=<HEX> [version=<HEX>] [len=<n>]
//   quic-short <DCIDHEX> [len=<n>]
//   reset-forgery [len=<n>]                       stateless-reset shaped, n >= 21
//
// A connection ID written as '-' is zero-length.
#include <charconv>
#include <map>
#include <tuple>
#include <random>
#include <sstream>

#include "quicwall/scenario.hpp"

namespace quicwall {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

class ScriptParser {
 public:
  Scenario parse(std::string_view text) {
    std::size_t start = 0;
    while (start < text.size()) {
      std::size_t end = text.find('\n', start);
      if (end == std::string_view::npos) end = text.size();
      ++line_;
      directive(text.substr(start, end - start));
      start = end + 1;
    }
    if (scenario_.name.empty()) scenario_.name = "script";
    return std::move(scenario_);
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ScenarioError("line " + std::to_string(line_) + ": " + what);
  }

  template <typename Int>
  Int number(std::string_view text, const char* what, int base = 10) const {
    if (base == 16 && text.starts_with("0x")) text.remove_prefix(2);
    Int value{};
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value, base);
    if (ec != std::errc{} || end != text.data() + text.size()) fail(std::string("bad ") + what + " '" + std::string(text) + "'");
    return value;
  }

  ConnectionId cid(std::string_view hex) const {
    if (hex == "-") return {};
    try {
      return ConnectionId::from_hex(hex);
    } catch (const std::exception& e) {
      fail(std::string("bad connection ID: ") + e.what());
    }
  }

  std::pair<Ipv4Address, std::uint16_t> endpoint(std::string_view text) const {
    auto colon = text.rfind(':');
    if (colon == std::string_view::npos) fail("endpoint '" + std::string(text) + "' lacks a port");
    Ipv4Address ip;
    try {
      ip = Ipv4Address::parse(text.substr(0, colon));
    } catch (const std::exception& e) {
      fail(e.what());
    }
    return {ip, number<std::uint16_t>(text.substr(colon + 1), "port")};
  }

  void directive(std::string_view raw) {
    auto tok = split_ws(raw);
    if (tok.empty() || tok[0].front() == '#') return;
    const std::string_view cmd = tok[0];
    auto need = [&](std::size_t n) {
      if (tok.size() != n) fail("'" + std::string(cmd) + "' takes " + std::to_string(n - 1) + " argument(s)");
    };
    if (cmd == "name") {
      need(2);
      scenario_.name = tok[1];
    } else if (cmd == "tracker") {
      need(2);
      auto kind = tracker_from_string(tok[1]);
      if (!kind) fail("unknown tracker '" + std::string(tok[1]) + "'");
      scenario_.tracker = *kind;
    } else if (cmd == "mode") {
      need(2);
      if (tok[1] == "strict") scenario_.config.quic.mode = QuicMode::StrictDcid;
      else if (tok[1] == "fallback") scenario_.config.quic.mode = QuicMode::TupleFallback;
      else fail("unknown mode '" + std::string(tok[1]) + "'");
    } else if (cmd == "ttl-udp") {
      need(2);
      auto s = number<std::int64_t>(tok[1], "TTL");
      if (s <= 0) fail("TTL must be positive");
      scenario_.config.ttl.set_udp(std::chrono::seconds{s});
    } else if (cmd == "seed") {
      need(2);
      rng_.seed(number<std::uint64_t>(tok[1], "seed"));
    } else if (cmd == "actor") {
      need(3);
      auto actor = actor_from_string(tok[1]);
      if (!actor) fail("unknown actor '" + std::string(tok[1]) + "'");
      try {
        scenario_.actors[*actor] = Ipv4Address::parse(tok[2]);
      } catch (const std::exception& e) {
        fail(e.what());
      }
    } else if (cmd == "at") {
      step(tok);
    } else {
      fail("unknown directive '" + std::string(cmd) + "'");
    }
  }

  Bytes filler(std::size_t n) {
    Bytes out;
    out.reserve(n);
    while (out.size() < n) {
      std::uint64_t v = rng_();
      for (int i = 0; i < 8 && out.size() < n; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    return out;
  }

  void step(const std::vector<std::string_view>& tok) {
    if (tok.size() < 8) fail("'at' needs: at <ms> <actor> <proto> <src> -> <dst> <kind>");
    Step s;
    s.at = Millis{number<std::int64_t>(tok[1], "time")};
    auto actor = actor_from_string(tok[2]);
    if (!actor) fail("unknown actor '" + std::string(tok[2]) + "'");
    s.actor = *actor;
    if (tok[3] == "tcp") s.tuple.proto = Proto::TCP;
    else if (tok[3] == "udp") s.tuple.proto = Proto::UDP;
    else fail("unknown protocol '" + std::string(tok[3]) + "'");
    if (tok[5] != "->") fail("expected '->' between endpoints");
    std::tie(s.tuple.src_ip, s.tuple.src_port) = endpoint(tok[4]);
    std::tie(s.tuple.dst_ip, s.tuple.dst_port) = endpoint(tok[6]);

    const std::string_view kind = tok[7];
    std::vector<std::string_view> positional;
    std::map<std::string_view, std::string_view> kv;
    for (std::size_t i = 8; i < tok.size(); ++i) {
      auto eq = tok[i].find('=');
      if (eq == std::string_view::npos) {
        positional.push_back(tok[i]);
      } else {
        kv[tok[i].substr(0, eq)] = tok[i].substr(eq + 1);
      }
    }
    if (auto it = kv.find("label"); it != kv.end()) {
      s.label = it->second;
      kv.erase(it);
    }
    auto take = [&](std::string_view key) -> std::optional<std::string_view> {
      auto it = kv.find(key);
      if (it == kv.end()) return std::nullopt;
      auto v = it->second;
      kv.erase(it);
      return v;
    };
    auto len = [&](std::size_t fallback) {
      auto v = take("len");
      return v ? number<std::size_t>(*v, "len") : fallback;
    };
    auto version = [&] {
      auto v = take("version");
      return v ? number<std::uint32_t>(*v, "version", 16) : kQuicDraft29;
    };
    auto positional_count = [&](std::size_t n) {
      if (positional.size() != n) fail("'" + std::string(kind) + "' takes " + std::to_string(n) + " positional argument(s)");
    };

    const bool tcp_kind = kind == "tcp";
    if (tcp_kind != (s.tuple.proto == Proto::TCP)) fail("kind '" + std::string(kind) + "' does not match the protocol");

    if (kind == "tcp") {
      positional_count(1);
      try {
        s.packet = parse_tcp_flags(positional[0]);
      } catch (const std::exception& e) {
        fail(e.what());
      }
    } else if (kind == "udp-raw") {
      positional_count(1);
      try {
        s.packet = from_hex(positional[0]);
      } catch (const std::exception& e) {
        fail(std::string("bad payload: ") + e.what());
      }
    } else if (kind == "quic-initial" || kind == "quic-handshake") {
      positional_count(0);
      auto dcid = take("dcid");
      auto scid = take("scid");
      if (!dcid || !scid) fail("'" + std::string(kind) + "' needs dcid= and scid=");
      auto variant = kind == "quic-initial" ? HeaderVariant::LongInitial : HeaderVariant::LongHandshake;
      std::uint32_t v = version();
      ConnectionId d = cid(*dcid), sc = cid(*scid);
      s.packet = build_long_header(variant, v, d, sc, filler(len(64)));
    } else if (kind == "quic-short") {
      positional_count(1);
      ConnectionId d = cid(positional[0]);
      s.packet = build_short_header(d, filler(len(32)));
    } else if (kind == "reset-forgery") {
      positional_count(0);
      std::size_t n = len(kMinStatelessResetLength);
      if (n < kMinStatelessResetLength) fail("reset-forgery needs len >= 21");
      Bytes b = filler(n);
      b[0] = static_cast<std::uint8_t>(0x40 | (b[0] & 0x3f));
      s.packet = std::move(b);
    } else {
      fail("unknown packet kind '" + std::string(kind) + "'");
    }
    if (!kv.empty()) fail("unexpected argument '" + std::string(kv.begin()->first) + "='");
    scenario_.steps.push_back(std::move(s));
  }

  Scenario scenario_;
  std::size_t line_ = 0;
  std::mt19937_64 rng_{0x5eed};
};

}  // namespace

Scenario parse_scenario(std::string_view text) { return ScriptParser().parse(text); }

std::string to_script(const Scenario& s) {
  std::ostringstream os;
  os << "name " << s.name << '\n';
  os << "tracker " << to_string(s.tracker) << '\n';
  os << "mode " << to_string(s.config.quic.mode) << '\n';
  os << "ttl-udp " << s.config.ttl.ttl(Proto::UDP, CtState::UDP_NEW).count() << '\n';
  for (const auto& [actor, ip] : s.actors) os << "actor " << to_string(actor) << ' ' << ip.str() << '\n';
  for (const Step& step : s.steps) {
    const FiveTuple& t = step.tuple;
    os << "at " << step.at.count() << ' ' << to_string(step.actor) << ' ' << to_string(t.proto) << ' '
       << t.src_ip.str() << ':' << t.src_port << " -> " << t.dst_ip.str() << ':' << t.dst_port << ' ';
    if (const auto* flags = std::get_if<TcpFlags>(&step.packet)) {
      os << "tcp " << to_string(*flags);
    } else {
      os << "udp-raw " << to_hex(std::get<Bytes>(step.packet));
    }
    if (!step.label.empty()) os << " label=" << step.label;
    os << '\n';
  }
  return os.str();
}

}  // namespace quicwall
