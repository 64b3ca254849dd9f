// SPDX-License-Identifier: Apache-2.0
#include "quicwall/firewall.hpp"

#include <charconv>
#include <sstream>

namespace quicwall {

const std::string_view kDefaultRules =
    "# Generated by iptables-save v1.8.4\n"
    "*filter\n"
    ":INPUT DROP [581:48486]\n"
    ":FORWARD DROP [0:0]\n"
    ":OUTPUT DROP [27:3466]\n"
    "-A INPUT -p tcp -m tcp --dport 443 -m conntrack --ctstate NEW,RELATED,ESTABLISHED -j ACCEPT\n"
    "-A INPUT -p udp -m udp --dport 443 -m conntrack --ctstate NEW,RELATED,ESTABLISHED -j ACCEPT\n"
    "-A OUTPUT -p tcp -m tcp --sport 443 -m conntrack --ctstate RELATED,ESTABLISHED -j ACCEPT\n"
    "-A OUTPUT -p udp -m udp --sport 443 -m conntrack --ctstate RELATED,ESTABLISHED -j ACCEPT\n"
    "COMMIT\n";

namespace {

std::uint8_t bit(CtClass cls) {
  switch (cls) {
    case CtClass::NEW: return 1;
    case CtClass::ESTABLISHED: return 2;
    case CtClass::RELATED: return 4;
    default: return 0;
  }
}

std::optional<Chain> chain_from(std::string_view name) {
  if (name == "INPUT") return Chain::INPUT;
  if (name == "FORWARD") return Chain::FORWARD;
  if (name == "OUTPUT") return Chain::OUTPUT;
  return std::nullopt;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool is_counter(std::string_view s) {
  if (s.size() < 5 || s.front() != '[' || s.back() != ']') return false;
  auto colon = s.find(':');
  if (colon == std::string_view::npos || colon == 1 || colon == s.size() - 2) return false;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    if (i != colon && (s[i] < '0' || s[i] > '9')) return false;
  }
  return true;
}

class RuleParser {
 public:
  RuleParser(std::size_t line, std::vector<std::string_view> tokens) : line_(line), tokens_(std::move(tokens)) {}

  Rule parse() {
    Rule rule;
    rule.line = line_;
    auto chain = chain_from(next("-A"));
    if (!chain) unsupported("user-defined chain '" + std::string(tokens_[1]) + "'");
    rule.chain = *chain;

    bool have_proto = false, have_port = false, have_target = false, conntrack = false;
    while (pos_ < tokens_.size()) {
      std::string_view opt = tokens_[pos_++];
      if (opt == "-p" || opt == "--protocol") {
        std::string_view p = next(opt);
        if (p == "tcp") rule.proto = Proto::TCP;
        else if (p == "udp") rule.proto = Proto::UDP;
        else unsupported("protocol '" + std::string(p) + "'");
        have_proto = true;
      } else if (opt == "-m" || opt == "--match") {
        std::string_view m = next(opt);
        if (m == "conntrack") conntrack = true;
        else if (m != "tcp" && m != "udp") unsupported("match module '" + std::string(m) + "'");
      } else if (opt == "--dport" || opt == "--sport" || opt == "--destination-port" || opt == "--source-port") {
        if (!have_proto) syntax(std::string(opt) + " without -p");
        if (have_port) unsupported("more than one port match");
        rule.port.field = (opt == "--dport" || opt == "--destination-port") ? PortField::DPort : PortField::SPort;
        rule.port.port = port(next(opt));
        have_port = true;
      } else if (opt == "--ctstate") {
        if (!conntrack) syntax("--ctstate without -m conntrack");
        ctstates(next(opt), rule.ctstates);
      } else if (opt == "-j" || opt == "--jump") {
        std::string_view target = next(opt);
        if (target != "ACCEPT") unsupported("target '" + std::string(target) + "'");
        have_target = true;
      } else {
        unsupported("option '" + std::string(opt) + "'");
      }
    }
    if (!have_proto) syntax("rule without -p");
    if (!have_port) syntax("rule without --dport/--sport");
    if (rule.ctstates.empty()) syntax("rule without --ctstate");
    if (!have_target) syntax("rule without -j");
    return rule;
  }

 private:
  std::string_view next(std::string_view after) {
    if (pos_ >= tokens_.size()) syntax("missing value after " + std::string(after));
    return tokens_[pos_++];
  }

  std::uint16_t port(std::string_view text) {
    if (text.find(':') != std::string_view::npos) unsupported("port range '" + std::string(text) + "'");
    unsigned value = 0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || end != text.data() + text.size() || value == 0 || value > 65535) {
      syntax("bad port '" + std::string(text) + "'");
    }
    return static_cast<std::uint16_t>(value);
  }

  void ctstates(std::string_view list, CtStateSet& out) {
    std::size_t start = 0;
    while (start <= list.size()) {
      std::size_t end = list.find(',', start);
      if (end == std::string_view::npos) end = list.size();
      std::string_view s = list.substr(start, end - start);
      if (s == "NEW") out.add(CtClass::NEW);
      else if (s == "ESTABLISHED") out.add(CtClass::ESTABLISHED);
      else if (s == "RELATED") out.add(CtClass::RELATED);
      else if (s == "INVALID" || s == "UNTRACKED" || s == "SNAT" || s == "DNAT") unsupported("ctstate " + std::string(s));
      else syntax("unknown ctstate '" + std::string(s) + "'");
      start = end + 1;
    }
  }

  [[noreturn]] void unsupported(const std::string& what) {
    throw RuleError(RuleErrc::UnsupportedDirective, line_, what);
  }
  [[noreturn]] void syntax(const std::string& what) { throw RuleError(RuleErrc::SyntaxError, line_, what); }

  std::size_t line_;
  std::vector<std::string_view> tokens_;
  std::size_t pos_ = 1;
};

}  // namespace

std::string_view to_string(Chain chain) {
  switch (chain) {
    case Chain::INPUT: return "INPUT";
    case Chain::FORWARD: return "FORWARD";
    case Chain::OUTPUT: return "OUTPUT";
  }
  return "?";
}

std::string_view to_string(Action action) { return action == Action::ACCEPT ? "ACCEPT" : "DROP"; }

std::string_view to_string(RuleErrc code) {
  return code == RuleErrc::UnsupportedDirective ? "UnsupportedDirective" : "SyntaxError";
}

RuleError::RuleError(RuleErrc code, std::size_t line, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + " at line " + std::to_string(line) + ": " + detail),
      code_(code),
      line_(line) {}

void CtStateSet::add(CtClass cls) { bits_ |= bit(cls); }

bool CtStateSet::contains(CtClass cls) const noexcept { return (bits_ & bit(cls)) != 0; }

std::string CtStateSet::str() const {
  std::string out;
  for (CtClass c : {CtClass::NEW, CtClass::RELATED, CtClass::ESTABLISHED}) {
    if (!contains(c)) continue;
    if (!out.empty()) out += ',';
    out += to_string(c);
  }
  return out;
}

std::string to_string(const Rule& rule) {
  std::ostringstream os;
  os << "-A " << to_string(rule.chain) << " -p " << to_string(rule.proto) << " -m " << to_string(rule.proto)
     << (rule.port.field == PortField::DPort ? " --dport " : " --sport ") << rule.port.port
     << " -m conntrack --ctstate " << rule.ctstates.str() << " -j ACCEPT";
  return os.str();
}

Ruleset load_rules(std::string_view text) {
  Ruleset rs;
  std::size_t line_no = 0;
  bool committed = false;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = trim(text.substr(start, end - start));
    start = end + 1;
    ++line_no;

    if (line.empty() || line.front() == '#') continue;
    if (committed) throw RuleError(RuleErrc::UnsupportedDirective, line_no, "content after COMMIT");

    auto tokens = split_ws(line);
    if (line.front() == '*') {
      if (line != "*filter") throw RuleError(RuleErrc::UnsupportedDirective, line_no, "table " + std::string(line));
    } else if (line.front() == ':') {
      if (tokens.size() < 2 || tokens.size() > 3) throw RuleError(RuleErrc::SyntaxError, line_no, "bad chain line");
      auto chain = chain_from(tokens[0].substr(1));
      if (!chain) {
        throw RuleError(RuleErrc::UnsupportedDirective, line_no, "user-defined chain " + std::string(tokens[0]));
      }
      if (tokens[1] != "DROP") {
        throw RuleError(RuleErrc::UnsupportedDirective, line_no, "chain policy " + std::string(tokens[1]));
      }
      if (tokens.size() == 3 && !is_counter(tokens[2])) {
        throw RuleError(RuleErrc::SyntaxError, line_no, "bad counters " + std::string(tokens[2]));
      }
      rs.policies[*chain] = "DROP";
    } else if (tokens[0] == "-A") {
      if (tokens.size() < 2) throw RuleError(RuleErrc::SyntaxError, line_no, "-A without chain");
      rs.rules.push_back(RuleParser(line_no, std::move(tokens)).parse());
    } else if (line == "COMMIT") {
      committed = true;
    } else if (line.front() == '-') {
      throw RuleError(RuleErrc::UnsupportedDirective, line_no, "command " + std::string(tokens[0]));
    } else {
      throw RuleError(RuleErrc::SyntaxError, line_no, "unrecognised line");
    }
  }
  return rs;
}

Verdict evaluate(const Ruleset& ruleset, Chain chain, const FiveTuple& tuple, CtClass classification) {
  for (std::size_t i = 0; i < ruleset.rules.size(); ++i) {
    const Rule& r = ruleset.rules[i];
    if (r.chain != chain || r.proto != tuple.proto) continue;
    std::uint16_t port = r.port.field == PortField::DPort ? tuple.dst_port : tuple.src_port;
    if (port != r.port.port) continue;
    if (classification == CtClass::INVALID || !r.ctstates.contains(classification)) continue;
    return Verdict{Action::ACCEPT, "rule", i};
  }
  return Verdict{Action::DROP, "policy", std::nullopt};
}

}  // namespace quicwall
