// SPDX-License-Identifier: Apache-2.0
//
// A small iptables-save reader and first-match rule engine: filter table,
// DROP chain policies, ACCEPT rules matching protocol, one port and a
// conntrack ctstate set.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "quicwall/tracker.hpp"
#include "quicwall/tuple.hpp"

namespace quicwall {

enum class Chain { INPUT, FORWARD, OUTPUT };

std::string_view to_string(Chain chain);

enum class PortField { DPort, SPort };

struct PortMatch {
  PortField field = PortField::DPort;
  std::uint16_t port = 0;

  friend bool operator==(const PortMatch&, const PortMatch&) = default;
};

// Bit set over NEW / ESTABLISHED / RELATED.
class CtStateSet {
 public:
  CtStateSet() = default;
  void add(CtClass cls);
  bool contains(CtClass cls) const noexcept;
  bool empty() const noexcept { return bits_ == 0; }
  std::string str() const;

  friend bool operator==(const CtStateSet&, const CtStateSet&) = default;

 private:
  std::uint8_t bits_ = 0;
};

struct Rule {
  Chain chain = Chain::INPUT;
  Proto proto = Proto::TCP;
  PortMatch port;
  CtStateSet ctstates;
  std::size_t line = 0;  // source line, 1-based; 0 when built in code

  friend bool operator==(const Rule&, const Rule&) = default;
};

// iptables-save style rendering of one rule.
std::string to_string(const Rule& rule);

struct Ruleset {
  std::vector<Rule> rules;
  // Every chain defaults to DROP; the parser rejects other policies.
  std::map<Chain, std::string> policies{{Chain::INPUT, "DROP"}, {Chain::FORWARD, "DROP"}, {Chain::OUTPUT, "DROP"}};
};

enum class RuleErrc { UnsupportedDirective, SyntaxError };

class RuleError : public std::runtime_error {
 public:
  RuleError(RuleErrc code, std::size_t line, const std::string& detail);

  RuleErrc code() const noexcept { return code_; }
  std::size_t line() const noexcept { return line_; }

 private:
  RuleErrc code_;
  std::size_t line_;
};

std::string_view to_string(RuleErrc code);

Ruleset load_rules(std::string_view text);

enum class Action { ACCEPT, DROP };

std::string_view to_string(Action action);

struct Verdict {
  Action action = Action::DROP;
  std::string reason;
  std::optional<std::size_t> rule_index;  // 0-based into Ruleset::rules
};

// First matching rule wins; otherwise the chain policy (DROP). INVALID never
// matches a ctstate set.
Verdict evaluate(const Ruleset& ruleset, Chain chain, const FiveTuple& tuple, CtClass classification);

// The server ruleset used throughout: HTTPS and HTTP/3 on port 443 in,
// only established/related replies out.
extern const std::string_view kDefaultRules;

}  // namespace quicwall
