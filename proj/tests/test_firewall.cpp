// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "quicwall/firewall.hpp"
#include "testkit/properties.hpp"

using namespace quicwall;

namespace {

const Ipv4Address kClient = Ipv4Address::parse("192.168.79.132");
const Ipv4Address kServer = Ipv4Address::parse("192.168.79.128");

FiveTuple inbound(Proto p, std::uint16_t dport) { return {p, kClient, kServer, 50000, dport}; }
FiveTuple outbound(Proto p, std::uint16_t sport) { return {p, kServer, kClient, sport, 50000}; }

RuleErrc load_error(std::string_view text, std::size_t* line = nullptr) {
  try {
    load_rules(text);
  } catch (const RuleError& e) {
    if (line) *line = e.line();
    return e.code();
  }
  ADD_FAILURE() << "accepted: " << text;
  return RuleErrc::SyntaxError;
}

}  // namespace

TEST(Firewall, DefaultRulesLoad) {
  Ruleset rs = load_rules(kDefaultRules);
  ASSERT_EQ(rs.rules.size(), 4u);
  for (Chain c : {Chain::INPUT, Chain::FORWARD, Chain::OUTPUT}) EXPECT_EQ(rs.policies.at(c), "DROP");
  EXPECT_EQ(to_string(rs.rules[1]),
            "-A INPUT -p udp -m udp --dport 443 -m conntrack --ctstate NEW,RELATED,ESTABLISHED -j ACCEPT");
  EXPECT_EQ(rs.rules[3].port.field, PortField::SPort);
  EXPECT_FALSE(rs.rules[3].ctstates.contains(CtClass::NEW));
  EXPECT_EQ(rs.rules[0].line, 6u);  // after the iptables-save banner
}

TEST(Firewall, ExampleVerdicts) {
  Ruleset rs = load_rules(kDefaultRules);
  Verdict a = evaluate(rs, Chain::INPUT, inbound(Proto::UDP, 443), CtClass::NEW);
  EXPECT_EQ(a.action, Action::ACCEPT);
  EXPECT_EQ(a.rule_index, 1u);
  Verdict b = evaluate(rs, Chain::OUTPUT, outbound(Proto::UDP, 443), CtClass::NEW);
  EXPECT_EQ(b.action, Action::DROP);
  EXPECT_EQ(b.reason, "policy");
  for (CtClass c : {CtClass::NEW, CtClass::ESTABLISHED, CtClass::RELATED, CtClass::INVALID}) {
    EXPECT_EQ(evaluate(rs, Chain::INPUT, inbound(Proto::UDP, 8080), c).action, Action::DROP);
  }
  EXPECT_EQ(evaluate(rs, Chain::OUTPUT, outbound(Proto::UDP, 443), CtClass::ESTABLISHED).rule_index, 3u);
  EXPECT_EQ(evaluate(rs, Chain::INPUT, inbound(Proto::TCP, 443), CtClass::INVALID).action, Action::DROP);
  EXPECT_EQ(evaluate(rs, Chain::FORWARD, inbound(Proto::TCP, 443), CtClass::NEW).action, Action::DROP);
}

TEST(Firewall, EmptyTextDropsEverything) {
  Ruleset rs = load_rules("");
  EXPECT_TRUE(rs.rules.empty());
  EXPECT_EQ(evaluate(rs, Chain::INPUT, inbound(Proto::TCP, 443), CtClass::NEW).action, Action::DROP);
}

TEST(Firewall, Rejections) {
  std::size_t line = 0;
  EXPECT_EQ(load_error("*filter\n-A INPUT -p tcp --dport 22 -m conntrack --ctstate NEW -j REJECT\n", &line),
            RuleErrc::UnsupportedDirective);
  EXPECT_EQ(line, 2u);
  EXPECT_EQ(load_error(":INPUT ACCEPT [0:0]"), RuleErrc::UnsupportedDirective);
  EXPECT_EQ(load_error(":MYCHAIN - [0:0]"), RuleErrc::UnsupportedDirective);
  EXPECT_EQ(load_error(":INPUT DROP [x:0]"), RuleErrc::SyntaxError);
  EXPECT_EQ(load_error("*nat"), RuleErrc::UnsupportedDirective);
  EXPECT_EQ(load_error("-A INPUT -p tcp --dport 1:100 -m conntrack --ctstate NEW -j ACCEPT"), RuleErrc::UnsupportedDirective);
  EXPECT_EQ(load_error("-A INPUT -p icmp --dport 1 -m conntrack --ctstate NEW -j ACCEPT"), RuleErrc::UnsupportedDirective);
  EXPECT_EQ(load_error("-A INPUT -p tcp --dport 1 -m conntrack --ctstate INVALID -j ACCEPT"), RuleErrc::UnsupportedDirective);
  EXPECT_EQ(load_error("-A INPUT -p tcp --dport 1 --ctstate NEW -j ACCEPT"), RuleErrc::SyntaxError);
  EXPECT_EQ(load_error("-A INPUT -p tcp --dport 1 -m conntrack --ctstate NEW"), RuleErrc::SyntaxError);
  EXPECT_EQ(load_error("-A INPUT -p tcp -m conntrack --ctstate NEW -j ACCEPT"), RuleErrc::SyntaxError);
  EXPECT_EQ(load_error("-A INPUT -p tcp --dport 1 -j ACCEPT"), RuleErrc::SyntaxError);
  EXPECT_EQ(load_error("-A INPUT -p tcp --dport 1 -m conntrack --ctstate BOGUS -j ACCEPT"), RuleErrc::SyntaxError);
  EXPECT_EQ(load_error("-A INPUT -p tcp --dport 0 -m conntrack --ctstate NEW -j ACCEPT"), RuleErrc::SyntaxError);
  EXPECT_EQ(load_error("-A INPUT -p tcp --dport 1 -s 10.0.0.1 -m conntrack --ctstate NEW -j ACCEPT"),
            RuleErrc::UnsupportedDirective);
  EXPECT_EQ(load_error("-I INPUT 1 -p tcp"), RuleErrc::UnsupportedDirective);
  EXPECT_EQ(load_error("COMMIT\n-A INPUT -p tcp --dport 1 -m conntrack --ctstate NEW -j ACCEPT"),
            RuleErrc::UnsupportedDirective);
  EXPECT_EQ(load_error("garbage"), RuleErrc::SyntaxError);
}

TEST(Firewall, CrlfAndComments) {
  Ruleset rs = load_rules("# c\r\n*filter\r\n:INPUT DROP\r\n-A INPUT -p udp -m udp --sport 53 -m conntrack --ctstate ESTABLISHED -j ACCEPT\r\nCOMMIT\r\n");
  ASSERT_EQ(rs.rules.size(), 1u);
  EXPECT_EQ(rs.rules[0].port, (PortMatch{PortField::SPort, 53}));
}

TEST(Firewall, RelatedIsAcceptedWhenListed) {
  Ruleset rs = load_rules(kDefaultRules);
  EXPECT_EQ(evaluate(rs, Chain::OUTPUT, outbound(Proto::TCP, 443), CtClass::RELATED).action, Action::ACCEPT);
}

TEST(FirewallProperties, PermutationAndDuplication) {
  auto r = testkit::firewall_permutation(500, 31);
  EXPECT_TRUE(r.ok()) << r.first_failure;
}

// Server-originated packets are only accepted with an ESTABLISHED or RELATED
// classification under the default rules.
TEST(FirewallProperties, ServerPacketsNeedTrackedState) {
  Ruleset rs = load_rules(kDefaultRules);
  for (Proto p : {Proto::TCP, Proto::UDP}) {
    for (std::uint16_t sport : {443, 80, 50000}) {
      EXPECT_EQ(evaluate(rs, Chain::OUTPUT, outbound(p, sport), CtClass::NEW).action, Action::DROP);
      EXPECT_EQ(evaluate(rs, Chain::OUTPUT, outbound(p, sport), CtClass::INVALID).action, Action::DROP);
    }
  }
}
