// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "quicwall/tcp_tracker.hpp"
#include "quicwall/udp_tracker.hpp"
#include "testkit/oracles.hpp"

using namespace quicwall;
using namespace std::chrono_literals;

namespace {

const FiveTuple kTcp{Proto::TCP, Ipv4Address::parse("192.168.79.132"), Ipv4Address::parse("192.168.79.128"), 50000, 443};
const FiveTuple kUdp{Proto::UDP, kTcp.src_ip, kTcp.dst_ip, 50000, 443};

TcpFlags F(std::string_view s) { return parse_tcp_flags(s); }

// Client-side segments use the forward tuple, server-side the reverse.
Outcome client(ConnTable& t, std::string_view flags, long ms) {
  return tcp_step(t, kTcp, F(flags), Direction::Original, Millis{ms});
}
Outcome server(ConnTable& t, std::string_view flags, long ms) {
  return tcp_step(t, kTcp.reversed(), F(flags), Direction::Reply, Millis{ms});
}

}  // namespace

TEST(TcpFlags, ParseAndPrint) {
  EXPECT_EQ(F("syn,ack"), (TcpFlags{.syn = true, .ack = true}));
  EXPECT_EQ(F("FIN|ACK"), (TcpFlags{.ack = true, .fin = true}));
  EXPECT_EQ(to_string(F("ACK,SYN")), "SYN,ACK");
  EXPECT_EQ(to_string(TcpFlags{}), "NONE");
  EXPECT_EQ(F("NONE"), TcpFlags{});
  EXPECT_THROW(F("PSH"), std::invalid_argument);
  EXPECT_THROW(F(""), std::invalid_argument);
}

TEST(TcpTracker, Handshake) {
  ConnTable t;
  Outcome a = client(t, "SYN", 0);
  EXPECT_EQ(a.state, CtState::SYN_SENT);
  EXPECT_EQ(a.classification, CtClass::NEW);
  EXPECT_TRUE(a.event->snapshot.unreplied);
  Outcome b = server(t, "SYN,ACK", 10);
  EXPECT_EQ(b.state, CtState::SYN_RECV);
  EXPECT_FALSE(b.event->snapshot.unreplied);
  Outcome c = client(t, "ACK", 11);
  EXPECT_EQ(c.state, CtState::ESTABLISHED);
  EXPECT_TRUE(c.event->snapshot.assured);
  EXPECT_EQ(c.event->snapshot.expiry, Millis{11} + 7440s);
}

TEST(TcpTracker, FinAckSkipsCloseWait) {
  ConnTable t;
  client(t, "SYN", 0);
  server(t, "SYN,ACK", 1);
  client(t, "ACK", 2);
  EXPECT_EQ(server(t, "FIN", 3).state, CtState::FIN_WAIT);
  EXPECT_EQ(client(t, "FIN,ACK", 4).state, CtState::LAST_ACK);
  Outcome last = server(t, "ACK", 5);
  EXPECT_EQ(last.state, CtState::TIME_WAIT);
  EXPECT_EQ(last.event->snapshot.expiry, Millis{5} + 120s);
}

TEST(TcpTracker, SlowCloseGoesThroughCloseWait) {
  ConnTable t;
  client(t, "SYN", 0);
  server(t, "SYN,ACK", 1);
  client(t, "ACK", 2);
  server(t, "FIN", 3);
  EXPECT_EQ(client(t, "ACK", 4).state, CtState::CLOSE_WAIT);
  EXPECT_EQ(client(t, "FIN", 5).state, CtState::LAST_ACK);
  EXPECT_EQ(server(t, "ACK", 6).state, CtState::TIME_WAIT);
}

TEST(TcpTracker, RstDestroysImmediately) {
  ConnTable t;
  client(t, "SYN", 0);
  server(t, "SYN,ACK", 1);
  client(t, "ACK", 2);
  Outcome r = server(t, "RST", 3);
  EXPECT_EQ(r.state, CtState::CLOSE);
  ASSERT_TRUE(r.event);
  EXPECT_EQ(r.event->kind, EventKind::DESTROY);
  EXPECT_TRUE(t.empty());
  // Unlike TIME_WAIT, the next SYN opens a fresh entry.
  EXPECT_EQ(client(t, "SYN", 4).event->kind, EventKind::NEW);
}

TEST(TcpTracker, TimeWaitRefusesSyn) {
  ConnTable t;
  client(t, "SYN", 0);
  server(t, "SYN,ACK", 1);
  client(t, "ACK", 2);
  server(t, "FIN", 3);
  client(t, "FIN,ACK", 4);
  server(t, "ACK", 5);
  EXPECT_EQ(client(t, "SYN", 6).refusal, Refusal::TimeWaitSyn);
  EXPECT_EQ(server(t, "SYN", 7).refusal, Refusal::TimeWaitSyn);
  EXPECT_EQ(t.lookup(kTcp)->entry.state, CtState::TIME_WAIT);
}

TEST(TcpTracker, RefusalsWithoutEntry) {
  ConnTable t;
  EXPECT_EQ(client(t, "ACK", 0).refusal, Refusal::NoEntry);
  EXPECT_EQ(client(t, "RST", 0).refusal, Refusal::NoEntry);
  // A reply-direction segment never creates an entry.
  EXPECT_EQ(server(t, "SYN", 0).refusal, Refusal::NoEntry);
  EXPECT_TRUE(t.empty());
  EXPECT_TRUE(t.events().empty());
}

TEST(TcpTracker, InvalidTransitionLeavesEntry) {
  ConnTable t;
  client(t, "SYN", 0);
  Outcome o = client(t, "ACK", 1);
  EXPECT_EQ(o.refusal, Refusal::InvalidTransition);
  EXPECT_EQ(o.state, CtState::SYN_SENT);
  EXPECT_EQ(o.classification, CtClass::INVALID);
  EXPECT_EQ(t.events().size(), 1u);
  EXPECT_EQ(client(t, "SYN,FIN", 2).refusal, Refusal::InvalidTransition);
}

TEST(TcpTracker, RejectsUdpTuple) {
  ConnTable t;
  EXPECT_THROW(tcp_step(t, kUdp, F("SYN"), Direction::Original, Millis{0}), std::invalid_argument);
}

TEST(UdpTracker, NewRepliedAssured) {
  ConnTable t;
  Outcome a = udp_step(t, kUdp, Direction::Original, Millis{0});
  EXPECT_EQ(a.state, CtState::UDP_NEW);
  EXPECT_EQ(a.event->kind, EventKind::NEW);
  EXPECT_TRUE(a.event->snapshot.unreplied);
  Outcome b = udp_step(t, kUdp.reversed(), Direction::Reply, Millis{10});
  EXPECT_EQ(b.state, CtState::UDP_REPLIED);
  EXPECT_FALSE(b.event->snapshot.unreplied);
  Outcome c = udp_step(t, kUdp, Direction::Original, Millis{20});
  EXPECT_EQ(c.state, CtState::UDP_ASSURED);
  EXPECT_TRUE(c.event->snapshot.assured);
}

TEST(UdpTracker, RefreshArithmetic) {
  ConnTable t;
  udp_step(t, kUdp, Direction::Original, Millis{0});
  udp_step(t, kUdp, Direction::Original, Millis{25'000});
  EXPECT_EQ(t.lookup(kUdp)->entry.expiry, Millis{55'000});
}

TEST(UdpTracker, ReplyWithoutEntryRefused) {
  ConnTable t;
  Outcome o = udp_step(t, kUdp.reversed(), Direction::Reply, Millis{0});
  EXPECT_EQ(o.refusal, Refusal::NoEntry);
  EXPECT_TRUE(t.empty());
}

// Server-side datagrams every 10 s keep the entry alive indefinitely.
TEST(UdpTracker, KeepaliveHoldsHoleOpen) {
  ConnTable t;
  udp_step(t, kUdp, Direction::Original, Millis{0});
  udp_step(t, kUdp.reversed(), Direction::Reply, Millis{10});
  for (long s = 10; s <= 600; s += 10) {
    t.sweep(Millis{s * 1000});
    ASSERT_TRUE(udp_step(t, kUdp.reversed(), Direction::Reply, Millis{s * 1000}).accepted()) << s;
  }
  EXPECT_EQ(t.size(), 1u);
}

TEST(StateMachineOracle, TcpExhaustiveLengthFive) {
  auto r = testkit::check_tcp_exhaustive(5);
  EXPECT_EQ(r.mismatches, 0u) << r.first_mismatch;
  EXPECT_EQ(r.sequences, 32u + 32u * 32 + 32u * 32 * 32 + 32u * 32 * 32 * 32 + 32u * 32 * 32 * 32 * 32);
}

TEST(StateMachineOracle, UdpExhaustiveLengthFive) {
  auto r = testkit::check_udp_exhaustive(5);
  EXPECT_EQ(r.mismatches, 0u) << r.first_mismatch;
  EXPECT_EQ(r.sequences, 6u + 36 + 216 + 1296 + 7776);
}
