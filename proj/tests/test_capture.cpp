// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <sstream>

#include "quicwall/capture.hpp"
#include "quicwall/scenario.hpp"

using namespace quicwall;

namespace {

std::string le32(std::uint32_t v) { return {char(v), char(v >> 8), char(v >> 16), char(v >> 24)}; }
std::string be32(std::uint32_t v) { return {char(v >> 24), char(v >> 16), char(v >> 8), char(v)}; }
std::string le16(std::uint16_t v) { return {char(v), char(v >> 8)}; }
std::string be16(std::uint16_t v) { return {char(v >> 8), char(v)}; }

std::string global_header(std::uint32_t link, bool big_endian = false, std::uint32_t magic = 0xa1b2c3d4) {
  if (big_endian) return be32(magic) + be16(2) + be16(4) + be32(0) + be32(0) + be32(65535) + be32(link);
  return le32(magic) + le16(2) + le16(4) + le32(0) + le32(0) + le32(65535) + le32(link);
}

std::string record(const std::string& frame, std::uint32_t sec, std::uint32_t frac, bool big_endian = false) {
  auto f = big_endian ? be32 : le32;
  return f(sec) + f(frac) + f(static_cast<std::uint32_t>(frame.size())) + f(static_cast<std::uint32_t>(frame.size())) + frame;
}

std::string arp_frame() {
  std::string f(12, '\x11');
  f += be16(0x0806);
  f += std::string(28, '\0');
  return f;
}

CaptureErrc read_error(const std::string& bytes) {
  std::istringstream in(bytes);
  try {
    read_pcap(in);
  } catch (const CaptureError& e) {
    return e.code();
  }
  ADD_FAILURE() << "no CaptureError";
  return CaptureErrc::BadMagic;
}

std::vector<CapturedPacket> sample() {
  const FiveTuple tcp{Proto::TCP, Ipv4Address::parse("10.0.0.1"), Ipv4Address::parse("10.0.0.2"), 1234, 443};
  const FiveTuple udp{Proto::UDP, tcp.dst_ip, tcp.src_ip, 443, 1234};
  return {
      {Millis{0}, tcp, TcpFlags{.syn = true}},
      {Millis{7}, udp, Bytes{0x40, 1, 2, 3}},
      {Millis{7}, udp, Bytes{}},
      {Millis{1500}, tcp, TcpFlags{.ack = true, .fin = true}},
      {Millis{1501}, tcp, TcpFlags{.rst = true}},
  };
}

std::uint16_t ones_complement(const std::string& s, std::size_t off, std::size_t len) {
  std::uint32_t acc = 0;
  for (std::size_t i = 0; i + 1 < len; i += 2) {
    acc += (std::uint8_t(s[off + i]) << 8) | std::uint8_t(s[off + i + 1]);
  }
  while (acc >> 16) acc = (acc & 0xffff) + (acc >> 16);
  return static_cast<std::uint16_t>(acc);
}

}  // namespace

TEST(Capture, WriteReadRoundtrip) {
  for (LinkType link : {LinkType::Ethernet, LinkType::Raw, LinkType::Ipv4}) {
    std::stringstream buf;
    auto packets = sample();
    write_pcap(buf, packets, link);
    Capture c = read_pcap(buf);
    EXPECT_EQ(c.link_type, link);
    EXPECT_EQ(c.packets, packets);
    EXPECT_EQ(c.skipped, 0u);
  }
}

TEST(Capture, Ipv4HeaderChecksumIsValid) {
  std::stringstream buf;
  write_pcap(buf, sample(), LinkType::Ethernet);
  const std::string s = buf.str();
  // First record: 24-byte global header, 16-byte record header, 14-byte Ethernet.
  const std::size_t ip = 24 + 16 + 14;
  EXPECT_EQ(std::uint8_t(s[ip]), 0x45);
  EXPECT_EQ(ones_complement(s, ip, 20), 0xffff);
}

TEST(Capture, OnlyArpFrames) {
  std::string file = global_header(1);
  for (int i = 0; i < 3; ++i) file += record(arp_frame(), 100 + i, 0);
  std::istringstream in(file);
  Capture c = read_pcap(in);
  EXPECT_TRUE(c.packets.empty());
  EXPECT_EQ(c.skipped, 3u);
}

TEST(Capture, Errors) {
  EXPECT_EQ(read_error("ab"), CaptureErrc::TruncatedFile);
  EXPECT_EQ(read_error(std::string(24, 'x')), CaptureErrc::BadMagic);
  EXPECT_EQ(read_error(global_header(1).substr(0, 20)), CaptureErrc::TruncatedFile);
  EXPECT_EQ(read_error(global_header(105)), CaptureErrc::UnsupportedLinkType);
  EXPECT_EQ(read_error(global_header(1) + "short"), CaptureErrc::TruncatedFile);
  std::string cut = global_header(1) + record(arp_frame(), 1, 0);
  cut.resize(cut.size() - 3);
  EXPECT_EQ(read_error(cut), CaptureErrc::TruncatedFile);
}

TEST(Capture, MissingFile) { EXPECT_THROW(read_pcap_file("/nonexistent/x.pcap"), std::runtime_error); }

TEST(Capture, BigEndianAndNanosecondMagic) {
  std::stringstream le;
  write_pcap(le, sample(), LinkType::Raw);
  // Re-emit the same frames big-endian with nanosecond timestamps.
  const std::string src = le.str();
  std::string out = global_header(101, true, 0xa1b23c4d);
  std::size_t pos = 24;
  while (pos < src.size()) {
    auto u32 = [&](std::size_t at) {
      return std::uint32_t(std::uint8_t(src[at])) | std::uint32_t(std::uint8_t(src[at + 1])) << 8 |
             std::uint32_t(std::uint8_t(src[at + 2])) << 16 | std::uint32_t(std::uint8_t(src[at + 3])) << 24;
    };
    const std::uint32_t sec = u32(pos), usec = u32(pos + 4), len = u32(pos + 8);
    out += record(src.substr(pos + 16, len), sec, usec * 1000 + 999, true);
    pos += 16 + len;
  }
  std::istringstream in(out);
  Capture c = read_pcap(in);
  EXPECT_EQ(c.packets, sample());
}

TEST(Capture, FragmentsAndVlan) {
  std::stringstream buf;
  auto first = sample();
  first.resize(1);
  write_pcap(buf, first, LinkType::Ethernet);
  std::string s = buf.str();
  const std::string frame = s.substr(40);

  // Same frame with a VLAN tag.
  std::string tagged = frame.substr(0, 12) + be16(0x8100) + be16(7) + frame.substr(12);
  // Same frame with the more-fragments bit set.
  std::string frag = frame;
  frag[14 + 6] = char(std::uint8_t(frag[14 + 6]) | 0x20);

  std::string file = global_header(1) + record(tagged, 1, 0) + record(frag, 1, 1);
  std::istringstream in(file);
  Capture c = read_pcap(in);
  ASSERT_EQ(c.packets.size(), 1u);
  EXPECT_EQ(c.packets[0].packet, Packet{TcpFlags{.syn = true}});
  EXPECT_EQ(c.skipped, 1u);
  EXPECT_EQ(c.fragments, 1u);
}

TEST(Capture, StreamingReader) {
  std::stringstream buf;
  write_pcap(buf, sample());
  PcapReader reader(buf);
  std::size_t n = 0;
  while (reader.next()) ++n;
  EXPECT_EQ(n, sample().size());
  EXPECT_FALSE(reader.next());
}

TEST(Capture, ScenarioFromCaptureAttributesActors) {
  Scenario s = builtin("http3_handshake");
  std::stringstream buf;
  auto packets = packets_of(s);
  write_pcap(buf, packets);
  Scenario back = scenario_from_capture(read_pcap(buf), kServerIp, TrackerKind::QUIC);
  ASSERT_EQ(back.steps.size(), s.steps.size());
  for (std::size_t i = 0; i < s.steps.size(); ++i) {
    EXPECT_EQ(back.steps[i].tuple, s.steps[i].tuple);
    EXPECT_EQ(back.steps[i].packet, s.steps[i].packet);
    EXPECT_EQ(back.steps[i].at, s.steps[i].at);
    EXPECT_EQ(back.steps[i].actor, s.steps[i].actor == Actor::Attacker ? Actor::Server : s.steps[i].actor);
  }
}

TEST(Capture, TwoClientsRejected) {
  auto packets = sample();
  packets.push_back({Millis{2000}, {Proto::TCP, Ipv4Address::parse("10.0.0.9"), Ipv4Address::parse("10.0.0.2"), 1, 443},
                     TcpFlags{.syn = true}});
  Capture c;
  c.packets = packets;
  EXPECT_THROW(scenario_from_capture(c, Ipv4Address::parse("10.0.0.2"), TrackerKind::UDP), ScenarioError);
}
