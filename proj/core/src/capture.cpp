// SPDX-License-Identifier: Apache-2.0
#include "quicwall/capture.hpp"

#include <array>
#include <fstream>
#include <istream>
#include <ostream>

namespace quicwall {

namespace {

constexpr std::uint32_t kMagicMicros = 0xa1b2c3d4;
constexpr std::uint32_t kMagicNanos = 0xa1b23c4d;
constexpr std::uint32_t kMaxRecordLength = 256 * 1024;
constexpr std::int64_t kExportEpochSeconds = 1'600'000'000;

constexpr std::uint16_t kEtherTypeIpv4 = 0x0800;
constexpr std::uint16_t kEtherTypeVlan = 0x8100;

std::uint32_t bswap32(std::uint32_t v) {
  return (v >> 24) | ((v >> 8) & 0xff00) | ((v << 8) & 0xff0000) | (v << 24);
}

std::uint32_t le32(const std::uint8_t* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
}

std::uint16_t be16(const std::uint8_t* p) { return static_cast<std::uint16_t>(p[0] << 8 | p[1]); }

std::uint32_t be32(const std::uint8_t* p) {
  return std::uint32_t(p[0]) << 24 | std::uint32_t(p[1]) << 16 | std::uint32_t(p[2]) << 8 | std::uint32_t(p[3]);
}

void put_le32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {char(v), char(v >> 8), char(v >> 16), char(v >> 24)};
  out.write(b, 4);
}

void put_le16(std::ostream& out, std::uint16_t v) {
  const char b[2] = {char(v), char(v >> 8)};
  out.write(b, 2);
}

void push16(Bytes& b, std::uint16_t v) {
  b.push_back(static_cast<std::uint8_t>(v >> 8));
  b.push_back(static_cast<std::uint8_t>(v));
}

void push32(Bytes& b, std::uint32_t v) {
  push16(b, static_cast<std::uint16_t>(v >> 16));
  push16(b, static_cast<std::uint16_t>(v));
}

// Ones' complement sum over 16-bit words.
std::uint32_t sum16(std::span<const std::uint8_t> data, std::uint32_t acc = 0) {
  for (std::size_t i = 0; i + 1 < data.size(); i += 2) acc += std::uint32_t(data[i]) << 8 | data[i + 1];
  if (data.size() % 2) acc += std::uint32_t(data.back()) << 8;
  return acc;
}

std::uint16_t fold(std::uint32_t acc) {
  while (acc >> 16) acc = (acc & 0xffff) + (acc >> 16);
  return static_cast<std::uint16_t>(~acc);
}

Bytes ipv4_packet(const FiveTuple& t, const Packet& packet, std::uint16_t ip_id, std::uint32_t seq) {
  Bytes l4;
  if (const auto* flags = std::get_if<TcpFlags>(&packet)) {
    push16(l4, t.src_port);
    push16(l4, t.dst_port);
    push32(l4, seq);
    push32(l4, flags->ack ? seq ^ 0x5a5a5a5a : 0);
    l4.push_back(5 << 4);
    l4.push_back(static_cast<std::uint8_t>((flags->fin ? 0x01 : 0) | (flags->syn ? 0x02 : 0) |
                                           (flags->rst ? 0x04 : 0) | (flags->ack ? 0x10 : 0)));
    push16(l4, 65535);  // window
    push16(l4, 0);      // checksum
    push16(l4, 0);      // urgent pointer
  } else {
    const Bytes& payload = std::get<Bytes>(packet);
    push16(l4, t.src_port);
    push16(l4, t.dst_port);
    push16(l4, static_cast<std::uint16_t>(8 + payload.size()));
    push16(l4, 0);
    l4.insert(l4.end(), payload.begin(), payload.end());
  }

  // Pseudo-header checksum for TCP and UDP.
  Bytes pseudo;
  push32(pseudo, t.src_ip.value());
  push32(pseudo, t.dst_ip.value());
  pseudo.push_back(0);
  pseudo.push_back(static_cast<std::uint8_t>(t.proto));
  push16(pseudo, static_cast<std::uint16_t>(l4.size()));
  std::uint16_t l4sum = fold(sum16(l4, sum16(pseudo)));
  if (t.proto == Proto::UDP && l4sum == 0) l4sum = 0xffff;
  std::size_t csum_at = t.proto == Proto::TCP ? 16 : 6;
  l4[csum_at] = static_cast<std::uint8_t>(l4sum >> 8);
  l4[csum_at + 1] = static_cast<std::uint8_t>(l4sum);

  Bytes ip;
  ip.push_back(0x45);
  ip.push_back(0);
  push16(ip, static_cast<std::uint16_t>(20 + l4.size()));
  push16(ip, ip_id);
  push16(ip, 0x4000);  // don't fragment
  ip.push_back(64);
  ip.push_back(static_cast<std::uint8_t>(t.proto));
  push16(ip, 0);
  push32(ip, t.src_ip.value());
  push32(ip, t.dst_ip.value());
  std::uint16_t ipsum = fold(sum16(ip));
  ip[10] = static_cast<std::uint8_t>(ipsum >> 8);
  ip[11] = static_cast<std::uint8_t>(ipsum);
  ip.insert(ip.end(), l4.begin(), l4.end());
  return ip;
}

void push_mac(Bytes& b, Ipv4Address ip) {
  b.push_back(0x02);  // locally administered
  push32(b, ip.value());
  b.push_back(0x01);
}

}  // namespace

std::string_view to_string(CaptureErrc code) {
  switch (code) {
    case CaptureErrc::BadMagic: return "BadMagic";
    case CaptureErrc::TruncatedFile: return "TruncatedFile";
    case CaptureErrc::UnsupportedLinkType: return "UnsupportedLinkType";
  }
  return "?";
}

CaptureError::CaptureError(CaptureErrc code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

PcapReader::PcapReader(std::istream& in) : in_(in) {
  std::array<std::uint8_t, 24> header{};
  in_.read(reinterpret_cast<char*>(header.data()), header.size());
  const auto got = static_cast<std::size_t>(in_.gcount());
  if (got < 4) throw CaptureError(CaptureErrc::TruncatedFile, "file shorter than the pcap magic");

  const std::uint32_t magic = le32(header.data());
  if (magic == kMagicMicros || magic == kMagicNanos) {
    swapped_ = false;
  } else if (bswap32(magic) == kMagicMicros || bswap32(magic) == kMagicNanos) {
    swapped_ = true;
  } else {
    throw CaptureError(CaptureErrc::BadMagic, "not a classic pcap file");
  }
  nanos_ = (swapped_ ? bswap32(magic) : magic) == kMagicNanos;
  if (got < header.size()) throw CaptureError(CaptureErrc::TruncatedFile, "incomplete global header");

  std::uint32_t network = le32(header.data() + 20);
  if (swapped_) network = bswap32(network);
  switch (network) {
    case 1: link_type_ = LinkType::Ethernet; break;
    case 101: link_type_ = LinkType::Raw; break;
    case 228: link_type_ = LinkType::Ipv4; break;
    default:
      throw CaptureError(CaptureErrc::UnsupportedLinkType, "link type " + std::to_string(network));
  }
}

bool PcapReader::read_record(std::int64_t& micros, std::vector<std::uint8_t>& frame) {
  std::array<std::uint8_t, 16> rh{};
  in_.read(reinterpret_cast<char*>(rh.data()), rh.size());
  const auto got = static_cast<std::size_t>(in_.gcount());
  if (got == 0) return false;
  if (got < rh.size()) throw CaptureError(CaptureErrc::TruncatedFile, "incomplete record header");

  auto field = [&](std::size_t off) {
    std::uint32_t v = le32(rh.data() + off);
    return swapped_ ? bswap32(v) : v;
  };
  const std::uint32_t sec = field(0), frac = field(4), incl = field(8);
  if (incl > kMaxRecordLength) throw CaptureError(CaptureErrc::TruncatedFile, "record length out of range");
  micros = std::int64_t(sec) * 1'000'000 + (nanos_ ? frac / 1000 : frac);

  frame.resize(incl);
  in_.read(reinterpret_cast<char*>(frame.data()), incl);
  if (static_cast<std::uint32_t>(in_.gcount()) != incl) {
    throw CaptureError(CaptureErrc::TruncatedFile, "record data cut short");
  }
  return true;
}

std::optional<CapturedPacket> PcapReader::decode(std::span<const std::uint8_t> frame) {
  if (link_type_ == LinkType::Ethernet) {
    if (frame.size() < 14) return std::nullopt;
    std::uint16_t ether_type = be16(frame.data() + 12);
    std::size_t offset = 14;
    if (ether_type == kEtherTypeVlan) {
      if (frame.size() < 18) return std::nullopt;
      ether_type = be16(frame.data() + 16);
      offset = 18;
    }
    if (ether_type != kEtherTypeIpv4) return std::nullopt;
    frame = frame.subspan(offset);
  }

  if (frame.size() < 20 || (frame[0] >> 4) != 4) return std::nullopt;
  const std::size_t ihl = std::size_t(frame[0] & 0x0f) * 4;
  const std::size_t total = be16(frame.data() + 2);
  if (ihl < 20 || total < ihl || total > frame.size()) return std::nullopt;
  const std::uint16_t frag = be16(frame.data() + 6);
  if ((frag & 0x2000) || (frag & 0x1fff)) {
    ++fragments_;
    return std::nullopt;
  }
  const std::uint8_t proto = frame[9];
  if (proto != 6 && proto != 17) return std::nullopt;

  CapturedPacket p;
  p.tuple.proto = proto == 6 ? Proto::TCP : Proto::UDP;
  p.tuple.src_ip = Ipv4Address(be32(frame.data() + 12));
  p.tuple.dst_ip = Ipv4Address(be32(frame.data() + 16));
  auto l4 = frame.subspan(ihl, total - ihl);
  if (p.tuple.proto == Proto::TCP) {
    if (l4.size() < 20) return std::nullopt;
    const std::uint8_t f = l4[13];
    p.packet = TcpFlags{.syn = (f & 0x02) != 0, .ack = (f & 0x10) != 0, .fin = (f & 0x01) != 0, .rst = (f & 0x04) != 0};
  } else {
    if (l4.size() < 8) return std::nullopt;
    const std::size_t udp_len = be16(l4.data() + 4);
    if (udp_len < 8 || udp_len > l4.size()) return std::nullopt;
    p.packet = Bytes(l4.begin() + 8, l4.begin() + static_cast<std::ptrdiff_t>(udp_len));
  }
  p.tuple.src_port = be16(l4.data());
  p.tuple.dst_port = be16(l4.data() + 2);
  return p;
}

std::optional<CapturedPacket> PcapReader::next() {
  std::vector<std::uint8_t> frame;
  std::int64_t micros = 0;
  while (read_record(micros, frame)) {
    if (!first_micros_) first_micros_ = micros;
    auto packet = decode(frame);
    if (!packet) {
      ++skipped_;
      continue;
    }
    packet->at = Millis{(micros - *first_micros_) / 1000};
    return packet;
  }
  return std::nullopt;
}

Capture read_pcap(std::istream& in) {
  PcapReader reader(in);
  Capture capture;
  capture.link_type = reader.link_type();
  while (auto p = reader.next()) capture.packets.push_back(std::move(*p));
  capture.skipped = reader.skipped();
  capture.fragments = reader.fragments();
  return capture;
}

Capture read_pcap_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_pcap(in);
}

void write_pcap(std::ostream& out, std::span<const CapturedPacket> packets, LinkType link) {
  put_le32(out, kMagicMicros);
  put_le16(out, 2);
  put_le16(out, 4);
  put_le32(out, 0);  // thiszone
  put_le32(out, 0);  // sigfigs
  put_le32(out, 65535);
  put_le32(out, static_cast<std::uint32_t>(link));

  std::uint16_t ip_id = 1;
  std::uint32_t seq = 0x10000;
  for (const CapturedPacket& p : packets) {
    Bytes frame;
    if (link == LinkType::Ethernet) {
      push_mac(frame, p.tuple.dst_ip);
      push_mac(frame, p.tuple.src_ip);
      push16(frame, kEtherTypeIpv4);
    }
    Bytes ip = ipv4_packet(p.tuple, p.packet, ip_id++, seq);
    seq += 1000;
    frame.insert(frame.end(), ip.begin(), ip.end());

    const std::int64_t micros = kExportEpochSeconds * 1'000'000 + p.at.count() * 1000;
    put_le32(out, static_cast<std::uint32_t>(micros / 1'000'000));
    put_le32(out, static_cast<std::uint32_t>(micros % 1'000'000));
    put_le32(out, static_cast<std::uint32_t>(frame.size()));
    put_le32(out, static_cast<std::uint32_t>(frame.size()));
    out.write(reinterpret_cast<const char*>(frame.data()), static_cast<std::streamsize>(frame.size()));
  }
}

void write_pcap_file(const std::filesystem::path& path, std::span<const CapturedPacket> packets, LinkType link) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_pcap(out, packets, link);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<CapturedPacket> packets_of(const Scenario& scenario) {
  std::vector<CapturedPacket> out;
  out.reserve(scenario.steps.size());
  for (const Step& s : scenario.steps) out.push_back({s.at, s.tuple, s.packet});
  return out;
}

Scenario scenario_from_capture(const Capture& capture, Ipv4Address server, TrackerKind tracker,
                               const std::string& name) {
  Scenario s;
  s.name = name;
  s.tracker = tracker;
  s.actors.clear();
  s.actors[Actor::Server] = server;
  for (const CapturedPacket& p : capture.packets) {
    Actor actor = p.tuple.src_ip == server ? Actor::Server : Actor::Client;
    if (actor == Actor::Client) {
      auto [it, inserted] = s.actors.emplace(Actor::Client, p.tuple.src_ip);
      if (!inserted && it->second != p.tuple.src_ip) {
        throw ScenarioError("capture has more than one client address (" + it->second.str() + ", " +
                            p.tuple.src_ip.str() + ")");
      }
    }
    s.steps.push_back(Step{p.at, actor, p.tuple, p.packet, ""});
  }
  return s;
}

}  // namespace quicwall
