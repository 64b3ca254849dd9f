// SPDX-License-Identifier: Apache-2.0
//
// Classic pcap (not pcapng) in and out. Frames are reduced to what the
// trackers consume: the 5-tuple plus TCP flags or the UDP payload.
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "quicwall/conntable.hpp"
#include "quicwall/packet.hpp"
#include "quicwall/scenario.hpp"
#include "quicwall/tuple.hpp"

namespace quicwall {

enum class LinkType : std::uint32_t { Ethernet = 1, Raw = 101, Ipv4 = 228 };

struct CapturedPacket {
  Millis at{0};  // relative to the first record in the file
  FiveTuple tuple;
  Packet packet;

  friend bool operator==(const CapturedPacket&, const CapturedPacket&) = default;
};

struct Capture {
  LinkType link_type = LinkType::Ethernet;
  std::vector<CapturedPacket> packets;
  std::size_t skipped = 0;    // frames that are not IPv4 TCP/UDP, including fragments
  std::size_t fragments = 0;  // IP fragments among the skipped frames
};

enum class CaptureErrc { BadMagic, TruncatedFile, UnsupportedLinkType };

std::string_view to_string(CaptureErrc code);

class CaptureError : public std::runtime_error {
 public:
  CaptureError(CaptureErrc code, const std::string& detail);

  CaptureErrc code() const noexcept { return code_; }

 private:
  CaptureErrc code_;
};

// Pulls one record at a time from a stream.
class PcapReader {
 public:
  // Reads and validates the global header.
  explicit PcapReader(std::istream& in);

  LinkType link_type() const noexcept { return link_type_; }
  std::size_t skipped() const noexcept { return skipped_; }
  std::size_t fragments() const noexcept { return fragments_; }

  // Next TCP/UDP-over-IPv4 packet, skipping (and counting) everything else.
  std::optional<CapturedPacket> next();

 private:
  bool read_record(std::int64_t& micros, std::vector<std::uint8_t>& frame);
  std::optional<CapturedPacket> decode(std::span<const std::uint8_t> frame);

  std::istream& in_;
  bool swapped_ = false;
  bool nanos_ = false;
  LinkType link_type_ = LinkType::Ethernet;
  std::optional<std::int64_t> first_micros_;
  std::size_t skipped_ = 0;
  std::size_t fragments_ = 0;
};

Capture read_pcap(std::istream& in);
// Throws std::runtime_error when the file cannot be opened.
Capture read_pcap_file(const std::filesystem::path& path);

// Synthesizes Ethernet (or raw IPv4) frames with valid IPv4/TCP/UDP
// checksums. Timestamps start at a fixed epoch so output is reproducible.
void write_pcap(std::ostream& out, std::span<const CapturedPacket> packets, LinkType link = LinkType::Ethernet);
void write_pcap_file(const std::filesystem::path& path, std::span<const CapturedPacket> packets,
                     LinkType link = LinkType::Ethernet);

std::vector<CapturedPacket> packets_of(const Scenario& scenario);

// Builds a replayable scenario. Packets from `server` are attributed to the
// server, everything else to the client.
Scenario scenario_from_capture(const Capture& capture, Ipv4Address server, TrackerKind tracker,
                               const std::string& name = "capture");

}  // namespace quicwall
