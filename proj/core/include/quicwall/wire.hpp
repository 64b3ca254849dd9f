// SPDX-License-Identifier: Apache-2.0
//
// The externally visible QUIC wire image (draft-29 layout): long and short
// headers, coalesced packets inside one UDP datagram, and the shape of a
// stateless reset. Nothing here decrypts or removes header protection; packet
// numbers and payloads are carried as opaque bytes.
#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "quicwall/bytes.hpp"
#include "quicwall/tuple.hpp"

namespace quicwall {

inline constexpr std::uint32_t kQuicDraft29 = 0xff00001d;
inline constexpr std::size_t kMaxConnectionIdLength = 20;
inline constexpr std::size_t kStatelessResetTokenLength = 16;
// 2 fixed bits + 38 unpredictable bits + 128-bit token, rounded up to bytes.
inline constexpr std::size_t kMinStatelessResetLength = 21;

enum class WireErrc {
  EmptyPayload,
  MalformedHeader,
  UnsupportedVersion,
  OversizedConnectionId,
};

std::string_view to_string(WireErrc code);

class WireError : public std::runtime_error {
 public:
  WireError(WireErrc code, const std::string& detail);

  WireErrc code() const noexcept { return code_; }

 private:
  WireErrc code_;
};

// Up to 20 bytes. A zero-length ID is a valid value.
class ConnectionId {
 public:
  ConnectionId() = default;
  // Throws WireError(OversizedConnectionId) above 20 bytes.
  explicit ConnectionId(ByteView bytes);

  static ConnectionId from_hex(std::string_view hex);

  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }
  ByteView bytes() const noexcept { return {data_.data(), size_}; }
  std::string hex() const { return to_hex(bytes()); }

  friend bool operator==(const ConnectionId& a, const ConnectionId& b) noexcept {
    return a.bytes().size() == b.bytes().size() &&
           std::equal(a.bytes().begin(), a.bytes().end(), b.bytes().begin());
  }
  friend bool operator<(const ConnectionId& a, const ConnectionId& b) noexcept {
    return std::lexicographical_compare(a.bytes().begin(), a.bytes().end(),
                                        b.bytes().begin(), b.bytes().end());
  }

 private:
  std::array<std::uint8_t, kMaxConnectionIdLength> data_{};
  std::uint8_t size_ = 0;
};

enum class HeaderVariant {
  LongInitial,
  LongZeroRtt,
  LongHandshake,
  LongRetry,
  VersionNegotiation,
  Short,
};

std::string_view to_string(HeaderVariant variant);

constexpr bool is_long(HeaderVariant v) noexcept { return v != HeaderVariant::Short; }

struct Span {
  std::size_t offset = 0;
  std::size_t length = 0;

  friend bool operator==(const Span&, const Span&) = default;
};

struct QuicHeader {
  HeaderVariant variant = HeaderVariant::Short;
  std::uint32_t version = 0;  // long forms only
  ConnectionId dcid;
  ConnectionId scid;  // long forms only
  // True for a short header parsed without a known DCID length; dcid is then
  // empty and carries no information.
  bool dcid_ambiguous = false;
  // Where this packet starts in the datagram and how many bytes it occupies.
  Span packet;
  // The opaque remainder: packet number + protected payload for Initial,
  // 0-RTT, Handshake and Short; token + integrity tag for Retry; the version
  // list for Version Negotiation.
  Span payload;

  friend bool operator==(const QuicHeader&, const QuicHeader&) = default;
};

struct ParseContext {
  std::set<std::uint32_t> accepted_versions{kQuicDraft29};
  // DCID length of short headers, keyed by the packet's own (directed) tuple.
  std::map<FiveTuple, std::size_t> expected_dcid_lengths;
  // Used when no tuple is given or the tuple has no entry above.
  std::optional<std::size_t> default_dcid_length;

  std::optional<std::size_t> dcid_length_for(const std::optional<FiveTuple>& flow) const;
};

// Splits a UDP payload into its coalesced QUIC packets, in wire order.
// Throws WireError: EmptyPayload, MalformedHeader, UnsupportedVersion.
std::vector<QuicHeader> parse_datagram(ByteView payload, const ParseContext& ctx,
                                       const std::optional<FiveTuple>& flow = std::nullopt);

// Emits one long-header packet carrying `payload` opaque. Initial packets get
// an empty token. Version Negotiation always encodes version 0, Retry and
// Version Negotiation carry the payload to the end of the datagram.
Bytes build_long_header(HeaderVariant kind, std::uint32_t version, const ConnectionId& dcid,
                        const ConnectionId& scid, ByteView payload);

Bytes build_short_header(const ConnectionId& dcid, ByteView payload);

struct ShapeReport {
  bool plausible_short_header = false;
  bool meets_min_length = false;
  std::optional<std::array<std::uint8_t, kStatelessResetTokenLength>> token_window;

  bool looks_like_reset() const noexcept { return plausible_short_header && meets_min_length; }
};

ShapeReport stateless_reset_shape(ByteView payload) noexcept;

// QUIC variable-length integers (2-bit length prefix).
void append_varint(Bytes& out, std::uint64_t value);
std::size_t varint_size(std::uint64_t value);

}  // namespace quicwall
