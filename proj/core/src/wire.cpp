// SPDX-License-Identifier: Apache-2.0
#include "quicwall/wire.hpp"

#include <cstdio>

namespace quicwall {

namespace {

constexpr std::uint8_t kHeaderFormBit = 0x80;
constexpr std::uint8_t kFixedBit = 0x40;

std::uint8_t long_type_bits(HeaderVariant kind) {
  switch (kind) {
    case HeaderVariant::LongInitial: return 0;
    case HeaderVariant::LongZeroRtt: return 1;
    case HeaderVariant::LongHandshake: return 2;
    case HeaderVariant::LongRetry: return 3;
    default: return 0;
  }
}

// Bounds-checked forward reader over one datagram.
class Reader {
 public:
  explicit Reader(ByteView data, std::size_t pos = 0) : data_(data), pos_(pos) {}

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }

  std::uint8_t u8(const char* what) {
    need(1, what);
    return data_[pos_++];
  }

  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | data_[pos_++];
    return v;
  }

  std::uint64_t varint(const char* what) {
    need(1, what);
    std::size_t len = std::size_t{1} << (data_[pos_] >> 6);
    need(len, what);
    std::uint64_t v = data_[pos_] & 0x3f;
    for (std::size_t i = 1; i < len; ++i) v = (v << 8) | data_[pos_ + i];
    pos_ += len;
    return v;
  }

  ConnectionId connection_id(const char* what) {
    std::uint8_t len = u8(what);
    if (len > kMaxConnectionIdLength) {
      throw WireError(WireErrc::MalformedHeader,
                      std::string(what) + " length " + std::to_string(len) + " exceeds 20");
    }
    return fixed_connection_id(len, what);
  }

  ConnectionId fixed_connection_id(std::size_t len, const char* what) {
    need(len, what);
    ConnectionId id(data_.subspan(pos_, len));
    pos_ += len;
    return id;
  }

  void skip(std::uint64_t n, const char* what) {
    need(n, what);
    pos_ += static_cast<std::size_t>(n);
  }

 private:
  void need(std::uint64_t n, const char* what) const {
    if (n > remaining()) {
      throw WireError(WireErrc::MalformedHeader, std::string("truncated ") + what);
    }
  }

  ByteView data_;
  std::size_t pos_;
};

QuicHeader parse_long(Reader& in, const ParseContext& ctx) {
  QuicHeader h;
  h.packet.offset = in.pos();
  std::uint8_t first = in.u8("first byte");
  h.version = in.u32("version");

  if (h.version != 0) {
    if ((first & kFixedBit) == 0) {
      throw WireError(WireErrc::MalformedHeader, "long header with fixed bit clear");
    }
    if (!ctx.accepted_versions.contains(h.version)) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "0x%08x", h.version);
      throw WireError(WireErrc::UnsupportedVersion, std::string("version ") + buf);
    }
  }

  h.dcid = in.connection_id("DCID");
  h.scid = in.connection_id("SCID");

  if (h.version == 0) {
    h.variant = HeaderVariant::VersionNegotiation;
    if (in.remaining() == 0 || in.remaining() % 4 != 0) {
      throw WireError(WireErrc::MalformedHeader, "version list is not a non-empty multiple of 4 bytes");
    }
    h.payload = {in.pos(), in.remaining()};
    in.skip(in.remaining(), "version list");
  } else {
    switch ((first >> 4) & 0x03) {
      case 0: h.variant = HeaderVariant::LongInitial; break;
      case 1: h.variant = HeaderVariant::LongZeroRtt; break;
      case 2: h.variant = HeaderVariant::LongHandshake; break;
      default: h.variant = HeaderVariant::LongRetry; break;
    }
    if (h.variant == HeaderVariant::LongRetry) {
      if (in.remaining() < kStatelessResetTokenLength) {
        throw WireError(WireErrc::MalformedHeader, "truncated retry integrity tag");
      }
      h.payload = {in.pos(), in.remaining()};
      in.skip(in.remaining(), "retry token");
    } else {
      if (h.variant == HeaderVariant::LongInitial) {
        std::uint64_t token_len = in.varint("token length");
        in.skip(token_len, "token");
      }
      std::uint64_t length = in.varint("length");
      h.payload.offset = in.pos();
      in.skip(length, "packet payload");
      h.payload.length = static_cast<std::size_t>(length);
    }
  }
  h.packet.length = in.pos() - h.packet.offset;
  return h;
}

QuicHeader parse_short(Reader& in, const std::optional<std::size_t>& dcid_len) {
  QuicHeader h;
  h.variant = HeaderVariant::Short;
  h.packet.offset = in.pos();
  std::uint8_t first = in.u8("first byte");
  if ((first & kFixedBit) == 0) {
    throw WireError(WireErrc::MalformedHeader, "short header with fixed bit clear");
  }
  if (dcid_len) {
    h.dcid = in.fixed_connection_id(*dcid_len, "DCID");
  } else {
    h.dcid_ambiguous = true;
  }
  h.payload = {in.pos(), in.remaining()};
  in.skip(in.remaining(), "payload");
  h.packet.length = in.pos() - h.packet.offset;
  return h;
}

void append_connection_id(Bytes& out, const ConnectionId& id) {
  out.push_back(static_cast<std::uint8_t>(id.size()));
  out.insert(out.end(), id.bytes().begin(), id.bytes().end());
}

}  // namespace

std::string_view to_string(WireErrc code) {
  switch (code) {
    case WireErrc::EmptyPayload: return "EmptyPayload";
    case WireErrc::MalformedHeader: return "MalformedHeader";
    case WireErrc::UnsupportedVersion: return "UnsupportedVersion";
    case WireErrc::OversizedConnectionId: return "OversizedConnectionId";
  }
  return "?";
}

WireError::WireError(WireErrc code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

ConnectionId::ConnectionId(ByteView bytes) {
  if (bytes.size() > kMaxConnectionIdLength) {
    throw WireError(WireErrc::OversizedConnectionId,
                    "connection ID of " + std::to_string(bytes.size()) + " bytes");
  }
  std::copy(bytes.begin(), bytes.end(), data_.begin());
  size_ = static_cast<std::uint8_t>(bytes.size());
}

ConnectionId ConnectionId::from_hex(std::string_view hex) {
  return ConnectionId(quicwall::from_hex(hex));
}

std::string_view to_string(HeaderVariant variant) {
  switch (variant) {
    case HeaderVariant::LongInitial: return "Initial";
    case HeaderVariant::LongZeroRtt: return "0-RTT";
    case HeaderVariant::LongHandshake: return "Handshake";
    case HeaderVariant::LongRetry: return "Retry";
    case HeaderVariant::VersionNegotiation: return "VersionNegotiation";
    case HeaderVariant::Short: return "Short";
  }
  return "?";
}

std::optional<std::size_t> ParseContext::dcid_length_for(const std::optional<FiveTuple>& flow) const {
  if (flow) {
    if (auto it = expected_dcid_lengths.find(*flow); it != expected_dcid_lengths.end()) {
      return it->second;
    }
  }
  return default_dcid_length;
}

std::vector<QuicHeader> parse_datagram(ByteView payload, const ParseContext& ctx,
                                       const std::optional<FiveTuple>& flow) {
  if (payload.empty()) throw WireError(WireErrc::EmptyPayload, "empty UDP payload");

  auto dcid_len = ctx.dcid_length_for(flow);
  if (dcid_len && *dcid_len > kMaxConnectionIdLength) {
    throw WireError(WireErrc::MalformedHeader, "expected DCID length exceeds 20");
  }

  std::vector<QuicHeader> out;
  Reader in(payload);
  while (in.remaining() > 0) {
    if (payload[in.pos()] & kHeaderFormBit) {
      out.push_back(parse_long(in, ctx));
    } else {
      out.push_back(parse_short(in, dcid_len));
    }
  }
  return out;
}

std::size_t varint_size(std::uint64_t value) {
  if (value < (1ull << 6)) return 1;
  if (value < (1ull << 14)) return 2;
  if (value < (1ull << 30)) return 4;
  if (value < (1ull << 62)) return 8;
  throw std::out_of_range("varint value exceeds 2^62-1");
}

void append_varint(Bytes& out, std::uint64_t value) {
  std::size_t len = varint_size(value);
  std::uint8_t prefix = len == 1 ? 0x00 : len == 2 ? 0x40 : len == 4 ? 0x80 : 0xc0;
  for (std::size_t i = 0; i < len; ++i) {
    auto b = static_cast<std::uint8_t>(value >> (8 * (len - 1 - i)));
    if (i == 0) b = static_cast<std::uint8_t>((b & 0x3f) | prefix);
    out.push_back(b);
  }
}

Bytes build_long_header(HeaderVariant kind, std::uint32_t version, const ConnectionId& dcid,
                        const ConnectionId& scid, ByteView payload) {
  if (kind == HeaderVariant::Short) {
    throw std::invalid_argument("build_long_header needs a long header kind");
  }
  Bytes out;
  out.reserve(1 + 4 + 2 + dcid.size() + scid.size() + 9 + payload.size());

  std::uint8_t first = kHeaderFormBit | kFixedBit;
  if (kind == HeaderVariant::VersionNegotiation) {
    version = 0;
  } else {
    first |= static_cast<std::uint8_t>(long_type_bits(kind) << 4);
  }
  out.push_back(first);
  for (int shift = 24; shift >= 0; shift -= 8) {
    out.push_back(static_cast<std::uint8_t>(version >> shift));
  }
  append_connection_id(out, dcid);
  append_connection_id(out, scid);

  switch (kind) {
    case HeaderVariant::LongInitial:
      append_varint(out, 0);  // token length
      [[fallthrough]];
    case HeaderVariant::LongZeroRtt:
    case HeaderVariant::LongHandshake:
      append_varint(out, payload.size());
      break;
    default:
      break;
  }
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

Bytes build_short_header(const ConnectionId& dcid, ByteView payload) {
  Bytes out;
  out.reserve(1 + dcid.size() + payload.size());
  out.push_back(kFixedBit);
  out.insert(out.end(), dcid.bytes().begin(), dcid.bytes().end());
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

ShapeReport stateless_reset_shape(ByteView payload) noexcept {
  ShapeReport r;
  r.plausible_short_header = !payload.empty() && (payload[0] & (kHeaderFormBit | kFixedBit)) == kFixedBit;
  r.meets_min_length = payload.size() >= kMinStatelessResetLength;
  if (r.meets_min_length) {
    std::array<std::uint8_t, kStatelessResetTokenLength> token{};
    std::copy(payload.end() - kStatelessResetTokenLength, payload.end(), token.begin());
    r.token_window = token;
  }
  return r;
}

}  // namespace quicwall
