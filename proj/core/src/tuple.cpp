// SPDX-License-Identifier: Apache-2.0
#include "quicwall/tuple.hpp"

#include <charconv>
#include <stdexcept>

namespace quicwall {

std::string_view to_string(Proto proto) {
  return proto == Proto::TCP ? "tcp" : "udp";
}

std::string_view to_string(Direction dir) {
  return dir == Direction::Original ? "original" : "reply";
}

Ipv4Address Ipv4Address::parse(std::string_view text) {
  std::uint32_t value = 0;
  const char* p = text.data();
  const char* end = text.data() + text.size();
  for (int octet = 0; octet < 4; ++octet) {
    if (octet > 0) {
      if (p == end || *p != '.') throw std::invalid_argument("bad IPv4 address: " + std::string(text));
      ++p;
    }
    unsigned part = 0;
    auto [next, ec] = std::from_chars(p, end, part);
    if (ec != std::errc{} || next == p || next - p > 3 || part > 255) {
      throw std::invalid_argument("bad IPv4 address: " + std::string(text));
    }
    value = (value << 8) | part;
    p = next;
  }
  if (p != end) throw std::invalid_argument("bad IPv4 address: " + std::string(text));
  return Ipv4Address(value);
}

std::string Ipv4Address::str() const {
  return std::to_string(value_ >> 24) + "." + std::to_string((value_ >> 16) & 0xff) + "." +
         std::to_string((value_ >> 8) & 0xff) + "." + std::to_string(value_ & 0xff);
}

std::string endpoints(const FiveTuple& tuple) {
  return "src=" + tuple.src_ip.str() + ":" + std::to_string(tuple.src_port) +
         " dst=" + tuple.dst_ip.str() + ":" + std::to_string(tuple.dst_port);
}

}  // namespace quicwall
