// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace quicwall {

enum class Proto : std::uint8_t { TCP = 6, UDP = 17 };

std::string_view to_string(Proto proto);

class Ipv4Address {
 public:
  constexpr Ipv4Address() = default;
  constexpr explicit Ipv4Address(std::uint32_t host_order) : value_(host_order) {}

  // Dotted quad. Throws std::invalid_argument.
  static Ipv4Address parse(std::string_view text);

  constexpr std::uint32_t value() const noexcept { return value_; }
  std::string str() const;

  friend constexpr auto operator<=>(Ipv4Address, Ipv4Address) = default;

 private:
  std::uint32_t value_ = 0;
};

struct FiveTuple {
  Proto proto = Proto::UDP;
  Ipv4Address src_ip;
  Ipv4Address dst_ip;
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;

  constexpr FiveTuple reversed() const noexcept {
    return {proto, dst_ip, src_ip, dst_port, src_port};
  }

  friend constexpr auto operator<=>(const FiveTuple&, const FiveTuple&) = default;
};

// "src=<ip>:<port> dst=<ip>:<port>"
std::string endpoints(const FiveTuple& tuple);

// Packet direction relative to the tracked connection's first packet.
enum class Direction : std::uint8_t { Original, Reply };

std::string_view to_string(Direction dir);

}  // namespace quicwall
