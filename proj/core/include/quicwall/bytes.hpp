// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace quicwall {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

// Lowercase, no separators.
std::string to_hex(ByteView bytes);

// Two hex digits per byte; whitespace anywhere is ignored. Throws
// std::invalid_argument on a non-hex character or an odd digit count.
Bytes from_hex(std::string_view text);

}  // namespace quicwall
