#pragma once

#include <cstdint>
#include <span>

namespace ptai {

/// CRC-32 (IEEE 802.3 polynomial, zlib convention) of a byte range.
std::uint32_t crc32(std::span<const std::uint8_t> bytes);

}  // namespace ptai
