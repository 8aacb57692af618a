#include "ptai/core/checksum.hpp"

#include <algorithm>

#include <zlib.h>

namespace ptai {

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
    uLong crc = ::crc32(0L, Z_NULL, 0);
    std::size_t off = 0;
    while (off < bytes.size()) {
        const std::size_t chunk = std::min<std::size_t>(bytes.size() - off, std::size_t{1} << 30);
        crc = ::crc32(crc, bytes.data() + off, static_cast<uInt>(chunk));
        off += chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

}  // namespace ptai
