#pragma once

#include <cstdint>
#include <string_view>

namespace lsmclab {

// MurmurHash64A. Filter blocks persist positions derived from this hash, so it
// must never change for a given on-disk format version.
uint64_t Hash64(std::string_view data, uint64_t seed = 0x9747b28c7f4a7c15ULL);

// CRC-32 (IEEE, reflected) over a whole file image.
uint32_t Crc32(std::string_view data);

}  // namespace lsmclab
