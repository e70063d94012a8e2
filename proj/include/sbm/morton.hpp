#pragma once

#include <cstdint>

namespace sbm {

// Z-order locational codes for grid cells, up to 21 bits per axis.

inline std::uint64_t split_bits_2(std::uint64_t x) {
  x &= 0x00000000ffffffffull;
  x = (x | (x << 16)) & 0x0000ffff0000ffffull;
  x = (x | (x << 8)) & 0x00ff00ff00ff00ffull;
  x = (x | (x << 4)) & 0x0f0f0f0f0f0f0f0full;
  x = (x | (x << 2)) & 0x3333333333333333ull;
  x = (x | (x << 1)) & 0x5555555555555555ull;
  return x;
}

inline std::uint64_t compact_bits_2(std::uint64_t x) {
  x &= 0x5555555555555555ull;
  x = (x | (x >> 1)) & 0x3333333333333333ull;
  x = (x | (x >> 2)) & 0x0f0f0f0f0f0f0f0full;
  x = (x | (x >> 4)) & 0x00ff00ff00ff00ffull;
  x = (x | (x >> 8)) & 0x0000ffff0000ffffull;
  x = (x | (x >> 16)) & 0x00000000ffffffffull;
  return x;
}

inline std::uint64_t split_bits_3(std::uint64_t x) {
  x &= 0x00000000001fffffull;
  x = (x | (x << 32)) & 0x001f00000000ffffull;
  x = (x | (x << 16)) & 0x001f0000ff0000ffull;
  x = (x | (x << 8)) & 0x100f00f00f00f00full;
  x = (x | (x << 4)) & 0x10c30c30c30c30c3ull;
  x = (x | (x << 2)) & 0x1249249249249249ull;
  return x;
}

inline std::uint64_t compact_bits_3(std::uint64_t x) {
  x &= 0x1249249249249249ull;
  x = (x | (x >> 2)) & 0x10c30c30c30c30c3ull;
  x = (x | (x >> 4)) & 0x100f00f00f00f00full;
  x = (x | (x >> 8)) & 0x001f0000ff0000ffull;
  x = (x | (x >> 16)) & 0x001f00000000ffffull;
  x = (x | (x >> 32)) & 0x00000000001fffffull;
  return x;
}

inline std::uint64_t morton_encode(std::uint32_t i, std::uint32_t j, std::uint32_t k, int dim) {
  if (dim == 2) return split_bits_2(i) | (split_bits_2(j) << 1);
  return split_bits_3(i) | (split_bits_3(j) << 1) | (split_bits_3(k) << 2);
}

inline void morton_decode(std::uint64_t code, int dim, std::uint32_t& i, std::uint32_t& j,
                          std::uint32_t& k) {
  if (dim == 2) {
    i = static_cast<std::uint32_t>(compact_bits_2(code));
    j = static_cast<std::uint32_t>(compact_bits_2(code >> 1));
    k = 0;
  } else {
    i = static_cast<std::uint32_t>(compact_bits_3(code));
    j = static_cast<std::uint32_t>(compact_bits_3(code >> 1));
    k = static_cast<std::uint32_t>(compact_bits_3(code >> 2));
  }
}

}  // namespace sbm
