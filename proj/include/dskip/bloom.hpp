/*
 * Copyright (c) dskip contributors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <span>
#include <utility>
#include <vector>

#include "dskip/metadata.hpp"

namespace dskip {

namespace detail {

// MurmurHash3 x64 128-bit (public domain reference algorithm).
inline std::uint64_t rotl64(std::uint64_t x, std::int8_t r) {
  return (x << r) | (x >> (64 - r));
}

inline std::uint64_t fmix64(std::uint64_t k) {
  k ^= k >> 33;
  k *= 0xff51afd7ed558ccdull;
  k ^= k >> 33;
  k *= 0xc4ceb9fe1a85ec53ull;
  k ^= k >> 33;
  return k;
}

inline std::pair<std::uint64_t, std::uint64_t> murmur3_x64_128(std::span<const std::uint8_t> data,
                                                               std::uint64_t seed) {
  const std::size_t nblocks = data.size() / 16;
  std::uint64_t h1 = seed, h2 = seed;
  const std::uint64_t c1 = 0x87c37b91114253d5ull;
  const std::uint64_t c2 = 0x4cf5ad432745937full;

  for (std::size_t i = 0; i < nblocks; ++i) {
    std::uint64_t k1, k2;
    std::memcpy(&k1, data.data() + i * 16, 8);
    std::memcpy(&k2, data.data() + i * 16 + 8, 8);
    k1 *= c1;
    k1 = rotl64(k1, 31);
    k1 *= c2;
    h1 ^= k1;
    h1 = rotl64(h1, 27);
    h1 += h2;
    h1 = h1 * 5 + 0x52dce729;
    k2 *= c2;
    k2 = rotl64(k2, 33);
    k2 *= c1;
    h2 ^= k2;
    h2 = rotl64(h2, 31);
    h2 += h1;
    h2 = h2 * 5 + 0x38495ab5;
  }

  const std::uint8_t* tail = data.data() + nblocks * 16;
  std::uint64_t k1 = 0, k2 = 0;
  switch (data.size() & 15) {
    case 15: k2 ^= static_cast<std::uint64_t>(tail[14]) << 48; [[fallthrough]];
    case 14: k2 ^= static_cast<std::uint64_t>(tail[13]) << 40; [[fallthrough]];
    case 13: k2 ^= static_cast<std::uint64_t>(tail[12]) << 32; [[fallthrough]];
    case 12: k2 ^= static_cast<std::uint64_t>(tail[11]) << 24; [[fallthrough]];
    case 11: k2 ^= static_cast<std::uint64_t>(tail[10]) << 16; [[fallthrough]];
    case 10: k2 ^= static_cast<std::uint64_t>(tail[9]) << 8; [[fallthrough]];
    case 9:
      k2 ^= static_cast<std::uint64_t>(tail[8]);
      k2 *= c2;
      k2 = rotl64(k2, 33);
      k2 *= c1;
      h2 ^= k2;
      [[fallthrough]];
    case 8: k1 ^= static_cast<std::uint64_t>(tail[7]) << 56; [[fallthrough]];
    case 7: k1 ^= static_cast<std::uint64_t>(tail[6]) << 48; [[fallthrough]];
    case 6: k1 ^= static_cast<std::uint64_t>(tail[5]) << 40; [[fallthrough]];
    case 5: k1 ^= static_cast<std::uint64_t>(tail[4]) << 32; [[fallthrough]];
    case 4: k1 ^= static_cast<std::uint64_t>(tail[3]) << 24; [[fallthrough]];
    case 3: k1 ^= static_cast<std::uint64_t>(tail[2]) << 16; [[fallthrough]];
    case 2: k1 ^= static_cast<std::uint64_t>(tail[1]) << 8; [[fallthrough]];
    case 1:
      k1 ^= static_cast<std::uint64_t>(tail[0]);
      k1 *= c1;
      k1 = rotl64(k1, 31);
      k1 *= c2;
      h1 ^= k1;
      break;
    default: break;
  }

  h1 ^= static_cast<std::uint64_t>(data.size());
  h2 ^= static_cast<std::uint64_t>(data.size());
  h1 += h2;
  h2 += h1;
  h1 = fmix64(h1);
  h2 = fmix64(h2);
  h1 += h2;
  h2 += h1;
  return {h1, h2};
}

}  // namespace detail

constexpr std::uint64_t kDefaultBloomSeed = 0x9e3779b97f4a7c15ull;

/// Bit count for v distinct values at target false-positive rate f:
/// ceil(-v * ln f / ln^2 2).
inline std::uint64_t bloom_num_bits(std::uint64_t distinct_values, double f) {
  if (distinct_values == 0) return 0;
  const double ln2 = 0.6931471805599453;
  double bits = -static_cast<double>(distinct_values) * std::log(f) / (ln2 * ln2);
  return static_cast<std::uint64_t>(std::ceil(bits));
}

/// Hash count: max(1, round((bits / v) * ln 2)).
inline std::uint32_t bloom_num_hashes(std::uint64_t num_bits, std::uint64_t distinct_values) {
  if (distinct_values == 0 || num_bits == 0) return 1;
  const double ln2 = 0.6931471805599453;
  double k = (static_cast<double>(num_bits) / static_cast<double>(distinct_values)) * ln2;
  auto rounded = static_cast<std::uint32_t>(std::llround(k));
  return rounded < 1 ? 1u : rounded;
}

/// Per-probe index sequence by double hashing: g_i = h1 + i * h2 (mod bits).
inline void bloom_insert(BloomPayload& bloom, std::span<const std::uint8_t> key) {
  if (bloom.num_bits == 0) return;
  auto [h1, h2] = detail::murmur3_x64_128(key, bloom.seed);
  for (std::uint32_t i = 0; i < bloom.num_hashes; ++i) {
    std::uint64_t bit = (h1 + i * h2) % bloom.num_bits;
    bloom.bits[bit / 8] |= static_cast<std::uint8_t>(1u << (bit % 8));
  }
}

inline bool bloom_might_contain(const BloomPayload& bloom, std::span<const std::uint8_t> key) {
  if (bloom.num_bits == 0) return false;  // nothing was inserted
  auto [h1, h2] = detail::murmur3_x64_128(key, bloom.seed);
  for (std::uint32_t i = 0; i < bloom.num_hashes; ++i) {
    std::uint64_t bit = (h1 + i * h2) % bloom.num_bits;
    if (!(bloom.bits[bit / 8] & (1u << (bit % 8)))) return false;
  }
  return true;
}

inline BloomPayload make_bloom(std::uint64_t distinct_values, double f,
                               std::uint64_t seed = kDefaultBloomSeed) {
  BloomPayload bloom;
  bloom.num_bits = bloom_num_bits(distinct_values, f);
  bloom.num_hashes = bloom_num_hashes(bloom.num_bits, distinct_values);
  bloom.seed = seed;
  bloom.bits.assign((bloom.num_bits + 7) / 8, 0);
  return bloom;
}

}  // namespace dskip
