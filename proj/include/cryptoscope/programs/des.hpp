#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "cryptoscope/programs/common.hpp"

namespace cryptoscope::programs {

namespace detail {

// Bit positions are 1-based from the most significant bit, as in FIPS 46-3.
inline constexpr std::uint8_t kDesIp[64] = {
    58, 50, 42, 34, 26, 18, 10, 2, 60, 52, 44, 36, 28, 20, 12, 4, 62, 54, 46, 38, 30, 22,
    14, 6,  64, 56, 48, 40, 32, 24, 16, 8, 57, 49, 41, 33, 25, 17, 9,  1,  59, 51, 43, 35,
    27, 19, 11, 3,  61, 53, 45, 37, 29, 21, 13, 5, 63, 55, 47, 39, 31, 23, 15, 7};

inline constexpr std::array<std::uint8_t, 64> kDesFp = [] {
  std::array<std::uint8_t, 64> fp{};
  for (int i = 0; i < 64; ++i) fp[kDesIp[i] - 1] = static_cast<std::uint8_t>(i + 1);
  return fp;
}();

inline constexpr std::uint8_t kDesE[48] = {32, 1,  2,  3,  4,  5,  4,  5,  6,  7,  8,  9,
                                           8,  9,  10, 11, 12, 13, 12, 13, 14, 15, 16, 17,
                                           16, 17, 18, 19, 20, 21, 20, 21, 22, 23, 24, 25,
                                           24, 25, 26, 27, 28, 29, 28, 29, 30, 31, 32, 1};

inline constexpr std::uint8_t kDesP[32] = {16, 7, 20, 21, 29, 12, 28, 17, 1,  15, 23, 26, 5,  18, 31, 10,
                                           2,  8, 24, 14, 32, 27, 3,  9,  19, 13, 30, 6,  22, 11, 4,  25};

inline constexpr std::uint8_t kDesPc1[56] = {57, 49, 41, 33, 25, 17, 9,  1,  58, 50, 42, 34, 26, 18,
                                             10, 2,  59, 51, 43, 35, 27, 19, 11, 3,  60, 52, 44, 36,
                                             63, 55, 47, 39, 31, 23, 15, 7,  62, 54, 46, 38, 30, 22,
                                             14, 6,  61, 53, 45, 37, 29, 21, 13, 5,  28, 20, 12, 4};

inline constexpr std::uint8_t kDesPc2[48] = {14, 17, 11, 24, 1,  5,  3,  28, 15, 6,  21, 10,
                                             23, 19, 12, 4,  26, 8,  16, 7,  27, 20, 13, 2,
                                             41, 52, 31, 37, 47, 55, 30, 40, 51, 45, 33, 48,
                                             44, 49, 39, 56, 34, 53, 46, 42, 50, 36, 29, 32};

inline constexpr std::uint8_t kDesShifts[16] = {1, 1, 2, 2, 2, 2, 2, 2, 1, 2, 2, 2, 2, 2, 2, 1};

inline constexpr std::uint8_t kDesSbox[8][64] = {
    {14, 4,  13, 1, 2,  15, 11, 8,  3,  10, 6,  12, 5,  9,  0, 7,  0, 15, 7,  4,  14, 2,
     13, 1,  10, 6, 12, 11, 9,  5,  3,  8,  4,  1,  14, 8,  13, 6, 2, 11, 15, 12, 9,  7,
     3,  10, 5,  0, 15, 12, 8,  2,  4,  9,  1,  7,  5,  11, 3, 14, 10, 0, 6,  13},
    {15, 1,  8,  14, 6,  11, 3,  4,  9,  7, 2,  13, 12, 0,  5,  10, 3,  13, 4,  7,  15, 2,
     8,  14, 12, 0,  1,  10, 6,  9,  11, 5, 0,  14, 7,  11, 10, 4,  13, 1,  5,  8,  12, 6,
     9,  3,  2,  15, 13, 8,  10, 1,  3,  15, 4,  2,  11, 6,  7,  12, 0,  5,  14, 9},
    {10, 0,  9,  14, 6, 3,  15, 5,  1,  13, 12, 7, 11, 4,  2,  8,  13, 7,  0,  9,  3,  4,
     6,  10, 2,  8,  5, 14, 12, 11, 15, 1,  13, 6, 4,  9,  8,  15, 3,  0,  11, 1,  2,  12,
     5,  10, 14, 7,  1, 10, 13, 0,  6,  9,  8,  7, 4,  15, 14, 3,  11, 5,  2,  12},
    {7,  13, 14, 3, 0,  6,  9,  10, 1,  2, 8,  5,  11, 12, 4, 15, 13, 8,  11, 5,  6,  15,
     0,  3,  4,  7, 2,  12, 1,  10, 14, 9, 10, 6,  9,  0,  12, 11, 7, 13, 15, 1,  3,  14,
     5,  2,  8,  4, 3,  15, 0,  6,  10, 1, 13, 8,  9,  4,  5,  11, 12, 7, 2,  14},
    {2,  12, 4,  1,  7,  10, 11, 6,  8,  5,  3,  15, 13, 0, 14, 9,  14, 11, 2,  12, 4,  7,
     13, 1,  5,  0,  15, 10, 3,  9,  8,  6,  4,  2,  1,  11, 10, 13, 7, 8,  15, 9,  12, 5,
     6,  3,  0,  14, 11, 8,  12, 7,  1,  14, 2,  13, 6,  15, 0,  9, 10, 4,  5,  3},
    {12, 1,  10, 15, 9, 2,  6,  8,  0,  13, 3,  4,  14, 7,  5,  11, 10, 15, 4,  2,  7,  12,
     9,  5,  6,  1,  13, 14, 0, 11, 3,  8,  9,  14, 15, 5,  2,  8,  12, 3,  7,  0,  4,  10,
     1,  13, 11, 6,  4,  3, 2,  12, 9,  5,  15, 10, 11, 14, 1,  7,  6,  0,  8,  13},
    {4,  11, 2,  14, 15, 0, 8,  13, 3,  12, 9, 7,  5,  10, 6,  1,  13, 0,  11, 7,  4,  9,
     1,  10, 14, 3,  5,  12, 2, 15, 8,  6,  1, 4,  11, 13, 12, 3,  7,  14, 10, 15, 6,  8,
     0,  5,  9,  2,  6,  11, 13, 8, 1,  4,  10, 7, 9,  5,  0,  15, 14, 2,  3,  12},
    {13, 2,  8,  4, 6,  15, 11, 1,  10, 9,  3,  14, 5,  0,  12, 7,  1,  15, 13, 8,  10, 3,
     7,  4,  12, 5, 6,  11, 0,  14, 9,  2,  7,  11, 4,  1,  9,  12, 14, 2,  0,  6,  10, 13,
     15, 3,  5,  8, 2,  1,  14, 7,  4,  10, 8,  13, 15, 12, 9,  0,  3,  5,  6,  11}};

// Bit-serial table permutation: `in` holds `in_bits` bits, the result holds
// `table.size()` bits.
inline std::uint64_t permute(Machine& m, std::uint64_t in, unsigned in_bits, std::span<const std::uint8_t> table) {
  const std::size_t n = table.size();
  std::uint64_t out = 0;
  m.loop(n, [&](std::size_t i) {
    const unsigned pos = m.load(table[i]);
    const std::uint64_t bit = m.and_(m.shr(in, in_bits - pos), std::uint64_t{1});
    out = m.or_(out, m.shl(bit, static_cast<unsigned>(n - 1 - i)));
  });
  return out;
}

inline std::uint32_t rotl28(Machine& m, std::uint32_t v, unsigned s) {
  return m.and_(m.or_(m.shl(v, s), m.shr(v, 28 - s)), std::uint32_t{0x0fffffff});
}

inline std::uint32_t feistel(Machine& m, std::uint32_t r, std::uint64_t subkey) {
  const std::uint64_t x = m.xor_(permute(m, r, 32, kDesE), subkey);
  std::uint32_t out = 0;
  m.loop(8, [&](std::size_t b) {
    const auto six = static_cast<unsigned>(m.and_(m.shr(x, static_cast<unsigned>(42 - 6 * b)), std::uint64_t{0x3f}));
    const unsigned row = m.or_(m.and_(m.shr(six, 4), 2u), m.and_(six, 1u));
    const unsigned col = m.and_(m.shr(six, 1), 0xfu);
    m.op(Mnemonic("lea"));
    const std::uint32_t v = m.load(kDesSbox[b][row * 16 + col]);
    out = m.or_(out, m.shl(v, static_cast<unsigned>(28 - 4 * b)));
  });
  return static_cast<std::uint32_t>(permute(m, out, 32, kDesP));
}

}  // namespace detail

using DesSubkeys = std::array<std::uint64_t, 16>;

inline DesSubkeys des_key_schedule(Machine& m, std::uint64_t key) {
  DesSubkeys ks{};
  const std::uint64_t cd = detail::permute(m, key, 64, detail::kDesPc1);
  std::uint32_t c = static_cast<std::uint32_t>(m.shr(cd, 28u)) & 0x0fffffff;
  std::uint32_t d = static_cast<std::uint32_t>(cd) & 0x0fffffff;
  m.loop(16, [&](std::size_t r) {
    const unsigned s = m.load(detail::kDesShifts[r]);
    c = detail::rotl28(m, c, s);
    d = detail::rotl28(m, d, s);
    const std::uint64_t joined = m.or_(m.shl(static_cast<std::uint64_t>(c), 28u), static_cast<std::uint64_t>(d));
    m.store(ks[r], detail::permute(m, joined, 56, detail::kDesPc2));
  });
  return ks;
}

inline std::uint64_t des_crypt_block(Machine& m, const DesSubkeys& ks, std::uint64_t block, bool decrypt) {
  const std::uint64_t ip = detail::permute(m, block, 64, detail::kDesIp);
  std::uint32_t l = static_cast<std::uint32_t>(m.shr(ip, 32u));
  std::uint32_t r = static_cast<std::uint32_t>(ip);
  m.loop(16, [&](std::size_t i) {
    const auto k = m.load(ks[decrypt ? 15 - i : i]);
    const std::uint32_t next = m.xor_(l, detail::feistel(m, r, k));
    l = r;
    r = next;
  });
  const std::uint64_t pre = m.or_(m.shl(static_cast<std::uint64_t>(r), 32u), static_cast<std::uint64_t>(l));
  return detail::permute(m, pre, 64, detail::kDesFp);
}

struct Des3Key {
  DesSubkeys k1, k2, k3;
};

inline Des3Key des3_key_schedule(Machine& m, std::uint64_t k1, std::uint64_t k2, std::uint64_t k3) {
  return {des_key_schedule(m, k1), des_key_schedule(m, k2), des_key_schedule(m, k3)};
}

// EDE: E_k3(D_k2(E_k1(x))).
inline std::uint64_t des3_encrypt_block(Machine& m, const Des3Key& k, std::uint64_t x) {
  x = m.call([&] { return des_crypt_block(m, k.k1, x, false); });
  x = m.call([&] { return des_crypt_block(m, k.k2, x, true); });
  return m.call([&] { return des_crypt_block(m, k.k3, x, false); });
}

inline std::uint64_t des3_decrypt_block(Machine& m, const Des3Key& k, std::uint64_t x) {
  x = m.call([&] { return des_crypt_block(m, k.k3, x, true); });
  x = m.call([&] { return des_crypt_block(m, k.k2, x, false); });
  return m.call([&] { return des_crypt_block(m, k.k1, x, true); });
}

inline std::uint64_t load_be64(Machine& m, const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | p[i];
  m.op(Mnemonic("mov_load"));
  m.op(Mnemonic("bswap"));
  return v;
}

inline void store_be64(Machine& m, std::uint64_t v, std::uint8_t* p) {
  m.op(Mnemonic("bswap"));
  m.op(Mnemonic("mov_store"));
  for (int i = 7; i >= 0; --i, v >>= 8) p[i] = static_cast<std::uint8_t>(v);
}

// 3DES over whole 8-byte blocks in CBC, full-block CFB or OFB mode.
inline Bytes des3_crypt(Machine& m, const Des3Key& k, std::uint64_t iv, std::span<const std::uint8_t> data,
                        BlockMode mode, bool decrypt) {
  Bytes out(data.size());
  std::uint64_t chain = iv;
  m.loop(data.size() / 8, [&](std::size_t b) {
    const std::uint64_t in = load_be64(m, &data[8 * b]);
    std::uint64_t res = 0;
    switch (mode) {
      case BlockMode::CBC:
        if (decrypt) {
          res = m.xor_(des3_decrypt_block(m, k, in), chain);
          chain = in;
        } else {
          res = chain = des3_encrypt_block(m, k, m.xor_(in, chain));
        }
        break;
      case BlockMode::CFB:
        res = m.xor_(des3_encrypt_block(m, k, chain), in);
        chain = decrypt ? in : res;
        break;
      case BlockMode::OFB:
        chain = des3_encrypt_block(m, k, chain);
        res = m.xor_(chain, in);
        break;
    }
    store_be64(m, res, &out[8 * b]);
  });
  return out;
}

}  // namespace cryptoscope::programs
