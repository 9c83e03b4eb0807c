#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "cryptoscope/programs/common.hpp"

namespace cryptoscope::programs {

namespace detail {

// Message || 0x80 || 0* || 64-bit length, padded to a multiple of 64 bytes.
inline Bytes md_pad(Machine& m, std::span<const std::uint8_t> msg, bool big_endian_length) {
  const std::uint64_t bits = static_cast<std::uint64_t>(msg.size()) * 8;
  Bytes buf(((msg.size() + 8) / 64 + 1) * 64, 0);
  copy_bytes(m, msg, buf.data());
  m.store(buf[msg.size()], 0x80);
  m.op(Mnemonic("stosb_rep"));
  for (int i = 0; i < 8; ++i) {
    const std::size_t at = big_endian_length ? buf.size() - 1 - i : buf.size() - 8 + i;
    m.store(buf[at], m.shr(bits, static_cast<unsigned>(8 * i)) & 0xff);
  }
  return buf;
}

inline constexpr std::array<std::uint32_t, 64> kMd5K = [] {
  // floor(abs(sin(i + 1)) * 2^32), tabulated.
  return std::array<std::uint32_t, 64>{
      0xd76aa478, 0xe8c7b756, 0x242070db, 0xc1bdceee, 0xf57c0faf, 0x4787c62a, 0xa8304613, 0xfd469501,
      0x698098d8, 0x8b44f7af, 0xffff5bb1, 0x895cd7be, 0x6b901122, 0xfd987193, 0xa679438e, 0x49b40821,
      0xf61e2562, 0xc040b340, 0x265e5a51, 0xe9b6c7aa, 0xd62f105d, 0x02441453, 0xd8a1e681, 0xe7d3fbc8,
      0x21e1cde6, 0xc33707d6, 0xf4d50d87, 0x455a14ed, 0xa9e3e905, 0xfcefa3f8, 0x676f02d9, 0x8d2a4c8a,
      0xfffa3942, 0x8771f681, 0x6d9d6122, 0xfde5380c, 0xa4beea44, 0x4bdecfa9, 0xf6bb4b60, 0xbebfbc70,
      0x289b7ec6, 0xeaa127fa, 0xd4ef3085, 0x04881d05, 0xd9d4d039, 0xe6db99e5, 0x1fa27cf8, 0xc4ac5665,
      0xf4292244, 0x432aff97, 0xab9423a7, 0xfc93a039, 0x655b59c3, 0x8f0ccc92, 0xffeff47d, 0x85845dd1,
      0x6fa87e4f, 0xfe2ce6e0, 0xa3014314, 0x4e0811a1, 0xf7537e82, 0xbd3af235, 0x2ad7d2bb, 0xeb86d391};
}();

inline constexpr std::array<unsigned, 64> kMd5Shift = {
    7, 12, 17, 22, 7, 12, 17, 22, 7, 12, 17, 22, 7, 12, 17, 22, 5, 9,  14, 20, 5, 9,
    14, 20, 5, 9,  14, 20, 5, 9,  14, 20, 4, 11, 16, 23, 4, 11, 16, 23, 4, 11, 16, 23,
    4, 11, 16, 23, 6, 10, 15, 21, 6, 10, 15, 21, 6, 10, 15, 21, 6, 10, 15, 21};

}  // namespace detail

inline constexpr std::size_t kHashBlockBytes = 64;

inline std::array<std::uint8_t, 16> md5(Machine& m, std::span<const std::uint8_t> msg) {
  using detail::kMd5K;
  using detail::kMd5Shift;
  const Bytes buf = detail::md_pad(m, msg, false);
  std::array<std::uint32_t, 4> h = {0x67452301, 0xefcdab89, 0x98badcfe, 0x10325476};

  m.loop(buf.size() / 64, [&](std::size_t blk) {
    std::array<std::uint32_t, 16> x{};
    m.loop(16, [&](std::size_t j) {
      const std::uint8_t* p = &buf[blk * 64 + 4 * j];
      x[j] = m.load(static_cast<std::uint32_t>(p[0] | p[1] << 8 | p[2] << 16 |
                                               static_cast<std::uint32_t>(p[3]) << 24));
    });
    std::uint32_t a = m.mov(h[0]), b = m.mov(h[1]), c = m.mov(h[2]), d = m.mov(h[3]);
    m.loop(64, [&](std::size_t i) {
      std::uint32_t f;
      std::size_t g;
      if (m.branch(i < 16)) {
        f = m.or_(m.and_(b, c), m.and_(m.not_(b), d));
        g = i;
      } else if (m.branch(i < 32)) {
        f = m.or_(m.and_(d, b), m.and_(m.not_(d), c));
        m.op(Mnemonic("lea"));
        g = m.and_(5 * i + 1, std::size_t{15});
      } else if (m.branch(i < 48)) {
        f = m.xor_(m.xor_(b, c), d);
        m.op(Mnemonic("lea"));
        g = m.and_(3 * i + 5, std::size_t{15});
      } else {
        f = m.xor_(c, m.or_(b, m.not_(d)));
        m.op(Mnemonic("imul"));
        g = m.and_(7 * i, std::size_t{15});
      }
      const std::uint32_t sum = a + f + kMd5K[i] + x[g];
      m.sched({Mnemonic("add"), Mnemonic("add"), Mnemonic("mov_load"), Mnemonic("add"),
               Mnemonic("mov_load")});
      const std::uint32_t tmp = d;
      d = c;
      c = b;
      b = m.add(b, m.rotl(sum, kMd5Shift[i]));
      a = tmp;
    });
    h[0] = m.add(h[0], a);
    h[1] = m.add(h[1], b);
    h[2] = m.add(h[2], c);
    h[3] = m.add(h[3], d);
  });

  std::array<std::uint8_t, 16> out{};
  for (int i = 0; i < 16; ++i) m.store(out[i], m.shr(h[i / 4], 8u * (i % 4)) & 0xff);
  return out;
}

inline std::array<std::uint8_t, 20> sha1(Machine& m, std::span<const std::uint8_t> msg) {
  const Bytes buf = detail::md_pad(m, msg, true);
  std::array<std::uint32_t, 5> h = {0x67452301, 0xEFCDAB89, 0x98BADCFE, 0x10325476, 0xC3D2E1F0};

  m.loop(buf.size() / 64, [&](std::size_t blk) {
    std::array<std::uint32_t, 80> w{};
    m.loop(16, [&](std::size_t t) {
      const std::uint8_t* p = &buf[blk * 64 + 4 * t];
      const std::uint32_t le = m.load(static_cast<std::uint32_t>(
          p[3] | p[2] << 8 | p[1] << 16 | static_cast<std::uint32_t>(p[0]) << 24));
      m.op(Mnemonic("bswap"));
      m.store(w[t], le);
    });
    m.loop(64, [&](std::size_t i) {
      const std::size_t t = i + 16;
      const std::uint32_t v = m.xor_(m.xor_(m.xor_(m.load(w[t - 3]), m.load(w[t - 8])), m.load(w[t - 14])),
                                     m.load(w[t - 16]));
      m.store(w[t], m.rotl(v, 1));
    });
    std::uint32_t a = m.mov(h[0]), b = m.mov(h[1]), c = m.mov(h[2]), d = m.mov(h[3]), e = m.mov(h[4]);
    m.loop(80, [&](std::size_t t) {
      std::uint32_t f, k;
      if (m.branch(t < 20)) {
        f = m.or_(m.and_(b, c), m.and_(m.not_(b), d));
        k = 0x5A827999;
      } else if (m.branch(t < 40)) {
        f = m.xor_(m.xor_(b, c), d);
        k = 0x6ED9EBA1;
      } else if (m.branch(t < 60)) {
        f = m.or_(m.or_(m.and_(b, c), m.and_(b, d)), m.and_(c, d));
        k = 0x8F1BBCDC;
      } else {
        f = m.xor_(m.xor_(b, c), d);
        k = 0xCA62C1D6;
      }
      const std::uint32_t temp = ((a << 5) | (a >> 27)) + f + e + k + w[t];
      m.sched({Mnemonic("rol"), Mnemonic("add"), Mnemonic("add"), Mnemonic("add"), Mnemonic("add"),
               Mnemonic("mov_load")});
      e = d;
      d = c;
      c = m.rotl(b, 30);
      b = a;
      a = temp;
    });
    h[0] = m.add(h[0], a);
    h[1] = m.add(h[1], b);
    h[2] = m.add(h[2], c);
    h[3] = m.add(h[3], d);
    h[4] = m.add(h[4], e);
  });

  std::array<std::uint8_t, 20> out{};
  for (int i = 0; i < 20; ++i) m.store(out[i], m.shr(h[i / 4], 8u * (3 - i % 4)) & 0xff);
  return out;
}

// HMAC over a 64-byte-block hash. `hash` is one of the routines above.
template <class HashFn>
auto hmac(Machine& m, HashFn&& hash, std::span<const std::uint8_t> key, std::span<const std::uint8_t> msg) {
  Bytes k0(kHashBlockBytes, 0);
  if (m.branch(key.size() > kHashBlockBytes)) {
    const auto hk = m.call([&] { return hash(m, key); });
    copy_bytes(m, hk, k0.data());
  } else {
    copy_bytes(m, key, k0.data());
  }
  Bytes inner(kHashBlockBytes + msg.size());
  Bytes outer_pad(kHashBlockBytes);
  m.loop(kHashBlockBytes, [&](std::size_t i) {
    const auto kb = m.load(k0[i]);
    m.store(inner[i], m.xor_(kb, std::uint8_t{0x36}));
    m.store(outer_pad[i], m.xor_(kb, std::uint8_t{0x5c}));
  });
  copy_bytes(m, msg, inner.data() + kHashBlockBytes);
  const auto ih = m.call([&] { return hash(m, inner); });
  Bytes outer(kHashBlockBytes + ih.size());
  copy_bytes(m, outer_pad, outer.data());
  copy_bytes(m, ih, outer.data() + kHashBlockBytes);
  return m.call([&] { return hash(m, outer); });
}

inline auto md5_fn() {
  return [](Machine& m, std::span<const std::uint8_t> d) { return md5(m, d); };
}
inline auto sha1_fn() {
  return [](Machine& m, std::span<const std::uint8_t> d) { return sha1(m, d); };
}

}  // namespace cryptoscope::programs
