#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "cryptoscope/programs/common.hpp"

namespace cryptoscope::programs {

namespace detail {

constexpr std::uint8_t gf_mul(std::uint8_t a, std::uint8_t b) {
  std::uint8_t p = 0;
  while (b) {
    if (b & 1) p ^= a;
    a = static_cast<std::uint8_t>((a << 1) ^ ((a & 0x80) ? 0x1b : 0));
    b >>= 1;
  }
  return p;
}

constexpr std::array<std::uint8_t, 256> make_aes_sbox() {
  std::array<std::uint8_t, 256> s{};
  for (int x = 0; x < 256; ++x) {
    std::uint8_t inv = 0;
    if (x)
      for (int y = 1; y < 256; ++y)
        if (gf_mul(static_cast<std::uint8_t>(x), static_cast<std::uint8_t>(y)) == 1) inv = static_cast<std::uint8_t>(y);
    std::uint8_t r = inv;
    for (int k = 1; k <= 4; ++k) r ^= static_cast<std::uint8_t>((inv << k) | (inv >> (8 - k)));
    s[x] = static_cast<std::uint8_t>(r ^ 0x63);
  }
  return s;
}

constexpr std::array<std::uint8_t, 256> invert(const std::array<std::uint8_t, 256>& s) {
  std::array<std::uint8_t, 256> inv{};
  for (int i = 0; i < 256; ++i) inv[s[i]] = static_cast<std::uint8_t>(i);
  return inv;
}

inline constexpr auto kAesSbox = make_aes_sbox();
inline constexpr auto kAesInvSbox = invert(kAesSbox);
static_assert(kAesSbox[0x00] == 0x63 && kAesSbox[0x53] == 0xed);

inline std::uint8_t xtime(Machine& m, std::uint8_t b) {
  const auto hi = m.and_(b, std::uint8_t{0x80});
  auto r = m.shl(b, 1);
  if (m.branch(hi != 0)) r = m.xor_(r, std::uint8_t{0x1b});
  return r;
}

}  // namespace detail

using AesBlock = std::array<std::uint8_t, 16>;

struct Aes128Key {
  std::array<std::uint8_t, 176> round_keys{};
};

inline Aes128Key aes128_expand(Machine& m, std::span<const std::uint8_t, 16> key) {
  using detail::kAesSbox;
  Aes128Key k;
  auto& w = k.round_keys;
  copy_bytes(m, key, w.data());
  std::uint8_t rcon = 1;
  m.loop(40, [&](std::size_t idx) {
    const std::size_t i = idx + 4;
    std::array<std::uint8_t, 4> t;
    for (int j = 0; j < 4; ++j) t[j] = m.load(w[4 * (i - 1) + j]);
    if (m.branch(i % 4 == 0)) {
      const auto t0 = t[0];
      t[0] = m.xor_(m.load(kAesSbox[t[1]]), rcon);
      t[1] = m.load(kAesSbox[t[2]]);
      t[2] = m.load(kAesSbox[t[3]]);
      t[3] = m.load(kAesSbox[t0]);
      rcon = detail::xtime(m, rcon);
    }
    for (int j = 0; j < 4; ++j) m.store(w[4 * i + j], m.xor_(m.load(w[4 * (i - 4) + j]), t[j]));
  });
  return k;
}

namespace detail {

inline void add_round_key(Machine& m, AesBlock& s, const Aes128Key& k, std::size_t round) {
  m.loop(16, [&](std::size_t i) { s[i] = m.xor_(s[i], m.load(k.round_keys[16 * round + i])); });
}

inline void sub_bytes(Machine& m, AesBlock& s, const std::array<std::uint8_t, 256>& box) {
  m.loop(16, [&](std::size_t i) {
    m.op(Mnemonic("movzx"));
    m.store(s[i], m.load(box[s[i]]));
  });
}

// Row r rotated left by r (encrypt) or right by r (decrypt).
inline void shift_rows(Machine& m, AesBlock& s, bool inverse) {
  AesBlock t = s;
  for (int r = 1; r < 4; ++r)
    for (int c = 0; c < 4; ++c) {
      const int src = inverse ? (c - r + 4) % 4 : (c + r) % 4;
      m.store(s[4 * c + r], m.load(t[4 * src + r]));
    }
}

inline void mix_columns(Machine& m, AesBlock& s) {
  m.loop(4, [&](std::size_t c) {
    std::uint8_t* a = &s[4 * c];
    const auto a0 = a[0], a1 = a[1], a2 = a[2], a3 = a[3];
    const auto t = m.xor_(m.xor_(a0, a1), m.xor_(a2, a3));
    a[0] = m.xor_(m.xor_(a0, t), xtime(m, m.xor_(a0, a1)));
    a[1] = m.xor_(m.xor_(a1, t), xtime(m, m.xor_(a1, a2)));
    a[2] = m.xor_(m.xor_(a2, t), xtime(m, m.xor_(a2, a3)));
    a[3] = m.xor_(m.xor_(a3, t), xtime(m, m.xor_(a3, a0)));
  });
}

// InvMixColumns as a pre-multiplication by {04}x^2+{05} followed by MixColumns.
inline void inv_mix_columns(Machine& m, AesBlock& s) {
  m.loop(4, [&](std::size_t c) {
    std::uint8_t* a = &s[4 * c];
    const auto u = xtime(m, xtime(m, m.xor_(a[0], a[2])));
    const auto v = xtime(m, xtime(m, m.xor_(a[1], a[3])));
    a[0] = m.xor_(a[0], u);
    a[1] = m.xor_(a[1], v);
    a[2] = m.xor_(a[2], u);
    a[3] = m.xor_(a[3], v);
  });
  mix_columns(m, s);
}

}  // namespace detail

inline AesBlock aes128_encrypt_block(Machine& m, const Aes128Key& k, AesBlock s) {
  detail::add_round_key(m, s, k, 0);
  m.loop(10, [&](std::size_t r) {
    detail::sub_bytes(m, s, detail::kAesSbox);
    detail::shift_rows(m, s, false);
    if (m.branch(r + 1 < 10)) detail::mix_columns(m, s);
    detail::add_round_key(m, s, k, r + 1);
  });
  return s;
}

inline AesBlock aes128_decrypt_block(Machine& m, const Aes128Key& k, AesBlock s) {
  detail::add_round_key(m, s, k, 10);
  m.loop(10, [&](std::size_t i) {
    const std::size_t r = 9 - i;
    detail::shift_rows(m, s, true);
    detail::sub_bytes(m, s, detail::kAesInvSbox);
    detail::add_round_key(m, s, k, r);
    if (m.branch(r > 0)) detail::inv_mix_columns(m, s);
  });
  return s;
}

// CBC over whole blocks; `data.size()` must be a multiple of 16.
inline Bytes aes128_cbc_encrypt(Machine& m, const Aes128Key& k, const AesBlock& iv,
                                std::span<const std::uint8_t> data) {
  Bytes out(data.size());
  AesBlock chain = iv;
  m.loop(data.size() / 16, [&](std::size_t b) {
    AesBlock blk;
    m.loop(16, [&](std::size_t i) { blk[i] = m.xor_(m.load(data[16 * b + i]), chain[i]); });
    chain = m.call([&] { return aes128_encrypt_block(m, k, blk); });
    copy_bytes(m, chain, &out[16 * b]);
  });
  return out;
}

inline Bytes aes128_cbc_decrypt(Machine& m, const Aes128Key& k, const AesBlock& iv,
                                std::span<const std::uint8_t> data) {
  Bytes out(data.size());
  AesBlock chain = iv;
  m.loop(data.size() / 16, [&](std::size_t b) {
    AesBlock ct;
    copy_bytes(m, data.subspan(16 * b, 16), ct.data());
    const AesBlock pt = m.call([&] { return aes128_decrypt_block(m, k, ct); });
    m.loop(16, [&](std::size_t i) { m.store(out[16 * b + i], m.xor_(pt[i], chain[i])); });
    chain = ct;
  });
  return out;
}

}  // namespace cryptoscope::programs
