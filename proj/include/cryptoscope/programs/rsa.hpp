#pragma once

#include <array>
#include <cstdint>

#include "cryptoscope/programs/common.hpp"

namespace cryptoscope::programs {

inline constexpr std::size_t kRsaLimbs = 8;
using Limbs = std::array<std::uint32_t, kRsaLimbs>;  // little-endian 32-bit limbs

// Fixed 256-bit toy key: n = p*q with 128-bit primes, e = 65537.
struct RsaKey {
  Limbs n;
  Limbs e;
  Limbs d;
  Limbs r2;             // R^2 mod n, R = 2^256
  std::uint32_t n0inv;  // -n^{-1} mod 2^32
};

inline constexpr RsaKey kToyRsaKey = {
    {0x68eaaf27u, 0x62d1da5eu, 0xa080cab2u, 0x742951b7u, 0xc05c3da2u, 0x0050ec0bu, 0x899cd92au, 0xa23b58e2u},
    {0x00010001u, 0, 0, 0, 0, 0, 0, 0},
    {0x4e933441u, 0xb61aaee8u, 0x53da477fu, 0x52b21988u, 0x005f12a8u, 0xc8f8935eu, 0xd4246032u, 0x6af9b557u},
    {0x03e5d6d1u, 0xe6917606u, 0xc885e5e3u, 0xfbd96c66u, 0xf3103170u, 0x32e9bebau, 0xfeecdbd5u, 0x175369a8u},
    0xef7a2f69u,
};

namespace detail {

// a >= b, limb-wise from the top.
inline bool limbs_geq(Machine& m, const std::array<std::uint32_t, kRsaLimbs + 1>& a, const Limbs& b) {
  if (a[kRsaLimbs] != 0) return m.branch(true);
  for (std::size_t i = kRsaLimbs; i-- > 0;) {
    m.op(Mnemonic("cmp"));
    if (m.branch(a[i] != b[i])) return a[i] > b[i];
  }
  return true;
}

}  // namespace detail

// Montgomery product a*b*R^{-1} mod n (CIOS, schoolbook limb loops).
inline Limbs mont_mul(Machine& m, const Limbs& a, const Limbs& b, const RsaKey& key) {
  std::array<std::uint32_t, kRsaLimbs + 2> t{};
  m.loop(kRsaLimbs, [&](std::size_t i) {
    std::uint64_t carry = 0;
    const std::uint64_t bi = m.load(b[i]);
    m.loop(kRsaLimbs, [&](std::size_t j) {
      const std::uint64_t prod = m.mul(static_cast<std::uint64_t>(m.load(a[j])), bi);
      const std::uint64_t acc = static_cast<std::uint64_t>(t[j]) + prod + carry;
      m.op(Mnemonic("add"));
      m.op(Mnemonic("adc"));
      m.store(t[j], static_cast<std::uint32_t>(acc));
      carry = m.shr(acc, 32u);
    });
    std::uint64_t acc = static_cast<std::uint64_t>(t[kRsaLimbs]) + carry;
    m.op(Mnemonic("add"));
    t[kRsaLimbs] = static_cast<std::uint32_t>(acc);
    t[kRsaLimbs + 1] = static_cast<std::uint32_t>(m.shr(acc, 32u));

    const std::uint32_t q = m.mul(t[0], key.n0inv);
    acc = static_cast<std::uint64_t>(t[0]) + static_cast<std::uint64_t>(q) * key.n[0];
    m.op(Mnemonic("mul"));
    m.op(Mnemonic("add"));
    carry = m.shr(acc, 32u);
    m.loop(kRsaLimbs - 1, [&](std::size_t jj) {
      const std::size_t j = jj + 1;
      const std::uint64_t prod = m.mul(static_cast<std::uint64_t>(q), static_cast<std::uint64_t>(m.load(key.n[j])));
      const std::uint64_t s = static_cast<std::uint64_t>(t[j]) + prod + carry;
      m.op(Mnemonic("add"));
      m.op(Mnemonic("adc"));
      m.store(t[j - 1], static_cast<std::uint32_t>(s));
      carry = m.shr(s, 32u);
    });
    acc = static_cast<std::uint64_t>(t[kRsaLimbs]) + carry;
    m.op(Mnemonic("add"));
    t[kRsaLimbs - 1] = static_cast<std::uint32_t>(acc);
    t[kRsaLimbs] = static_cast<std::uint32_t>(t[kRsaLimbs + 1] + (acc >> 32));
    m.op(Mnemonic("adc"));
  });

  std::array<std::uint32_t, kRsaLimbs + 1> r{};
  for (std::size_t i = 0; i <= kRsaLimbs; ++i) r[i] = t[i];
  Limbs out{};
  if (detail::limbs_geq(m, r, key.n)) {
    std::uint64_t borrow = 0;
    m.loop(kRsaLimbs, [&](std::size_t i) {
      const std::uint64_t diff = static_cast<std::uint64_t>(r[i]) - key.n[i] - borrow;
      m.op(Mnemonic(i == 0 ? "sub" : "sbb"));
      m.store(out[i], static_cast<std::uint32_t>(diff));
      borrow = (diff >> 63) & 1;
      m.op(Mnemonic("setc"));
    });
  } else {
    copy_bytes(m, std::span(reinterpret_cast<const std::uint8_t*>(r.data()), sizeof(Limbs)),
               reinterpret_cast<std::uint8_t*>(out.data()));
  }
  return out;
}

// base^exp mod n by left-to-right square-and-multiply in the Montgomery domain.
inline Limbs mod_exp(Machine& m, const Limbs& base, const Limbs& exp, const RsaKey& key) {
  const Limbs base_m = m.call([&] { return mont_mul(m, base, key.r2, key); });
  Limbs one{};
  one[0] = 1;
  Limbs acc = m.call([&] { return mont_mul(m, one, key.r2, key); });
  int top = -1;
  for (int i = 255; i >= 0; --i)
    if ((exp[i / 32] >> (i % 32)) & 1) {
      top = i;
      break;
    }
  m.op(Mnemonic("lea"));
  m.loop(static_cast<std::size_t>(top + 1), [&](std::size_t k) {
    const int bit = top - static_cast<int>(k);
    acc = m.call([&] { return mont_mul(m, acc, acc, key); });
    const auto word = m.load(exp[bit / 32]);
    const bool set = m.and_(m.shr(word, static_cast<unsigned>(bit % 32)), 1u) != 0;
    if (m.branch(set)) acc = m.call([&] { return mont_mul(m, acc, base_m, key); });
  });
  return m.call([&] { return mont_mul(m, acc, one, key); });
}

inline Limbs rsa_encrypt(Machine& m, const Limbs& msg, const RsaKey& key = kToyRsaKey) {
  return mod_exp(m, msg, key.e, key);
}

inline Limbs rsa_decrypt(Machine& m, const Limbs& ct, const RsaKey& key = kToyRsaKey) {
  return mod_exp(m, ct, key.d, key);
}

}  // namespace cryptoscope::programs
