#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "cryptoscope/programs/common.hpp"

// Non-cryptographic workloads for the negative class.
namespace cryptoscope::programs {

inline std::vector<std::uint32_t> bubble_sort(Machine& m, std::vector<std::uint32_t> v) {
  const std::size_t n = v.size();
  m.loop(n > 0 ? n - 1 : 0, [&](std::size_t pass) {
    m.loop(n - 1 - pass, [&](std::size_t i) {
      const auto a = m.load(v[i]);
      const auto b = m.load(v[i + 1]);
      m.op(Mnemonic("cmp"));
      if (m.branch(a > b)) {
        m.store(v[i], b);
        m.store(v[i + 1], a);
      }
    });
  });
  return v;
}

// Index of `key` in sorted `v`, or v.size() when absent.
inline std::size_t binary_search(Machine& m, std::span<const std::uint32_t> v, std::uint32_t key) {
  std::size_t lo = 0, hi = v.size();
  while (m.branch(lo < hi)) {
    const std::size_t mid = m.shr(m.add(lo, hi), 1u);
    const auto x = m.load(v[mid]);
    m.op(Mnemonic("cmp"));
    if (m.branch(x == key)) return mid;
    m.op(Mnemonic("cmp"));
    if (m.branch(x < key)) {
      lo = m.add(mid, std::size_t{1});
    } else {
      hi = m.mov(mid);
    }
    m.op(Mnemonic("jmp"));
  }
  return v.size();
}

// Naive search: `repne scasb` to the next candidate first byte, then
// `repe cmpsb` over the rest of the pattern.
inline std::size_t count_occurrences(Machine& m, std::span<const std::uint8_t> text,
                                     std::span<const std::uint8_t> pat) {
  std::size_t count = 0, pos = 0;
  if (pat.empty() || pat.size() > text.size()) return 0;
  const std::size_t last = text.size() - pat.size();
  m.op(Mnemonic("lea"));
  while (m.branch(pos <= last)) {
    m.op(Mnemonic("mov"));
    while (pos <= last) {
      m.op(Mnemonic("scasb_rep"));
      if (text[pos] == pat[0]) break;
      ++pos;
    }
    if (m.branch(pos > last)) break;
    std::size_t k = 1;
    while (k < pat.size()) {
      m.op(Mnemonic("cmpsb"));
      if (text[pos + k] != pat[k]) break;
      ++k;
    }
    if (m.branch(k == pat.size())) count = m.add(count, std::size_t{1});
    pos = m.add(pos, std::size_t{1});
    m.op(Mnemonic("jmp"));
  }
  return count;
}

inline constexpr std::size_t kMatDim = 16;
using Mat16 = std::array<std::int32_t, kMatDim * kMatDim>;

inline Mat16 matmul16(Machine& m, const Mat16& a, const Mat16& b) {
  Mat16 c{};
  m.loop(kMatDim, [&](std::size_t i) {
    m.loop(kMatDim, [&](std::size_t j) {
      std::int32_t acc = m.xor_(0, 0);
      m.loop(kMatDim, [&](std::size_t k) {
        m.op(Mnemonic("lea"));
        const auto x = m.load(a[i * kMatDim + k]);
        const auto y = m.load(b[k * kMatDim + j]);
        m.op(Mnemonic("imul"));
        acc = m.add(acc, static_cast<std::int32_t>(static_cast<std::uint32_t>(x) * static_cast<std::uint32_t>(y)));
      });
      m.store(c[i * kMatDim + j], acc);
    });
  });
  return c;
}

inline constexpr std::string_view kBase64Alphabet =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

inline std::string base64_encode(Machine& m, std::span<const std::uint8_t> in) {
  std::string out;
  out.reserve((in.size() + 2) / 3 * 4);
  const std::size_t groups = in.size() / 3;
  m.loop(groups, [&](std::size_t g) {
    const std::uint32_t b0 = m.load(in[3 * g]), b1 = m.load(in[3 * g + 1]), b2 = m.load(in[3 * g + 2]);
    const std::uint32_t w = m.or_(m.or_(m.shl(b0, 16), m.shl(b1, 8)), b2);
    for (int k = 3; k >= 0; --k) {
      const auto idx = m.and_(m.shr(w, static_cast<unsigned>(6 * k)), 0x3fu);
      m.op(Mnemonic("movzx"));
      out.push_back(m.load(kBase64Alphabet[idx]));
      m.op(Mnemonic("mov_store"));
    }
  });
  const std::size_t rem = in.size() - 3 * groups;
  if (m.branch(rem > 0)) {
    std::uint32_t w = static_cast<std::uint32_t>(in[3 * groups]) << 16;
    if (m.branch(rem == 2)) w = m.or_(w, m.shl(static_cast<std::uint32_t>(in[3 * groups + 1]), 8));
    for (std::size_t k = 0; k < 4; ++k) {
      if (k <= rem) {
        out.push_back(kBase64Alphabet[(w >> (18 - 6 * k)) & 0x3f]);
        m.op(Mnemonic("mov_store"));
      } else {
        out.push_back('=');
        m.op(Mnemonic("stosb_rep"));
      }
    }
  }
  return out;
}

}  // namespace cryptoscope::programs
