#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "cryptoscope/programs/common.hpp"

namespace cryptoscope::programs {

struct Rc4State {
  std::array<std::uint8_t, 256> s{};
  std::uint8_t i = 0, j = 0;
};

inline Rc4State rc4_init(Machine& m, std::span<const std::uint8_t> key) {
  Rc4State st;
  m.loop(256, [&](std::size_t i) { m.store(st.s[i], i); });
  std::uint8_t j = 0;
  m.loop(256, [&](std::size_t i) {
    m.op(Mnemonic("div"));  // i mod keylen
    j = m.add(m.add(j, m.load(st.s[i])), m.load(key[i % key.size()]));
    const auto a = m.load(st.s[i]);
    m.store(st.s[i], m.load(st.s[j]));
    m.store(st.s[j], a);
  });
  return st;
}

// Encryption and decryption are the same keystream XOR.
inline Bytes rc4_apply(Machine& m, Rc4State& st, std::span<const std::uint8_t> data) {
  Bytes out(data.size());
  m.loop(data.size(), [&](std::size_t n) {
    st.i = m.add(st.i, std::uint8_t{1});
    const auto si = m.load(st.s[st.i]);
    st.j = m.add(st.j, si);
    const auto sj = m.load(st.s[st.j]);
    m.store(st.s[st.i], sj);
    m.store(st.s[st.j], si);
    m.op(Mnemonic("movzx"));
    const auto k = m.load(st.s[m.add(si, sj)]);
    m.store(out[n], m.xor_(m.load(data[n]), k));
  });
  return out;
}

}  // namespace cryptoscope::programs
