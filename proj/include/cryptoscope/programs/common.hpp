#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cryptoscope/recorder.hpp"
#include "cryptoscope/util.hpp"

namespace cryptoscope {

using Bytes = std::vector<std::uint8_t>;

inline Bytes random_bytes(Rng& rng, std::size_t n) {
  Bytes out(n);
  for (auto& b : out) b = static_cast<std::uint8_t>(rng() >> 56);
  return out;
}

// Block copy lowered to `rep movsb`: one string op per byte moved.
inline void copy_bytes(Machine& m, std::span<const std::uint8_t> src, std::uint8_t* dst) {
  m.op(Mnemonic("lea"));
  for (std::size_t i = 0; i < src.size(); ++i) {
    m.op(Mnemonic("movsb_rep"));
    dst[i] = src[i];
  }
}

}  // namespace cryptoscope
