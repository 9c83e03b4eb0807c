#pragma once

#include <atomic>
#include <filesystem>
#include <span>
#include <string>
#include <unistd.h>

#include "cryptoscope/recorder.hpp"
#include "cryptoscope/trace.hpp"
#include "cryptoscope/util.hpp"

namespace testing_support {

using namespace cryptoscope;

// A Machine that records into a throwaway sink with no junk and no cap.
struct Bench {
  Recorder rec{VariantKnobs{}, SIZE_MAX};
  Machine m{rec, 1};
};

inline std::vector<std::uint8_t> pattern(std::size_t n, unsigned a, unsigned b) {
  std::vector<std::uint8_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<std::uint8_t>((a * i + b) & 0xff);
  return out;
}

inline std::string hex(std::span<const std::uint8_t> b) {
  static constexpr char d[] = "0123456789abcdef";
  std::string s;
  for (auto c : b) {
    s += d[c >> 4];
    s += d[c & 15];
  }
  return s;
}

inline std::vector<std::uint8_t> unhex(std::string_view h) {
  std::vector<std::uint8_t> out;
  for (std::size_t i = 0; i + 1 < h.size(); i += 2)
    out.push_back(static_cast<std::uint8_t>(std::stoi(std::string(h.substr(i, 2)), nullptr, 16)));
  return out;
}

// Valid trace with random mnemonics drawn from the whole table and sites
// drawn from a small pool so some of them repeat.
inline Trace random_trace(Rng& rng, std::size_t n, std::uint32_t sites = 40) {
  static const auto all = all_mnemonics();
  Trace t;
  t.program_id = "prog" + std::to_string(uniform_below(rng, 100));
  t.variant_id = "v" + std::to_string(uniform_below(rng, 100));
  t.label = LabelTriple::of(static_cast<Algorithm>(uniform_below(rng, 7)));
  t.meta["seed"] = std::to_string(rng() >> 1);
  t.meta["note"] = "k" + std::to_string(uniform_below(rng, 9));
  for (std::size_t i = 0; i < n; ++i) {
    const auto m = all[uniform_below(rng, all.size())];
    t.events.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(uniform_below(rng, sites)), m,
                        m.category()});
  }
  return t;
}

inline Trace trace_of(std::initializer_list<std::string_view> mnemonics, std::vector<std::uint32_t> sites = {}) {
  Trace t;
  t.program_id = "t";
  t.variant_id = "v";
  std::uint32_t i = 0;
  for (auto name : mnemonics) {
    const Mnemonic m(name);
    t.events.push_back({i, sites.empty() ? i : sites[i], m, m.category()});
    ++i;
  }
  return t;
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("cryptoscope-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing_support
