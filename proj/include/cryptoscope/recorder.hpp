#pragma once

#include <cassert>
#include <cstdint>
#include <initializer_list>
#include <source_location>
#include <string>
#include <utility>
#include <vector>

#include "cryptoscope/error.hpp"
#include "cryptoscope/trace.hpp"
#include "cryptoscope/util.hpp"

namespace cryptoscope {

enum class BlockMode : std::uint8_t { CBC, CFB, OFB };

inline constexpr std::string_view block_mode_name(BlockMode m) {
  constexpr std::string_view names[] = {"CBC", "CFB", "OFB"};
  return names[static_cast<int>(m)];
}

// Code-shape knobs standing in for compiler/flag diversity. Together with the
// program they fully determine the trace.
struct VariantKnobs {
  int unroll = 1;              // 1, 2 or 4
  double junk_density = 0.0;   // [0, 0.15]
  std::uint64_t schedule_seed = 0;
  std::uint64_t input_seed = 0;
  BlockMode block_mode = BlockMode::CBC;  // only consulted by 3DES

  void validate() const {
    if (unroll != 1 && unroll != 2 && unroll != 4) throw Error("unroll must be 1, 2 or 4");
    if (!(junk_density >= 0.0 && junk_density <= 0.15)) throw Error("junk_density must be in [0, 0.15]");
  }
};

inline constexpr std::size_t kMaxTraceEvents = 2'000'000;

// Event sink. Assigns seq numbers, inserts junk ops and enforces the length cap.
class Recorder {
 public:
  explicit Recorder(const VariantKnobs& knobs, std::size_t cap = kMaxTraceEvents)
      : junk_density_(knobs.junk_density),
        cap_(cap),
        junk_rng_(derive_seed(knobs.schedule_seed, "junk")),
        sched_rng_(derive_seed(knobs.schedule_seed, "schedule")) {}

  // Site layout: [unroll copy:7][junk:1][line:12][column:8][sub-op:4].
  static constexpr std::uint32_t kJunkBit = 1u << 24;

  void emit(Mnemonic m, std::uint32_t site) {
    if (junk_density_ > 0.0 && uniform01(junk_rng_) < junk_density_)
      push(junk_rng_() & 1 ? Mnemonic("mov") : Mnemonic("nop"), site | kJunkBit);
    push(m, site);
  }

  Rng& schedule_rng() { return sched_rng_; }
  std::size_t size() const { return events_.size(); }
  std::vector<TraceEvent> take() { return std::move(events_); }

 private:
  void push(Mnemonic m, std::uint32_t site) {
    if (events_.size() >= cap_)
      throw TraceTooLong("trace exceeds " + std::to_string(cap_) + " events");
    events_.push_back({static_cast<std::uint32_t>(events_.size()), site, m, m.category()});
  }

  double junk_density_;
  std::size_t cap_;
  Rng junk_rng_;
  Rng sched_rng_;
  std::vector<TraceEvent> events_;
};

// Instrumented execution context for reference routines. Each helper performs
// the host operation and records the mnemonic a compiler would emit for it.
// The static site of an operation is derived from its source position, offset
// by the unroll copy it runs in, so sites are stable for a fixed variant.
class Machine {
  using loc_t = std::source_location;

 public:
  Machine(Recorder& rec, int unroll) : rec_(rec), unroll_(unroll) {}

  void op(Mnemonic m, loc_t loc = loc_t::current()) { rec_.emit(m, site(loc)); }

  // Emits a group of mutually independent ops in a schedule-dependent order.
  void sched(std::initializer_list<Mnemonic> ms, loc_t loc = loc_t::current()) {
    std::vector<Mnemonic> order(ms);
    assert(order.size() <= 16);
    shuffle(order.begin(), order.end(), rec_.schedule_rng());
    const auto base = site(loc);
    for (std::size_t i = 0; i < order.size(); ++i)
      rec_.emit(order[i], base + static_cast<std::uint32_t>(i));
  }

  template <class T> T add(T a, T b, loc_t l = loc_t::current()) { op(Mnemonic("add"), l); return static_cast<T>(a + b); }
  template <class T> T sub(T a, T b, loc_t l = loc_t::current()) { op(Mnemonic("sub"), l); return static_cast<T>(a - b); }
  template <class T> T mul(T a, T b, loc_t l = loc_t::current()) { op(Mnemonic("mul"), l); return static_cast<T>(a * b); }
  template <class T> T xor_(T a, T b, loc_t l = loc_t::current()) { op(Mnemonic("xor"), l); return static_cast<T>(a ^ b); }
  template <class T> T and_(T a, T b, loc_t l = loc_t::current()) { op(Mnemonic("and"), l); return static_cast<T>(a & b); }
  template <class T> T or_(T a, T b, loc_t l = loc_t::current()) { op(Mnemonic("or"), l); return static_cast<T>(a | b); }
  template <class T> T not_(T a, loc_t l = loc_t::current()) { op(Mnemonic("not"), l); return static_cast<T>(~a); }
  template <class T> T shl(T a, unsigned s, loc_t l = loc_t::current()) { op(Mnemonic("shl"), l); return static_cast<T>(a << s); }
  template <class T> T shr(T a, unsigned s, loc_t l = loc_t::current()) { op(Mnemonic("shr"), l); return static_cast<T>(a >> s); }

  std::uint32_t rotl(std::uint32_t a, unsigned s, loc_t l = loc_t::current()) {
    op(Mnemonic("rol"), l);
    return (a << s) | (a >> ((32 - s) & 31));
  }
  std::uint32_t rotr(std::uint32_t a, unsigned s, loc_t l = loc_t::current()) {
    op(Mnemonic("ror"), l);
    return (a >> s) | (a << ((32 - s) & 31));
  }

  template <class T> T load(const T& src, loc_t l = loc_t::current()) { op(Mnemonic("mov_load"), l); return src; }
  template <class T, class U> void store(T& dst, U v, loc_t l = loc_t::current()) {
    op(Mnemonic("mov_store"), l);
    dst = static_cast<T>(v);
  }
  template <class T> T mov(T v, loc_t l = loc_t::current()) { op(Mnemonic("mov"), l); return v; }

  // Compare-and-branch; returns the condition so it can drive host control flow.
  bool branch(bool cond, loc_t l = loc_t::current()) {
    const auto s = site(l);
    rec_.emit(Mnemonic("cmp"), s);
    rec_.emit(Mnemonic("jz"), s + 1);
    return cond;
  }

  // Counted loop. Loop control (index update, cmp, jnz) is emitted once per
  // unrolled group; body ops in different unroll copies get distinct sites.
  template <class F>
  void loop(std::size_t n, F&& body, loc_t l = loc_t::current()) {
    const auto s = site(l);
    rec_.emit(Mnemonic("xor"), s);  // zero the index register
    const auto saved = copy_offset_;
    const auto stride = copy_stride_;
    copy_stride_ *= static_cast<std::uint32_t>(unroll_);
    for (std::size_t i = 0; i < n; ++i) {
      copy_offset_ = saved + stride * static_cast<std::uint32_t>(i % static_cast<std::size_t>(unroll_));
      body(i);
      copy_offset_ = saved;
      if ((i + 1) % static_cast<std::size_t>(unroll_) == 0 || i + 1 == n) {
        rec_.emit(Mnemonic(unroll_ == 1 ? "inc" : "add"), s + 1);
        rec_.emit(Mnemonic("cmp"), s + 2);
        rec_.emit(Mnemonic("jnz"), s + 3);
      }
    }
    copy_stride_ = stride;
  }

  // A called subroutine: call/push on entry, pop/ret on exit.
  template <class F>
  decltype(auto) call(F&& fn, loc_t l = loc_t::current()) {
    const auto s = site(l);
    rec_.emit(Mnemonic("push"), s);
    rec_.emit(Mnemonic("call"), s + 1);
    struct Exit {
      Machine& m;
      std::uint32_t s;
      ~Exit() noexcept(false) {
        if (std::uncaught_exceptions() == 0) {
          m.rec_.emit(Mnemonic("pop"), s + 2);
          m.rec_.emit(Mnemonic("ret"), s + 3);
        }
      }
    } exit{*this, s};
    return fn();
  }

 private:
  std::uint32_t site(const loc_t& l) const {
    const std::uint32_t text = (((l.line() & 0xFFFu) << 8) | (l.column() & 0xFFu)) << 4;
    return (copy_offset_ << 25) | text;
  }

  Recorder& rec_;
  int unroll_;
  std::uint32_t copy_offset_ = 0;
  std::uint32_t copy_stride_ = 1;
};

}  // namespace cryptoscope
