#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "cryptoscope/programs/aes.hpp"
#include "cryptoscope/programs/des.hpp"
#include "cryptoscope/programs/hash.hpp"
#include "cryptoscope/programs/plain.hpp"
#include "cryptoscope/programs/rc4.hpp"
#include "cryptoscope/programs/rsa.hpp"
#include "cryptoscope/recorder.hpp"
#include "cryptoscope/trace.hpp"
#include "cryptoscope/util.hpp"

namespace cryptoscope {

enum class ProgramKind { CRYPTO, PLAIN };

struct Program {
  std::string_view id;
  ProgramKind kind;
  LabelTriple label;
  // Runs the routine on material drawn from `input`; returns its observable output.
  Bytes (*body)(Machine& m, Rng& input, const VariantKnobs& knobs);
};

namespace detail {

inline constexpr std::size_t kAesPayload = 256;
inline constexpr std::size_t kRc4Payload = 1024;
inline constexpr std::size_t kDes3Payload = 32;
inline constexpr std::size_t kHashPayload = 1024;

template <std::size_t N>
void append(Bytes& out, const std::array<std::uint8_t, N>& a) {
  out.insert(out.end(), a.begin(), a.end());
}

inline Bytes run_aes(Machine& m, Rng& in, const VariantKnobs&) {
  const Bytes key = random_bytes(in, 16);
  programs::AesBlock iv;
  std::ranges::copy(random_bytes(in, 16), iv.begin());
  const Bytes pt = random_bytes(in, kAesPayload);
  const auto ks = programs::aes128_expand(m, std::span<const std::uint8_t, 16>(key.data(), 16));
  Bytes out = m.call([&] { return programs::aes128_cbc_encrypt(m, ks, iv, pt); });
  const Bytes back = m.call([&] { return programs::aes128_cbc_decrypt(m, ks, iv, out); });
  out.insert(out.end(), back.begin(), back.end());
  return out;
}

inline Bytes run_rc4(Machine& m, Rng& in, const VariantKnobs&) {
  const Bytes key = random_bytes(in, 16);
  const Bytes pt = random_bytes(in, kRc4Payload);
  auto enc = programs::rc4_init(m, key);
  Bytes out = m.call([&] { return programs::rc4_apply(m, enc, pt); });
  auto dec = programs::rc4_init(m, key);
  const Bytes back = m.call([&] { return programs::rc4_apply(m, dec, out); });
  out.insert(out.end(), back.begin(), back.end());
  return out;
}

inline Bytes run_des3(Machine& m, Rng& in, const VariantKnobs& knobs) {
  const std::uint64_t k1 = in(), k2 = in(), k3 = in(), iv = in();
  const Bytes pt = random_bytes(in, kDes3Payload);
  const auto ks = programs::des3_key_schedule(m, k1, k2, k3);
  Bytes out = m.call([&] { return programs::des3_crypt(m, ks, iv, pt, knobs.block_mode, false); });
  const Bytes back = m.call([&] { return programs::des3_crypt(m, ks, iv, out, knobs.block_mode, true); });
  out.insert(out.end(), back.begin(), back.end());
  return out;
}

inline Bytes limbs_bytes(const programs::Limbs& l) {
  Bytes out;
  for (auto w : l)
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(w >> (8 * i)));
  return out;
}

inline Bytes run_rsa(Machine& m, Rng& in, const VariantKnobs&) {
  programs::Limbs msg{};
  for (auto& w : msg) w = static_cast<std::uint32_t>(in() >> 32);
  msg[programs::kRsaLimbs - 1] &= 0x7fffffffu;  // below n's top limb, so msg < n
  const auto ct = m.call([&] { return programs::rsa_encrypt(m, msg); });
  const auto pt = m.call([&] { return programs::rsa_decrypt(m, ct); });
  Bytes out = limbs_bytes(ct);
  const Bytes back = limbs_bytes(pt);
  out.insert(out.end(), back.begin(), back.end());
  return out;
}

inline Bytes run_sha1(Machine& m, Rng& in, const VariantKnobs&) {
  const Bytes msg = random_bytes(in, kHashPayload);
  Bytes out;
  append(out, m.call([&] { return programs::sha1(m, msg); }));
  return out;
}

inline Bytes run_hmac_sha1(Machine& m, Rng& in, const VariantKnobs&) {
  const Bytes key = random_bytes(in, 20);
  const Bytes msg = random_bytes(in, kHashPayload);
  Bytes out;
  append(out, programs::hmac(m, programs::sha1_fn(), key, msg));
  return out;
}

inline Bytes run_md5(Machine& m, Rng& in, const VariantKnobs&) {
  const Bytes msg = random_bytes(in, kHashPayload);
  Bytes out;
  append(out, m.call([&] { return programs::md5(m, msg); }));
  return out;
}

inline Bytes run_hmac_md5(Machine& m, Rng& in, const VariantKnobs&) {
  const Bytes key = random_bytes(in, 16);
  const Bytes msg = random_bytes(in, kHashPayload);
  Bytes out;
  append(out, programs::hmac(m, programs::md5_fn(), key, msg));
  return out;
}

inline Bytes u32_bytes(std::span<const std::uint32_t> v) {
  Bytes out;
  for (auto w : v)
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(w >> (8 * i)));
  return out;
}

inline Bytes run_bubble_sort(Machine& m, Rng& in, const VariantKnobs&) {
  std::vector<std::uint32_t> v(96);
  for (auto& x : v) x = static_cast<std::uint32_t>(in() >> 40);
  const auto sorted = m.call([&] { return programs::bubble_sort(m, v); });
  return u32_bytes(sorted);
}

inline Bytes run_binary_search(Machine& m, Rng& in, const VariantKnobs&) {
  std::vector<std::uint32_t> table(512);
  std::uint32_t acc = 0;
  m.loop(table.size(), [&](std::size_t i) {
    acc = m.add(acc, static_cast<std::uint32_t>(1 + (in() >> 60)));
    m.store(table[i], acc);
  });
  std::vector<std::uint32_t> found;
  m.loop(200, [&](std::size_t) {
    const std::uint32_t key = static_cast<std::uint32_t>(uniform_below(in, acc + 1));
    found.push_back(static_cast<std::uint32_t>(m.call([&] { return programs::binary_search(m, table, key); })));
  });
  return u32_bytes(found);
}

inline Bytes run_substring(Machine& m, Rng& in, const VariantKnobs&) {
  Bytes text(2048);
  for (auto& c : text) c = static_cast<std::uint8_t>('a' + (in() >> 62));
  Bytes pat(4);
  for (auto& c : pat) c = static_cast<std::uint8_t>('a' + (in() >> 62));
  const auto n = m.call([&] { return programs::count_occurrences(m, text, pat); });
  return u32_bytes(std::array{static_cast<std::uint32_t>(n)});
}

inline Bytes run_matmul(Machine& m, Rng& in, const VariantKnobs&) {
  programs::Mat16 a, b;
  for (auto& x : a) x = static_cast<std::int32_t>(in() >> 56) - 128;
  for (auto& x : b) x = static_cast<std::int32_t>(in() >> 56) - 128;
  const auto c = m.call([&] { return programs::matmul16(m, a, b); });
  Bytes out;
  for (auto x : c) {
    const auto u = static_cast<std::uint32_t>(x);
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
  }
  return out;
}

inline Bytes run_base64(Machine& m, Rng& in, const VariantKnobs&) {
  const Bytes data = random_bytes(in, 1024);
  const auto s = m.call([&] { return programs::base64_encode(m, data); });
  return Bytes(s.begin(), s.end());
}

}  // namespace detail

// The fixed program grid: 8 crypto programs and 5 plain ones.
inline std::span<const Program> program_registry() {
  using A = Algorithm;
  static const std::array<Program, 13> kPrograms = {{
      {"aes128_cbc", ProgramKind::CRYPTO, LabelTriple::of(A::AES), detail::run_aes},
      {"rc4", ProgramKind::CRYPTO, LabelTriple::of(A::RC4), detail::run_rc4},
      {"des3", ProgramKind::CRYPTO, LabelTriple::of(A::DES3), detail::run_des3},
      {"rsa256", ProgramKind::CRYPTO, LabelTriple::of(A::RSA), detail::run_rsa},
      {"sha1", ProgramKind::CRYPTO, LabelTriple::of(A::SHA1), detail::run_sha1},
      {"hmac_sha1", ProgramKind::CRYPTO, LabelTriple::of(A::SHA1), detail::run_hmac_sha1},
      {"md5", ProgramKind::CRYPTO, LabelTriple::of(A::MD5), detail::run_md5},
      {"hmac_md5", ProgramKind::CRYPTO, LabelTriple::of(A::MD5), detail::run_hmac_md5},
      {"bubble_sort", ProgramKind::PLAIN, LabelTriple{}, detail::run_bubble_sort},
      {"binary_search", ProgramKind::PLAIN, LabelTriple{}, detail::run_binary_search},
      {"substring_search", ProgramKind::PLAIN, LabelTriple{}, detail::run_substring},
      {"matmul16", ProgramKind::PLAIN, LabelTriple{}, detail::run_matmul},
      {"base64_encode", ProgramKind::PLAIN, LabelTriple{}, detail::run_base64},
  }};
  return kPrograms;
}

inline const Program& find_program(std::string_view id) {
  for (const auto& p : program_registry())
    if (p.id == id) return p;
  throw Error("unknown program '" + std::string(id) + "'");
}

inline std::string format_density(double d) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", d);
  return buf;
}

inline std::map<std::string, std::string> knob_meta(const VariantKnobs& k) {
  return {{"unroll", std::to_string(k.unroll)},
          {"junk_density", format_density(k.junk_density)},
          {"schedule_seed", std::to_string(k.schedule_seed)},
          {"input_seed", std::to_string(k.input_seed)},
          {"block_mode", std::string(block_mode_name(k.block_mode))}};
}

struct Execution {
  Trace trace;
  Bytes output;
};

inline Execution execute(const Program& program, const VariantKnobs& knobs,
                         std::string variant_id = "custom", std::size_t cap = kMaxTraceEvents) {
  knobs.validate();
  Recorder rec(knobs, cap);
  Machine machine(rec, knobs.unroll);
  Rng input(knobs.input_seed);
  Execution ex;
  ex.output = program.body(machine, input, knobs);
  ex.trace.program_id = std::string(program.id);
  ex.trace.variant_id = std::move(variant_id);
  ex.trace.label = program.label;
  ex.trace.events = rec.take();
  ex.trace.meta = knob_meta(knobs);
  if (ex.trace.events.empty()) throw EmptyTrace("program produced no events");
  return ex;
}

inline Trace run_program(const Program& program, const VariantKnobs& knobs, std::string variant_id = "custom") {
  return execute(program, knobs, std::move(variant_id)).trace;
}

inline std::string variant_name(std::size_t index) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "v%02zu", index);
  return buf;
}

// Knob grid for variant `index`: unroll cycles fastest, then junk density;
// 3DES block mode and the seeds are mixed in so every index is distinct.
inline VariantKnobs variant_knobs(std::uint64_t seed, std::string_view program_id, std::size_t index) {
  static constexpr int kUnroll[] = {1, 2, 4};
  static constexpr double kJunk[] = {0.0, 0.05, 0.10, 0.15};
  static constexpr BlockMode kModes[] = {BlockMode::CBC, BlockMode::CFB, BlockMode::OFB};
  VariantKnobs k;
  k.unroll = kUnroll[index % 3];
  k.junk_density = kJunk[(index / 3) % 4];
  k.block_mode = kModes[(index / 3 + index / 12) % 3];
  const std::string stream = std::string(program_id) + "/" + variant_name(index);
  k.schedule_seed = derive_seed(seed, stream + "/schedule");
  k.input_seed = derive_seed(seed, stream + "/input");
  return k;
}

inline constexpr std::size_t kDefaultVariantsPerProgram = 24;
inline constexpr std::string_view kManifestName = "corpus.manifest.json";

struct ManifestEntry {
  std::string file;
  std::string program_id;
  std::string variant_id;
  LabelTriple label;
  VariantKnobs knobs;
  bool ok = true;
  std::size_t event_count = 0;
};

struct CorpusManifest {
  std::vector<ManifestEntry> entries;

  std::size_t failures() const {
    return static_cast<std::size_t>(std::ranges::count_if(entries, [](const auto& e) { return !e.ok; }));
  }
};

inline nlohmann::json label_json(const LabelTriple& l) {
  return {{"has_crypto", l.has_crypto},
          {"crypto_type", std::string(crypto_type_name(l.crypto_type))},
          {"algorithm", std::string(algorithm_name(l.algorithm))}};
}

inline LabelTriple label_from_json(const nlohmann::json& j) {
  LabelTriple l;
  l.has_crypto = j.at("has_crypto").get<bool>();
  auto ct = parse_crypto_type(j.at("crypto_type").get<std::string>());
  auto al = parse_algorithm(j.at("algorithm").get<std::string>());
  if (!ct || !al) throw FormatError("bad label in JSON");
  l.crypto_type = *ct;
  l.algorithm = *al;
  if (!l.valid()) throw FormatError("inconsistent label in JSON");
  return l;
}

inline nlohmann::json to_json(const CorpusManifest& m) {
  auto arr = nlohmann::json::array();
  for (const auto& e : m.entries) {
    arr.push_back({{"file", e.file},
                   {"program_id", e.program_id},
                   {"variant_id", e.variant_id},
                   {"label", label_json(e.label)},
                   {"knobs",
                    {{"unroll", e.knobs.unroll},
                     {"junk_density", e.knobs.junk_density},
                     {"schedule_seed", e.knobs.schedule_seed},
                     {"input_seed", e.knobs.input_seed},
                     {"block_mode", std::string(block_mode_name(e.knobs.block_mode))}}},
                   {"status", e.ok ? "OK" : "FAILED"},
                   {"event_count", e.event_count}});
  }
  return arr;
}

inline CorpusManifest manifest_from_json(const nlohmann::json& arr) {
  CorpusManifest m;
  for (const auto& j : arr) {
    ManifestEntry e;
    e.file = j.at("file").get<std::string>();
    e.program_id = j.at("program_id").get<std::string>();
    e.variant_id = j.at("variant_id").get<std::string>();
    e.label = label_from_json(j.at("label"));
    const auto& k = j.at("knobs");
    e.knobs.unroll = k.at("unroll").get<int>();
    e.knobs.junk_density = k.at("junk_density").get<double>();
    e.knobs.schedule_seed = k.at("schedule_seed").get<std::uint64_t>();
    e.knobs.input_seed = k.at("input_seed").get<std::uint64_t>();
    const auto mode = k.at("block_mode").get<std::string>();
    e.knobs.block_mode = mode == "CFB" ? BlockMode::CFB : mode == "OFB" ? BlockMode::OFB : BlockMode::CBC;
    e.ok = j.at("status").get<std::string>() == "OK";
    e.event_count = j.at("event_count").get<std::size_t>();
    m.entries.push_back(std::move(e));
  }
  return m;
}

inline std::string manifest_text(const CorpusManifest& m) { return to_json(m).dump(1) + "\n"; }

// One generated sample: the manifest entry plus the trace, absent on failure.
struct Sample {
  ManifestEntry entry;
  std::optional<Trace> trace;
};

// Runs every (program, variant) pair in grid order and hands each sample to
// `sink`. Generation is a pure function of (seed, variants_per_program).
inline void for_each_sample(std::uint64_t seed, std::size_t variants_per_program,
                            const std::function<void(Sample&)>& sink, std::size_t cap = kMaxTraceEvents) {
  if (variants_per_program == 0) throw Error("variants_per_program must be >= 1");
  for (const auto& program : program_registry()) {
    for (std::size_t v = 0; v < variants_per_program; ++v) {
      Sample s;
      s.entry.program_id = std::string(program.id);
      s.entry.variant_id = variant_name(v);
      s.entry.file = s.entry.program_id + "__" + s.entry.variant_id + ".trace";
      s.entry.label = program.label;
      s.entry.knobs = variant_knobs(seed, program.id, v);
      try {
        auto ex = execute(program, s.entry.knobs, s.entry.variant_id, cap);
        ex.trace.meta["seed"] = std::to_string(seed);
        s.entry.event_count = ex.trace.events.size();
        s.trace = std::move(ex.trace);
      } catch (const TraceTooLong&) {
        s.entry.ok = false;
      }
      sink(s);
    }
  }
}

struct VectorCheck {
  std::string name;
  bool passed = false;
  std::string expected;
  std::string actual;
};

struct VectorReport {
  std::vector<VectorCheck> checks;
  bool all_passed() const {
    return std::ranges::all_of(checks, [](const auto& c) { return c.passed; });
  }
};

namespace detail {

inline std::string to_hex(std::span<const std::uint8_t> b) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s;
  for (auto c : b) {
    s += kDigits[c >> 4];
    s += kDigits[c & 15];
  }
  return s;
}

inline Bytes from_hex(std::string_view h) {
  Bytes out;
  for (std::size_t i = 0; i + 1 < h.size(); i += 2)
    out.push_back(static_cast<std::uint8_t>(std::stoi(std::string(h.substr(i, 2)), nullptr, 16)));
  return out;
}

inline std::span<const std::uint8_t> as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

}  // namespace detail

// Checks every instrumented routine against published vectors (RFC 1321,
// FIPS 180-1, FIPS-197 C.1, RFC 2202, the classic RC4 and DES examples).
inline VectorReport self_test_vectors() {
  using detail::as_bytes;
  using detail::from_hex;
  using detail::to_hex;
  VectorReport rep;
  Recorder rec(VariantKnobs{}, SIZE_MAX);
  Machine m(rec, 1);
  auto check = [&](std::string name, std::string expected, std::string actual) {
    const bool ok = expected == actual;
    rep.checks.push_back({std::move(name), ok, std::move(expected), std::move(actual)});
  };

  const std::pair<std::string_view, std::string_view> md5_suite[] = {
      {"", "d41d8cd98f00b204e9800998ecf8427e"},
      {"a", "0cc175b9c0f1b6a831c399e269772661"},
      {"abc", "900150983cd24fb0d6963f7d28e17f72"},
      {"message digest", "f96b697d7cb7938d525a2f31aaf161d0"},
      {"abcdefghijklmnopqrstuvwxyz", "c3fcd3d76192e4007dfb496cca67e13b"},
      {"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789", "d174ab98d277d9f5a5611c2c9f419d9f"},
      {"12345678901234567890123456789012345678901234567890123456789012345678901234567890",
       "57edf4a22be3c955ac49da2e2107b67a"},
  };
  for (const auto& [msg, digest] : md5_suite)
    check("MD5(\"" + std::string(msg) + "\")", std::string(digest), to_hex(programs::md5(m, as_bytes(msg))));

  const std::pair<std::string_view, std::string_view> sha1_suite[] = {
      {"abc", "a9993e364706816aba3e25717850c26c9cd0d89d"},
      {"", "da39a3ee5e6b4b0d3255bfef95601890afd80709"},
      {"abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq", "84983e441c3bd26ebaae4aa1f95129e5e54670f1"},
  };
  for (const auto& [msg, digest] : sha1_suite)
    check("SHA1(\"" + std::string(msg) + "\")", std::string(digest), to_hex(programs::sha1(m, as_bytes(msg))));

  {
    const Bytes key = from_hex("000102030405060708090a0b0c0d0e0f");
    const Bytes pt = from_hex("00112233445566778899aabbccddeeff");
    const auto ks = programs::aes128_expand(m, std::span<const std::uint8_t, 16>(key.data(), 16));
    programs::AesBlock blk;
    std::ranges::copy(pt, blk.begin());
    const auto ct = programs::aes128_encrypt_block(m, ks, blk);
    check("AES-128 FIPS-197 C.1 encrypt", "69c4e0d86a7b0430d8cdb78070b4c55a", to_hex(ct));
    check("AES-128 FIPS-197 C.1 decrypt", to_hex(pt), to_hex(programs::aes128_decrypt_block(m, ks, ct)));
  }

  const std::array<std::array<std::string_view, 3>, 3> rc4_suite = {{
      {"Key", "Plaintext", "bbf316e8d940af0ad3"},
      {"Wiki", "pedia", "1021bf0420"},
      {"Secret", "Attack at dawn", "45a01f645fc35b383552544b9bf5"},
  }};
  for (const auto& [key, pt, ct] : rc4_suite) {
    auto st = programs::rc4_init(m, as_bytes(key));
    check("RC4 key \"" + std::string(key) + "\"", std::string(ct), to_hex(programs::rc4_apply(m, st, as_bytes(pt))));
  }

  {
    const std::uint64_t k = 0x133457799BBCDFF1ull;
    const auto ks = programs::des3_key_schedule(m, k, k, k);
    check("3DES (K1=K2=K3) DES example", "85e813540f0ab405",
          hex64(programs::des3_encrypt_block(m, ks, 0x0123456789ABCDEFull)));
    const auto ks3 = programs::des3_key_schedule(m, 0x0123456789ABCDEFull, 0x23456789ABCDEF01ull, 0x456789ABCDEF0123ull);
    const std::uint64_t ct = programs::des3_encrypt_block(m, ks3, 0x5468652071756663ull);  // "The qufc"
    check("3DES three-key encrypt", "a826fd8ce53b855f", hex64(ct));
    check("3DES three-key decrypt", "5468652071756663", hex64(programs::des3_decrypt_block(m, ks3, ct)));
  }

  {
    const Bytes k_md5(16, 0x0b), k_sha(20, 0x0b);
    check("HMAC-MD5 RFC 2202 #1", "9294727a3638bb1c13f48ef8158bfc9d",
          to_hex(programs::hmac(m, programs::md5_fn(), k_md5, as_bytes("Hi There"))));
    check("HMAC-SHA1 RFC 2202 #1", "b617318655057264e28bc0b6fb378c8ef146be00",
          to_hex(programs::hmac(m, programs::sha1_fn(), k_sha, as_bytes("Hi There"))));
    check("HMAC-MD5 RFC 2202 #2", "750c783e6ab0b503eaa86e310a5db738",
          to_hex(programs::hmac(m, programs::md5_fn(), as_bytes("Jefe"), as_bytes("what do ya want for nothing?"))));
    check("HMAC-SHA1 RFC 2202 #2", "effcdf6ae5eb2fa2d27416d5f184df9c259a7c79",
          to_hex(programs::hmac(m, programs::sha1_fn(), as_bytes("Jefe"), as_bytes("what do ya want for nothing?"))));
  }

  {
    // "toy-rsa test vector 0123456789ab" as a big-endian integer; ciphertext
    // computed independently with arbitrary-precision pow(m, 65537, n).
    const programs::Limbs msg = {0x38396162u, 0x34353637u, 0x30313233u, 0x746f7220u,
                                 0x20766563u, 0x74657374u, 0x72736120u, 0x746f792du};
    const programs::Limbs want = {0x9ae9ac03u, 0xd805fab9u, 0xd8a94209u, 0x9b1206c5u,
                                  0x35eba3efu, 0x71d715a3u, 0x23b06d2cu, 0x61d11f76u};
    const auto ct = programs::rsa_encrypt(m, msg);
    check("RSA-256 toy key encrypt", detail::to_hex(detail::limbs_bytes(want)), detail::to_hex(detail::limbs_bytes(ct)));
    check("RSA-256 toy key decrypt", detail::to_hex(detail::limbs_bytes(msg)),
          detail::to_hex(detail::limbs_bytes(programs::rsa_decrypt(m, ct))));
  }
  return rep;
}

inline void require_vectors() {
  const auto rep = self_test_vectors();
  for (const auto& c : rep.checks)
    if (!c.passed)
      throw VectorMismatch(c.name + ": expected " + c.expected + ", got " + c.actual);
}

// Writes one `.trace` per (program, variant) plus `corpus.manifest.json`.
// Refuses to run if any reference routine fails its test vectors.
inline CorpusManifest generate_corpus(const std::filesystem::path& out_dir, std::uint64_t seed,
                                      std::size_t variants_per_program = kDefaultVariantsPerProgram,
                                      std::size_t cap = kMaxTraceEvents) {
  require_vectors();
  std::filesystem::create_directories(out_dir);
  CorpusManifest manifest;
  for_each_sample(
      seed, variants_per_program,
      [&](Sample& s) {
        if (s.trace) write_file_atomic(out_dir / s.entry.file, write_trace(*s.trace));
        manifest.entries.push_back(s.entry);
      },
      cap);
  write_file_atomic(out_dir / kManifestName, manifest_text(manifest));
  return manifest;
}

inline CorpusManifest load_manifest(const std::filesystem::path& corpus_dir) {
  return manifest_from_json(nlohmann::json::parse(read_file(corpus_dir / kManifestName)));
}

}  // namespace cryptoscope
