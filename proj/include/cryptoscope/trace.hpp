#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "cryptoscope/error.hpp"

namespace cryptoscope {

// Closed instruction-category set. The enumerator order is the layout of
// every category feature vector.
enum class Category : std::uint8_t {
  BINARY,
  LOGICAL,
  SHIFT,
  DATAXFER,
  STACK,
  COND_BR,
  UNCOND_BR,
  CALL_RET,
  STRINGOP,
  NOP,
  MISC,
};

inline constexpr std::size_t kCategoryCount = 11;

inline constexpr std::array<std::string_view, kCategoryCount> kCategoryNames = {
    "BINARY",  "LOGICAL",   "SHIFT",    "DATAXFER", "STACK", "COND_BR",
    "UNCOND_BR", "CALL_RET", "STRINGOP", "NOP",      "MISC"};

inline constexpr std::string_view category_name(Category c) {
  return kCategoryNames[static_cast<std::size_t>(c)];
}

inline std::optional<Category> parse_category(std::string_view s) {
  for (std::size_t i = 0; i < kCategoryCount; ++i)
    if (kCategoryNames[i] == s) return static_cast<Category>(i);
  return std::nullopt;
}

// BITWISE = LOGICAL ∪ SHIFT
inline constexpr bool is_bitwise(Category c) {
  return c == Category::LOGICAL || c == Category::SHIFT;
}

namespace detail {

struct TaxonomyEntry {
  std::string_view name;
  Category category;
};

// Sorted by name so lookup can binary-search.
inline constexpr TaxonomyEntry kTaxonomy[] = {
    {"adc", Category::BINARY},       {"add", Category::BINARY},
    {"and", Category::LOGICAL},      {"bswap", Category::DATAXFER},
    {"call", Category::CALL_RET},    {"cdq", Category::MISC},
    {"cmp", Category::BINARY},       {"cmpsb", Category::STRINGOP},
    {"cpuid", Category::MISC},       {"dec", Category::BINARY},
    {"div", Category::BINARY},       {"imul", Category::BINARY},
    {"inc", Category::BINARY},       {"jae", Category::COND_BR},
    {"jb", Category::COND_BR},       {"jge", Category::COND_BR},
    {"jl", Category::COND_BR},       {"jmp", Category::UNCOND_BR},
    {"jnz", Category::COND_BR},      {"jz", Category::COND_BR},
    {"lea", Category::DATAXFER},     {"lodsb", Category::STRINGOP},
    {"mov", Category::DATAXFER},     {"mov_load", Category::DATAXFER},
    {"mov_store", Category::DATAXFER}, {"movsb_rep", Category::STRINGOP},
    {"movzx", Category::DATAXFER},   {"mul", Category::BINARY},
    {"neg", Category::BINARY},       {"nop", Category::NOP},
    {"not", Category::LOGICAL},      {"or", Category::LOGICAL},
    {"pop", Category::STACK},        {"push", Category::STACK},
    {"ret", Category::CALL_RET},     {"rol", Category::SHIFT},
    {"ror", Category::SHIFT},        {"sar", Category::SHIFT},
    {"sbb", Category::BINARY},       {"scasb_rep", Category::STRINGOP},
    {"setc", Category::MISC},        {"shl", Category::SHIFT},
    {"shr", Category::SHIFT},        {"stosb_rep", Category::STRINGOP},
    {"sub", Category::BINARY},       {"syscall", Category::MISC},
    {"test", Category::LOGICAL},     {"xchg", Category::DATAXFER},
    {"xor", Category::LOGICAL},
};

inline constexpr std::size_t kTaxonomySize = sizeof(kTaxonomy) / sizeof(kTaxonomy[0]);

consteval bool taxonomy_sorted() {
  for (std::size_t i = 1; i < kTaxonomySize; ++i)
    if (!(kTaxonomy[i - 1].name < kTaxonomy[i].name)) return false;
  return true;
}
static_assert(taxonomy_sorted());

inline constexpr bool valid_mnemonic_text(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_')) return false;
  return true;
}

consteval bool taxonomy_names_valid() {
  for (const auto& e : kTaxonomy)
    if (!valid_mnemonic_text(e.name)) return false;
  return true;
}
static_assert(taxonomy_names_valid());

inline constexpr std::optional<std::uint16_t> find_mnemonic(std::string_view s) {
  std::size_t lo = 0, hi = kTaxonomySize;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (kTaxonomy[mid].name < s)
      lo = mid + 1;
    else
      hi = mid;
  }
  if (lo < kTaxonomySize && kTaxonomy[lo].name == s) return static_cast<std::uint16_t>(lo);
  return std::nullopt;
}

}  // namespace detail

// A mnemonic from the taxonomy table, stored as its table index.
class Mnemonic {
 public:
  // Throws UnknownMnemonic for names outside the table. constexpr so that
  // literal mnemonics in instrumented code are checked at compile time.
  constexpr explicit Mnemonic(std::string_view name) : id_(lookup(name)) {}

  static constexpr Mnemonic from_index(std::uint16_t id) { return Mnemonic(id, 0); }

  constexpr std::string_view name() const { return detail::kTaxonomy[id_].name; }
  constexpr Category category() const { return detail::kTaxonomy[id_].category; }
  constexpr std::uint16_t index() const { return id_; }

  friend constexpr bool operator==(Mnemonic, Mnemonic) = default;
  friend constexpr auto operator<=>(Mnemonic a, Mnemonic b) { return a.name() <=> b.name(); }

  static constexpr std::size_t table_size() { return detail::kTaxonomySize; }

 private:
  constexpr Mnemonic(std::uint16_t id, int) : id_(id) {}
  static constexpr std::uint16_t lookup(std::string_view name) {
    if (auto id = detail::find_mnemonic(name)) return *id;
    throw UnknownMnemonic(std::string(name));
  }
  std::uint16_t id_;
};

inline Category categorize(std::string_view mnemonic) { return Mnemonic(mnemonic).category(); }

// Every mnemonic in the table, in lexicographic order.
inline std::vector<Mnemonic> all_mnemonics() {
  std::vector<Mnemonic> out;
  for (std::size_t i = 0; i < detail::kTaxonomySize; ++i)
    out.push_back(Mnemonic::from_index(static_cast<std::uint16_t>(i)));
  return out;
}

enum class CryptoType : std::uint8_t { ENCRYPTION, HASHING, NONE };
enum class Algorithm : std::uint8_t { AES, RC4, RSA, SHA1, MD5, DES3, NONE };

inline constexpr std::array<std::string_view, 3> kCryptoTypeNames = {"ENCRYPTION", "HASHING", "NONE"};
inline constexpr std::array<std::string_view, 7> kAlgorithmNames = {"AES", "RC4", "RSA", "SHA1",
                                                                   "MD5", "DES3", "NONE"};

inline constexpr std::string_view crypto_type_name(CryptoType t) {
  return kCryptoTypeNames[static_cast<std::size_t>(t)];
}
inline constexpr std::string_view algorithm_name(Algorithm a) {
  return kAlgorithmNames[static_cast<std::size_t>(a)];
}

inline std::optional<CryptoType> parse_crypto_type(std::string_view s) {
  for (std::size_t i = 0; i < kCryptoTypeNames.size(); ++i)
    if (kCryptoTypeNames[i] == s) return static_cast<CryptoType>(i);
  return std::nullopt;
}
inline std::optional<Algorithm> parse_algorithm(std::string_view s) {
  for (std::size_t i = 0; i < kAlgorithmNames.size(); ++i)
    if (kAlgorithmNames[i] == s) return static_cast<Algorithm>(i);
  return std::nullopt;
}

inline constexpr CryptoType crypto_type_of(Algorithm a) {
  switch (a) {
    case Algorithm::SHA1:
    case Algorithm::MD5:
      return CryptoType::HASHING;
    case Algorithm::NONE:
      return CryptoType::NONE;
    default:
      return CryptoType::ENCRYPTION;
  }
}

struct LabelTriple {
  bool has_crypto = false;
  CryptoType crypto_type = CryptoType::NONE;
  Algorithm algorithm = Algorithm::NONE;

  static constexpr LabelTriple of(Algorithm a) {
    return {a != Algorithm::NONE, crypto_type_of(a), a};
  }

  constexpr bool valid() const {
    return has_crypto == (algorithm != Algorithm::NONE) && crypto_type == crypto_type_of(algorithm);
  }

  friend constexpr bool operator==(const LabelTriple&, const LabelTriple&) = default;
};

// "<has_crypto>,<crypto_type>,<algorithm>", e.g. "true,ENCRYPTION,AES".
inline std::string format_label(const LabelTriple& l) {
  std::string s = l.has_crypto ? "true," : "false,";
  s += crypto_type_name(l.crypto_type);
  s += ',';
  s += algorithm_name(l.algorithm);
  return s;
}

inline std::optional<LabelTriple> parse_label(std::string_view s) {
  const auto c1 = s.find(',');
  if (c1 == std::string_view::npos) return std::nullopt;
  const auto c2 = s.find(',', c1 + 1);
  if (c2 == std::string_view::npos) return std::nullopt;
  const auto hc = s.substr(0, c1);
  LabelTriple l;
  if (hc == "true")
    l.has_crypto = true;
  else if (hc != "false")
    return std::nullopt;
  auto ct = parse_crypto_type(s.substr(c1 + 1, c2 - c1 - 1));
  auto al = parse_algorithm(s.substr(c2 + 1));
  if (!ct || !al) return std::nullopt;
  l.crypto_type = *ct;
  l.algorithm = *al;
  if (!l.valid()) return std::nullopt;
  return l;
}

struct TraceEvent {
  std::uint32_t seq = 0;
  std::uint32_t site = 0;
  Mnemonic mnemonic{"nop"};
  Category category = Category::NOP;

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

struct Trace {
  std::string program_id;
  std::string variant_id;
  LabelTriple label;
  std::vector<TraceEvent> events;
  std::map<std::string, std::string> meta;

  friend bool operator==(const Trace&, const Trace&) = default;
};

namespace detail {

inline bool valid_token(std::string_view s, std::string_view forbidden) {
  if (s.empty()) return false;
  for (char c : s)
    if (c == ' ' || c == '\n' || c == '\r' || c == '\t' || forbidden.find(c) != std::string_view::npos)
      return false;
  return true;
}

template <class T>
std::optional<T> parse_uint(std::string_view s) {
  T v{};
  if (s.empty()) return std::nullopt;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  return v;
}

inline bool consume_prefix(std::string_view& s, std::string_view prefix) {
  if (s.substr(0, prefix.size()) != prefix) return false;
  s.remove_prefix(prefix.size());
  return true;
}

}  // namespace detail

// Serializes a trace in the line-oriented `.trace` format. Output depends only
// on the trace value (meta is an ordered map), so it is byte-stable.
inline void write_trace(std::ostream& out, const Trace& t) {
  if (!detail::valid_token(t.program_id, "=") || !detail::valid_token(t.variant_id, "="))
    throw FormatError("program/variant ids must be nonempty and free of spaces and '='");
  out << "#trace v1 program=" << t.program_id << " variant=" << t.variant_id
      << " label=" << format_label(t.label) << " meta=";
  bool first = true;
  for (const auto& [k, v] : t.meta) {
    if (!detail::valid_token(k, "=;") || !detail::valid_token(v, "=;"))
      throw FormatError("meta entry '" + k + "' cannot be encoded");
    if (!first) out << ';';
    out << k << '=' << v;
    first = false;
  }
  out << '\n';
  std::string line;
  char buf[24];
  for (const auto& e : t.events) {
    line.clear();
    auto r = std::to_chars(buf, buf + sizeof buf, e.seq);
    line.append(buf, r.ptr);
    line += ' ';
    r = std::to_chars(buf, buf + sizeof buf, e.site);
    line.append(buf, r.ptr);
    line += ' ';
    line += e.mnemonic.name();
    line += ' ';
    line += category_name(e.category);
    line += '\n';
    out.write(line.data(), static_cast<std::streamsize>(line.size()));
  }
}

inline std::string write_trace(const Trace& t) {
  std::string s;
  struct StringBuf : std::streambuf {
    std::string& s;
    explicit StringBuf(std::string& str) : s(str) {}
    std::streamsize xsputn(const char* p, std::streamsize n) override {
      s.append(p, static_cast<std::size_t>(n));
      return n;
    }
    int_type overflow(int_type c) override {
      if (c != traits_type::eof()) s.push_back(static_cast<char>(c));
      return c;
    }
  } buf(s);
  std::ostream os(&buf);
  write_trace(os, t);
  return s;
}

namespace detail {

inline Trace parse_header(std::string_view h) {
  Trace t;
  if (!consume_prefix(h, "#trace v1 program=")) throw ParseError(1, "bad header prefix");
  auto take_field = [&](std::string_view next_key) -> std::string_view {
    if (next_key.empty()) {
      auto v = h;
      h = {};
      return v;
    }
    const auto pos = h.find(next_key);
    if (pos == std::string_view::npos) throw ParseError(1, "missing header field" + std::string(next_key));
    auto v = h.substr(0, pos);
    h.remove_prefix(pos + next_key.size());
    return v;
  };
  t.program_id = std::string(take_field(" variant="));
  t.variant_id = std::string(take_field(" label="));
  const auto label = take_field(" meta=");
  const auto meta = take_field({});
  if (!valid_token(t.program_id, "=") || !valid_token(t.variant_id, "="))
    throw ParseError(1, "bad program/variant id");
  auto l = parse_label(label);
  if (!l) throw ParseError(1, "bad label '" + std::string(label) + "'");
  t.label = *l;
  std::string_view rest = meta;
  while (!rest.empty()) {
    const auto semi = rest.find(';');
    const auto item = rest.substr(0, semi);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) throw ParseError(1, "bad meta entry");
    auto k = item.substr(0, eq), v = item.substr(eq + 1);
    if (!valid_token(k, "=;") || !valid_token(v, "=;")) throw ParseError(1, "bad meta entry");
    t.meta.emplace(std::string(k), std::string(v));
    if (semi == std::string_view::npos) break;
    rest.remove_prefix(semi + 1);
    if (rest.empty()) throw ParseError(1, "trailing ';' in meta");
  }
  return t;
}

}  // namespace detail

// Parses a `.trace` stream. Malformed lines raise ParseError (with the 1-based
// line number); well-formed lines that break an event invariant raise
// FormatError; a header with no events raises EmptyTrace.
inline Trace read_trace(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "missing header");
  Trace t = detail::parse_header(line);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view s = line;
    std::string_view fields[4];
    std::size_t nf = 0;
    while (nf < 4) {
      const auto sp = s.find(' ');
      fields[nf++] = s.substr(0, sp);
      if (sp == std::string_view::npos) {
        s = {};
        break;
      }
      s.remove_prefix(sp + 1);
      if (nf == 4) throw ParseError(line_no, "too many fields");
    }
    if (nf != 4) throw ParseError(line_no, "expected 4 fields");
    auto seq = detail::parse_uint<std::uint32_t>(fields[0]);
    auto site = detail::parse_uint<std::uint32_t>(fields[1]);
    if (!seq || !site) throw ParseError(line_no, "bad integer");
    if (!detail::valid_mnemonic_text(fields[2])) throw ParseError(line_no, "bad mnemonic token");
    auto cat = parse_category(fields[3]);
    if (!cat) throw ParseError(line_no, "bad category '" + std::string(fields[3]) + "'");
    const Mnemonic m(fields[2]);
    if (*seq != t.events.size())
      throw FormatError("line " + std::to_string(line_no) + ": seq " + std::to_string(*seq) +
                        " where " + std::to_string(t.events.size()) + " expected");
    if (m.category() != *cat)
      throw FormatError("line " + std::to_string(line_no) + ": '" + std::string(m.name()) +
                        "' is " + std::string(category_name(m.category())) + ", not " +
                        std::string(fields[3]));
    t.events.push_back({*seq, *site, m, *cat});
  }
  if (t.events.empty()) throw EmptyTrace("trace " + t.program_id + "/" + t.variant_id + " has no events");
  return t;
}

}  // namespace cryptoscope
