#include <gtest/gtest.h>

#include <sstream>

#include "cryptoscope/trace.hpp"
#include "support.hpp"

using namespace cryptoscope;
using testing_support::random_trace;

TEST(Taxonomy, CategorizeExamples) {
  EXPECT_EQ(categorize("xor"), Category::LOGICAL);
  EXPECT_EQ(categorize("jz"), Category::COND_BR);
  EXPECT_THROW(categorize("frobnicate"), UnknownMnemonic);
}

TEST(Taxonomy, CategoryOrderIsFixed) {
  const std::vector<std::string_view> want = {"BINARY", "LOGICAL",   "SHIFT",    "DATAXFER", "STACK", "COND_BR",
                                              "UNCOND_BR", "CALL_RET", "STRINGOP", "NOP",      "MISC"};
  ASSERT_EQ(kCategoryNames.size(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_EQ(kCategoryNames[i], want[i]);
}

TEST(Taxonomy, BitwiseIsLogicalOrShift) {
  for (std::size_t i = 0; i < kCategoryCount; ++i) {
    const auto c = static_cast<Category>(i);
    EXPECT_EQ(is_bitwise(c), c == Category::LOGICAL || c == Category::SHIFT);
  }
}

TEST(Taxonomy, NamesAreSortedUniqueTokens) {
  const auto all = all_mnemonics();
  for (std::size_t i = 0; i < all.size(); ++i) {
    EXPECT_TRUE(detail::valid_mnemonic_text(all[i].name()));
    if (i) {
      EXPECT_LT(all[i - 1].name(), all[i].name());
    }
    EXPECT_EQ(Mnemonic(all[i].name()), all[i]);
  }
}

TEST(TraceIo, FourEventRoundTrip) {
  const auto t = testing_support::trace_of({"mov", "xor", "add", "jz"});
  std::istringstream in(write_trace(t));
  const auto back = read_trace(in);
  ASSERT_EQ(back.events.size(), 4u);
  for (std::uint32_t i = 0; i < 4; ++i) EXPECT_EQ(back.events[i].seq, i);
  EXPECT_EQ(back, t);
}

TEST(TraceIo, SerializationIsByteStable) {
  Rng rng(7);
  const auto t = random_trace(rng, 50);
  EXPECT_EQ(write_trace(t), write_trace(t));
}

TEST(TraceIo, MetaIsRecovered) {
  auto t = testing_support::trace_of({"nop"});
  t.meta = {{"seed", "42"}};
  const auto text = write_trace(t);
  EXPECT_NE(text.find("seed=42"), std::string::npos);
  std::istringstream in(text);
  EXPECT_EQ(read_trace(in).meta.at("seed"), "42");
}

TEST(TraceIo, ExactLineFormat) {
  auto t = testing_support::trace_of({"xor", "jz"}, {5, 9});
  t.label = LabelTriple::of(Algorithm::AES);
  t.meta = {{"a", "1"}, {"b", "x"}};
  EXPECT_EQ(write_trace(t),
            "#trace v1 program=t variant=v label=true,ENCRYPTION,AES meta=a=1;b=x\n"
            "0 5 xor LOGICAL\n"
            "1 9 jz COND_BR\n");
}

TEST(TraceIo, RoundTripProperty) {
  Rng rng(2024);
  for (int i = 0; i < 200; ++i) {
    const auto t = random_trace(rng, 1 + uniform_below(rng, 300));
    std::istringstream in(write_trace(t));
    ASSERT_EQ(read_trace(in), t) << "case " << i;
  }
}

namespace {
Trace parse(const std::string& s) {
  std::istringstream in(s);
  return read_trace(in);
}
const std::string kHeader = "#trace v1 program=p variant=v label=false,NONE,NONE meta=\n";
}  // namespace

TEST(TraceIo, MalformedLineReportsLineNumber) {
  try {
    parse(kHeader + "0 1 mov DATAXFER\n1 2 mov\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line, 3u);
  }
}

TEST(TraceIo, RejectsSeqGap) { EXPECT_THROW(parse(kHeader + "0 1 mov DATAXFER\n2 2 mov DATAXFER\n"), FormatError); }

TEST(TraceIo, RejectsCategoryMismatch) { EXPECT_THROW(parse(kHeader + "0 1 mov LOGICAL\n"), FormatError); }

TEST(TraceIo, RejectsEmptyEventList) { EXPECT_THROW(parse(kHeader), EmptyTrace); }

TEST(TraceIo, RejectsUnknownMnemonic) { EXPECT_THROW(parse(kHeader + "0 1 frob MISC\n"), Error); }

TEST(TraceIo, RejectsTrailingWhitespace) { EXPECT_THROW(parse(kHeader + "0 1 mov DATAXFER \n"), ParseError); }

TEST(TraceIo, RejectsInconsistentLabel) {
  EXPECT_THROW(parse("#trace v1 program=p variant=v label=true,HASHING,AES meta=\n0 1 mov DATAXFER\n"), ParseError);
}

TEST(Labels, FormatParse) {
  for (int a = 0; a < 7; ++a) {
    const auto l = LabelTriple::of(static_cast<Algorithm>(a));
    EXPECT_TRUE(l.valid());
    EXPECT_EQ(parse_label(format_label(l)), l);
  }
  EXPECT_FALSE(parse_label("true,NONE,AES"));
  EXPECT_FALSE(parse_label("false,HASHING,NONE"));
  EXPECT_FALSE(parse_label("true,ENCRYPTION,MD5"));
}
