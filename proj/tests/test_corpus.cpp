#include <fstream>

#include <gtest/gtest.h>

#include "test_util.hpp"

namespace hubsearch {
namespace {

using testing::temp_dir;
using testing::toy_vocab;

Vocabulary words() {
  return Vocabulary({"<pad>", "<unk>", "<s>", "</s>", "a", "b", "ab", "abc", " ", "日本", "日", "é"});
}

void write(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

TEST(Vocabulary, RejectsDuplicatesAndEmptyEntries) {
  EXPECT_THROW(Vocabulary({"<pad>", "<unk>", "<s>", "</s>", "a", "a"}), CorpusError);
  EXPECT_THROW(Vocabulary({"<pad>", "<unk>", "<s>", "</s>", ""}), CorpusError);
  EXPECT_THROW(Vocabulary({"<pad>", "<unk>", "<s>", "</s>"}), CorpusError);
}

TEST(Vocabulary, FromFileUsesLineNumbersAsIds) {
  auto dir = temp_dir("vocab");
  write(dir / "v.txt", "<pad>\n<unk>\n<s>\n</s>\nx\ny\n");
  auto v = Vocabulary::from_file((dir / "v.txt").string());
  EXPECT_EQ(v.size(), 6u);
  EXPECT_EQ(v.surface(5), "y");
  EXPECT_EQ(v.find("x"), TokenId{4});
  EXPECT_FALSE(v.find("<pad>").has_value());
}

TEST(Tokenize, EmptyTextIsSingleEos) {
  auto s = tokenize("", words());
  EXPECT_EQ(s.ids, std::vector<TokenId>{kEosId});
  EXPECT_EQ(s.surface, "");
}

TEST(Tokenize, GreedyLongestMatch) {
  auto v = words();
  auto s = tokenize("abcab b", v);
  EXPECT_EQ(s.ids, (std::vector<TokenId>{7, 6, 8, 5}));
  EXPECT_EQ(detokenize(s.ids, v), "abcab b");
}

TEST(Tokenize, MultibyteTokensMatchOnScalarBoundaries) {
  auto v = words();
  auto s = tokenize("日本日é", v);
  EXPECT_EQ(s.ids, (std::vector<TokenId>{9, 10, 11}));
  EXPECT_EQ(s.surface, "日本日é");
}

TEST(Tokenize, OutOfVocabularyCharacterBecomesOneUnk) {
  auto v = words();
  const std::string text = "ab€ba";
  auto s = tokenize(text, v);
  // Oracle: character-level scan. Each character that no token covers is one unk.
  const auto bounds = utf8_boundaries(text);
  std::size_t uncovered = 0;
  for (std::size_t k = 0; k + 1 < bounds.size(); ++k) {
    if (!v.find(text.substr(bounds[k], bounds[k + 1] - bounds[k]))) ++uncovered;
  }
  EXPECT_EQ(uncovered, 1u);
  EXPECT_EQ(std::count(s.ids.begin(), s.ids.end(), kUnkId), 1);
  EXPECT_EQ(s.ids, (std::vector<TokenId>{6, kUnkId, 5, 4}));
  EXPECT_EQ(s.surface, "abba");
}

TEST(Tokenize, SpecialSurfacesAreNotMatched) {
  auto v = words();
  auto s = tokenize("<s>", v);
  EXPECT_EQ(s.ids, (std::vector<TokenId>{kUnkId, kUnkId, kUnkId}));
}

TEST(Tokenize, RoundTripProperty) {
  auto v = toy_vocab(20);
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::string text;
    const auto len = rng.below(12);
    for (std::size_t k = 0; k < len; ++k) text += v.surface(static_cast<TokenId>(kNumSpecial + rng.below(20)));
    EXPECT_EQ(detokenize(tokenize(text, v).ids, v), text);
    EXPECT_EQ(tokenize(text, v), tokenize(text, v));
  }
}

TEST(Detokenize, EmptyAndSpecialTokens) {
  auto v = words();
  EXPECT_EQ(detokenize(std::vector<TokenId>{}, v), "");
  EXPECT_EQ(detokenize(std::vector<TokenId>{kPadId, 4, kPadId, 5, kEosId}, v), "ab");
  EXPECT_THROW(detokenize(std::vector<TokenId>{99}, v), CorpusError);
}

TEST(LoadParallel, PreservesOrderAndCount) {
  auto dir = temp_dir("load");
  write(dir / "d.jsonl", "{\"src\": \"ab\", \"ref\": \"b\", \"id\": \"x1\"}\n{\"src\": \"a\", \"ref\": \"abc\"}\n");
  auto d = load_parallel((dir / "d.jsonl").string(), words());
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.name, "d");
  EXPECT_EQ(d.cases[0].id, "x1");
  EXPECT_EQ(d.cases[1].reference.ids, std::vector<TokenId>{7});
  EXPECT_EQ(d.cases[1].reference_text, "abc");
}

TEST(LoadParallel, MissingFieldNamesLine) {
  auto dir = temp_dir("load_missing");
  write(dir / "d.jsonl", "{\"src\":\"a\",\"ref\":\"b\"}\n{\"src\":\"a\",\"ref\":\"b\"}\n{\"src\":\"a\"}\n");
  try {
    load_parallel((dir / "d.jsonl").string(), words());
    FAIL() << "expected CorpusError";
  } catch (const CorpusError& e) {
    EXPECT_STREQ(e.what(), "line 3: missing field ref");
  }
}

TEST(LoadParallel, MalformedAndEmptyFiles) {
  auto dir = temp_dir("load_bad");
  write(dir / "bad.jsonl", "{\"src\":\"a\",\"ref\":\"b\"}\n{not json\n");
  write(dir / "empty.jsonl", "");
  try {
    load_parallel((dir / "bad.jsonl").string(), words());
    FAIL();
  } catch (const CorpusError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2: malformed JSON"), std::string::npos);
  }
  EXPECT_THROW(load_parallel((dir / "empty.jsonl").string(), words()), CorpusError);
  EXPECT_THROW(load_parallel((dir / "nope.jsonl").string(), words()), CorpusError);
}

TEST(LoadParallel, WmtScaleLineCount) {
  // Size of the WMT'23 En-Ja tuning set.
  auto dir = temp_dir("load_wmt");
  {
    std::ofstream out(dir / "wmt.jsonl");
    for (int k = 0; k < 2074; ++k) out << "{\"src\":\"a b\",\"ref\":\"ab\"}\n";
  }
  EXPECT_EQ(load_parallel((dir / "wmt.jsonl").string(), words()).size(), 2074u);
}

TEST(LoadBaselines, ReadsHypField) {
  auto dir = temp_dir("baselines");
  write(dir / "b.jsonl", "{\"hyp\":\"x\"}\n{\"id\":\"2\",\"hyp\":\"y\"}\n");
  auto b = load_baselines((dir / "b.jsonl").string());
  ASSERT_EQ(b.size(), 2u);
  EXPECT_EQ(b[1].id, "2");
  EXPECT_EQ(b[1].hyp, "y");
}

}  // namespace
}  // namespace hubsearch
