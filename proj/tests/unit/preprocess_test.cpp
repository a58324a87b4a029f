#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>

#include "sarcasm/common/random.hpp"
#include "sarcasm/preprocess.hpp"

using namespace sarcasm;

namespace {

Tokens random_tokens(Rng& rng, std::size_t n, const std::vector<std::string>& pool) {
  Tokens out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(pool[rng.index(pool.size())]);
  return out;
}

}  // namespace

TEST(Tokenize, HandTokenizedFixtures) {
  EXPECT_EQ(tokenize("Great, rain AGAIN #sarcasm"), (Tokens{"great", ",", "rain", "again", "#sarcasm"}));
  EXPECT_EQ(tokenize(""), Tokens{});
  EXPECT_EQ(tokenize("see http://x.co @bob"), (Tokens{"see", "<url>", "<user>"}));
  EXPECT_EQ(tokenize("don't stop!!"), (Tokens{"don't", "stop", "!", "!"}));
  EXPECT_EQ(tokenize("  spaced\tout\n"), (Tokens{"spaced", "out"}));
  EXPECT_EQ(tokenize("# alone"), (Tokens{"#", "alone"}));
}

TEST(StripSarcasmTags, RemovesMarkerTagsOnly) {
  EXPECT_EQ(strip_sarcasm_tags({"nice", "#sarcasm"}), Tokens{"nice"});
  EXPECT_EQ(strip_sarcasm_tags({"#irony", "#sarcasm"}), Tokens{});
  EXPECT_EQ(strip_sarcasm_tags({"#sarcasmfail", "sarcasm", "#Satire"}), (Tokens{"#sarcasmfail", "sarcasm"}));
  EXPECT_EQ(strip_sarcasm_tags({"#fun", "#lol"}, {"#FUN"}), Tokens{"#lol"});
}

TEST(StripSarcasmTags, MatchesMembershipFilter) {
  Rng rng(5);
  const std::vector<std::string> pool = {"#sarcasm", "#irony", "#satire", "#sarcastic", "#fun", "ok", "#", "yes"};
  const std::set<std::string> members = {"#sarcasm", "#irony", "#satire", "#sarcastic"};
  for (int trial = 0; trial < 100; ++trial) {
    const auto tokens = random_tokens(rng, rng.index(12), pool);
    Tokens expected;
    for (const auto& t : tokens) {
      if (!members.contains(t)) expected.push_back(t);
    }
    EXPECT_EQ(strip_sarcasm_tags(tokens), expected);
  }
}

TEST(FilterShort, Boundary) {
  EXPECT_TRUE(filter_short({{"hi", "there"}}).empty());
  EXPECT_EQ(filter_short({{"a", "b", "c"}}).size(), 1u);
  EXPECT_TRUE(filter_short({{"a", "b", "!", "?"}}).empty());
  EXPECT_THROW(filter_short({}, 0), DomainError);
}

TEST(FilterShort, MatchesLengthFilter) {
  Rng rng(9);
  std::vector<Tokens> tweets;
  for (int i = 0; i < 100; ++i) tweets.push_back(random_tokens(rng, rng.index(7), {"w", "x", "y"}));
  std::vector<Tokens> expected;
  for (const auto& t : tweets) {
    if (t.size() >= 3) expected.push_back(t);
  }
  EXPECT_EQ(filter_short(tweets), expected);
}

TEST(Vocabulary, HapaxTokensEncodeToUnk) {
  const auto vocab = Vocabulary::build({{"a", "b"}, {"a"}});
  EXPECT_EQ(vocab.size(), 3u);
  EXPECT_TRUE(vocab.contains("a"));
  EXPECT_FALSE(vocab.contains("b"));
  EXPECT_EQ(vocab.index("b"), Vocabulary::unk);
  EXPECT_EQ(encode({"a"}, vocab), EncodedTokens{2});
  EXPECT_EQ(encode({"zzz"}, vocab), EncodedTokens{1});
}

TEST(Vocabulary, EmptyCorpusHasOnlySpecials) {
  const auto vocab = Vocabulary::build({});
  EXPECT_EQ(vocab.size(), 2u);
  EXPECT_EQ(vocab.token(Vocabulary::pad), "<pad>");
  EXPECT_EQ(vocab.token(Vocabulary::unk), "<unk>");
}

TEST(Vocabulary, MembersMatchFrequencyCount) {
  Rng rng(17);
  std::vector<std::string> pool;
  for (int i = 0; i < 600; ++i) pool.push_back("t" + std::to_string(i));
  std::vector<Tokens> corpus;
  std::map<std::string, int> counts;
  for (int s = 0; s < 100; ++s) {
    corpus.push_back(random_tokens(rng, 10, pool));
    for (const auto& t : corpus.back()) ++counts[t];
  }
  const auto vocab = Vocabulary::build(corpus);
  std::set<std::string> expected;
  for (const auto& [t, c] : counts) {
    if (c >= 2) expected.insert(t);
  }
  std::set<std::string> got;
  for (const auto& e : vocab.entries()) {
    if (e.index > Vocabulary::unk) {
      got.insert(e.token);
      EXPECT_EQ(e.frequency, static_cast<std::size_t>(counts[e.token]));
    }
  }
  EXPECT_EQ(got, expected);
  for (int i = 2; i < static_cast<int>(vocab.size()); ++i) EXPECT_EQ(vocab.index(vocab.token(i)), i);

  for (int trial = 0; trial < 20; ++trial) {
    const auto tokens = random_tokens(rng, 8, pool);
    EncodedTokens oracle;
    for (const auto& t : tokens) oracle.push_back(expected.contains(t) ? vocab.index(t) : Vocabulary::unk);
    EXPECT_EQ(encode(tokens, vocab), oracle);
  }
}

TEST(WordVectors, FileRowsCopiedAndPadZero) {
  const auto vocab = Vocabulary::build({{"good", "bad", "good", "bad"}});
  const auto path = std::filesystem::temp_directory_path() / "sarcasm_vectors_test.txt";
  {
    std::ofstream out(path);
    out << "good";
    for (int k = 0; k < 100; ++k) out << ' ' << 0.001 * k;
    out << "\nunused";
    for (int k = 0; k < 100; ++k) out << " 1";
    out << '\n';
  }
  const auto m = load_word_vectors(path.string(), vocab, 100, 4);
  for (int k = 0; k < 100; ++k) EXPECT_DOUBLE_EQ(m(vocab.index("good"), k), 0.001 * k);
  EXPECT_TRUE(m.row(Vocabulary::pad).isZero(0.0));
  EXPECT_LE(m.row(vocab.index("bad")).cwiseAbs().maxCoeff(), kWordInitRange);
  EXPECT_THROW(load_word_vectors(path.string(), vocab, 50, 4), ConfigError);
  std::filesystem::remove(path);
}

TEST(WordVectors, RandomIsSeeded) {
  const auto vocab = Vocabulary::build({{"x", "y", "x", "y"}});
  EXPECT_EQ(load_word_vectors("random", vocab, 16, 3), load_word_vectors("random", vocab, 16, 3));
  EXPECT_NE(load_word_vectors("random", vocab, 16, 3), load_word_vectors("random", vocab, 16, 4));
  EXPECT_THROW(load_word_vectors("/nonexistent/vectors.txt", vocab, 16, 3), ConfigError);
}
