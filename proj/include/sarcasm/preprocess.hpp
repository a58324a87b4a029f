#pragma once

// Tweet tokenization, sarcasm-tag stripping, hapax-collapsing vocabulary,
// integer encoding and word-vector initialization.

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "sarcasm/common/error.hpp"
#include "sarcasm/common/random.hpp"

namespace sarcasm {

using Tokens = std::vector<std::string>;
using TagSet = std::set<std::string>;

// Hashtags used as distant-supervision markers, stored without the '#'.
inline const TagSet& default_tag_set() {
  static const TagSet tags{"sarcasm", "sarcastic", "satire", "irony"};
  return tags;
}

inline std::string to_lower_ascii(std::string_view text) {
  std::string out(text);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Normalizes user-supplied tags: strips a leading '#', lowercases.
inline TagSet normalize_tag_set(const TagSet& tags) {
  TagSet out;
  for (const auto& tag : tags) {
    std::string_view view(tag);
    if (!view.empty() && view.front() == '#') view.remove_prefix(1);
    if (!view.empty()) out.insert(to_lower_ascii(view));
  }
  return out;
}

namespace detail {

inline bool is_word_byte(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }

inline bool starts_with_url(std::string_view chunk) {
  return chunk.starts_with("http://") || chunk.starts_with("https://") ||
         chunk.starts_with("www.");
}

}  // namespace detail

// Lowercased tweet tokens. Hashtags stay whole ("#word"), URLs become "<url>",
// mentions "<user>", and every punctuation character is its own token.
// Apostrophes between word characters stay inside the word ("don't").
inline Tokens tokenize(std::string_view text) {
  Tokens tokens;
  std::size_t pos = 0;
  while (pos < text.size()) {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    std::size_t end = pos;
    while (end < text.size() && !std::isspace(static_cast<unsigned char>(text[end]))) ++end;
    const std::string chunk = to_lower_ascii(text.substr(pos, end - pos));
    pos = end;
    if (chunk.empty()) continue;
    if (detail::starts_with_url(chunk)) {
      tokens.emplace_back("<url>");
      continue;
    }
    std::size_t i = 0;
    while (i < chunk.size()) {
      const auto c = static_cast<unsigned char>(chunk[i]);
      const bool marker = (c == '#' || c == '@');
      if (marker && i + 1 < chunk.size() &&
          detail::is_word_byte(static_cast<unsigned char>(chunk[i + 1]))) {
        std::size_t j = i + 1;
        while (j < chunk.size() && detail::is_word_byte(static_cast<unsigned char>(chunk[j]))) ++j;
        tokens.push_back(c == '@' ? std::string("<user>") : chunk.substr(i, j - i));
        i = j;
      } else if (detail::is_word_byte(c)) {
        std::size_t j = i;
        while (j < chunk.size()) {
          const auto cj = static_cast<unsigned char>(chunk[j]);
          if (detail::is_word_byte(cj)) {
            ++j;
          } else if (cj == '\'' && j + 1 < chunk.size() &&
                     detail::is_word_byte(static_cast<unsigned char>(chunk[j + 1]))) {
            ++j;
          } else {
            break;
          }
        }
        tokens.push_back(chunk.substr(i, j - i));
        i = j;
      } else {
        tokens.emplace_back(1, static_cast<char>(c));
        ++i;
      }
    }
  }
  return tokens;
}

// True when the token is a hashtag whose name (case-insensitive) is in tags.
// `tags` must already be normalized.
inline bool is_marker_tag(std::string_view token, const TagSet& tags) {
  if (token.size() < 2 || token.front() != '#') return false;
  return tags.contains(to_lower_ascii(token.substr(1)));
}

inline Tokens strip_sarcasm_tags(const Tokens& tokens, const TagSet& tags = default_tag_set()) {
  const TagSet normalized = normalize_tag_set(tags);
  Tokens out;
  out.reserve(tokens.size());
  for (const auto& token : tokens) {
    if (!is_marker_tag(token, normalized)) out.push_back(token);
  }
  return out;
}

// A token counts as a word unless it consists only of punctuation.
inline bool is_word_token(std::string_view token) {
  return std::any_of(token.begin(), token.end(), [](char c) {
    return detail::is_word_byte(static_cast<unsigned char>(c));
  });
}

inline std::size_t word_count(const Tokens& tokens) {
  return static_cast<std::size_t>(std::count_if(tokens.begin(), tokens.end(),
                                                [](const auto& t) { return is_word_token(t); }));
}

inline std::vector<Tokens> filter_short(const std::vector<Tokens>& tweets, std::size_t min_words = 3) {
  if (min_words < 1) throw DomainError("filter_short: min_words must be >= 1");
  std::vector<Tokens> kept;
  for (const auto& tweet : tweets) {
    if (word_count(tweet) >= min_words) kept.push_back(tweet);
  }
  return kept;
}

class Vocabulary {
 public:
  static constexpr int pad = 0;
  static constexpr int unk = 1;
  static constexpr std::string_view pad_token = "<pad>";
  static constexpr std::string_view unk_token = "<unk>";

  struct Entry {
    std::string token;
    int index;
    std::size_t frequency;
  };

  Vocabulary() {
    tokens_ = {std::string(pad_token), std::string(unk_token)};
    frequencies_ = {0, 0};
  }

  // Tokens seen once are left out so they encode to UNK. Survivors are
  // indexed by descending frequency, ties broken lexicographically.
  static Vocabulary build(const std::vector<Tokens>& corpus) {
    std::map<std::string, std::size_t> counts;
    for (const auto& sequence : corpus) {
      for (const auto& token : sequence) ++counts[token];
    }
    std::vector<std::pair<std::string, std::size_t>> kept;
    std::size_t hapax_total = 0;
    for (const auto& [token, count] : counts) {
      if (token == pad_token || token == unk_token) continue;
      if (count >= 2) {
        kept.emplace_back(token, count);
      } else {
        ++hapax_total;
      }
    }
    std::stable_sort(kept.begin(), kept.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    Vocabulary vocab;
    vocab.frequencies_[unk] = hapax_total;
    for (const auto& [token, count] : kept) {
      vocab.index_.emplace(token, static_cast<int>(vocab.tokens_.size()));
      vocab.tokens_.push_back(token);
      vocab.frequencies_.push_back(count);
    }
    return vocab;
  }

  std::size_t size() const { return tokens_.size(); }

  int index(std::string_view token) const {
    const auto it = index_.find(std::string(token));
    return it == index_.end() ? unk : it->second;
  }

  bool contains(std::string_view token) const { return index_.contains(std::string(token)); }

  const std::string& token(int index) const { return tokens_.at(static_cast<std::size_t>(index)); }

  std::size_t frequency(int index) const { return frequencies_.at(static_cast<std::size_t>(index)); }

  std::vector<Entry> entries() const {
    std::vector<Entry> out;
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      out.push_back({tokens_[i], static_cast<int>(i), frequencies_[i]});
    }
    return out;
  }

  // JSONL audit dump: {"token","index","freq"} per line.
  void dump(std::ostream& out) const {
    for (const auto& entry : entries()) {
      out << nlohmann::json{{"token", entry.token}, {"index", entry.index}, {"freq", entry.frequency}}.dump()
          << '\n';
    }
  }

 private:
  std::vector<std::string> tokens_;
  std::vector<std::size_t> frequencies_;
  std::unordered_map<std::string, int> index_;
};

using EncodedTokens = std::vector<int>;

struct EncodedTweet {
  std::string tweet_id;
  EncodedTokens indices;
  std::size_t length() const { return indices.size(); }
};

inline EncodedTokens encode(const Tokens& tokens, const Vocabulary& vocab) {
  EncodedTokens out;
  out.reserve(tokens.size());
  for (const auto& token : tokens) out.push_back(vocab.index(token));
  return out;
}

inline Tokens decode(std::span<const int> indices, const Vocabulary& vocab) {
  Tokens out;
  out.reserve(indices.size());
  for (int index : indices) out.push_back(vocab.token(index));
  return out;
}

// |V| x d matrix of word vectors; row Vocabulary::pad is all zeros.
using WordEmbeddingMatrix = Eigen::MatrixXd;

inline constexpr double kWordInitRange = 0.05;

// Rows for tokens found in the GloVe-format file are copied verbatim; the
// rest (UNK included) are drawn uniform in [-0.05, 0.05]. path == "random"
// initializes every non-PAD row randomly.
inline WordEmbeddingMatrix load_word_vectors(const std::string& path, const Vocabulary& vocab,
                                             int dim, std::uint64_t seed) {
  if (dim < 1) throw ConfigError("word vector dimension must be >= 1");
  const auto rows = static_cast<Eigen::Index>(vocab.size());
  WordEmbeddingMatrix matrix = WordEmbeddingMatrix::Zero(rows, dim);
  std::vector<bool> found(vocab.size(), false);
  if (path != "random") {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open word vector file " + path);
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
      ++line_number;
      if (line.empty()) continue;
      std::istringstream fields(line);
      std::string token;
      fields >> token;
      std::vector<double> values;
      double value = 0.0;
      while (fields >> value) values.push_back(value);
      if (!fields.eof()) throw ParseError("non-numeric vector component", line_number);
      if (static_cast<int>(values.size()) != dim) {
        throw ConfigError("word vector file " + path + " line " + std::to_string(line_number) +
                          " has " + std::to_string(values.size()) + " components, expected " +
                          std::to_string(dim));
      }
      if (!vocab.contains(token)) continue;
      const int row = vocab.index(token);
      for (int k = 0; k < dim; ++k) matrix(row, k) = values[static_cast<std::size_t>(k)];
      found[static_cast<std::size_t>(row)] = true;
    }
  }
  Rng rng(seed);
  for (Eigen::Index row = 0; row < rows; ++row) {
    if (row == Vocabulary::pad || found[static_cast<std::size_t>(row)]) continue;
    for (int k = 0; k < dim; ++k) matrix(row, k) = rng.uniform(-kWordInitRange, kWordInitRange);
  }
  return matrix;
}

}  // namespace sarcasm
