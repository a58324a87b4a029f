#pragma once

// Tweets, labeled datasets and user histories: JSONL ingestion with integrity
// checks, distant-supervision relabeling and label/tag disagreement counts.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "sarcasm/common/error.hpp"
#include "sarcasm/preprocess.hpp"

namespace sarcasm {

enum class Label { non_sarcastic = 0, sarcastic = 1 };

inline const char* to_string(Label label) {
  return label == Label::sarcastic ? "sarcastic" : "non_sarcastic";
}

inline std::optional<Label> parse_label(std::string_view text) {
  if (text == "sarcastic") return Label::sarcastic;
  if (text == "non_sarcastic") return Label::non_sarcastic;
  return std::nullopt;
}

struct Tweet {
  std::string id;
  std::string user_id;
  std::int64_t timestamp = 0;
  std::string text;
  std::optional<Label> label;

  bool operator==(const Tweet&) const = default;
};

struct LabeledDataset {
  std::string name;
  std::vector<Tweet> tweets;

  std::size_t size() const { return tweets.size(); }
  bool empty() const { return tweets.empty(); }

  std::size_t count(Label label) const {
    return static_cast<std::size_t>(std::count_if(
        tweets.begin(), tweets.end(), [label](const Tweet& t) { return t.label == label; }));
  }

  std::set<std::string> users() const {
    std::set<std::string> out;
    for (const auto& t : tweets) out.insert(t.user_id);
    return out;
  }
};

// h^t: tweets by the anchor's author posted strictly before the anchor,
// oldest first, none of them part of the labeled set.
struct UserHistory {
  std::string user_id;
  std::string anchor_tweet_id;
  std::vector<Tweet> tweets;
};

// Histories keyed by anchor tweet id; a user with several labeled tweets has
// one history per labeled tweet.
using HistoryStore = std::map<std::string, UserHistory>;

struct DisagreementTable {
  std::size_t sarcastic_with_tag = 0;
  std::size_t sarcastic_without_tag = 0;
  std::size_t nonsarcastic_with_tag = 0;
  std::size_t nonsarcastic_without_tag = 0;

  std::size_t total() const {
    return sarcastic_with_tag + sarcastic_without_tag + nonsarcastic_with_tag +
           nonsarcastic_without_tag;
  }
  std::size_t with_tag() const { return sarcastic_with_tag + nonsarcastic_with_tag; }

  bool operator==(const DisagreementTable&) const = default;
};

namespace detail {

inline bool is_blank(std::string_view text) {
  return std::all_of(text.begin(), text.end(),
                     [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

inline Tweet parse_tweet(const nlohmann::json& record, std::size_t line) {
  if (!record.is_object()) throw ParseError("record is not a JSON object", line);
  auto require_string = [&](const char* key) -> std::string {
    const auto it = record.find(key);
    if (it == record.end() || !it->is_string()) {
      throw ParseError(std::string("missing or non-string field '") + key + "'", line);
    }
    return it->get<std::string>();
  };
  Tweet tweet;
  tweet.id = require_string("id");
  tweet.user_id = require_string("user_id");
  tweet.text = require_string("text");
  const auto ts = record.find("timestamp");
  if (ts == record.end() || !ts->is_number_integer()) {
    throw ParseError("missing or non-integer field 'timestamp'", line);
  }
  tweet.timestamp = ts->get<std::int64_t>();
  if (tweet.timestamp < 0) throw ParseError("negative timestamp", line);
  if (is_blank(tweet.text)) throw ParseError("empty text", line);
  if (const auto lab = record.find("label"); lab != record.end() && !lab->is_null()) {
    if (!lab->is_string()) throw ParseError("label must be a string", line);
    tweet.label = parse_label(lab->get<std::string>());
    if (!tweet.label) throw ParseError("unknown label '" + lab->get<std::string>() + "'", line);
  }
  return tweet;
}

template <typename Handler>
void for_each_jsonl(std::istream& in, Handler&& handle) {
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_blank(line)) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("malformed JSON: ") + e.what(), line_number);
    }
    handle(record, line_number);
  }
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  return in;
}

}  // namespace detail

inline nlohmann::json to_json(const Tweet& tweet) {
  nlohmann::json record{{"id", tweet.id},
                        {"user_id", tweet.user_id},
                        {"timestamp", tweet.timestamp},
                        {"text", tweet.text}};
  if (tweet.label) record["label"] = to_string(*tweet.label);
  return record;
}

// Reads the dataset JSONL contract; file order is preserved.
inline LabeledDataset load_dataset(std::istream& in, std::string name) {
  LabeledDataset dataset;
  dataset.name = std::move(name);
  std::unordered_set<std::string> seen;
  detail::for_each_jsonl(in, [&](const nlohmann::json& record, std::size_t line) {
    Tweet tweet = detail::parse_tweet(record, line);
    if (!tweet.label) {
      throw IntegrityError("tweet '" + tweet.id + "' (line " + std::to_string(line) +
                           ") has no label");
    }
    if (!seen.insert(tweet.id).second) {
      throw IntegrityError("duplicate tweet id '" + tweet.id + "' (line " +
                           std::to_string(line) + ")");
    }
    dataset.tweets.push_back(std::move(tweet));
  });
  return dataset;
}

inline LabeledDataset load_dataset(const std::string& path) {
  auto in = detail::open_input(path);
  return load_dataset(in, std::filesystem::path(path).stem().string());
}

inline void write_dataset(std::ostream& out, const LabeledDataset& dataset) {
  for (const auto& tweet : dataset.tweets) out << to_json(tweet).dump() << '\n';
}

// Reads history JSONL (tweet keys plus anchor_tweet_id) and validates every
// history against `dataset`: the anchor must exist and belong to the same
// user, history tweets must predate the anchor strictly, and no history
// tweet may be a labeled tweet. A history tweet id may recur under several
// anchors of one user only as an identical record.
inline HistoryStore load_histories(std::istream& in, const LabeledDataset& dataset) {
  std::unordered_map<std::string, const Tweet*> labeled;
  for (const auto& tweet : dataset.tweets) labeled.emplace(tweet.id, &tweet);

  HistoryStore store;
  std::unordered_map<std::string, Tweet> seen;
  std::set<std::pair<std::string, std::string>> seen_in_anchor;
  detail::for_each_jsonl(in, [&](const nlohmann::json& record, std::size_t line) {
    Tweet tweet = detail::parse_tweet(record, line);
    const auto anchor_field = record.find("anchor_tweet_id");
    if (anchor_field == record.end() || !anchor_field->is_string()) {
      throw ParseError("missing or non-string field 'anchor_tweet_id'", line);
    }
    const std::string anchor_id = anchor_field->get<std::string>();
    const auto anchor = labeled.find(anchor_id);
    if (anchor == labeled.end()) {
      throw IntegrityError("history line " + std::to_string(line) + " references anchor '" +
                           anchor_id + "' which is not in the dataset");
    }
    if (anchor->second->user_id != tweet.user_id) {
      throw IntegrityError("history line " + std::to_string(line) + ": user '" + tweet.user_id +
                           "' does not own anchor '" + anchor_id + "'");
    }
    if (labeled.contains(tweet.id)) {
      throw HistoryError("history tweet '" + tweet.id + "' (line " + std::to_string(line) +
                         ") is part of the labeled dataset");
    }
    if (tweet.timestamp >= anchor->second->timestamp) {
      throw HistoryError("history tweet '" + tweet.id + "' (line " + std::to_string(line) +
                         ") is not older than anchor '" + anchor_id + "'");
    }
    if (!seen_in_anchor.emplace(anchor_id, tweet.id).second) {
      throw IntegrityError("duplicate history tweet id '" + tweet.id + "' under anchor '" +
                           anchor_id + "'");
    }
    if (const auto prior = seen.find(tweet.id); prior != seen.end()) {
      if (!(prior->second == tweet)) {
        throw IntegrityError("history tweet id '" + tweet.id + "' (line " +
                             std::to_string(line) + ") conflicts with an earlier record");
      }
    } else {
      seen.emplace(tweet.id, tweet);
    }
    auto& history = store[anchor_id];
    history.user_id = tweet.user_id;
    history.anchor_tweet_id = anchor_id;
    history.tweets.push_back(std::move(tweet));
  });
  for (auto& [anchor_id, history] : store) {
    std::stable_sort(history.tweets.begin(), history.tweets.end(),
                     [](const Tweet& a, const Tweet& b) { return a.timestamp < b.timestamp; });
  }
  return store;
}

inline HistoryStore load_histories(const std::string& path, const LabeledDataset& dataset) {
  auto in = detail::open_input(path);
  return load_histories(in, dataset);
}

inline void write_histories(std::ostream& out, const HistoryStore& store) {
  for (const auto& [anchor_id, history] : store) {
    for (const auto& tweet : history.tweets) {
      auto record = to_json(tweet);
      record["anchor_tweet_id"] = anchor_id;
      out << record.dump() << '\n';
    }
  }
}

// Empty history for an anchor without records in the store.
inline UserHistory history_for(const HistoryStore& store, const Tweet& anchor) {
  if (const auto it = store.find(anchor.id); it != store.end()) return it->second;
  return UserHistory{anchor.user_id, anchor.id, {}};
}

inline bool contains_marker_tag(std::string_view text, const TagSet& tags) {
  const TagSet normalized = normalize_tag_set(tags);
  for (const auto& token : tokenize(text)) {
    if (is_marker_tag(token, normalized)) return true;
  }
  return false;
}

// Labels each tweet sarcastic iff its text carries one of `tags` as a whole
// hashtag token (case-insensitive). The result is named "<name>#".
inline LabeledDataset relabel_distant(const LabeledDataset& dataset,
                                      const TagSet& tags = default_tag_set()) {
  if (tags.empty()) throw DomainError("relabel_distant: tag set is empty");
  LabeledDataset out;
  out.name = dataset.name.ends_with('#') ? dataset.name : dataset.name + "#";
  out.tweets = dataset.tweets;
  for (auto& tweet : out.tweets) {
    tweet.label = contains_marker_tag(tweet.text, tags) ? Label::sarcastic : Label::non_sarcastic;
  }
  return out;
}

inline DisagreementTable disagreement_table(const LabeledDataset& dataset,
                                            const TagSet& tags = default_tag_set()) {
  DisagreementTable table;
  for (const auto& tweet : dataset.tweets) {
    if (!tweet.label) throw IntegrityError("tweet '" + tweet.id + "' has no label");
    const bool tagged = contains_marker_tag(tweet.text, tags);
    if (*tweet.label == Label::sarcastic) {
      ++(tagged ? table.sarcastic_with_tag : table.sarcastic_without_tag);
    } else {
      ++(tagged ? table.nonsarcastic_with_tag : table.nonsarcastic_without_tag);
    }
  }
  return table;
}

inline nlohmann::json to_json(const DisagreementTable& table) {
  return {{"sarcastic_with_tag", table.sarcastic_with_tag},
          {"sarcastic_without_tag", table.sarcastic_without_tag},
          {"nonsarcastic_with_tag", table.nonsarcastic_with_tag},
          {"nonsarcastic_without_tag", table.nonsarcastic_without_tag}};
}

}  // namespace sarcasm
