#pragma once

// User-stratified bucket assignment and the train/validation/test split.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "sarcasm/common/error.hpp"
#include "sarcasm/common/random.hpp"
#include "sarcasm/corpus.hpp"

namespace sarcasm {

struct BucketAssignment {
  int n_buckets = 10;
  std::map<std::string, int> user_bucket;
  std::map<std::string, int> tweet_bucket;

  bool operator==(const BucketAssignment&) const = default;
};

struct SplitSpec {
  std::vector<int> train;
  int valid = 8;
  int test = 9;

  // Every bucket except `valid` and `test` trains.
  static SplitSpec standard(int n_buckets = 10, int valid = 8, int test = 9) {
    SplitSpec spec;
    spec.valid = valid;
    spec.test = test;
    for (int b = 0; b < n_buckets; ++b) {
      if (b != valid && b != test) spec.train.push_back(b);
    }
    return spec;
  }

  // The indices must partition {0, ..., n_buckets - 1}.
  void validate(int n_buckets) const {
    std::vector<int> all = train;
    all.push_back(valid);
    all.push_back(test);
    std::set<int> unique(all.begin(), all.end());
    if (unique.size() != all.size()) throw ConfigError("split spec has overlapping bucket indices");
    if (static_cast<int>(all.size()) != n_buckets || *unique.begin() != 0 ||
        *unique.rbegin() != n_buckets - 1) {
      throw ConfigError("split spec does not partition buckets 0.." + std::to_string(n_buckets - 1));
    }
  }
};

struct DatasetSplits {
  LabeledDataset train;
  LabeledDataset valid;
  LabeledDataset test;
};

namespace detail {

struct UserStats {
  std::string user_id;
  std::size_t tweets = 0;
  std::size_t sarcastic = 0;
};

struct BucketState {
  std::size_t tweets = 0;
  std::size_t sarcastic = 0;
};

}  // namespace detail

// Greedy balanced assignment. Users are taken in descending tweet count
// (ties by user_id). Each goes to the bucket that, after adding the user,
// has the sarcastic ratio closest to the global ratio, then the smallest
// size, then the lowest index. Buckets that would exceed ceil(N / n_buckets)
// tweets are skipped while any bucket still has room for the user; otherwise
// only the currently smallest buckets compete. The seed permutes bucket
// labels after the greedy pass, so it changes which users end up in which
// split without changing the balance.
inline BucketAssignment stratify_by_user(const LabeledDataset& dataset, int n_buckets = 10,
                                         std::uint64_t seed = 0) {
  if (n_buckets < 2) throw DomainError("stratify_by_user: n_buckets must be >= 2");
  std::map<std::string, detail::UserStats> by_user;
  std::size_t total_sarcastic = 0;
  for (const auto& tweet : dataset.tweets) {
    if (!tweet.label) throw IntegrityError("tweet '" + tweet.id + "' has no label");
    auto& stats = by_user[tweet.user_id];
    stats.user_id = tweet.user_id;
    ++stats.tweets;
    if (*tweet.label == Label::sarcastic) {
      ++stats.sarcastic;
      ++total_sarcastic;
    }
  }
  BucketAssignment assignment;
  assignment.n_buckets = n_buckets;
  if (dataset.empty()) return assignment;
  if (by_user.size() < static_cast<std::size_t>(n_buckets)) {
    throw DomainError("stratify_by_user: " + std::to_string(by_user.size()) +
                      " distinct users cannot fill " + std::to_string(n_buckets) + " buckets");
  }

  std::vector<detail::UserStats> users;
  for (auto& [id, stats] : by_user) users.push_back(stats);
  std::stable_sort(users.begin(), users.end(),
                   [](const auto& a, const auto& b) { return a.tweets > b.tweets; });

  const double global_ratio =
      static_cast<double>(total_sarcastic) / static_cast<double>(dataset.size());
  const std::size_t capacity =
      (dataset.size() + static_cast<std::size_t>(n_buckets) - 1) / static_cast<std::size_t>(n_buckets);
  std::vector<detail::BucketState> buckets(static_cast<std::size_t>(n_buckets));
  std::map<std::string, int> greedy_bucket;

  for (const auto& user : users) {
    std::vector<std::size_t> candidates;
    for (std::size_t b = 0; b < buckets.size(); ++b) {
      if (buckets[b].tweets + user.tweets <= capacity) candidates.push_back(b);
    }
    if (candidates.empty()) {
      std::size_t smallest = buckets.front().tweets;
      for (const auto& bucket : buckets) smallest = std::min(smallest, bucket.tweets);
      for (std::size_t b = 0; b < buckets.size(); ++b) {
        if (buckets[b].tweets == smallest) candidates.push_back(b);
      }
    }
    std::size_t best = candidates.front();
    double best_deviation = 0.0;
    bool first = true;
    for (std::size_t b : candidates) {
      const double ratio = static_cast<double>(buckets[b].sarcastic + user.sarcastic) /
                           static_cast<double>(buckets[b].tweets + user.tweets);
      const double deviation = std::abs(ratio - global_ratio);
      if (first || deviation < best_deviation ||
          (deviation == best_deviation && buckets[b].tweets < buckets[best].tweets)) {
        best = b;
        best_deviation = deviation;
        first = false;
      }
    }
    buckets[best].tweets += user.tweets;
    buckets[best].sarcastic += user.sarcastic;
    greedy_bucket[user.user_id] = static_cast<int>(best);
  }

  std::vector<int> relabel(static_cast<std::size_t>(n_buckets));
  std::iota(relabel.begin(), relabel.end(), 0);
  Rng rng(seed);
  rng.shuffle(relabel);
  for (const auto& [user, bucket] : greedy_bucket) {
    assignment.user_bucket[user] = relabel[static_cast<std::size_t>(bucket)];
  }
  for (const auto& tweet : dataset.tweets) {
    assignment.tweet_bucket[tweet.id] = assignment.user_bucket.at(tweet.user_id);
  }
  return assignment;
}

inline DatasetSplits make_splits(const LabeledDataset& dataset, const BucketAssignment& assignment,
                                 const SplitSpec& spec) {
  spec.validate(assignment.n_buckets);
  DatasetSplits splits;
  splits.train.name = dataset.name + "/train";
  splits.valid.name = dataset.name + "/valid";
  splits.test.name = dataset.name + "/test";
  const std::set<int> train_buckets(spec.train.begin(), spec.train.end());
  for (const auto& tweet : dataset.tweets) {
    const auto it = assignment.user_bucket.find(tweet.user_id);
    if (it == assignment.user_bucket.end()) {
      throw ConfigError("bucket assignment does not cover user '" + tweet.user_id + "'");
    }
    if (it->second == spec.valid) {
      splits.valid.tweets.push_back(tweet);
    } else if (it->second == spec.test) {
      splits.test.tweets.push_back(tweet);
    } else if (train_buckets.contains(it->second)) {
      splits.train.tweets.push_back(tweet);
    } else {
      throw ConfigError("bucket " + std::to_string(it->second) + " is outside the split spec");
    }
  }
  return splits;
}

// Split manifest: one header object, then {"tweet_id","split"} per tweet in
// dataset order.
struct SplitManifest {
  std::uint64_t seed = 0;
  int n_buckets = 10;
  SplitSpec spec;
  std::string dataset;
  std::string dataset_fingerprint;
  std::vector<std::pair<std::string, std::string>> rows;

  std::set<std::string> ids(std::string_view split) const {
    std::set<std::string> out;
    for (const auto& [id, name] : rows) {
      if (name == split) out.insert(id);
    }
    return out;
  }
};

inline SplitManifest make_manifest(const LabeledDataset& dataset, const DatasetSplits& splits,
                                   const SplitSpec& spec, int n_buckets, std::uint64_t seed,
                                   std::string fingerprint) {
  SplitManifest manifest;
  manifest.seed = seed;
  manifest.n_buckets = n_buckets;
  manifest.spec = spec;
  manifest.dataset = dataset.name;
  manifest.dataset_fingerprint = std::move(fingerprint);
  std::map<std::string, std::string> route;
  for (const auto& t : splits.train.tweets) route[t.id] = "train";
  for (const auto& t : splits.valid.tweets) route[t.id] = "valid";
  for (const auto& t : splits.test.tweets) route[t.id] = "test";
  for (const auto& tweet : dataset.tweets) manifest.rows.emplace_back(tweet.id, route.at(tweet.id));
  return manifest;
}

inline void write_manifest(std::ostream& out, const SplitManifest& manifest) {
  nlohmann::json header{{"seed", manifest.seed},
                        {"n_buckets", manifest.n_buckets},
                        {"train_buckets", manifest.spec.train},
                        {"valid_bucket", manifest.spec.valid},
                        {"test_bucket", manifest.spec.test},
                        {"dataset", manifest.dataset},
                        {"dataset_fingerprint", manifest.dataset_fingerprint}};
  out << header.dump() << '\n';
  for (const auto& [id, split] : manifest.rows) {
    out << nlohmann::json{{"tweet_id", id}, {"split", split}}.dump() << '\n';
  }
}

inline SplitManifest read_manifest(std::istream& in) {
  SplitManifest manifest;
  bool header = true;
  detail::for_each_jsonl(in, [&](const nlohmann::json& record, std::size_t line) {
    try {
      if (header) {
        manifest.seed = record.at("seed").get<std::uint64_t>();
        manifest.n_buckets = record.at("n_buckets").get<int>();
        manifest.spec.train = record.at("train_buckets").get<std::vector<int>>();
        manifest.spec.valid = record.at("valid_bucket").get<int>();
        manifest.spec.test = record.at("test_bucket").get<int>();
        manifest.dataset = record.at("dataset").get<std::string>();
        manifest.dataset_fingerprint = record.at("dataset_fingerprint").get<std::string>();
        header = false;
        return;
      }
      const auto split = record.at("split").get<std::string>();
      if (split != "train" && split != "valid" && split != "test") {
        throw ParseError("unknown split '" + split + "'", line);
      }
      manifest.rows.emplace_back(record.at("tweet_id").get<std::string>(), split);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("bad manifest record: ") + e.what(), line);
    }
  });
  if (header) throw ParseError("manifest has no header", 1);
  return manifest;
}

// Routes tweets per an existing manifest; every dataset tweet must appear.
inline DatasetSplits apply_manifest(const LabeledDataset& dataset, const SplitManifest& manifest) {
  std::map<std::string, std::string> route(manifest.rows.begin(), manifest.rows.end());
  DatasetSplits splits;
  splits.train.name = dataset.name + "/train";
  splits.valid.name = dataset.name + "/valid";
  splits.test.name = dataset.name + "/test";
  for (const auto& tweet : dataset.tweets) {
    const auto it = route.find(tweet.id);
    if (it == route.end()) throw IntegrityError("tweet '" + tweet.id + "' missing from split manifest");
    auto& target = it->second == "train" ? splits.train : it->second == "valid" ? splits.valid : splits.test;
    target.tweets.push_back(tweet);
  }
  return splits;
}

}  // namespace sarcasm
