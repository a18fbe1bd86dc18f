#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "giant/rng.hpp"
#include "giant/types.hpp"

namespace giant {

// One (user, item, rating, review text) tuple; the corpus atom.
struct InteractionRecord {
  std::string user_id;
  std::string item_id;
  double rating = 0.0;  // in [1,5] after ingestion
  std::string text;
  std::optional<std::int64_t> timestamp;
};

enum class CorpusFormat { jsonl, csv };

struct IngestStats {
  std::size_t total_lines = 0;
  std::size_t malformed_skipped = 0;
  std::size_t ratings_clamped = 0;
};

// Loads records from JSONL (one object per line with user/item/rating/text
// fields) or CSV with a header row naming the same fields. Malformed lines
// are counted and skipped; out-of-range ratings are clamped to [1,5] and
// counted. Unreadable files and empty results are fatal.
std::vector<InteractionRecord> ingest(const std::string& path,
                                      CorpusFormat format,
                                      IngestStats* stats = nullptr);

// Iteratively removes users/items with fewer than k interactions until a
// fixed point; users/items with more than max_reviews interactions are
// dropped as well. Empty result is fatal.
std::vector<InteractionRecord> k_core_filter(std::vector<InteractionRecord> records,
                                             int k, int max_reviews = 100);

// Lowercase, split on whitespace, strip leading/trailing punctuation.
std::vector<std::string> tokenize(const std::string& text);

struct Vocabulary {
  // Index 0 is padding, index 1 is the unknown token.
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;

  std::unordered_map<std::string, int> token_to_index;
  std::vector<std::string> index_to_token;
  Matrix embeddings;  // |V| x word_dim; row 0 is all zeros

  int size() const { return static_cast<int>(index_to_token.size()); }
  int word_dim() const { return static_cast<int>(embeddings.cols()); }
  int index_of(const std::string& token) const {
    auto it = token_to_index.find(token);
    return it == token_to_index.end() ? kUnk : it->second;
  }
};

// Tokens appearing fewer than min_count times map to the unknown index.
// Embeddings are initialized uniform(-0.1, 0.1); the padding row stays zero.
Vocabulary build_vocabulary(const std::vector<InteractionRecord>& records,
                            int min_count, int word_dim, Rng& rng);

// Overwrites embedding rows from a whitespace-separated text file
// ("token v1 v2 ... v_dw" per line). Returns the number of rows replaced.
std::size_t load_word_vectors(Vocabulary& vocab, const std::string& path);

// Token indices, truncated/padded to exactly max_len.
std::vector<int> tokenize_and_truncate(const std::string& text,
                                       const Vocabulary& vocab, int max_len);

// 80/10/10 split with dense user/item index maps and per-user / per-item
// train-review indices. The review set fed to the model for a pair (u,i)
// always excludes u's own review of i.
struct SplitCorpus {
  std::vector<InteractionRecord> train;
  std::vector<InteractionRecord> validation;
  std::vector<InteractionRecord> test;

  std::vector<std::string> user_ids;  // sorted; position = dense index
  std::vector<std::string> item_ids;
  std::unordered_map<std::string, int> user_index;
  std::unordered_map<std::string, int> item_index;

  std::vector<std::vector<int>> train_by_user;  // indices into train
  std::vector<std::vector<int>> train_by_item;

  int num_users() const { return static_cast<int>(user_ids.size()); }
  int num_items() const { return static_cast<int>(item_ids.size()); }

  int user_of(const std::string& id) const;  // -1 when unseen
  int item_of(const std::string& id) const;

  // Train reviews of `user`, excluding any review of `item`.
  std::vector<int> user_reviews_excluding(int user, int item) const;
  // Train reviews of `item`, excluding any review by `user`.
  std::vector<int> item_reviews_excluding(int user, int item) const;
};

SplitCorpus split(const std::vector<InteractionRecord>& records,
                  std::uint64_t seed);

// Rebuilds the id maps and per-user/per-item indices from already-split
// record lists (used when reloading a cached corpus).
SplitCorpus assemble_split(std::vector<InteractionRecord> train,
                           std::vector<InteractionRecord> validation,
                           std::vector<InteractionRecord> test);

}  // namespace giant
