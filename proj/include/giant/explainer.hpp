#pragma once

#include <map>
#include <string>
#include <vector>

#include "giant/corpus.hpp"
#include "giant/types.hpp"

namespace giant {

// Fixed English stopword list shipped with the library (deterministic,
// no runtime download).
const std::vector<std::string>& english_stopwords();

struct TopicModel {
  std::vector<std::vector<std::string>> words;  // per latent dim, top 5
  Matrix vectors;                               // K x word_dim, mean word vector
  std::vector<bool> empty_flag;                 // dims with no assigned reviews
};

// TF-IDF topic words per latent dimension. `review_dims` assigns each
// review (token list) to its latent-argmax dimension; stopwords and the
// corpus-wide top-1% most frequent tokens are excluded. IDF is computed
// across the K per-dimension review sets.
TopicModel build_topics(const std::vector<std::vector<std::string>>& review_tokens,
                        const std::vector<int>& review_dims, int num_dims,
                        const std::map<std::string, int>& corpus_counts,
                        const Vocabulary& vocab, int top_words = 5);

struct CandidateReviews {
  std::vector<int> user_side;  // record indices
  std::vector<int> item_side;
  bool fallback_user = false;
  bool fallback_item = false;
};

// user_side: reviews of `item` written by users co-clustered with `user`;
// item_side: reviews of `item` whose review-level topic equals the item's
// topic. The user's own review of the item never appears. Empty sets fall
// back to all (other-author) reviews of the item, flagged.
CandidateReviews candidate_reviews(int user, int item,
                                   const std::vector<int>& record_user,
                                   const std::vector<int>& record_item,
                                   const std::vector<int>& user_cluster,
                                   int item_topic,
                                   const std::vector<int>& review_topic);

struct ScoredSentence {
  std::string text;
  int review_id = 0;  // record index in corpus order
  int sentence_index = 0;
  double score = 0.0;
};

// Splits review texts into sentences at terminal punctuation, scores each
// by cosine similarity between its mean word vector and the topic vector,
// and returns the top_n (score desc, ties by review id then sentence
// index). Zero-norm sentences score 0.
std::vector<ScoredSentence> extract_sentences(
    const std::vector<int>& candidate_records,
    const std::vector<InteractionRecord>& records, const Vector& topic_vector,
    const Vocabulary& vocab, int top_n);

// Mean embedding of the tokens (zero vector when no token has a vector).
Vector mean_word_vector(const std::vector<std::string>& tokens,
                        const Vocabulary& vocab);

struct Explanation {
  std::string user_id, item_id;
  double predicted_rating = 0.0;
  std::string suggestion;  // "recommend" | "not_recommend"
  int user_topic = 0, item_topic = 0;
  std::vector<std::string> user_topic_words, item_topic_words;
  std::vector<ScoredSentence> user_sentences, item_sentences;
  bool fallback_user = false, fallback_item = false;
};

std::string explanation_to_json(const Explanation& e);

}  // namespace giant
