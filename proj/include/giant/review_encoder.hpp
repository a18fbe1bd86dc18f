#pragma once

#include <vector>

#include "giant/numerics.hpp"
#include "giant/rng.hpp"
#include "giant/types.hpp"

namespace giant {

struct EncoderConfig {
  int word_dim = 300;
  std::vector<int> kernel_widths = {2, 3};
  int filters_per_width = 32;
  int attn_hidden = 32;
  int id_dim = 64;
  int max_reviews = 100;

  int feature_dim() const {
    return filters_per_width * static_cast<int>(kernel_widths.size());
  }
};

// Per-review convolution cache: the winning window position and pre-ReLU
// value per filter, which is all the backward pass needs.
struct ReviewCache {
  int true_len = 0;
  bool all_padding = false;
  std::vector<std::vector<int>> argmax;  // [width][filter], -1 when no window
  std::vector<Vector> max_preact;        // [width]
};

struct AggregateCache {
  Matrix review_vecs;   // feature_dim x R
  Matrix hidden_pre;    // attn_hidden x R
  Matrix hidden;        // post-ReLU
  Vector scores;        // R
  Vector weights;       // softmax over reviews
  int used_reviews = 0;
};

// Shared text feature extractor: per-review 1-D CNN over word embeddings
// (ReLU + max-pool per kernel width, widths concatenated) and attention
// aggregation across an entity's reviews. Also owns the ID embedding
// tables and their derived bias projections. Parameters are registered in
// the provided ParamStore; the store outlives the encoder.
class TextEncoder {
 public:
  TextEncoder(ParamStore& store, const EncoderConfig& config, int vocab_size,
              int num_users, int num_items, const Matrix& word_init, Rng& rng);

  const EncoderConfig& config() const { return config_; }

  // Convolution windows cover only the true (pre-padding) token span, so
  // appending padding never changes the output. All-padding input yields
  // the zero vector with cache->all_padding set.
  Vector encode_review(const std::vector<int>& tokens,
                       ReviewCache* cache = nullptr) const;
  void encode_review_backward(const std::vector<int>& tokens,
                              const ReviewCache& cache, const Vector& dout);

  // Attention-weighted sum of review vectors (softmax over 64->32->1
  // scores, ReLU between the linear maps). Throws on an empty list.
  Vector aggregate(const std::vector<Vector>& review_vecs,
                   AggregateCache* cache = nullptr) const;
  // Returns d(review_vecs); accumulates parameter gradients.
  std::vector<Vector> aggregate_backward(const AggregateCache& cache,
                                         const Vector& dx);

  // ID features; out-of-range (unseen) ids give zero vectors and zero bias.
  struct IdFeatures {
    Vector user_embedding, item_embedding;
    double user_bias = 0.0, item_bias = 0.0;
    bool user_known = false, item_known = false;
  };
  IdFeatures id_features(int user, int item) const;

  ParamBlock& word_embeddings() { return *word_emb_; }
  const ParamBlock& word_embeddings() const { return *word_emb_; }
  ParamBlock& user_ids() { return *user_emb_; }
  ParamBlock& item_ids() { return *item_emb_; }
  ParamBlock& user_bias_w() { return *bias_user_w_; }
  ParamBlock& user_bias_c() { return *bias_user_c_; }
  ParamBlock& item_bias_w() { return *bias_item_w_; }
  ParamBlock& item_bias_c() { return *bias_item_c_; }

 private:
  EncoderConfig config_;
  ParamBlock* word_emb_;
  std::vector<ParamBlock*> conv_w_;  // per width: F x (w * word_dim)
  std::vector<ParamBlock*> conv_b_;  // per width: F x 1
  ParamBlock* attn_w1_;
  ParamBlock* attn_b1_;
  ParamBlock* attn_w2_;
  ParamBlock* attn_b2_;
  ParamBlock* user_emb_;
  ParamBlock* item_emb_;
  ParamBlock* bias_user_w_;
  ParamBlock* bias_user_c_;
  ParamBlock* bias_item_w_;
  ParamBlock* bias_item_c_;
};

}  // namespace giant
