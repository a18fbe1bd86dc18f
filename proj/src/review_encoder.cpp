#include "giant/review_encoder.hpp"

#include <cmath>

#include "giant/corpus.hpp"

namespace giant {

TextEncoder::TextEncoder(ParamStore& store, const EncoderConfig& config,
                         int vocab_size, int num_users, int num_items,
                         const Matrix& word_init, Rng& rng)
    : config_(config) {
  if (word_init.rows() != vocab_size || word_init.cols() != config.word_dim)
    throw std::invalid_argument("word embedding init shape mismatch");

  word_emb_ = &store.add("emb.word", word_init);
  for (const int w : config_.kernel_widths) {
    const int fan_in = w * config_.word_dim;
    conv_w_.push_back(&store.add(
        "cnn.w" + std::to_string(w),
        rng.gaussian(config_.filters_per_width, fan_in) * std::sqrt(2.0 / fan_in)));
    conv_b_.push_back(&store.add("cnn.b" + std::to_string(w),
                                 Matrix::Zero(config_.filters_per_width, 1)));
  }
  const int fd = config_.feature_dim();
  attn_w1_ = &store.add("attn.w1",
                        rng.gaussian(config_.attn_hidden, fd) * std::sqrt(2.0 / fd));
  // Small nonzero bias keeps ReLU pre-activations off the kink for the
  // exactly-zero review vectors a dead max-pool can produce.
  attn_b1_ = &store.add("attn.b1", rng.gaussian(config_.attn_hidden, 1) * 0.01);
  attn_w2_ = &store.add(
      "attn.w2", rng.gaussian(1, config_.attn_hidden) *
                     std::sqrt(2.0 / config_.attn_hidden));
  attn_b2_ = &store.add("attn.b2", Matrix::Zero(1, 1));

  user_emb_ = &store.add("id.user", rng.uniform(num_users, config_.id_dim, -0.1, 0.1));
  item_emb_ = &store.add("id.item", rng.uniform(num_items, config_.id_dim, -0.1, 0.1));
  bias_user_w_ = &store.add("bias.user.w", Matrix::Zero(config_.id_dim, 1));
  bias_user_c_ = &store.add("bias.user.c", Matrix::Zero(1, 1));
  bias_item_w_ = &store.add("bias.item.w", Matrix::Zero(config_.id_dim, 1));
  bias_item_c_ = &store.add("bias.item.c", Matrix::Zero(1, 1));
}

Vector TextEncoder::encode_review(const std::vector<int>& tokens,
                                  ReviewCache* cache) const {
  const int d_w = config_.word_dim;
  const int f = config_.filters_per_width;
  const Matrix& emb = word_emb_->value;

  int true_len = static_cast<int>(tokens.size());
  while (true_len > 0 && tokens[true_len - 1] == Vocabulary::kPad) --true_len;

  Vector out = Vector::Zero(config_.feature_dim());
  if (cache) {
    cache->true_len = true_len;
    cache->all_padding = (true_len == 0);
    cache->argmax.assign(config_.kernel_widths.size(),
                         std::vector<int>(f, -1));
    cache->max_preact.assign(config_.kernel_widths.size(), Vector::Zero(f));
  }
  if (true_len == 0) return out;

  for (std::size_t wi = 0; wi < config_.kernel_widths.size(); ++wi) {
    const int w = config_.kernel_widths[wi];
    const int positions = true_len - w + 1;
    if (positions <= 0) continue;

    Matrix windows(w * d_w, positions);
    for (int p = 0; p < positions; ++p)
      for (int j = 0; j < w; ++j)
        windows.col(p).segment(j * d_w, d_w) = emb.row(tokens[p + j]).transpose();

    const Matrix acts =
        (conv_w_[wi]->value * windows).colwise() + conv_b_[wi]->value.col(0);

    for (int k = 0; k < f; ++k) {
      Index best = 0;
      const double m = acts.row(k).maxCoeff(&best);
      out(static_cast<Index>(wi) * f + k) = std::max(0.0, m);
      if (cache) {
        cache->argmax[wi][k] = static_cast<int>(best);
        cache->max_preact[wi](k) = m;
      }
    }
  }
  return out;
}

void TextEncoder::encode_review_backward(const std::vector<int>& tokens,
                                         const ReviewCache& cache,
                                         const Vector& dout) {
  if (cache.all_padding) return;
  const int d_w = config_.word_dim;
  const int f = config_.filters_per_width;
  const Matrix& emb = word_emb_->value;

  for (std::size_t wi = 0; wi < config_.kernel_widths.size(); ++wi) {
    const int w = config_.kernel_widths[wi];
    for (int k = 0; k < f; ++k) {
      const int p = cache.argmax[wi][k];
      if (p < 0 || cache.max_preact[wi](k) <= 0.0) continue;
      const double g = dout(static_cast<Index>(wi) * f + k);
      if (g == 0.0) continue;
      conv_b_[wi]->grad(k, 0) += g;
      for (int j = 0; j < w; ++j) {
        const int token = tokens[p + j];
        conv_w_[wi]->grad.row(k).segment(j * d_w, d_w) +=
            g * emb.row(token);
        word_emb_->grad.row(token) +=
            g * conv_w_[wi]->value.row(k).segment(j * d_w, d_w);
      }
    }
  }
}

Vector TextEncoder::aggregate(const std::vector<Vector>& review_vecs,
                              AggregateCache* cache) const {
  if (review_vecs.empty())
    throw std::invalid_argument("aggregate: empty review set");
  const int r = std::min<int>(static_cast<int>(review_vecs.size()),
                              config_.max_reviews);
  const int fd = config_.feature_dim();

  Matrix v(fd, r);
  for (int j = 0; j < r; ++j) v.col(j) = review_vecs[j];

  const Matrix hidden_pre =
      (attn_w1_->value * v).colwise() + attn_b1_->value.col(0);
  const Matrix hidden = hidden_pre.cwiseMax(0.0);
  Vector scores = (attn_w2_->value * hidden).transpose();
  scores.array() += attn_b2_->value(0, 0);
  const Vector weights = softmax_tempered(scores, 1.0);
  const Vector x = v * weights;

  if (cache) {
    cache->review_vecs = v;
    cache->hidden_pre = hidden_pre;
    cache->hidden = hidden;
    cache->scores = scores;
    cache->weights = weights;
    cache->used_reviews = r;
  }
  return x;
}

std::vector<Vector> TextEncoder::aggregate_backward(const AggregateCache& cache,
                                                    const Vector& dx) {
  const int r = cache.used_reviews;
  const Matrix& v = cache.review_vecs;
  const Vector& a = cache.weights;

  Matrix dv = dx * a.transpose();  // direct path x = V a

  const Vector da = v.transpose() * dx;
  const double dot = a.dot(da);
  const Vector ds = (a.array() * (da.array() - dot)).matrix();

  attn_b2_->grad(0, 0) += ds.sum();
  attn_w2_->grad += (cache.hidden * ds).transpose();
  Matrix dhidden = attn_w2_->value.transpose() * ds.transpose();
  dhidden = dhidden.cwiseProduct(
      (cache.hidden_pre.array() > 0.0).cast<double>().matrix());
  attn_w1_->grad += dhidden * v.transpose();
  attn_b1_->grad.col(0) += dhidden.rowwise().sum();
  dv += attn_w1_->value.transpose() * dhidden;

  std::vector<Vector> out(r);
  for (int j = 0; j < r; ++j) out[j] = dv.col(j);
  return out;
}

TextEncoder::IdFeatures TextEncoder::id_features(int user, int item) const {
  IdFeatures f;
  f.user_known = user >= 0 && user < user_emb_->value.rows();
  f.item_known = item >= 0 && item < item_emb_->value.rows();
  if (f.user_known) {
    f.user_embedding = user_emb_->value.row(user).transpose();
    f.user_bias = bias_user_w_->value.col(0).dot(f.user_embedding) +
                  bias_user_c_->value(0, 0);
  } else {
    f.user_embedding = Vector::Zero(config_.id_dim);
  }
  if (f.item_known) {
    f.item_embedding = item_emb_->value.row(item).transpose();
    f.item_bias = bias_item_w_->value.col(0).dot(f.item_embedding) +
                  bias_item_c_->value(0, 0);
  } else {
    f.item_embedding = Vector::Zero(config_.id_dim);
  }
  return f;
}

}  // namespace giant
