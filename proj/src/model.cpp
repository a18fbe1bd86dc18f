#include "giant/model.hpp"

#include <algorithm>
#include <cmath>

namespace giant {

Variant variant_from_string(const std::string& s) {
  if (s == "giant") return Variant::giant;
  if (s == "autoencoder") return Variant::autoencoder;
  if (s == "stand_prior") return Variant::stand_prior;
  if (s == "indiv_prior") return Variant::indiv_prior;
  throw ConfigError("unknown variant: " + s);
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::giant: return "giant";
    case Variant::autoencoder: return "autoencoder";
    case Variant::stand_prior: return "stand_prior";
    case Variant::indiv_prior: return "indiv_prior";
  }
  return "giant";
}

EtaForm eta_form_from_string(const std::string& s) {
  if (s == "softmax") return EtaForm::softmax;
  if (s == "literal") return EtaForm::literal;
  throw ConfigError("unknown eta form: " + s);
}

std::string to_string(EtaForm f) {
  return f == EtaForm::softmax ? "softmax" : "literal";
}

double anneal_lambda(double progress, double start, double end) {
  if (progress < 0.0 || progress > 1.0)
    throw std::invalid_argument("progress must be in [0,1]");
  if (progress < start) return 0.0;
  if (progress >= end) return 1.0;
  return (progress - start) / (end - start);
}

double kl_term(const Vector& eta, const Vector& rho) {
  if (eta.size() != rho.size())
    throw std::invalid_argument("kl_term: dimension mismatch");
  double kl = 0.0;
  for (Index k = 0; k < eta.size(); ++k) {
    if (eta(k) <= 0.0) continue;  // 0 ln 0 := 0
    kl += eta(k) * (std::log(eta(k)) - std::log(std::max(rho(k), 1e-12)));
  }
  return kl;
}

double recon_loss(const Vector& x_bar, const Vector& x) {
  if (x_bar.size() != x.size())
    throw std::invalid_argument("recon_loss: dimension mismatch");
  return (x_bar - x).squaredNorm() / static_cast<double>(x.size());
}

double centroid_reg(const Matrix& encoder_weight, const Matrix& centroids) {
  if (centroids.rows() != encoder_weight.cols() ||
      centroids.cols() != encoder_weight.rows())
    throw std::invalid_argument("centroid_reg: dimension mismatch");
  double total = 0.0;
  for (Index k = 0; k < centroids.rows(); ++k)
    total += (encoder_weight.col(k) - centroids.row(k).transpose()).squaredNorm();
  return total;
}

GiantModel::GiantModel(const ModelConfig& config, int vocab_size, int num_users,
                       int num_items, const Matrix& word_init,
                       std::uint64_t seed)
    : config_(config),
      init_rng_(derive_seed("model.init", seed)),
      encoder_(params_, config.encoder, vocab_size, num_users, num_items,
               word_init, init_rng_) {
  const int k = config_.latent_dim;
  const int fd = config_.encoder.feature_dim();
  const int id = config_.encoder.id_dim;

  enc_w_mu_ = &params_.add("enc.w_mu",
                           init_rng_.gaussian(fd, k) * std::sqrt(2.0 / fd));
  enc_b_mu_ = &params_.add("enc.b_mu", Matrix::Zero(k, 1));
  enc_w_lv_ = &params_.add("enc.w_lv",
                           init_rng_.gaussian(fd, k) * std::sqrt(2.0 / fd));
  // Start with small posterior noise (sigma ~ e^-2) so the latent signal
  // is usable from the first epochs.
  enc_b_lv_ = &params_.add("enc.b_lv", Matrix::Constant(k, 1, -4.0));
  phi_w_ = &params_.add("phi.w", Matrix::Identity(k, k));
  phi_b_ = &params_.add("phi.b", Matrix::Zero(k, 1));
  dec_w_ = &params_.add("dec.w", init_rng_.gaussian(fd, k) * std::sqrt(2.0 / k));
  dec_b_ = &params_.add("dec.b", init_rng_.gaussian(fd, 1) * 0.01);
  head_user_w_ = &params_.add("head.user.w",
                              init_rng_.gaussian(id, k) * std::sqrt(2.0 / k));
  head_item_w_ = &params_.add("head.item.w",
                              init_rng_.gaussian(id, k) * std::sqrt(2.0 / k));
  head_out_w_ = &params_.add("head.out.w",
                             init_rng_.gaussian(id, 1) * std::sqrt(2.0 / id));
  // Midpoint of the declared [1,5] rating scale.
  head_out_b_ = &params_.add("head.out.b", Matrix::Constant(1, 1, 3.0));
  prior_w_ = &params_.add(
      "prior.w", init_rng_.gaussian(k, config_.graph_dim) *
                     std::sqrt(1.0 / config_.graph_dim));
}

void GiantModel::forward_side(const std::vector<const std::vector<int>*>& tokens,
                              const Vector& rho, const Vector& graph_e,
                              Rng* noise, SideCache& side) const {
  const int k = config_.latent_dim;
  const int fd = config_.encoder.feature_dim();

  side.cold = tokens.empty();
  if (side.cold) {
    side.x = Vector::Zero(fd);
  } else {
    const int r = std::min<int>(static_cast<int>(tokens.size()),
                                config_.encoder.max_reviews);
    side.review_caches.resize(r);
    std::vector<Vector> vecs(r);
    for (int j = 0; j < r; ++j)
      vecs[j] = encoder_.encode_review(*tokens[j], &side.review_caches[j]);
    side.x = encoder_.aggregate(vecs, &side.agg);
  }

  side.mu = enc_w_mu_->value.transpose() * side.x + enc_b_mu_->value.col(0);
  side.logvar_raw =
      enc_w_lv_->value.transpose() * side.x + enc_b_lv_->value.col(0);
  side.logvar = side.logvar_raw.cwiseMax(config_.logvar_min)
                    .cwiseMin(config_.logvar_max);

  if (noise != nullptr && config_.variant != Variant::autoencoder) {
    side.noise = noise->gaussian_vector(k);
    side.z = side.mu +
             (side.logvar.array() / 2.0).exp().matrix().cwiseProduct(side.noise);
  } else {
    side.noise = Vector::Zero(k);
    side.z = side.mu;
  }

  side.eta_pre =
      (phi_w_->value * side.z + phi_b_->value.col(0)) / config_.tau;
  if (config_.eta_form == EtaForm::softmax) {
    side.eta = softmax_tempered(side.eta_pre, 1.0);
  } else {
    // Literal Eq. 7 family renormalized: eta_k = (1+e^{s_k}) / sum(1+e^{s_j}),
    // evaluated with max-subtraction.
    const double m = side.eta_pre.maxCoeff();
    const Vector e = (side.eta_pre.array() - m).exp();
    const double scaled_sum = std::exp(-m) * k + e.sum();
    side.eta = (e.array() + std::exp(-m)) / scaled_sum;
    side.literal_inv_sum = std::exp(-m) / scaled_sum;
  }

  switch (config_.variant) {
    case Variant::giant:
      if (rho.size() != k)
        throw std::invalid_argument("giant variant requires a K-dim prior rho");
      side.kl = kl_term(side.eta, rho);
      break;
    case Variant::stand_prior:
      side.kl = 0.5 * (side.mu.squaredNorm() +
                       side.logvar.array().exp().sum() - side.logvar.sum() - k);
      break;
    case Variant::indiv_prior: {
      if (graph_e.size() != config_.graph_dim)
        throw std::invalid_argument(
            "indiv_prior variant requires a graph embedding per side");
      side.prior_mean = prior_w_->value * graph_e;
      side.kl = 0.5 * ((side.mu - side.prior_mean).squaredNorm() +
                       side.logvar.array().exp().sum() - side.logvar.sum() - k);
      break;
    }
    case Variant::autoencoder:
      side.kl = 0.0;
      break;
  }

  side.dec_pre = dec_w_->value * side.z + dec_b_->value.col(0);
  side.x_bar = side.dec_pre.cwiseMax(0.0);
  side.recon = recon_loss(side.x_bar, side.x);
}

PairOutput GiantModel::forward(const PairExample& example, Rng* noise,
                               PairCache* cache) const {
  PairCache local;
  PairCache& c = cache ? *cache : local;

  forward_side(example.user_tokens, example.rho_user, example.graph_user,
               noise, c.user);
  forward_side(example.item_tokens, example.rho_item, example.graph_item,
               noise, c.item);

  c.ids = encoder_.id_features(example.user, example.item);
  c.zeta_user = head_user_w_->value * c.user.z + c.ids.user_embedding;
  c.zeta_item = head_item_w_->value * c.item.z + c.ids.item_embedding;
  c.prod = c.zeta_user.cwiseProduct(c.zeta_item);
  c.relu_prod = c.prod.cwiseMax(0.0);
  c.r_hat = head_out_w_->value.col(0).dot(c.relu_prod) +
            head_out_b_->value(0, 0) + c.ids.user_bias + c.ids.item_bias;

  PairOutput out;
  out.r_hat = c.r_hat;
  out.z_user = c.user.z;
  out.z_item = c.item.z;
  out.eta_user = c.user.eta;
  out.eta_item = c.item.eta;
  out.recon_user = c.user.recon;
  out.recon_item = c.item.recon;
  out.kl_user = c.user.kl;
  out.kl_item = c.item.kl;
  out.cold_user = c.user.cold;
  out.cold_item = c.item.cold;
  return out;
}

void GiantModel::backward_side(
    const std::vector<const std::vector<int>*>& tokens, const Vector& rho,
    const Vector& graph_e, SideCache& side, const Vector& dz_external,
    double recon_weight, double kl_weight) {
  const int fd = config_.encoder.feature_dim();

  // Reconstruction: gradient to x_bar and to the target x.
  const double scale = 2.0 * recon_weight / static_cast<double>(fd);
  const Vector dxbar = scale * (side.x_bar - side.x);
  Vector dx = scale * (side.x - side.x_bar);

  const Vector ddec_pre = dxbar.cwiseProduct(
      (side.dec_pre.array() > 0.0).cast<double>().matrix());
  dec_w_->grad += ddec_pre * side.z.transpose();
  dec_b_->grad.col(0) += ddec_pre;

  Vector dz = dz_external + dec_w_->value.transpose() * ddec_pre;

  Vector dmu = Vector::Zero(config_.latent_dim);
  Vector dlv = Vector::Zero(config_.latent_dim);

  if (kl_weight != 0.0) {
    switch (config_.variant) {
      case Variant::giant: {
        Vector deta(side.eta.size());
        for (Index k = 0; k < side.eta.size(); ++k) {
          const double e = std::max(side.eta(k), 1e-300);
          deta(k) = kl_weight *
                    (std::log(e) - std::log(std::max(rho(k), 1e-12)) + 1.0);
        }
        Vector ds;
        const double dot = deta.dot(side.eta);
        if (config_.eta_form == EtaForm::softmax) {
          ds = side.eta.cwiseProduct(
              (deta.array() - dot).matrix());
        } else {
          ds = (deta.array() - dot).matrix().cwiseProduct(
              (side.eta.array() - side.literal_inv_sum).matrix());
        }
        const Vector du = ds / config_.tau;
        phi_w_->grad += du * side.z.transpose();
        phi_b_->grad.col(0) += du;
        dz += phi_w_->value.transpose() * du;
        break;
      }
      case Variant::stand_prior:
        dmu += kl_weight * side.mu;
        dlv += (kl_weight * 0.5) *
               (side.logvar.array().exp() - 1.0).matrix();
        break;
      case Variant::indiv_prior: {
        dmu += kl_weight * (side.mu - side.prior_mean);
        const Vector dm = kl_weight * (side.prior_mean - side.mu);
        prior_w_->grad += dm * graph_e.transpose();
        dlv += (kl_weight * 0.5) *
               (side.logvar.array().exp() - 1.0).matrix();
        break;
      }
      case Variant::autoencoder:
        break;
    }
  }

  // Reparameterization.
  dmu += dz;
  if (config_.variant != Variant::autoencoder) {
    dlv += 0.5 * dz.cwiseProduct(side.noise)
                     .cwiseProduct((side.logvar.array() / 2.0).exp().matrix());
  }
  // Clamp gate on logvar.
  const Vector dlv_raw = dlv.cwiseProduct(
      ((side.logvar_raw.array() > config_.logvar_min) &&
       (side.logvar_raw.array() < config_.logvar_max))
          .cast<double>()
          .matrix());

  enc_w_mu_->grad += side.x * dmu.transpose();
  enc_b_mu_->grad.col(0) += dmu;
  dx += enc_w_mu_->value * dmu;
  enc_w_lv_->grad += side.x * dlv_raw.transpose();
  enc_b_lv_->grad.col(0) += dlv_raw;
  dx += enc_w_lv_->value * dlv_raw;

  if (!side.cold) {
    const std::vector<Vector> dreviews =
        encoder_.aggregate_backward(side.agg, dx);
    for (std::size_t j = 0; j < dreviews.size(); ++j)
      encoder_.encode_review_backward(*tokens[j], side.review_caches[j],
                                      dreviews[j]);
  }
}

void GiantModel::backward(const PairExample& example, PairCache& c,
                          double d_rhat, double recon_weight,
                          double kl_weight) {
  // Rating head.
  head_out_w_->grad.col(0) += d_rhat * c.relu_prod;
  head_out_b_->grad(0, 0) += d_rhat;
  const Vector dq = d_rhat * head_out_w_->value.col(0);
  const Vector dprod = dq.cwiseProduct(
      (c.prod.array() > 0.0).cast<double>().matrix());
  const Vector dzeta_user = dprod.cwiseProduct(c.zeta_item);
  const Vector dzeta_item = dprod.cwiseProduct(c.zeta_user);

  head_user_w_->grad += dzeta_user * c.user.z.transpose();
  head_item_w_->grad += dzeta_item * c.item.z.transpose();
  const Vector dz_user = head_user_w_->value.transpose() * dzeta_user;
  const Vector dz_item = head_item_w_->value.transpose() * dzeta_item;

  if (c.ids.user_known) {
    encoder_.user_bias_w().grad.col(0) += d_rhat * c.ids.user_embedding;
    encoder_.user_bias_c().grad(0, 0) += d_rhat;
    const Vector deps = dzeta_user + d_rhat * encoder_.user_bias_w().value.col(0);
    encoder_.user_ids().grad.row(example.user) += deps.transpose();
  }
  if (c.ids.item_known) {
    encoder_.item_bias_w().grad.col(0) += d_rhat * c.ids.item_embedding;
    encoder_.item_bias_c().grad(0, 0) += d_rhat;
    const Vector deps = dzeta_item + d_rhat * encoder_.item_bias_w().value.col(0);
    encoder_.item_ids().grad.row(example.item) += deps.transpose();
  }

  backward_side(example.user_tokens, example.rho_user, example.graph_user,
                c.user, dz_user, recon_weight, kl_weight);
  backward_side(example.item_tokens, example.rho_item, example.graph_item,
                c.item, dz_item, recon_weight, kl_weight);
}

Vector GiantModel::encode_entity(
    const std::vector<const std::vector<int>*>& tokens) const {
  if (tokens.empty()) return Vector::Zero(config_.encoder.feature_dim());
  const int r = std::min<int>(static_cast<int>(tokens.size()),
                              config_.encoder.max_reviews);
  std::vector<Vector> vecs(r);
  for (int j = 0; j < r; ++j) vecs[j] = encoder_.encode_review(*tokens[j]);
  return encoder_.aggregate(vecs);
}

Vector GiantModel::encode_single_review(const std::vector<int>& tokens) const {
  return encoder_.encode_review(tokens);
}

Vector GiantModel::latent_mean(const Vector& x) const {
  return enc_w_mu_->value.transpose() * x + enc_b_mu_->value.col(0);
}

Vector GiantModel::posterior_eta(const Vector& z) const {
  const Vector pre = (phi_w_->value * z + phi_b_->value.col(0)) / config_.tau;
  if (config_.eta_form == EtaForm::softmax) return softmax_tempered(pre, 1.0);
  const double m = pre.maxCoeff();
  const Vector e = (pre.array() - m).exp();
  const double scaled_sum =
      std::exp(-m) * static_cast<double>(pre.size()) + e.sum();
  return (e.array() + std::exp(-m)) / scaled_sum;
}

double GiantModel::rate_from_latents(int user, int item, const Vector& z_user,
                                     const Vector& z_item) const {
  const auto ids = encoder_.id_features(user, item);
  const Vector zeta_u = head_user_w_->value * z_user + ids.user_embedding;
  const Vector zeta_i = head_item_w_->value * z_item + ids.item_embedding;
  const Vector relu = zeta_u.cwiseProduct(zeta_i).cwiseMax(0.0);
  return head_out_w_->value.col(0).dot(relu) + head_out_b_->value(0, 0) +
         ids.user_bias + ids.item_bias;
}

double GiantModel::total_loss(const std::vector<PairExample>& batch,
                              double progress, const TrainConfig& config,
                              const PriorContext& priors,
                              std::uint64_t noise_seed, bool with_grads,
                              LossBreakdown* breakdown) {
  if (batch.empty()) throw std::invalid_argument("total_loss: empty batch");
  if (with_grads) params_.zero_grads();

  const double lambda =
      anneal_lambda(progress, config.anneal_start, config.anneal_end);
  const double b = static_cast<double>(batch.size());
  const double kl_weight = lambda * config.beta / b;

  Rng noise(noise_seed);
  double rating = 0.0, recon = 0.0, kl_raw = 0.0;
  for (const auto& example : batch) {
    PairCache cache;
    const PairOutput out = forward(example, &noise, &cache);
    const double err = out.r_hat - example.rating;
    rating += err * err;
    recon += out.recon_user + out.recon_item;
    kl_raw += out.kl_user + out.kl_item;
    if (with_grads)
      backward(example, cache, 2.0 * err / b, 1.0 / b, kl_weight);
  }
  rating /= b;
  recon /= b;
  kl_raw /= b;

  double centroid = 0.0;
  const bool centroid_active = progress < config.centroid_phase &&
                               config.centroid_weight > 0.0 &&
                               priors.user_clusters != nullptr &&
                               priors.item_clusters != nullptr;
  if (centroid_active) {
    centroid = config.centroid_weight *
               (centroid_reg(enc_w_mu_->value, priors.user_clusters->centroids) +
                centroid_reg(enc_w_mu_->value, priors.item_clusters->centroids));
    if (with_grads) {
      for (Index k = 0; k < enc_w_mu_->value.cols(); ++k) {
        enc_w_mu_->grad.col(k) +=
            config.centroid_weight * 2.0 *
            (2.0 * enc_w_mu_->value.col(k) -
             priors.user_clusters->centroids.row(k).transpose() -
             priors.item_clusters->centroids.row(k).transpose());
      }
    }
  }

  const double l2 = config.l2 * params_.squared_norm();
  if (with_grads && config.l2 > 0.0) params_.add_l2_gradient(config.l2);

  LossBreakdown bd;
  bd.rating = rating;
  bd.recon = recon;
  bd.kl_raw = kl_raw;
  bd.kl_contribution = lambda * config.beta * kl_raw;
  bd.centroid = centroid;
  bd.l2 = l2;
  bd.lambda = lambda;
  bd.total = rating + recon + bd.kl_contribution + centroid + l2;
  if (breakdown) *breakdown = bd;
  return bd.total;
}

double GiantModel::evaluate_rmse(const std::vector<PairExample>& pairs) const {
  if (pairs.empty()) return 0.0;
  double sq = 0.0;
  for (const auto& p : pairs) {
    const PairOutput out = forward(p, nullptr);
    sq += (out.r_hat - p.rating) * (out.r_hat - p.rating);
  }
  return std::sqrt(sq / static_cast<double>(pairs.size()));
}

namespace {

const char* nonfinite_term(const LossBreakdown& bd) {
  if (!std::isfinite(bd.rating)) return "rating";
  if (!std::isfinite(bd.recon)) return "reconstruction";
  if (!std::isfinite(bd.kl_contribution)) return "kl";
  if (!std::isfinite(bd.centroid)) return "centroid";
  if (!std::isfinite(bd.l2)) return "l2";
  return "total";
}

}  // namespace

std::vector<EpochStats> GiantModel::train(
    const std::vector<PairExample>& train_pairs,
    const std::vector<PairExample>& val_pairs, const TrainConfig& config,
    const PriorContext& priors) {
  if (train_pairs.empty()) throw std::invalid_argument("train: no pairs");
  const int n = static_cast<int>(train_pairs.size());
  const int batch_size = std::max(1, config.batch);

  // Adam state per block.
  std::deque<Matrix> m1, m2;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    m1.emplace_back(Matrix::Zero(params_[i].value.rows(), params_[i].value.cols()));
    m2.emplace_back(Matrix::Zero(params_[i].value.rows(), params_[i].value.cols()));
  }
  long step = 0;

  Rng shuffle_rng(derive_seed("model.train.shuffle", config.seed));
  const std::uint64_t noise_base = derive_seed("model.train.noise", config.seed);

  std::vector<EpochStats> history;
  double best_val = std::numeric_limits<double>::infinity();
  std::deque<Matrix> best_values = params_.snapshot_values();

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double progress =
        static_cast<double>(epoch) / static_cast<double>(config.epochs);
    const std::vector<int> order = shuffle_rng.permutation(n);

    LossBreakdown epoch_bd;
    int batches = 0;
    for (int begin = 0; begin < n; begin += batch_size) {
      const int end = std::min(n, begin + batch_size);
      std::vector<PairExample> batch(end - begin);
      for (int i = begin; i < end; ++i) batch[i - begin] = train_pairs[order[i]];

      const std::uint64_t noise_seed =
          noise_base ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(epoch + 1)) ^
          (0xBF58476D1CE4E5B9ULL * static_cast<std::uint64_t>(begin + 1));

      LossBreakdown bd;
      const double loss =
          total_loss(batch, progress, config, priors, noise_seed, true, &bd);
      if (!std::isfinite(loss))
        throw NumericalError(nonfinite_term(bd),
                             "training diverged at epoch " + std::to_string(epoch));

      ++step;
      const double bc1 = 1.0 - std::pow(config.adam_beta1, step);
      const double bc2 = 1.0 - std::pow(config.adam_beta2, step);
      for (std::size_t i = 0; i < params_.size(); ++i) {
        ParamBlock& blk = params_[i];
        m1[i] = config.adam_beta1 * m1[i] + (1.0 - config.adam_beta1) * blk.grad;
        m2[i] = config.adam_beta2 * m2[i] +
                (1.0 - config.adam_beta2) * blk.grad.cwiseProduct(blk.grad);
        blk.value.array() -=
            config.lr * (m1[i].array() / bc1) /
            ((m2[i].array() / bc2).sqrt() + config.adam_eps);
      }

      epoch_bd.rating += bd.rating;
      epoch_bd.recon += bd.recon;
      epoch_bd.kl_raw += bd.kl_raw;
      epoch_bd.kl_contribution += bd.kl_contribution;
      epoch_bd.centroid += bd.centroid;
      epoch_bd.l2 += bd.l2;
      epoch_bd.lambda = bd.lambda;
      ++batches;
    }
    if (batches > 0) {
      epoch_bd.rating /= batches;
      epoch_bd.recon /= batches;
      epoch_bd.kl_raw /= batches;
      epoch_bd.kl_contribution /= batches;
      epoch_bd.centroid /= batches;
      epoch_bd.l2 /= batches;
    }
    epoch_bd.total = epoch_bd.rating + epoch_bd.recon + epoch_bd.kl_contribution +
                     epoch_bd.centroid + epoch_bd.l2;

    EpochStats stats;
    stats.epoch = epoch;
    stats.train = epoch_bd;
    stats.val_rmse =
        val_pairs.empty() ? std::sqrt(epoch_bd.rating) : evaluate_rmse(val_pairs);
    history.push_back(stats);

    if (stats.val_rmse < best_val) {
      best_val = stats.val_rmse;
      best_values = params_.snapshot_values();
    }
  }

  params_.restore_values(best_values);
  return history;
}

}  // namespace giant
