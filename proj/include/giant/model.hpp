#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "giant/geometric_prior.hpp"
#include "giant/numerics.hpp"
#include "giant/review_encoder.hpp"
#include "giant/rng.hpp"
#include "giant/types.hpp"

namespace giant {

enum class Variant { giant, autoencoder, stand_prior, indiv_prior };
enum class EtaForm { softmax, literal };

Variant variant_from_string(const std::string& s);
std::string to_string(Variant v);
EtaForm eta_form_from_string(const std::string& s);
std::string to_string(EtaForm f);

struct ModelConfig {
  EncoderConfig encoder;
  int latent_dim = 64;  // K; equals the cluster count of both prior models
  int graph_dim = 64;   // d of the graph embeddings (indiv_prior input)
  double tau = 2.0;
  Variant variant = Variant::giant;
  EtaForm eta_form = EtaForm::softmax;
  double logvar_min = -10.0;
  double logvar_max = 10.0;
};

struct TrainConfig {
  double beta = 0.01;
  double l2 = 0.001;
  double lr = 0.001;
  int batch = 32;
  int epochs = 10;
  std::uint64_t seed = 1;
  double centroid_phase = 0.5;   // centroid reg active while progress < phase
  double anneal_start = 0.5;     // KL anneal window
  double anneal_end = 0.75;
  double centroid_weight = 1.0;  // 0 turns the centroid term off (ablation)
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
};

// KL weight schedule: 0 before `start`, linear to 1 at `end`, 1 afterwards.
double anneal_lambda(double progress, double start = 0.5, double end = 0.75);

// Eq-style discrete KL: sum_k eta_k ln(eta_k / rho_k), with rho floored at
// 1e-12 and 0 ln 0 := 0. Non-negative for simplex inputs.
double kl_term(const Vector& eta, const Vector& rho);

// Mean over dimensions of the squared reconstruction error.
double recon_loss(const Vector& x_bar, const Vector& x);

// sum_k ||W_en column k - centroid k||^2.
double centroid_reg(const Matrix& encoder_weight, const Matrix& centroids);

// One training/evaluation example. Token sequences point into the
// pipeline's tokenized corpus; priors are precomputed per entity.
struct PairExample {
  int user = -1;
  int item = -1;
  std::vector<const std::vector<int>*> user_tokens;
  std::vector<const std::vector<int>*> item_tokens;
  double rating = 0.0;
  Vector rho_user, rho_item;      // geometric prior (giant variant)
  Vector graph_user, graph_item;  // graph embeddings (indiv_prior variant)
};

struct SideCache {
  std::vector<ReviewCache> review_caches;
  AggregateCache agg;
  bool cold = false;  // no usable reviews; x is the zero vector
  Vector x;
  Vector mu, logvar_raw, logvar, noise, z;
  Vector eta_pre, eta;
  double literal_inv_sum = 0.0;
  Vector prior_mean;  // indiv_prior
  Vector dec_pre, x_bar;
  double kl = 0.0, recon = 0.0;
};

struct PairCache {
  SideCache user, item;
  TextEncoder::IdFeatures ids;
  Vector zeta_user, zeta_item, prod, relu_prod;
  double r_hat = 0.0;
};

struct PairOutput {
  double r_hat = 0.0;
  Vector z_user, z_item;
  Vector eta_user, eta_item;
  double recon_user = 0.0, recon_item = 0.0;
  double kl_user = 0.0, kl_item = 0.0;
  bool cold_user = false, cold_item = false;
};

struct LossBreakdown {
  double rating = 0.0;
  double recon = 0.0;
  double kl_raw = 0.0;           // unweighted KL mean
  double kl_contribution = 0.0;  // lambda * beta * kl_raw
  double centroid = 0.0;
  double l2 = 0.0;
  double lambda = 0.0;
  double total = 0.0;
};

struct EpochStats {
  int epoch = 0;
  LossBreakdown train;
  double val_rmse = 0.0;
};

struct PriorContext {
  const ClusterModel* user_clusters = nullptr;
  const ClusterModel* item_clusters = nullptr;
};

// The variational recommender: shared-weight encoder/decoder over text
// features, cluster-posterior head, rating head, and the joint objective
// with KL annealing and the prior-centralisation term.
class GiantModel {
 public:
  GiantModel(const ModelConfig& config, int vocab_size, int num_users,
             int num_items, const Matrix& word_init, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  TextEncoder& encoder() { return encoder_; }
  const TextEncoder& encoder() const { return encoder_; }

  // noise == nullptr gives the deterministic evaluation pass (z = mu); the
  // autoencoder variant never draws noise.
  PairOutput forward(const PairExample& example, Rng* noise,
                     PairCache* cache = nullptr) const;

  void backward(const PairExample& example, PairCache& cache, double d_rhat,
                double recon_weight, double kl_weight);

  // Entity-level helpers for frozen-model evaluation.
  Vector encode_entity(const std::vector<const std::vector<int>*>& tokens) const;
  Vector encode_single_review(const std::vector<int>& tokens) const;
  Vector latent_mean(const Vector& x) const;
  Vector posterior_eta(const Vector& z) const;
  double rate_from_latents(int user, int item, const Vector& z_user,
                           const Vector& z_item) const;

  double total_loss(const std::vector<PairExample>& batch, double progress,
                    const TrainConfig& config, const PriorContext& priors,
                    std::uint64_t noise_seed, bool with_grads,
                    LossBreakdown* breakdown = nullptr);

  // Mini-batch Adam over the train pairs; logs one EpochStats row per
  // epoch and restores the best-validation-RMSE parameters before
  // returning. Throws NumericalError naming the term on divergence.
  std::vector<EpochStats> train(const std::vector<PairExample>& train_pairs,
                                const std::vector<PairExample>& val_pairs,
                                const TrainConfig& config,
                                const PriorContext& priors);

  double evaluate_rmse(const std::vector<PairExample>& pairs) const;

 private:
  void forward_side(const std::vector<const std::vector<int>*>& tokens,
                    const Vector& rho, const Vector& graph_e, Rng* noise,
                    SideCache& side) const;
  void backward_side(const std::vector<const std::vector<int>*>& tokens,
                     const Vector& rho, const Vector& graph_e, SideCache& side,
                     const Vector& dz_external, double recon_weight,
                     double kl_weight);

  ModelConfig config_;
  ParamStore params_;
  Rng init_rng_;  // consumed during construction only
  TextEncoder encoder_;
  ParamBlock* enc_w_mu_;
  ParamBlock* enc_b_mu_;
  ParamBlock* enc_w_lv_;
  ParamBlock* enc_b_lv_;
  ParamBlock* phi_w_;
  ParamBlock* phi_b_;
  ParamBlock* dec_w_;
  ParamBlock* dec_b_;
  ParamBlock* head_user_w_;
  ParamBlock* head_item_w_;
  ParamBlock* head_out_w_;
  ParamBlock* head_out_b_;
  ParamBlock* prior_w_;
};

}  // namespace giant
