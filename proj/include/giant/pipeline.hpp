#pragma once

#include <memory>
#include <string>
#include <vector>

#include "giant/config.hpp"
#include "giant/corpus.hpp"
#include "giant/evaluation.hpp"
#include "giant/explainer.hpp"
#include "giant/geometric_prior.hpp"
#include "giant/interaction_graph.hpp"
#include "giant/model.hpp"
#include "json.hpp"

namespace giant {

// Artifact file names inside the run's output directory.
namespace artifact {
inline constexpr const char* corpus_cache = "corpus.bin";
inline constexpr const char* corpus_stats = "corpus_stats.json";
inline constexpr const char* graph_checkpoint = "graph.ckpt";
inline constexpr const char* user_clusters = "clusters_user.ckpt";
inline constexpr const char* item_clusters = "clusters_item.ckpt";
inline constexpr const char* model_checkpoint = "model.ckpt";
inline constexpr const char* history = "history.csv";
inline constexpr const char* metrics_csv = "metrics.csv";
inline constexpr const char* metrics_json = "metrics.json";
inline constexpr const char* comprehensiveness_csv = "comprehensiveness.csv";
}  // namespace artifact

std::string artifact_path(const RunConfig& config, const char* name);

// The corpus stage's in-memory product: filtered + split records, the
// vocabulary, and tokenized train reviews.
struct CorpusArtifact {
  SplitCorpus corpus;
  Vocabulary vocab;
  IngestStats stats;
  int max_len = 0;
  std::vector<std::vector<int>> train_tokens;  // aligned with corpus.train
};

struct PriorArtifact {
  ClusterModel users;
  ClusterModel items;
};

struct ModelArtifact {
  std::unique_ptr<GiantModel> model;
  nlohmann::json manifest;
};

// Stage drivers. run_* computes and writes artifacts; load_* reads them.
CorpusArtifact run_ingest(const RunConfig& config);
CorpusArtifact load_corpus_artifact(const RunConfig& config);

NodeEmbeddingTable run_graph(const RunConfig& config,
                             const CorpusArtifact& corpus);
NodeEmbeddingTable load_graph(const RunConfig& config);

PriorArtifact run_cluster(const RunConfig& config,
                          const NodeEmbeddingTable& graph);
PriorArtifact load_clusters(const RunConfig& config);

ModelArtifact run_train(const RunConfig& config, const CorpusArtifact& corpus,
                        const NodeEmbeddingTable& graph,
                        const PriorArtifact& priors);
ModelArtifact load_model(const RunConfig& config, const CorpusArtifact& corpus);

// Frozen-model per-entity latents plus exact per-pair test predictions;
// shared by evaluate and explain. Entity latents encode each entity's full
// train review set; per-pair values come from the exact forward pass with
// the pair's own review excluded.
struct EvalContext {
  Matrix user_mu, item_mu;  // per entity latent means (K columns)
  std::vector<std::pair<int, int>> test_pairs;  // dense (user, item)
  std::vector<double> test_ratings;
  std::vector<double> test_predictions;
  std::vector<LatentPair> test_latents;
  double mean_prediction = 0.0;
};

EvalContext build_eval_context(const RunConfig& config,
                               const CorpusArtifact& corpus,
                               const GiantModel& model);

struct MetricBundle {
  double rmse = 0.0, mae = 0.0;  // x100
  RankResult ranking;
  double diversity_user = 0.0, diversity_item = 0.0, diversity_max = 0.0;
  std::vector<ComprehensivenessPoint> comprehensiveness;
  double coherence_user = 0.0, coherence_item = 0.0;
  bool coherence_user_flagged = false, coherence_item_flagged = false;
};

MetricBundle run_evaluate(const RunConfig& config, const CorpusArtifact& corpus,
                          const GiantModel& model);

Explanation run_explain(const RunConfig& config, const CorpusArtifact& corpus,
                        const GiantModel& model, const std::string& user_id,
                        const std::string& item_id);

// Helpers reused by tests and the acceptance suite.
std::vector<PairExample> make_pair_examples(
    const CorpusArtifact& corpus, const NodeEmbeddingTable& graph,
    const PriorArtifact& priors, const std::vector<InteractionRecord>& records,
    bool exclude_pair_reviews);

void write_history_csv(const std::string& path,
                       const std::vector<EpochStats>& history);
void write_metrics(const RunConfig& config, const MetricBundle& metrics);

}  // namespace giant
