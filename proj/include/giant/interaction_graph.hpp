#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "giant/corpus.hpp"
#include "giant/rng.hpp"
#include "giant/types.hpp"

namespace giant {

enum class ThresholdMode { corpus_mean, item_mean };

// User-item bipartite graph. Node k is user k for k < num_users, otherwise
// item (k - num_users). The symmetric-normalized adjacency carries
// 1/sqrt(deg(u) deg(i)) on every edge; isolated nodes keep zero rows.
struct BipartiteGraph {
  int num_users = 0;
  int num_items = 0;
  std::vector<std::pair<int, int>> edges;  // (user, item), deduplicated
  std::vector<int> degree;                 // per node, m + n entries
  SparseMatrix norm_adjacency;             // (m+n) x (m+n), symmetric

  int num_nodes() const { return num_users + num_items; }
  int item_node(int item) const { return num_users + item; }
};

// Edge (u,i) exists iff rating(u,i) strictly exceeds the threshold:
// the corpus-wide mean rating, or the item's mean rating, per mode.
// Duplicate (u,i) pairs are averaged before thresholding.
BipartiteGraph build_graph(const std::vector<InteractionRecord>& records,
                           const SplitCorpus& corpus, ThresholdMode mode);

// E_final = mean of E^(0..layers) with E^(k+1) = A_hat E^(k); no feature
// transform, no nonlinearity.
Matrix propagate(const BipartiteGraph& graph, const Matrix& e0, int layers);

struct NodeEmbeddingTable {
  Matrix e0;       // (m+n) x d learnable base embeddings
  Matrix e_final;  // propagated embeddings
  int layers = 2;
  int num_users = 0;
  int num_items = 0;

  Vector user_embedding(int u) const { return e_final.row(u).transpose(); }
  Vector item_embedding(int i) const {
    return e_final.row(num_users + i).transpose();
  }
};

struct GraphTrainConfig {
  int dim = 64;
  int layers = 2;
  double lr = 0.05;
  double l2 = 1e-4;
  int epochs = 200;
  int patience = 5;
  double validation_fraction = 0.1;
  std::uint64_t seed = 1;
};

// One BPR step: sample (u, i+, i-) with i+ a neighbor of u and i- a uniform
// non-neighbor, take one SGD step on
//   -ln sigmoid(s(u,i+) - s(u,i-)) + l2 ||E0||^2
// with s the dot product of propagated rows. Returns the sampled loss.
// Users whose neighborhood covers all items are resampled (counted in
// *full_neighborhood_resamples when given).
double bpr_step(const BipartiteGraph& graph, NodeEmbeddingTable& table,
                Rng& rng, double lr, double l2,
                std::size_t* full_neighborhood_resamples = nullptr);

// BPR training with a seeded 10% edge holdout; early-stops on best
// validation recall@10 and returns the best-epoch embeddings.
NodeEmbeddingTable train_graph(const BipartiteGraph& graph,
                               const GraphTrainConfig& config);

}  // namespace giant
