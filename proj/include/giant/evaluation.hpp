#pragma once

#include <cstdint>
#include <functional>
#include <unordered_set>
#include <utility>
#include <vector>

#include "giant/types.hpp"

namespace giant {

// Root mean squared / mean absolute error over (prediction, truth) pairs,
// reported x100 to match percentage-style tables.
std::pair<double, double> rmse_mae(
    const std::vector<std::pair<double, double>>& pairs);

struct RankResult {
  double hit_ratio_10 = 0.0;
  double ndcg_10 = 0.0;
  bool insufficient_negatives = false;  // some pair had < negatives eligible
};

// Ranks each test pair's true item against `negatives` sampled items the
// user never interacted with (any split); HitRatio@cutoff and binary-gain
// NDCG@cutoff. Ties break by item index; sampling is seeded per pair with
// seed ^ pair index.
RankResult rank_metrics(
    const std::function<double(int user, int item)>& score,
    const std::vector<std::pair<int, int>>& test_pairs, int num_items,
    const std::vector<std::unordered_set<int>>& user_interacted,
    std::uint64_t seed, int negatives = 100, int cutoff = 10);

// Entropy (natural log) of the argmax-dimension assignment fractions.
double diversity(const Matrix& latents);

struct ComprehensivenessPoint {
  int k = 0;
  double top_change = 0.0;
  double random_change = 0.0;
  double relative = 0.0;  // top_change - random_change
};

// Squared rating change after replacing the k largest-value latent
// dimensions (per side) with that latent vector's mean, averaged over
// pairs; plus a random-k-removal control.
struct LatentPair {
  int user = 0, item = 0;
  Vector z_user, z_item;
};
std::vector<ComprehensivenessPoint> comprehensiveness(
    const std::function<double(int user, int item, const Vector& z_user,
                               const Vector& z_item)>& rate,
    const std::vector<LatentPair>& pairs, const std::vector<int>& ks,
    std::uint64_t seed);

struct CoherenceResult {
  double value = 0.0;
  bool all_singleton = false;  // undefined; value reported as 0
};

// Mean pairwise cosine similarity of review vectors within each cluster,
// averaged over clusters with at least two reviews.
CoherenceResult cluster_coherence(const Matrix& review_vectors,
                                  const std::vector<int>& cluster_ids,
                                  int num_clusters);

}  // namespace giant
