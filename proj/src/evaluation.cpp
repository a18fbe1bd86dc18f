#include "giant/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "giant/rng.hpp"

namespace giant {

std::pair<double, double> rmse_mae(
    const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.empty()) throw std::invalid_argument("rmse_mae: empty input");
  double sq = 0.0, abs = 0.0;
  for (const auto& [pred, truth] : pairs) {
    sq += (pred - truth) * (pred - truth);
    abs += std::abs(pred - truth);
  }
  const double n = static_cast<double>(pairs.size());
  return {100.0 * std::sqrt(sq / n), 100.0 * (abs / n)};
}

RankResult rank_metrics(
    const std::function<double(int, int)>& score,
    const std::vector<std::pair<int, int>>& test_pairs, int num_items,
    const std::vector<std::unordered_set<int>>& user_interacted,
    std::uint64_t seed, int negatives, int cutoff) {
  if (test_pairs.empty()) throw std::invalid_argument("rank_metrics: no pairs");

  RankResult result;
  double hits = 0.0, ndcg = 0.0;
  for (std::size_t p = 0; p < test_pairs.size(); ++p) {
    const auto [user, item] = test_pairs[p];
    const auto& seen = user_interacted[user];

    std::vector<int> eligible;
    eligible.reserve(num_items);
    for (int i = 0; i < num_items; ++i)
      if (i != item && !seen.count(i)) eligible.push_back(i);

    std::vector<int> sampled;
    Rng rng(seed ^ static_cast<std::uint64_t>(p));
    if (static_cast<int>(eligible.size()) <= negatives) {
      sampled = eligible;
      if (static_cast<int>(eligible.size()) < negatives)
        result.insufficient_negatives = true;
    } else {
      // Partial Fisher-Yates over the eligible pool.
      for (int j = 0; j < negatives; ++j) {
        const std::size_t pick =
            j + rng.next_below(eligible.size() - static_cast<std::size_t>(j));
        std::swap(eligible[j], eligible[pick]);
        sampled.push_back(eligible[j]);
      }
    }

    const double true_score = score(user, item);
    // Rank of the true item among itself plus the negatives; ties break by
    // item index (lower index wins).
    int rank = 1;
    for (const int neg : sampled) {
      const double s = score(user, neg);
      if (s > true_score || (s == true_score && neg < item)) ++rank;
    }
    if (rank <= cutoff) {
      hits += 1.0;
      ndcg += 1.0 / std::log2(static_cast<double>(rank) + 1.0);
    }
  }
  result.hit_ratio_10 = hits / static_cast<double>(test_pairs.size());
  result.ndcg_10 = ndcg / static_cast<double>(test_pairs.size());
  return result;
}

double diversity(const Matrix& latents) {
  if (latents.rows() < 1) throw std::invalid_argument("diversity: no samples");
  std::vector<double> counts(latents.cols(), 0.0);
  for (Index i = 0; i < latents.rows(); ++i) {
    Index arg = 0;
    latents.row(i).maxCoeff(&arg);
    counts[arg] += 1.0;
  }
  const double n = static_cast<double>(latents.rows());
  double h = 0.0;
  for (const double c : counts) {
    if (c <= 0.0) continue;
    const double pk = c / n;
    h -= pk * std::log(pk);
  }
  return h;
}

namespace {

// Replace the chosen dimensions with the vector's mean value.
Vector replace_dims(const Vector& z, const std::vector<int>& dims) {
  Vector out = z;
  const double mean = z.mean();
  for (const int d : dims) out(d) = mean;
  return out;
}

std::vector<int> top_k_dims(const Vector& z, int k) {
  std::vector<int> idx(z.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (z(a) != z(b)) return z(a) > z(b);
    return a < b;
  });
  idx.resize(k);
  return idx;
}

std::vector<int> random_k_dims(int dim, int k, Rng& rng) {
  std::vector<int> idx(dim);
  std::iota(idx.begin(), idx.end(), 0);
  for (int j = 0; j < k; ++j) {
    const std::size_t pick =
        j + rng.next_below(static_cast<std::size_t>(dim - j));
    std::swap(idx[j], idx[pick]);
  }
  idx.resize(k);
  return idx;
}

}  // namespace

std::vector<ComprehensivenessPoint> comprehensiveness(
    const std::function<double(int, int, const Vector&, const Vector&)>& rate,
    const std::vector<LatentPair>& pairs, const std::vector<int>& ks,
    std::uint64_t seed) {
  std::vector<ComprehensivenessPoint> out;
  if (pairs.empty()) return out;
  const double n = static_cast<double>(pairs.size());

  for (const int k : ks) {
    ComprehensivenessPoint point;
    point.k = k;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const auto& lp = pairs[p];
      const double base = rate(lp.user, lp.item, lp.z_user, lp.z_item);
      if (k > 0) {
        const Vector zu_top = replace_dims(lp.z_user, top_k_dims(lp.z_user, k));
        const Vector zi_top = replace_dims(lp.z_item, top_k_dims(lp.z_item, k));
        const double changed = rate(lp.user, lp.item, zu_top, zi_top);
        point.top_change += (base - changed) * (base - changed);

        Rng rng(seed ^ (0x9E3779B97F4A7C15ULL * (p + 1)) ^
                static_cast<std::uint64_t>(k));
        const Vector zu_rnd = replace_dims(
            lp.z_user, random_k_dims(static_cast<int>(lp.z_user.size()), k, rng));
        const Vector zi_rnd = replace_dims(
            lp.z_item, random_k_dims(static_cast<int>(lp.z_item.size()), k, rng));
        const double randomized = rate(lp.user, lp.item, zu_rnd, zi_rnd);
        point.random_change += (base - randomized) * (base - randomized);
      }
    }
    point.top_change /= n;
    point.random_change /= n;
    point.relative = point.top_change - point.random_change;
    out.push_back(point);
  }
  return out;
}

CoherenceResult cluster_coherence(const Matrix& review_vectors,
                                  const std::vector<int>& cluster_ids,
                                  int num_clusters) {
  if (static_cast<Index>(cluster_ids.size()) != review_vectors.rows())
    throw std::invalid_argument("cluster_coherence: id/vector count mismatch");

  std::vector<std::vector<int>> members(num_clusters);
  for (std::size_t i = 0; i < cluster_ids.size(); ++i)
    if (cluster_ids[i] >= 0 && cluster_ids[i] < num_clusters)
      members[cluster_ids[i]].push_back(static_cast<int>(i));

  double total = 0.0;
  int counted_clusters = 0;
  for (const auto& m : members) {
    if (m.size() < 2) continue;
    double sum = 0.0;
    int pairs = 0;
    for (std::size_t a = 0; a < m.size(); ++a) {
      const Vector va = review_vectors.row(m[a]).transpose();
      const double na = va.norm();
      for (std::size_t b = a + 1; b < m.size(); ++b) {
        const Vector vb = review_vectors.row(m[b]).transpose();
        const double nb = vb.norm();
        const double denom = na * nb;
        sum += denom > 0.0 ? va.dot(vb) / denom : 0.0;
        ++pairs;
      }
    }
    total += sum / pairs;
    ++counted_clusters;
  }

  CoherenceResult result;
  if (counted_clusters == 0) {
    result.all_singleton = true;
    result.value = 0.0;
  } else {
    result.value = total / counted_clusters;
  }
  return result;
}

}  // namespace giant
