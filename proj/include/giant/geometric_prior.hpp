#pragma once

#include <cstdint>
#include <vector>

#include "giant/types.hpp"

namespace giant {

// K-means clustering of node embeddings plus the Gaussian-kernel width
// used to turn distances into a distribution over clusters.
struct ClusterModel {
  Matrix centroids;             // K x d
  double alpha = 1.0;           // kernel width, > 0
  std::vector<int> assignment;  // nearest centroid per fitted point
  double inertia = 0.0;         // sum of squared point-to-centroid distances

  int clusters() const { return static_cast<int>(centroids.rows()); }
  int dim() const { return static_cast<int>(centroids.cols()); }
};

// Lloyd's algorithm with k-means++ seeding. Stops at an assignment fixed
// point or after max_iter sweeps; an emptied cluster is re-seeded from the
// point farthest from its assigned centroid.
ClusterModel kmeans(const Matrix& points, int k, std::uint64_t seed,
                    int max_iter = 300);

// rho_k = exp(-||e - C_k||^2 / 2 alpha^2), normalized over k; evaluated in
// log space with max-subtraction.
Vector prior_rho(const Vector& embedding, const ClusterModel& model);

enum class AlphaStrategy { fixed, median_heuristic };

// fixed(v) returns v (must be > 0); median_heuristic returns the median
// point-to-assigned-centroid distance floored at 1e-6. Stores the result
// on the model and returns it.
double fit_alpha(const Matrix& points, ClusterModel& model,
                 AlphaStrategy strategy, double fixed_value = 1.0);

}  // namespace giant
