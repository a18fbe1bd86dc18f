#include "giant/geometric_prior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "giant/rng.hpp"

namespace giant {
namespace {

int nearest_centroid(const Matrix& centroids, const Vector& p, double* dist_sq) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Index k = 0; k < centroids.rows(); ++k) {
    const double d = (centroids.row(k).transpose() - p).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(k);
    }
  }
  if (dist_sq) *dist_sq = best_d;
  return best;
}

}  // namespace

ClusterModel kmeans(const Matrix& points, int k, std::uint64_t seed, int max_iter) {
  const Index n = points.rows();
  if (k < 1 || n < k)
    throw std::invalid_argument("kmeans requires at least k points");

  Rng rng(seed);
  ClusterModel model;
  model.centroids.resize(k, points.cols());

  // k-means++ seeding: first centroid uniform, then D^2-weighted picks.
  std::vector<double> dist_sq(n, std::numeric_limits<double>::infinity());
  const Index first = static_cast<Index>(rng.next_below(n));
  model.centroids.row(0) = points.row(first);
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double d =
          (points.row(i) - model.centroids.row(c - 1)).squaredNorm();
      dist_sq[i] = std::min(dist_sq[i], d);
      total += dist_sq[i];
    }
    Index chosen = 0;
    if (total > 0.0) {
      const double target = rng.next_double() * total;
      double acc = 0.0;
      for (Index i = 0; i < n; ++i) {
        acc += dist_sq[i];
        if (acc >= target) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = static_cast<Index>(rng.next_below(n));
    }
    model.centroids.row(c) = points.row(chosen);
  }

  model.assignment.assign(n, -1);
  for (int iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    for (Index i = 0; i < n; ++i) {
      const int a = nearest_centroid(model.centroids, points.row(i).transpose(),
                                     nullptr);
      if (a != model.assignment[i]) {
        model.assignment[i] = a;
        changed = true;
      }
    }

    Matrix sums = Matrix::Zero(k, points.cols());
    std::vector<int> counts(k, 0);
    for (Index i = 0; i < n; ++i) {
      sums.row(model.assignment[i]) += points.row(i);
      ++counts[model.assignment[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        model.centroids.row(c) = sums.row(c) / counts[c];
      } else {
        // Re-seed an emptied cluster from the farthest point.
        Index far = 0;
        double far_d = -1.0;
        for (Index i = 0; i < n; ++i) {
          const double d = (points.row(i) -
                            model.centroids.row(model.assignment[i]))
                               .squaredNorm();
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        model.centroids.row(c) = points.row(far);
        model.assignment[far] = c;
        changed = true;
      }
    }
    if (!changed) break;
  }

  // Final assignment pass so assignment matches the last centroid update.
  model.inertia = 0.0;
  for (Index i = 0; i < n; ++i) {
    double d = 0.0;
    model.assignment[i] =
        nearest_centroid(model.centroids, points.row(i).transpose(), &d);
    model.inertia += d;
  }
  return model;
}

Vector prior_rho(const Vector& embedding, const ClusterModel& model) {
  if (embedding.size() != model.centroids.cols())
    throw std::invalid_argument("prior_rho: embedding dimension mismatch");
  const int k = model.clusters();
  Vector logits(k);
  const double denom = 2.0 * model.alpha * model.alpha;
  for (int c = 0; c < k; ++c)
    logits(c) = -(embedding - model.centroids.row(c).transpose()).squaredNorm() / denom;
  const double m = logits.maxCoeff();
  Vector rho = (logits.array() - m).exp();
  rho /= rho.sum();
  return rho;
}

double fit_alpha(const Matrix& points, ClusterModel& model,
                 AlphaStrategy strategy, double fixed_value) {
  if (strategy == AlphaStrategy::fixed) {
    if (!(fixed_value > 0.0))
      throw std::invalid_argument("fixed alpha must be > 0");
    model.alpha = fixed_value;
    return model.alpha;
  }
  if (static_cast<Index>(model.assignment.size()) != points.rows())
    throw std::invalid_argument("fit_alpha: model not fitted to these points");
  std::vector<double> dists(points.rows());
  for (Index i = 0; i < points.rows(); ++i)
    dists[i] =
        (points.row(i) - model.centroids.row(model.assignment[i])).norm();
  std::nth_element(dists.begin(), dists.begin() + dists.size() / 2, dists.end());
  const double median = dists[dists.size() / 2];
  model.alpha = std::max(median, 1e-6);
  return model.alpha;
}

}  // namespace giant
