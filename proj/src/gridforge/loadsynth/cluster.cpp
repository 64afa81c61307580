#include "gridforge/loadsynth/cluster.hpp"

#include <cmath>
#include <limits>

#include "gridforge/common/error.hpp"

namespace gridforge::loadsynth {

double davies_bouldin(const Mat& profiles, const Mat& centroids,
                      const std::vector<int>& memberships) {
  const int k = static_cast<int>(centroids.rows());
  Vec sigma = Vec::Zero(k);
  Vec count = Vec::Zero(k);
  for (int i = 0; i < profiles.rows(); ++i) {
    const int c = memberships[i];
    sigma[c] += (profiles.row(i) - centroids.row(c)).norm();
    count[c] += 1.0;
  }
  for (int c = 0; c < k; ++c)
    if (count[c] > 0) sigma[c] /= count[c];

  double total = 0.0;
  for (int i = 0; i < k; ++i) {
    double worst = 0.0;
    for (int j = 0; j < k; ++j) {
      if (i == j) continue;
      const double dist = (centroids.row(i) - centroids.row(j)).norm();
      if (dist < 1e-12)
        throw DataError("davies_bouldin: coincident centroids (degenerate clustering)");
      worst = std::max(worst, (sigma[i] + sigma[j]) / dist);
    }
    total += worst;
  }
  return total / k;
}

namespace {

double wcss(const Mat& profiles, const Mat& centroids, const std::vector<int>& memberships) {
  double total = 0.0;
  for (int i = 0; i < profiles.rows(); ++i)
    total += (profiles.row(i) - centroids.row(memberships[i])).squaredNorm();
  return total;
}

// k-means++ seeding.
Mat seed_centroids(const Mat& profiles, int k, Rng& rng) {
  const int n = static_cast<int>(profiles.rows());
  Mat centroids(k, profiles.cols());
  centroids.row(0) = profiles.row(rng.uniform_int(n));
  Vec dist2 = (profiles.rowwise() - centroids.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = dist2.sum();
    int pick = 0;
    if (total <= 0.0) {
      pick = rng.uniform_int(n);
    } else {
      double target = rng.uniform() * total;
      for (; pick < n - 1; ++pick) {
        target -= dist2[pick];
        if (target <= 0.0) break;
      }
    }
    centroids.row(c) = profiles.row(pick);
    dist2 = dist2.cwiseMin((profiles.rowwise() - centroids.row(c)).rowwise().squaredNorm());
  }
  return centroids;
}

}  // namespace

ClusterModel kmeans(const Mat& profiles, int k, int restarts, std::uint64_t seed) {
  const int n = static_cast<int>(profiles.rows());
  if (k < 1 || k > n) throw ConfigError("kmeans: k out of range");

  ClusterModel best;
  double best_wcss = std::numeric_limits<double>::infinity();
  for (int restart = 0; restart < restarts; ++restart) {
    Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(restart));
    Mat centroids = seed_centroids(profiles, k, rng);
    std::vector<int> memberships(n, 0);
    for (int sweep = 0; sweep < 200; ++sweep) {
      bool changed = false;
      for (int i = 0; i < n; ++i) {
        int arg = 0;
        double best_d = (profiles.row(i) - centroids.row(0)).squaredNorm();
        for (int c = 1; c < k; ++c) {
          const double d = (profiles.row(i) - centroids.row(c)).squaredNorm();
          if (d < best_d) {
            best_d = d;
            arg = c;
          }
        }
        if (memberships[i] != arg) {
          memberships[i] = arg;
          changed = true;
        }
      }
      Mat sums = Mat::Zero(k, profiles.cols());
      Vec counts = Vec::Zero(k);
      for (int i = 0; i < n; ++i) {
        sums.row(memberships[i]) += profiles.row(i);
        counts[memberships[i]] += 1.0;
      }
      for (int c = 0; c < k; ++c) {
        if (counts[c] > 0) {
          centroids.row(c) = sums.row(c) / counts[c];
        } else {
          // Re-seed an empty cluster at the farthest point from its centroid.
          int far = 0;
          double far_d = -1.0;
          for (int i = 0; i < n; ++i) {
            const double d = (profiles.row(i) - centroids.row(memberships[i])).squaredNorm();
            if (d > far_d) {
              far_d = d;
              far = i;
            }
          }
          centroids.row(c) = profiles.row(far);
          changed = true;
        }
      }
      if (!changed) break;
    }
    const double score = wcss(profiles, centroids, memberships);
    if (score < best_wcss) {
      best_wcss = score;
      best.k = k;
      best.centroids = centroids;
      best.memberships = memberships;
    }
  }
  best.dbi = k >= 2 ? davies_bouldin(profiles, best.centroids, best.memberships) : 0.0;
  return best;
}

ClusterModel cluster_profiles(const Mat& profiles, int k_min, int k_max,
                              std::uint64_t seed, int restarts) {
  const int n = static_cast<int>(profiles.rows());
  if (n < 2) throw InvalidInputError("cluster_profiles: need at least 2 profiles");
  if (k_min < 2 || k_max > n - 1 || k_min > k_max)
    throw ConfigError("cluster_profiles: k range must lie inside [2, n_profiles - 1]");
  // All-identical profiles have zero between-cluster distance for every k.
  bool identical = true;
  for (int i = 1; i < n && identical; ++i)
    identical = (profiles.row(i) - profiles.row(0)).norm() < 1e-12;
  if (identical) throw DataError("cluster_profiles: all profiles identical");

  ClusterModel best;
  double best_dbi = std::numeric_limits<double>::infinity();
  for (int k = k_min; k <= k_max; ++k) {
    ClusterModel model;
    try {
      model = kmeans(profiles, k, restarts, seed + static_cast<std::uint64_t>(k));
    } catch (const DataError&) {
      continue;  // degenerate at this k (coincident centroids); try others
    }
    if (model.dbi < best_dbi) {
      best_dbi = model.dbi;
      best = model;
    }
  }
  if (best.k == 0) throw DataError("cluster_profiles: no k produced a valid clustering");
  return best;
}

}  // namespace gridforge::loadsynth
