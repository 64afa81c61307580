// k-means clustering with Davies-Bouldin model selection.
#pragma once

#include <cstdint>
#include <vector>

#include "gridforge/common/linalg.hpp"
#include "gridforge/common/rng.hpp"

namespace gridforge::loadsynth {

struct ClusterModel {
  int k = 0;
  Mat centroids;                 // k x d
  std::vector<int> memberships;  // one per profile row
  double dbi = 0.0;
};

// DBI = (1/k) sum_i max_{j != i} (sigma_i + sigma_j) / d(c_i, c_j), where
// sigma is the mean member-to-centroid distance. Throws when two centroids
// coincide (the ratio is undefined).
double davies_bouldin(const Mat& profiles, const Mat& centroids,
                      const std::vector<int>& memberships);

// Lloyd k-means with k-means++ seeding; `restarts` independent seeded runs,
// the best by within-cluster sum of squares wins.
ClusterModel kmeans(const Mat& profiles, int k, int restarts, std::uint64_t seed);

// Runs kmeans for every k in [k_min, k_max] and returns the model minimizing
// the DBI. k range must fit inside [2, n_profiles - 1].
ClusterModel cluster_profiles(const Mat& profiles, int k_min, int k_max,
                              std::uint64_t seed = 1, int restarts = 20);

}  // namespace gridforge::loadsynth
