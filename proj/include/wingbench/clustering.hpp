#pragma once

#include "wingbench/dimred.hpp"
#include "wingbench/types.hpp"

#include <cstdint>
#include <vector>

namespace wingbench {

// Features concatenated with per-curve poly coefficients, each column
// standardized (zero-variance columns pass through unscaled).
struct ClusterMatrix {
  Mat data;
  Vec mean;
  Vec scale;
};

ClusterMatrix build_cluster_matrix(const Dataset& ds, const PiecewisePolyModel& poly);

struct KMeansModel {
  int k = 0;
  Mat centroids;  // k x d, in standardized coordinates
  double distortion = 0.0;
  Vec mean;   // standardization applied by assign_cluster
  Vec scale;
  std::vector<int> labels;               // final training assignment
  std::vector<double> distortion_history;  // one entry per Lloyd pass
};

// Seeded k-means++ initialization followed by Lloyd iterations until the
// largest centroid shift drops below tol; empty clusters are re-seeded from
// the point farthest from its centroid.  Input is assumed standardized, so
// the stored mean/scale are identity until the caller overrides them.
KMeansModel kmeans_fit(const Mat& matrix, int k, uint64_t seed, int max_iter = 300,
                       double tol = 1e-6);

struct ElbowResult {
  int k = 0;
  std::vector<int> k_values;
  std::vector<double> distortions;
};

// Best-of-5 restarts per k; picks the k maximizing the second difference of
// the distortion curve.  Needs at least three k values.
ElbowResult elbow_select(const Mat& matrix, const std::vector<int>& k_range, uint64_t seed);

// Standardizes rows with the model's stored vectors, then labels each row by
// its nearest centroid (ties to the lowest index).
std::vector<int> assign_cluster(const KMeansModel& model, const Mat& rows);

}  // namespace wingbench
