#include "wingbench/clustering.hpp"

#include "wingbench/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace wingbench {

ClusterMatrix build_cluster_matrix(const Dataset& ds, const PiecewisePolyModel& poly) {
  if (ds.outputs.cols() != static_cast<Eigen::Index>(poly.stations.size()))
    throw std::invalid_argument("build_cluster_matrix: station count mismatch");
  const Eigen::Index n = ds.features.rows();
  if (n < 2) throw std::invalid_argument("build_cluster_matrix: need at least 2 rows");
  const Mat coeffs = piecewise_poly_encode(poly, ds.outputs);

  ClusterMatrix cm;
  const Eigen::Index d = ds.features.cols() + coeffs.cols();
  cm.data.resize(n, d);
  cm.data.leftCols(ds.features.cols()) = ds.features;
  cm.data.rightCols(coeffs.cols()) = coeffs;

  cm.mean = cm.data.colwise().mean();
  cm.scale.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double var =
        (cm.data.col(j).array() - cm.mean[j]).matrix().squaredNorm() / static_cast<double>(n - 1);
    cm.scale[j] = var > 0.0 ? std::sqrt(var) : 1.0;
    cm.data.col(j) = (cm.data.col(j).array() - cm.mean[j]) / cm.scale[j];
  }
  return cm;
}

namespace {

double sq_dist(const Mat& a, Eigen::Index i, const Mat& b, Eigen::Index j) {
  return (a.row(i) - b.row(j)).squaredNorm();
}

Mat kmeanspp_init(const Mat& X, int k, rng::Stream& stream) {
  const Eigen::Index n = X.rows();
  Mat centroids(k, X.cols());
  centroids.row(0) = X.row(static_cast<Eigen::Index>(stream.index(static_cast<std::size_t>(n))));
  Vec d2(n);
  for (Eigen::Index i = 0; i < n; ++i) d2[i] = sq_dist(X, i, centroids, 0);
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index pick;
    if (total > 0.0) {
      double u = stream.uniform01() * total;
      pick = n - 1;
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc >= u) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(stream.index(static_cast<std::size_t>(n)));
    }
    centroids.row(c) = X.row(pick);
    for (Eigen::Index i = 0; i < n; ++i) d2[i] = std::min(d2[i], sq_dist(X, i, centroids, c));
  }
  return centroids;
}

// label each row by nearest centroid (ties low) and return the distortion
double assign_pass(const Mat& X, const Mat& centroids, std::vector<int>& labels) {
  double distortion = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    int best = 0;
    double best_d = sq_dist(X, i, centroids, 0);
    for (Eigen::Index c = 1; c < centroids.rows(); ++c) {
      const double d = sq_dist(X, i, centroids, c);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    labels[static_cast<std::size_t>(i)] = best;
    distortion += best_d;
  }
  return distortion;
}

}  // namespace

KMeansModel kmeans_fit(const Mat& matrix, int k, uint64_t seed, int max_iter, double tol) {
  const Eigen::Index n = matrix.rows();
  if (n < 1) throw std::invalid_argument("kmeans_fit: empty matrix");
  if (k < 1) throw std::invalid_argument("kmeans_fit: k must be positive");
  if (k > n) throw std::invalid_argument("kmeans_fit: k exceeds row count");
  if (max_iter < 1) throw std::invalid_argument("kmeans_fit: max_iter must be positive");
  if (!(tol >= 0.0)) throw std::invalid_argument("kmeans_fit: tol must be non-negative");

  auto stream = rng::substream(seed, 0);
  KMeansModel model;
  model.k = k;
  model.centroids = kmeanspp_init(matrix, k, stream);
  model.labels.assign(static_cast<std::size_t>(n), 0);
  model.mean = Vec::Zero(matrix.cols());
  model.scale = Vec::Ones(matrix.cols());

  for (int it = 0; it < max_iter; ++it) {
    double distortion = assign_pass(matrix, model.centroids, model.labels);

    // re-seed empty clusters from the row farthest from its centroid; the
    // move can only shrink that row's contribution, so monotonicity holds
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (int lab : model.labels) ++counts[static_cast<std::size_t>(lab)];
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) continue;
      Eigen::Index far_i = -1;
      double far_d = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const int lab = model.labels[static_cast<std::size_t>(i)];
        if (counts[static_cast<std::size_t>(lab)] <= 1) continue;  // keep donors non-empty
        const double d = sq_dist(matrix, i, model.centroids, lab);
        if (d > far_d) {
          far_d = d;
          far_i = i;
        }
      }
      if (far_i < 0) continue;  // no donor row available
      distortion -= far_d;
      --counts[static_cast<std::size_t>(model.labels[static_cast<std::size_t>(far_i)])];
      model.centroids.row(c) = matrix.row(far_i);
      model.labels[static_cast<std::size_t>(far_i)] = c;
      ++counts[static_cast<std::size_t>(c)];
    }

    model.distortion_history.push_back(distortion);
    model.distortion = distortion;

    Mat next = Mat::Zero(k, matrix.cols());
    for (Eigen::Index i = 0; i < n; ++i)
      next.row(model.labels[static_cast<std::size_t>(i)]) += matrix.row(i);
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0)
        next.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
      else
        next.row(c) = model.centroids.row(c);
    }
    const double shift = (next - model.centroids).rowwise().norm().maxCoeff();
    model.centroids = next;
    if (shift < tol) break;
  }

  // final labels/distortion against the converged centroids
  model.distortion = assign_pass(matrix, model.centroids, model.labels);
  model.distortion_history.push_back(model.distortion);
  return model;
}

ElbowResult elbow_select(const Mat& matrix, const std::vector<int>& k_range, uint64_t seed) {
  if (k_range.size() < 3)
    throw std::invalid_argument("elbow_select: need at least 3 k values");
  for (int k : k_range)
    if (k < 1 || k > matrix.rows())
      throw std::invalid_argument("elbow_select: k outside [1, n]");

  ElbowResult res;
  res.k_values = k_range;
  res.distortions.reserve(k_range.size());
  constexpr int kRestarts = 5;
  for (std::size_t ki = 0; ki < k_range.size(); ++ki) {
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < kRestarts; ++r) {
      const uint64_t s = rng::substream_seed(seed, static_cast<uint64_t>(k_range[ki]),
                                             static_cast<uint64_t>(r));
      best = std::min(best, kmeans_fit(matrix, k_range[ki], s).distortion);
    }
    res.distortions.push_back(best);
  }

  std::size_t arg = 1;
  double best_d2 = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < res.distortions.size(); ++i) {
    const double d2 = res.distortions[i - 1] - 2.0 * res.distortions[i] + res.distortions[i + 1];
    if (d2 > best_d2) {
      best_d2 = d2;
      arg = i;
    }
  }
  res.k = k_range[arg];
  return res;
}

std::vector<int> assign_cluster(const KMeansModel& model, const Mat& rows) {
  if (rows.cols() != model.centroids.cols())
    throw std::invalid_argument("assign_cluster: column count mismatch");
  Mat Z = rows;
  Z.rowwise() -= model.mean.transpose();
  for (Eigen::Index j = 0; j < Z.cols(); ++j) Z.col(j) /= model.scale[j];
  std::vector<int> labels(static_cast<std::size_t>(rows.rows()), 0);
  assign_pass(Z, model.centroids, labels);
  return labels;
}

}  // namespace wingbench
