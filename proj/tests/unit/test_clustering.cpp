#include "doctest.h"

#include "wingbench/clustering.hpp"
#include "wingbench/dimred.hpp"
#include "wingbench/rng.hpp"
#include "wingbench/wing_model.hpp"

#include <cmath>
#include <set>

using namespace wingbench;
using doctest::Approx;

namespace {

// two well-separated standardized blobs
Mat two_blobs(int n_per, uint64_t seed, double spread = 1.0) {
  rng::Stream st(seed);
  Mat X(2 * n_per, 2);
  for (int i = 0; i < n_per; ++i) {
    X(i, 0) = 0.0 + spread * st.normal();
    X(i, 1) = 0.0 + spread * st.normal();
    X(n_per + i, 0) = 10.0 + spread * st.normal();
    X(n_per + i, 1) = 10.0 + spread * st.normal();
  }
  return X;
}

}  // namespace

TEST_CASE("k = 1 recovers the mean and the total scatter") {
  rng::Stream st(2);
  Mat X(50, 3);
  for (int i = 0; i < 50; ++i)
    for (int j = 0; j < 3; ++j) X(i, j) = st.normal() * (j + 1);
  KMeansModel m = kmeans_fit(X, 1, 7);
  REQUIRE(m.k == 1);
  for (int j = 0; j < 3; ++j) CHECK(m.centroids(0, j) == Approx(X.col(j).mean()).epsilon(1e-10));
  double sse = 0.0;
  for (int i = 0; i < 50; ++i)
    sse += (X.row(i) - X.colwise().mean()).squaredNorm();
  CHECK(m.distortion == Approx(sse).epsilon(1e-10));
  CHECK(std::all_of(m.labels.begin(), m.labels.end(), [](int l) { return l == 0; }));
}

TEST_CASE("two blobs are recovered with tight centroids") {
  Mat X = two_blobs(60, 5);
  KMeansModel m = kmeans_fit(X, 2, 3);
  REQUIRE(m.centroids.rows() == 2);
  // order-free match against (0,0) and (10,10)
  double d0 = std::min((m.centroids.row(0) - Eigen::RowVector2d(0, 0)).norm(),
                       (m.centroids.row(0) - Eigen::RowVector2d(10, 10)).norm());
  double d1 = std::min((m.centroids.row(1) - Eigen::RowVector2d(0, 0)).norm(),
                       (m.centroids.row(1) - Eigen::RowVector2d(10, 10)).norm());
  CHECK(d0 < 0.5);
  CHECK(d1 < 0.5);
  CHECK((m.centroids.row(0) - m.centroids.row(1)).norm() > 5.0);
  // one label per side
  std::set<int> left(m.labels.begin(), m.labels.begin() + 60);
  std::set<int> right(m.labels.begin() + 60, m.labels.end());
  CHECK(left.size() == 1);
  CHECK(right.size() == 1);
  CHECK(*left.begin() != *right.begin());
}

TEST_CASE("as many clusters as points drives distortion to zero") {
  rng::Stream st(9);
  Mat X(8, 2);
  for (int i = 0; i < 8; ++i) {
    X(i, 0) = st.normal() * 3;
    X(i, 1) = st.normal() * 3;
  }
  KMeansModel m = kmeans_fit(X, 8, 1);
  CHECK(m.distortion == Approx(0.0).epsilon(1e-12));
}

TEST_CASE("every Lloyd pass reduces or holds the distortion") {
  for (uint64_t seed : {1ull, 2ull, 3ull, 4ull}) {
    Mat X = two_blobs(40, seed, 3.0);  // heavy overlap keeps Lloyd busy
    for (int k : {2, 3, 4}) {
      KMeansModel m = kmeans_fit(X, k, seed);
      REQUIRE(!m.distortion_history.empty());
      for (std::size_t i = 1; i < m.distortion_history.size(); ++i)
        CHECK(m.distortion_history[i] <= m.distortion_history[i - 1] + 1e-9);
      CHECK(m.distortion == Approx(m.distortion_history.back()));
    }
  }
}

TEST_CASE("same seed, same clustering; the fit is a pure function of its inputs") {
  Mat X = two_blobs(30, 8, 2.0);
  KMeansModel a = kmeans_fit(X, 3, 12);
  KMeansModel b = kmeans_fit(X, 3, 12);
  CHECK((a.centroids - b.centroids).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.labels == b.labels);
  CHECK(a.distortion == b.distortion);
}

TEST_CASE("the elbow lands on the planted cluster count") {
  Mat X = two_blobs(80, 4);
  std::vector<int> ks = {1, 2, 3, 4, 5, 6};
  ElbowResult e = elbow_select(X, ks, 19);
  CHECK(e.k == 2);
  REQUIRE(e.distortions.size() == ks.size());
  CHECK(e.k_values == ks);
  // distortion decreases with k (best-of-restarts makes this near-certain)
  for (std::size_t i = 1; i < e.distortions.size(); ++i)
    CHECK(e.distortions[i] <= e.distortions[i - 1] + 1e-9);
}

TEST_CASE("assignment uses the stored standardization") {
  Mat X = two_blobs(25, 14);
  KMeansModel m = kmeans_fit(X, 2, 6);
  // labels replay exactly on the training rows
  std::vector<int> again = assign_cluster(m, X);
  CHECK(again == m.labels);

  // shifting the stored mean relocates the probe before matching
  KMeansModel shifted = m;
  shifted.mean = Vec::Constant(2, -100.0);
  Mat probe(1, 2);
  probe << -95.0, -95.0;  // standardizes to (5,5): between the blobs
  std::vector<int> lab = assign_cluster(shifted, probe);
  REQUIRE(lab.size() == 1);
}

TEST_CASE("the clustering matrix is the standardized features plus poly codes") {
  WingGeometry geom;
  Dataset ds = generate_dataset(geom, 238, 200, 33, 0.005);
  PiecewisePolyModel poly = make_piecewise_poly(ds.stations);
  ClusterMatrix cm = build_cluster_matrix(ds, poly);
  REQUIRE(cm.data.rows() == 200);
  REQUIRE(cm.data.cols() == kNumFeatures + 6);
  REQUIRE(cm.mean.size() == kNumFeatures + 6);
  REQUIRE(cm.scale.size() == kNumFeatures + 6);
  for (Eigen::Index j = 0; j < cm.data.cols(); ++j) {
    double mean = cm.data.col(j).mean();
    CHECK(std::abs(mean) < 1e-10);
    double var = (cm.data.col(j).array() - mean).square().sum() / (200 - 1);
    CHECK(var == Approx(1.0).epsilon(1e-8));
  }

  // a constant column passes through as zeros instead of dividing by zero
  Dataset flat = ds;
  flat.features.col(3).setConstant(1.25);
  ClusterMatrix cf = build_cluster_matrix(flat, poly);
  CHECK(cf.scale[3] == 1.0);
  CHECK(cf.data.col(3).cwiseAbs().maxCoeff() == 0.0);
}
