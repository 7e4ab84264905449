#include "doctest.h"

#include "wingbench/rng.hpp"
#include "wingbench/trees.hpp"

#include <cmath>
#include <set>

using namespace wingbench;
using doctest::Approx;

namespace {

Mat colvec(std::initializer_list<double> xs) {
  Mat m(static_cast<Eigen::Index>(xs.size()), 1);
  Eigen::Index i = 0;
  for (double v : xs) m(i++, 0) = v;
  return m;
}

// all leaves reachable from the root, with their member rows
void collect_leaf_rows(const RegressionTree& t, const Mat& X, std::vector<std::vector<int>>& out) {
  std::vector<std::vector<int>> per_leaf(t.nodes.size());
  for (Eigen::Index r = 0; r < X.rows(); ++r)
    per_leaf[static_cast<std::size_t>(t.route(X.row(r).data()))].push_back(static_cast<int>(r));
  out.clear();
  for (std::size_t i = 0; i < t.nodes.size(); ++i)
    if (t.is_leaf(static_cast<int>(i)) && !per_leaf[i].empty()) out.push_back(per_leaf[i]);
}

}  // namespace

TEST_CASE("a clean step gets split at the midpoint between the two groups") {
  Mat X = colvec({0, 1, 2, 3});
  Mat Y = colvec({0, 0, 10, 10});
  RegressionTree t = cart_fit(X, Y, TreeParams{});
  REQUIRE(!t.is_leaf(0));
  CHECK(t.nodes[0].feature == 0);
  CHECK(t.nodes[0].threshold == Approx(1.5).epsilon(1e-15));
  CHECK(t.n_leaves() == 2);
  int lo = t.route(X.row(0).data());
  int hi = t.route(X.row(3).data());
  CHECK(t.value(lo)[0] == Approx(0.0));
  CHECK(t.value(hi)[0] == Approx(10.0));
  // equality routes left
  double probe = 1.5;
  CHECK(t.route(&probe) == t.nodes[0].left);
}

TEST_CASE("leaf values are the member means, exactly") {
  rng::Stream st(12);
  Mat X(30, 2), Y(30, 2);
  for (int i = 0; i < 30; ++i) {
    X(i, 0) = st.normal();
    X(i, 1) = st.normal();
    Y(i, 0) = st.normal();
    Y(i, 1) = 3.0 * st.normal();
  }
  TreeParams p;
  p.min_samples_leaf = 3;
  RegressionTree t = cart_fit(X, Y, p);
  std::vector<std::vector<int>> leaves;
  collect_leaf_rows(t, X, leaves);
  for (const auto& rows : leaves) {
    REQUIRE(static_cast<int>(rows.size()) >= 3);  // min_samples_leaf held
    Vec mean = Vec::Zero(2);
    for (int r : rows) mean += Y.row(r).transpose();
    mean /= static_cast<double>(rows.size());
    int leaf = t.route(X.row(rows[0]).data());
    CHECK(std::abs(t.value(leaf)[0] - mean[0]) < 1e-12);
    CHECK(std::abs(t.value(leaf)[1] - mean[1]) < 1e-12);
  }
}

TEST_CASE("thresholds are midpoints of adjacent distinct values") {
  rng::Stream st(5);
  Mat X(40, 1), Y(40, 1);
  for (int i = 0; i < 40; ++i) {
    X(i, 0) = static_cast<double>(st.index(8));  // repeated integer values
    Y(i, 0) = st.normal() + X(i, 0);
  }
  RegressionTree t = cart_fit(X, Y, TreeParams{});
  std::set<double> xs;
  for (int i = 0; i < 40; ++i) xs.insert(X(i, 0));
  std::set<double> mids;
  for (auto it = xs.begin(); std::next(it) != xs.end(); ++it)
    mids.insert(0.5 * (*it + *std::next(it)));
  for (std::size_t n = 0; n < t.nodes.size(); ++n)
    if (!t.is_leaf(static_cast<int>(n))) CHECK(mids.count(t.nodes[n].threshold) == 1);
}

TEST_CASE("identical columns tie-break to the lowest feature index") {
  Mat X(4, 2);
  X << 0, 0, 1, 1, 2, 2, 3, 3;
  Mat Y = colvec({0, 0, 10, 10});
  RegressionTree t = cart_fit(X, Y, TreeParams{});
  CHECK(t.nodes[0].feature == 0);
}

TEST_CASE("depth and split-size limits stop growth") {
  rng::Stream st(3);
  Mat X(64, 1), Y(64, 1);
  for (int i = 0; i < 64; ++i) {
    X(i, 0) = i;
    Y(i, 0) = st.normal();
  }
  TreeParams p;
  p.max_depth = 2;
  RegressionTree t = cart_fit(X, Y, p);
  CHECK(t.n_leaves() <= 4);

  TreeParams q;
  q.min_samples_split = 64;
  RegressionTree t2 = cart_fit(X, Y, q);
  CHECK(t2.n_leaves() <= 2);

  TreeParams r;
  r.max_depth = 0;
  RegressionTree t3 = cart_fit(X, Y, r);
  CHECK(t3.n_leaves() == 1);
  CHECK(t3.value(0)[0] == Approx(Y.col(0).mean()).epsilon(1e-12));
}

TEST_CASE("pure nodes are not split further") {
  Mat X = colvec({0, 1, 2, 3, 4, 5});
  Mat Y = colvec({7, 7, 7, 7, 7, 7});
  RegressionTree t = cart_fit(X, Y, TreeParams{});
  CHECK(t.n_leaves() == 1);
  CHECK(t.value(0)[0] == 7.0);
}

TEST_CASE("single-output variance and covariance-trace impurities agree") {
  rng::Stream st(44);
  Mat X(50, 3), Y(50, 1);
  for (int i = 0; i < 50; ++i) {
    for (int j = 0; j < 3; ++j) X(i, j) = st.normal();
    Y(i, 0) = X(i, 0) * 2.0 + st.normal() * 0.1;
  }
  TreeParams a;
  a.impurity = TreeParams::Impurity::Variance;
  TreeParams b;
  b.impurity = TreeParams::Impurity::CovarianceTrace;
  RegressionTree ta = cart_fit(X, Y, a);
  RegressionTree tb = cart_fit(X, Y, b);
  REQUIRE(ta.nodes.size() == tb.nodes.size());
  for (std::size_t i = 0; i < ta.nodes.size(); ++i) {
    CHECK(ta.nodes[i].feature == tb.nodes[i].feature);
    CHECK(ta.nodes[i].threshold == tb.nodes[i].threshold);
  }
}

TEST_CASE("counts-weighted fit: all-ones equals the plain fit, zeros drop rows") {
  rng::Stream st(91);
  Mat X(25, 2), Y(25, 1);
  for (int i = 0; i < 25; ++i) {
    X(i, 0) = st.normal();
    X(i, 1) = st.uniform01();
    Y(i, 0) = st.normal();
  }
  SortedTrainingSet sorted = SortedTrainingSet::build(X, Y);

  std::vector<int> ones(25, 1);
  RegressionTree a = cart_fit_counts(sorted, ones, TreeParams{});
  RegressionTree b = cart_fit(X, Y, TreeParams{});
  REQUIRE(a.nodes.size() == b.nodes.size());
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    CHECK(a.nodes[i].feature == b.nodes[i].feature);
    CHECK(a.nodes[i].threshold == doctest::Approx(b.nodes[i].threshold).epsilon(1e-15));
  }

  // zero counts behave exactly like removing the rows
  std::vector<int> mask(25, 1);
  for (int i = 0; i < 25; i += 3) mask[i] = 0;
  RegressionTree c = cart_fit_counts(sorted, mask, TreeParams{});
  std::vector<int> keep;
  for (int i = 0; i < 25; ++i)
    if (mask[i]) keep.push_back(i);
  Mat Xs(static_cast<Eigen::Index>(keep.size()), 2), Ys(static_cast<Eigen::Index>(keep.size()), 1);
  for (std::size_t i = 0; i < keep.size(); ++i) {
    Xs.row(static_cast<Eigen::Index>(i)) = X.row(keep[i]);
    Ys.row(static_cast<Eigen::Index>(i)) = Y.row(keep[i]);
  }
  RegressionTree d = cart_fit(Xs, Ys, TreeParams{});
  REQUIRE(c.nodes.size() == d.nodes.size());
  for (std::size_t i = 0; i < c.nodes.size(); ++i) {
    CHECK(c.nodes[i].feature == d.nodes[i].feature);
    CHECK(c.nodes[i].threshold == doctest::Approx(d.nodes[i].threshold).epsilon(1e-15));
  }

  // duplicated counts shift leaf means like physically repeated rows
  std::vector<int> twice(25, 2);
  RegressionTree e = cart_fit_counts(sorted, twice, TreeParams{});
  CHECK(e.nodes[0].sample_count == 50);
}

TEST_CASE("cart_predict returns the routed leaf means") {
  Mat X = colvec({0, 1, 2, 3});
  Mat Y(4, 2);
  Y << 0, 1, 0, 1, 10, -1, 10, -1;
  RegressionTree t = cart_fit(X, Y, TreeParams{});
  Mat P = cart_predict(t, X);
  REQUIRE(P.rows() == 4);
  REQUIRE(P.cols() == 2);
  CHECK(P(0, 0) == Approx(0.0));
  CHECK(P(0, 1) == Approx(1.0));
  CHECK(P(3, 0) == Approx(10.0));
  CHECK(P(3, 1) == Approx(-1.0));
}

TEST_CASE("pruning: alpha sweep collapses the tree monotonically") {
  rng::Stream st(6);
  Mat X(80, 2), Y(80, 1);
  for (int i = 0; i < 80; ++i) {
    X(i, 0) = st.normal();
    X(i, 1) = st.normal();
    Y(i, 0) = (X(i, 0) > 0 ? 5.0 : -5.0) + 0.3 * st.normal();
  }
  RegressionTree t = cart_fit(X, Y, TreeParams{});
  const int full = t.n_leaves();
  REQUIRE(full > 2);

  std::vector<double> alphas = weakest_link_alphas(t);
  REQUIRE(alphas.size() == t.nodes.size());

  int prev = full + 1;
  for (double a : {0.0, 0.01, 0.1, 1.0, 1e6}) {
    RegressionTree pt = prune_at_alpha(t, a);
    int n = pt.n_leaves();
    CHECK(n <= prev);
    prev = n;
  }
  RegressionTree stump = prune_at_alpha(t, 1e18);
  CHECK(stump.n_leaves() == 1);
  CHECK(stump.value(0)[0] == Approx(Y.col(0).mean()).epsilon(1e-12));
}

TEST_CASE("cross-validated pruning keeps the real structure, drops the noise fit") {
  rng::Stream st(15);
  Mat X(120, 1), Y(120, 1);
  for (int i = 0; i < 120; ++i) {
    X(i, 0) = st.uniform01() * 4.0;
    Y(i, 0) = (X(i, 0) > 2.0 ? 10.0 : 0.0) + st.normal() * 0.5;
  }
  RegressionTree t = cart_fit(X, Y, TreeParams{});
  RegressionTree pruned = prune_cost_complexity(t, X, Y, 5, 3);
  CHECK(pruned.n_leaves() < t.n_leaves());
  CHECK(pruned.n_leaves() >= 2);
  // the surviving root split still separates the step
  CHECK(pruned.nodes[0].feature == 0);
  double lo_probe = 1.0, hi_probe = 3.0;
  CHECK(pruned.value(pruned.route(&lo_probe))[0] == Approx(0.0).epsilon(0.5));
  CHECK(pruned.value(pruned.route(&hi_probe))[0] == Approx(10.0).epsilon(0.1));
}

TEST_CASE("per-node feature subsampling is seeded and honored") {
  rng::Stream st(33);
  Mat X(60, 6), Y(60, 1);
  for (int i = 0; i < 60; ++i) {
    for (int j = 0; j < 6; ++j) X(i, j) = st.normal();
    Y(i, 0) = X(i, 2) * 3.0 + 0.05 * st.normal();
  }
  TreeParams p;
  p.feature_subset_m = 2;
  p.rng_seed = 4;
  RegressionTree a = cart_fit(X, Y, p);
  RegressionTree b = cart_fit(X, Y, p);
  REQUIRE(a.nodes.size() == b.nodes.size());
  for (std::size_t i = 0; i < a.nodes.size(); ++i)
    CHECK(a.nodes[i].feature == b.nodes[i].feature);  // same seed, same tree

  p.rng_seed = 5;
  RegressionTree c = cart_fit(X, Y, p);
  bool differs = c.nodes.size() != a.nodes.size();
  for (std::size_t i = 0; !differs && i < a.nodes.size(); ++i)
    differs = a.nodes[i].feature != c.nodes[i].feature ||
              a.nodes[i].threshold != c.nodes[i].threshold;
  CHECK(differs);  // different seed explores different feature menus
}
