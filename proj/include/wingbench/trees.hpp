#pragma once

#include "wingbench/types.hpp"

#include <cstdint>
#include <vector>

namespace wingbench {

struct TreeParams {
  int min_samples_leaf = 1;
  int min_samples_split = 2;
  int max_depth = -1;  // -1 = unbounded
  enum class Impurity { Variance, CovarianceTrace };
  // CovarianceTrace sums per-output variances and reduces to Variance at q=1.
  Impurity impurity = Impurity::CovarianceTrace;
  uint64_t rng_seed = 0;
  int feature_subset_m = -1;  // draw m features per node when >= 1 (forests)
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1, right = -1;
  int sample_count = 0;
  double sse = 0.0;      // training SSE at this node, summed over outputs
  int value_offset = 0;  // into RegressionTree::values (every node stores its mean)
};

// Flat-array CART tree. Every node carries the mean output vector of its
// training members, so pruning can collapse any internal node into a leaf.
struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  std::vector<double> values;   // node means, q per node
  int p = 0, q = 0;
  TreeParams params;  // as fitted; reused when cross-validation refits

  bool is_leaf(int i) const { return nodes[i].feature < 0; }
  const double* value(int i) const { return values.data() + nodes[i].value_offset; }
  int n_leaves() const;
  int route(const double* row) const;  // leaf index; ties (x == threshold) go left
};

// Pre-sorted training view shared by all trees of an ensemble: per feature,
// row indices ordered by feature value. Building it once per fit avoids a
// per-tree O(p n log n) sort.
struct SortedTrainingSet {
  const Mat* X = nullptr;
  const Mat* Y = nullptr;
  std::vector<std::vector<int>> order;

  static SortedTrainingSet build(const Mat& X, const Mat& Y);
};

// Greedy CART growth; thresholds are midpoints between consecutive distinct
// values, split chosen by maximum impurity decrease, ties broken by lowest
// feature index then smallest threshold.
RegressionTree cart_fit(const Mat& X, const Mat& Y, const TreeParams& params);

// Same fit over a bootstrap/weighted sample given per-row multiplicities.
RegressionTree cart_fit_counts(const SortedTrainingSet& data, const std::vector<int>& counts,
                               const TreeParams& params);

Mat cart_predict(const RegressionTree& tree, const Mat& rows);

// Weakest-link cost-complexity pruning; the returned tree is the input pruned
// at the alpha minimizing k-fold cross-validated MSE (folds refit from
// scratch). alpha = 0 is always a candidate.
RegressionTree prune_cost_complexity(const RegressionTree& tree, const Mat& X, const Mat& Y,
                                     int folds, uint64_t seed = 0);

// Collapse every node whose weakest-link improvement rate is <= alpha.
RegressionTree prune_at_alpha(const RegressionTree& tree, double alpha);

// Critical alpha per node from the weakest-link sequence (+inf for nodes that
// never collapse); exposed for the cross-validation loop and tests.
std::vector<double> weakest_link_alphas(const RegressionTree& tree);

}  // namespace wingbench
