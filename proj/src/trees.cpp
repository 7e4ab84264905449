#include "wingbench/trees.hpp"

#include "wingbench/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace wingbench {

int RegressionTree::n_leaves() const {
  int c = 0;
  for (const auto& nd : nodes)
    if (nd.feature < 0) ++c;
  return c;
}

int RegressionTree::route(const double* row) const {
  int i = 0;
  while (!is_leaf(i)) {
    const auto& nd = nodes[i];
    i = row[nd.feature] <= nd.threshold ? nd.left : nd.right;
  }
  return i;
}

SortedTrainingSet SortedTrainingSet::build(const Mat& X, const Mat& Y) {
  SortedTrainingSet s;
  s.X = &X;
  s.Y = &Y;
  const int n = static_cast<int>(X.rows()), p = static_cast<int>(X.cols());
  s.order.resize(p);
  for (int f = 0; f < p; ++f) {
    auto& ord = s.order[f];
    ord.resize(n);
    std::iota(ord.begin(), ord.end(), 0);
    std::stable_sort(ord.begin(), ord.end(),
                     [&X, f](int a, int b) { return X(a, f) < X(b, f); });
  }
  return s;
}

namespace {

class TreeBuilder {
 public:
  TreeBuilder(const SortedTrainingSet& data, const std::vector<int>& counts,
              const TreeParams& params)
      : X_(*data.X), Y_(*data.Y), params_(params), stream_(params.rng_seed) {
    p_ = static_cast<int>(X_.cols());
    q_ = static_cast<int>(Y_.cols());
    if (X_.rows() == 0) throw std::invalid_argument("cart_fit: empty dataset");
    if (q_ == 0) throw std::invalid_argument("cart_fit: no output columns");
    if (params_.min_samples_leaf < 1 || params_.min_samples_split < 2)
      throw std::invalid_argument("cart_fit: invalid min_samples params");
    if (params_.feature_subset_m > p_)
      throw std::invalid_argument("cart_fit: feature_subset_m exceeds feature count");

    int n_eff = 0;
    for (int c : counts) n_eff += c;
    if (n_eff == 0) throw std::invalid_argument("cart_fit: empty sample");

    idx_.resize(p_);
    for (int f = 0; f < p_; ++f) {
      idx_[f].reserve(n_eff);
      for (int row : data.order[f])
        for (int c = 0; c < counts[row]; ++c) idx_[f].push_back(row);
    }
    scratch_.resize(n_eff);
    mark_.assign(X_.rows(), 0);
    n_eff_ = n_eff;

    tree_.p = p_;
    tree_.q = q_;
    tree_.params = params_;
    sum_.resize(q_);
    left_sum_.resize(q_);
    best_left_sum_.resize(q_);
  }

  RegressionTree run() {
    grow(0, n_eff_, 0);
    return std::move(tree_);
  }

 private:
  int grow(int lo, int hi, int depth) {
    const int len = hi - lo;
    const int node_id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();

    // node statistics from any feature's segment (all hold the same multiset)
    std::fill(sum_.begin(), sum_.end(), 0.0);
    double sumsq = 0.0;
    for (int i = lo; i < hi; ++i) {
      const double* y = Y_.row(idx_[0][i]).data();
      for (int j = 0; j < q_; ++j) {
        sum_[j] += y[j];
        sumsq += y[j] * y[j];
      }
    }
    double score_base = 0.0;
    for (int j = 0; j < q_; ++j) score_base += sum_[j] * sum_[j] / len;
    const double node_sse = std::max(0.0, sumsq - score_base);

    auto& node = tree_.nodes[node_id];
    node.sample_count = len;
    node.sse = node_sse;
    node.value_offset = static_cast<int>(tree_.values.size());
    for (int j = 0; j < q_; ++j) tree_.values.push_back(sum_[j] / len);

    const bool pure = node_sse <= 1e-12 * sumsq;
    const bool depth_capped = params_.max_depth >= 0 && depth >= params_.max_depth;
    if (len < params_.min_samples_split || pure || depth_capped) return node_id;

    int best_feature = -1;
    double best_threshold = 0.0, best_score = score_base;
    int best_nl = 0;

    const int m = params_.feature_subset_m;
    int n_candidates = p_;
    if (m >= 1 && m < p_) {
      // partial Fisher-Yates, then ascending order so tie-breaks stay by index
      feat_buf_.resize(p_);
      std::iota(feat_buf_.begin(), feat_buf_.end(), 0);
      for (int i = 0; i < m; ++i) {
        const int j = i + static_cast<int>(stream_.index(static_cast<std::size_t>(p_ - i)));
        std::swap(feat_buf_[i], feat_buf_[j]);
      }
      std::sort(feat_buf_.begin(), feat_buf_.begin() + m);
      n_candidates = m;
    } else {
      feat_buf_.resize(p_);
      std::iota(feat_buf_.begin(), feat_buf_.end(), 0);
    }

    const int msl = params_.min_samples_leaf;
    for (int fi = 0; fi < n_candidates; ++fi) {
      const int f = feat_buf_[fi];
      const auto& ord = idx_[f];
      std::fill(left_sum_.begin(), left_sum_.end(), 0.0);
      for (int i = lo; i < hi - 1; ++i) {
        const int row = ord[i];
        const double* y = Y_.row(row).data();
        for (int j = 0; j < q_; ++j) left_sum_[j] += y[j];
        const double v = X_(row, f), vn = X_(ord[i + 1], f);
        if (!(vn > v)) continue;  // not a boundary between distinct values
        const int nl = i - lo + 1, nr = len - nl;
        if (nl < msl || nr < msl) continue;
        double score = 0.0;
        for (int j = 0; j < q_; ++j) {
          const double sl = left_sum_[j], sr = sum_[j] - sl;
          score += sl * sl / nl + sr * sr / nr;
        }
        if (score > best_score) {
          best_score = score;
          best_feature = f;
          best_threshold = 0.5 * (v + vn);
          best_nl = nl;
          for (int j = 0; j < q_; ++j) best_left_sum_[j] = left_sum_[j];
        }
      }
    }

    if (best_feature < 0) return node_id;  // no admissible split

    // stable partition of every feature's segment by the chosen split
    for (int i = lo; i < hi; ++i) {
      const int row = idx_[best_feature][i];
      mark_[row] = X_(row, best_feature) <= best_threshold ? 1 : 0;
    }
    for (int f = 0; f < p_; ++f) {
      auto& ord = idx_[f];
      int l = 0, r = best_nl;
      for (int i = lo; i < hi; ++i) {
        if (mark_[ord[i]])
          scratch_[l++] = ord[i];
        else
          scratch_[r++] = ord[i];
      }
      std::copy(scratch_.begin(), scratch_.begin() + len, ord.begin() + lo);
    }

    tree_.nodes[node_id].feature = best_feature;
    tree_.nodes[node_id].threshold = best_threshold;
    const int left = grow(lo, lo + best_nl, depth + 1);
    tree_.nodes[node_id].left = left;
    const int right = grow(lo + best_nl, hi, depth + 1);
    tree_.nodes[node_id].right = right;
    return node_id;
  }

  const Mat& X_;
  const Mat& Y_;
  TreeParams params_;
  rng::Stream stream_;
  int p_ = 0, q_ = 0, n_eff_ = 0;
  std::vector<std::vector<int>> idx_;
  std::vector<int> scratch_, feat_buf_;
  std::vector<char> mark_;
  std::vector<double> sum_, left_sum_, best_left_sum_;
  RegressionTree tree_;
};

}  // namespace

RegressionTree cart_fit_counts(const SortedTrainingSet& data, const std::vector<int>& counts,
                               const TreeParams& params) {
  return TreeBuilder(data, counts, params).run();
}

RegressionTree cart_fit(const Mat& X, const Mat& Y, const TreeParams& params) {
  if (X.rows() != Y.rows()) throw std::invalid_argument("cart_fit: X/Y row mismatch");
  const SortedTrainingSet data = SortedTrainingSet::build(X, Y);
  std::vector<int> counts(static_cast<std::size_t>(X.rows()), 1);
  return cart_fit_counts(data, counts, params);
}

Mat cart_predict(const RegressionTree& tree, const Mat& rows) {
  if (rows.cols() != tree.p) throw std::invalid_argument("cart_predict: feature count mismatch");
  Mat out(rows.rows(), tree.q);
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (Eigen::Index j = 0; j < rows.cols(); ++j)
      if (!std::isfinite(rows(i, j)))
        throw std::invalid_argument("cart_predict: non-finite feature value");
    const int leaf = tree.route(rows.row(i).data());
    const double* v = tree.value(leaf);
    for (int j = 0; j < tree.q; ++j) out(i, j) = v[j];
  }
  return out;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<int> parent_index(const RegressionTree& t) {
  std::vector<int> parent(t.nodes.size(), -1);
  for (std::size_t i = 0; i < t.nodes.size(); ++i) {
    if (t.nodes[i].feature >= 0) {
      parent[t.nodes[i].left] = static_cast<int>(i);
      parent[t.nodes[i].right] = static_cast<int>(i);
    }
  }
  return parent;
}

}  // namespace

std::vector<double> weakest_link_alphas(const RegressionTree& tree) {
  const int n = static_cast<int>(tree.nodes.size());
  std::vector<double> crit(n, kInf);
  std::vector<double> sub_sse(n);
  std::vector<int> sub_leaves(n);
  std::vector<char> collapsed(n, 0);
  const auto parent = parent_index(tree);

  // preorder layout: children follow parents, so reverse order is postorder
  for (int i = n - 1; i >= 0; --i) {
    if (tree.is_leaf(i)) {
      sub_sse[i] = tree.nodes[i].sse;
      sub_leaves[i] = 1;
    } else {
      sub_sse[i] = sub_sse[tree.nodes[i].left] + sub_sse[tree.nodes[i].right];
      sub_leaves[i] = sub_leaves[tree.nodes[i].left] + sub_leaves[tree.nodes[i].right];
    }
  }

  double last_alpha = 0.0;
  while (!collapsed[0] && !tree.is_leaf(0)) {
    double g_min = kInf;
    int arg = -1;
    for (int i = 0; i < n; ++i) {
      if (collapsed[i] || tree.is_leaf(i) || sub_leaves[i] <= 1) continue;
      const double g = (tree.nodes[i].sse - sub_sse[i]) / (sub_leaves[i] - 1);
      if (g < g_min) {
        g_min = g;
        arg = i;
      }
    }
    if (arg < 0) break;
    last_alpha = std::max(last_alpha, g_min);
    crit[arg] = last_alpha;
    collapsed[arg] = 1;
    // retire the whole collapsed subtree from future scans
    std::vector<int> stack{tree.nodes[arg].left, tree.nodes[arg].right};
    while (!stack.empty()) {
      const int i = stack.back();
      stack.pop_back();
      collapsed[i] = 1;
      if (!tree.is_leaf(i)) {
        stack.push_back(tree.nodes[i].left);
        stack.push_back(tree.nodes[i].right);
      }
    }
    const double d_sse = tree.nodes[arg].sse - sub_sse[arg];
    const int d_leaves = sub_leaves[arg] - 1;
    for (int a = parent[arg]; a >= 0; a = parent[a]) {
      sub_sse[a] += d_sse;
      sub_leaves[a] -= d_leaves;
    }
  }
  return crit;
}

namespace {

int copy_pruned(const RegressionTree& src, const std::vector<double>& crit, double alpha,
                int node, RegressionTree& dst) {
  const int id = static_cast<int>(dst.nodes.size());
  dst.nodes.push_back(src.nodes[node]);
  dst.nodes[id].value_offset = static_cast<int>(dst.values.size());
  const double* v = src.value(node);
  for (int j = 0; j < src.q; ++j) dst.values.push_back(v[j]);
  const bool as_leaf = src.is_leaf(node) || crit[node] <= alpha;
  if (as_leaf) {
    dst.nodes[id].feature = -1;
    dst.nodes[id].left = dst.nodes[id].right = -1;
  } else {
    const int l = copy_pruned(src, crit, alpha, src.nodes[node].left, dst);
    dst.nodes[id].left = l;
    const int r = copy_pruned(src, crit, alpha, src.nodes[node].right, dst);
    dst.nodes[id].right = r;
  }
  return id;
}

}  // namespace

RegressionTree prune_at_alpha(const RegressionTree& tree, double alpha) {
  const auto crit = weakest_link_alphas(tree);
  RegressionTree out;
  out.p = tree.p;
  out.q = tree.q;
  out.params = tree.params;
  copy_pruned(tree, crit, alpha, 0, out);
  return out;
}

RegressionTree prune_cost_complexity(const RegressionTree& tree, const Mat& X, const Mat& Y,
                                     int folds, uint64_t seed) {
  const int n = static_cast<int>(X.rows());
  if (folds < 2) throw std::invalid_argument("prune_cost_complexity: folds must be >= 2");
  if (folds > n) throw std::invalid_argument("prune_cost_complexity: more folds than rows");
  if (tree.is_leaf(0)) return tree;

  // candidate alphas from the full tree's weakest-link sequence
  std::vector<double> alphas{0.0};
  for (double a : weakest_link_alphas(tree))
    if (std::isfinite(a)) alphas.push_back(a);
  std::sort(alphas.begin(), alphas.end());
  alphas.erase(std::unique(alphas.begin(), alphas.end()), alphas.end());

  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  auto st = rng::substream(seed, 0x5eedf01d);
  for (int i = n - 1; i > 0; --i)
    std::swap(perm[i], perm[static_cast<int>(st.index(static_cast<std::size_t>(i + 1)))]);

  std::vector<double> cv_sse(alphas.size(), 0.0);
  for (int fold = 0; fold < folds; ++fold) {
    const int f_lo = fold * n / folds, f_hi = (fold + 1) * n / folds;
    const int n_tr = n - (f_hi - f_lo);
    Mat Xtr(n_tr, X.cols()), Ytr(n_tr, Y.cols());
    int w = 0;
    for (int i = 0; i < n; ++i) {
      if (i >= f_lo && i < f_hi) continue;
      Xtr.row(w) = X.row(perm[i]);
      Ytr.row(w) = Y.row(perm[i]);
      ++w;
    }
    const RegressionTree ft = cart_fit(Xtr, Ytr, tree.params);
    const auto crit = weakest_link_alphas(ft);
    for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
      const double alpha = alphas[ai];
      double sse = 0.0;
      for (int i = f_lo; i < f_hi; ++i) {
        const double* row = X.row(perm[i]).data();
        int nd = 0;
        while (!ft.is_leaf(nd) && crit[nd] > alpha) {
          nd = row[ft.nodes[nd].feature] <= ft.nodes[nd].threshold ? ft.nodes[nd].left
                                                                   : ft.nodes[nd].right;
        }
        const double* v = ft.value(nd);
        for (int j = 0; j < ft.q; ++j) {
          const double d = Y(perm[i], j) - v[j];
          sse += d * d;
        }
      }
      cv_sse[ai] += sse;
    }
  }

  // minimize CV error; ties resolved toward the larger alpha (simpler tree)
  std::size_t best = 0;
  for (std::size_t ai = 1; ai < alphas.size(); ++ai)
    if (cv_sse[ai] <= cv_sse[best]) best = ai;
  return prune_at_alpha(tree, alphas[best]);
}

}  // namespace wingbench
