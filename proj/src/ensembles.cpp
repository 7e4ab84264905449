#include "wingbench/ensembles.hpp"

#include "wingbench/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace wingbench {

namespace {

// Inverse-CDF bootstrap: n_draws rows from the distribution given by cumw.
std::vector<int> draw_counts(rng::Stream& stream, const std::vector<double>& cumw,
                             int n_draws) {
  std::vector<int> counts(cumw.size(), 0);
  const double total = cumw.back();
  for (int d = 0; d < n_draws; ++d) {
    const double u = stream.uniform01() * total;
    auto it = std::upper_bound(cumw.begin(), cumw.end(), u);
    auto idx = static_cast<std::size_t>(it - cumw.begin());
    if (idx >= counts.size()) idx = counts.size() - 1;
    ++counts[idx];
  }
  return counts;
}

std::vector<double> cumulative(const std::vector<double>& w) {
  std::vector<double> cum(w.size());
  std::partial_sum(w.begin(), w.end(), cum.begin());
  return cum;
}

std::vector<double> cumulative(const std::vector<int>& w) {
  std::vector<double> cum(w.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    acc += w[i];
    cum[i] = acc;
  }
  return cum;
}

// Forest over a weighted multiset: each member tree bootstraps n rows from
// the multiset given by base_counts.  With all-ones counts this is the plain
// random forest.
RandomForestModel rf_fit_counts(const SortedTrainingSet& sorted,
                                const std::vector<int>& base_counts, TreeParams params,
                                int t, int m, uint64_t seed, bool bootstrap) {
  if (t < 1) throw std::invalid_argument("forest needs at least one tree");
  RandomForestModel model;
  model.feature_subset_m = m;
  params.feature_subset_m = m;
  const auto cum = cumulative(base_counts);
  const int n_draws = static_cast<int>(std::llround(cum.back()));
  for (int k = 0; k < t; ++k) {
    params.rng_seed = rng::substream_seed(seed, static_cast<uint64_t>(k), 1);
    if (bootstrap) {
      auto stream = rng::substream(seed, static_cast<uint64_t>(k));
      model.trees.push_back(cart_fit_counts(sorted, draw_counts(stream, cum, n_draws), params));
    } else {
      model.trees.push_back(cart_fit_counts(sorted, base_counts, params));
    }
  }
  return model;
}

Mat mean_predict(const std::vector<RegressionTree>& trees, const Mat& rows) {
  if (trees.empty()) throw std::invalid_argument("empty ensemble");
  Mat acc = cart_predict(trees[0], rows);
  for (std::size_t k = 1; k < trees.size(); ++k) acc += cart_predict(trees[k], rows);
  return acc / static_cast<double>(trees.size());
}

}  // namespace

BaggingModel bagging_fit(const Mat& X, const Mat& Y, const TreeParams& params, int t,
                         uint64_t seed) {
  if (t < 1) throw std::invalid_argument("bagging needs at least one tree");
  const auto sorted = SortedTrainingSet::build(X, Y);
  const auto cum = cumulative(std::vector<int>(static_cast<std::size_t>(X.rows()), 1));
  BaggingModel model;
  for (int k = 0; k < t; ++k) {
    auto stream = rng::substream(seed, static_cast<uint64_t>(k));
    model.trees.push_back(
        cart_fit_counts(sorted, draw_counts(stream, cum, static_cast<int>(X.rows())), params));
  }
  return model;
}

Mat bagging_predict(const BaggingModel& model, const Mat& rows) {
  return mean_predict(model.trees, rows);
}

RandomForestModel rf_fit(const Mat& X, const Mat& Y, const TreeParams& params, int t, int m,
                         uint64_t seed, bool bootstrap) {
  const auto sorted = SortedTrainingSet::build(X, Y);
  const std::vector<int> ones(static_cast<std::size_t>(X.rows()), 1);
  return rf_fit_counts(sorted, ones, params, t, m, seed, bootstrap);
}

Mat rf_predict(const RandomForestModel& model, const Mat& rows) {
  return mean_predict(model.trees, rows);
}

Vec rf_feature_importance(const RandomForestModel& model) {
  if (model.trees.empty()) throw std::invalid_argument("empty forest");
  const int p = model.trees[0].p;
  Vec total = Vec::Zero(p);
  int contributing = 0;
  for (const auto& tree : model.trees) {
    Vec dec = Vec::Zero(p);
    for (std::size_t nd = 0; nd < tree.nodes.size(); ++nd) {
      const auto& node = tree.nodes[nd];
      if (node.feature < 0) continue;
      const double drop = node.sse - tree.nodes[static_cast<std::size_t>(node.left)].sse -
                          tree.nodes[static_cast<std::size_t>(node.right)].sse;
      if (drop > 0.0) dec[node.feature] += drop;
    }
    const double sum = dec.sum();
    if (sum > 0.0) {
      total += dec / sum;
      ++contributing;
    }
  }
  if (contributing == 0) return Vec::Zero(p);
  return total / static_cast<double>(contributing);
}

GbmModel gbm_fit(const Mat& X, const Vec& y, const TreeParams& params, int T,
                 double learning_rate) {
  if (T < 1) throw std::invalid_argument("boosting needs at least one stage");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (X.rows() != y.size()) throw std::invalid_argument("row count mismatch");
  Mat ycol = y;
  const auto sorted = SortedTrainingSet::build(X, ycol);
  const std::vector<int> ones(static_cast<std::size_t>(X.rows()), 1);

  GbmModel model;
  model.learning_rate = learning_rate;
  model.trees.push_back(cart_fit_counts(sorted, ones, params));
  Vec fitted = cart_predict(model.trees[0], X).col(0);  // first stage enters at full strength
  for (int t = 1; t < T; ++t) {
    Mat resid = y - fitted;
    const auto resorted = SortedTrainingSet::build(X, resid);
    model.trees.push_back(cart_fit_counts(resorted, ones, params));
    fitted += learning_rate * cart_predict(model.trees.back(), X).col(0);
  }
  return model;
}

Vec gbm_predict(const GbmModel& model, const Mat& rows) {
  Vec acc = cart_predict(model.trees[0], rows).col(0);
  for (std::size_t t = 1; t < model.trees.size(); ++t)
    acc += model.learning_rate * cart_predict(model.trees[t], rows).col(0);
  return acc;
}

AdaBoostR2Model adaboost_r2_fit(const Mat& X, const Vec& y, const AdaBoostParams& params,
                                uint64_t seed) {
  if (params.loss != AdaLoss::Linear)
    throw std::invalid_argument("only the linear loss is implemented");
  if (params.max_machines < 1) throw std::invalid_argument("need at least one machine");
  if (!(params.learning_rate > 0.0))
    throw std::invalid_argument("learning rate must be positive");
  if (X.rows() != y.size()) throw std::invalid_argument("row count mismatch");
  const int n = static_cast<int>(X.rows());
  Mat ycol = y;
  const auto sorted = SortedTrainingSet::build(X, ycol);

  constexpr double kBetaFloor = 1e-300;       // perfect machine: keep ln(1/beta) finite
  constexpr double kBetaCeil = 1.0 - 1e-12;   // keeps every stored beta strictly below 1

  AdaBoostR2Model model;
  model.base_kind = params.base_kind;
  std::vector<double> w(static_cast<std::size_t>(n), 1.0);

  for (int r = 0; r < params.max_machines; ++r) {
    const auto cum = cumulative(w);
    if (!(cum.back() > 0.0) || !std::isfinite(cum.back())) break;
    auto stream = rng::substream(seed, static_cast<uint64_t>(r));
    const auto counts = draw_counts(stream, cum, n);
    const uint64_t machine_seed = rng::substream_seed(seed, static_cast<uint64_t>(r), 1);

    RegressionTree tree;
    RandomForestModel forest;
    Vec pred;
    if (params.base_kind == AdaBase::Tree) {
      tree = cart_fit_counts(sorted, counts, params.tree);
      pred = cart_predict(tree, X).col(0);
    } else {
      forest = rf_fit_counts(sorted, counts, params.tree, params.forest_trees,
                             params.forest_m, machine_seed, true);
      pred = rf_predict(forest, X).col(0);
    }

    Vec err = (pred - y).cwiseAbs();
    const double D = err.maxCoeff();
    const bool first = model.betas.empty();

    auto store = [&](double beta) {
      if (params.base_kind == AdaBase::Tree)
        model.tree_machines.push_back(std::move(tree));
      else
        model.forest_machines.push_back(std::move(forest));
      model.betas.push_back(beta);
    };

    if (D <= 0.0) {  // machine is exact on every row
      store(kBetaFloor);
      break;
    }
    Vec loss = err / D;
    double lbar = 0.0;
    for (int i = 0; i < n; ++i) lbar += loss[i] * w[static_cast<std::size_t>(i)];
    lbar /= cum.back();

    if (lbar >= 0.5) {
      // No better than the median machine: drop it and stop, except that an
      // empty model is useless, so the very first machine is kept.
      if (first) store(kBetaCeil);
      break;
    }
    const double beta = std::max(lbar / (1.0 - lbar), kBetaFloor);
    store(beta);
    for (int i = 0; i < n; ++i)
      w[static_cast<std::size_t>(i)] *=
          std::pow(beta, (1.0 - loss[i]) * params.learning_rate);
  }
  return model;
}

Vec adaboost_predict(const AdaBoostR2Model& model, const Mat& rows) {
  const auto t = model.n_machines();
  if (t == 0) throw std::invalid_argument("model has no machines");
  Mat preds(rows.rows(), static_cast<Eigen::Index>(t));
  for (std::size_t u = 0; u < t; ++u) {
    if (model.base_kind == AdaBase::Tree)
      preds.col(static_cast<Eigen::Index>(u)) = cart_predict(model.tree_machines[u], rows).col(0);
    else
      preds.col(static_cast<Eigen::Index>(u)) = rf_predict(model.forest_machines[u], rows).col(0);
  }
  std::vector<double> lw(t);
  double total = 0.0;
  for (std::size_t u = 0; u < t; ++u) {
    lw[u] = std::log(1.0 / model.betas[u]);
    total += lw[u];
  }

  Vec out(rows.rows());
  std::vector<std::pair<double, double>> pv(t);  // (prediction, weight)
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (std::size_t u = 0; u < t; ++u)
      pv[u] = {preds(i, static_cast<Eigen::Index>(u)), lw[u]};
    std::sort(pv.begin(), pv.end());
    double acc = 0.0;
    double pick = pv.back().first;
    for (const auto& [p, wt] : pv) {
      acc += wt;
      if (acc >= 0.5 * total) {
        pick = p;
        break;
      }
    }
    out[i] = pick;
  }
  return out;
}

const char* to_string(Algo a) {
  switch (a) {
    case Algo::AdbDt: return "adb-dt";
    case Algo::AdbRf: return "adb-rf";
    case Algo::Rf: return "rf";
    case Algo::Bagging: return "bagging";
    case Algo::Gbm: return "gbm";
  }
  throw std::logic_error("unreachable");
}

Algo algo_from_string(const std::string& s) {
  if (s == "adb-dt") return Algo::AdbDt;
  if (s == "adb-rf") return Algo::AdbRf;
  if (s == "rf") return Algo::Rf;
  if (s == "bagging") return Algo::Bagging;
  if (s == "gbm") return Algo::Gbm;
  throw std::invalid_argument("unknown algorithm '" + s +
                              "' (expected adb-dt, adb-rf, rf, bagging, or gbm)");
}

MultiOutputModel multioutput_fit(const Mat& X, const Mat& Y, const AlgoSpec& spec,
                                 uint64_t seed) {
  if (X.rows() != Y.rows()) throw std::invalid_argument("row count mismatch");
  MultiOutputModel model;
  model.spec = spec;
  model.q = static_cast<int>(Y.cols());

  if (spec.algo == Algo::Rf) {
    model.native_rf = rf_fit(X, Y, spec.tree, spec.n_estimators, spec.rf_m, seed);
    return model;
  }
  for (int c = 0; c < model.q; ++c) {
    const uint64_t col_seed = rng::substream_seed(seed, static_cast<uint64_t>(c));
    switch (spec.algo) {
      case Algo::Bagging:
        model.bagging_cols.push_back(
            bagging_fit(X, Y.col(c), spec.tree, spec.n_estimators, col_seed));
        break;
      case Algo::Gbm:
        model.gbm_cols.push_back(
            gbm_fit(X, Y.col(c), spec.tree, spec.n_estimators, spec.learning_rate));
        break;
      case Algo::AdbDt:
      case Algo::AdbRf: {
        AdaBoostParams ap;
        ap.base_kind = spec.algo == Algo::AdbRf ? AdaBase::Forest : AdaBase::Tree;
        ap.tree = spec.tree;
        ap.forest_trees = spec.adb_forest_trees;
        ap.forest_m = spec.rf_m;
        ap.max_machines = spec.n_estimators;
        ap.learning_rate = spec.learning_rate;
        model.adb_cols.push_back(adaboost_r2_fit(X, Y.col(c), ap, col_seed));
        break;
      }
      case Algo::Rf:
        break;  // handled above
    }
  }
  return model;
}

Mat multioutput_predict(const MultiOutputModel& model, const Mat& rows) {
  if (model.native_rf) return rf_predict(*model.native_rf, rows);
  Mat out(rows.rows(), model.q);
  for (int c = 0; c < model.q; ++c) {
    switch (model.spec.algo) {
      case Algo::Bagging:
        out.col(c) = bagging_predict(model.bagging_cols[static_cast<std::size_t>(c)], rows);
        break;
      case Algo::Gbm:
        out.col(c) = gbm_predict(model.gbm_cols[static_cast<std::size_t>(c)], rows);
        break;
      default:
        out.col(c) = adaboost_predict(model.adb_cols[static_cast<std::size_t>(c)], rows);
        break;
    }
  }
  return out;
}

}  // namespace wingbench
