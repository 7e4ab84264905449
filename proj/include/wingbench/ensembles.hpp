#pragma once

#include "wingbench/trees.hpp"

#include <optional>
#include <string>
#include <vector>

namespace wingbench {

// Bootstrap-aggregated trees; prediction is the plain mean over members.
struct BaggingModel {
  std::vector<RegressionTree> trees;
};

BaggingModel bagging_fit(const Mat& X, const Mat& Y, const TreeParams& params, int t,
                         uint64_t seed);
Mat bagging_predict(const BaggingModel& model, const Mat& rows);

// Bagging + per-node feature subsampling; grows unpruned trees and supports
// multi-output natively through the covariance-trace impurity.
struct RandomForestModel {
  std::vector<RegressionTree> trees;
  int feature_subset_m = -1;
};

RandomForestModel rf_fit(const Mat& X, const Mat& Y, const TreeParams& params, int t, int m,
                         uint64_t seed, bool bootstrap = true);
Mat rf_predict(const RandomForestModel& model, const Mat& rows);

// Mean over trees of per-feature impurity decrease, each tree normalized to
// sum 1 first.
Vec rf_feature_importance(const RandomForestModel& model);

// Stagewise boosting on residuals: F = F1 + nu * sum of stage trees.
struct GbmModel {
  std::vector<RegressionTree> trees;  // trees[0] is F1
  double learning_rate = 1.0;
};

GbmModel gbm_fit(const Mat& X, const Vec& y, const TreeParams& params, int T,
                 double learning_rate);
Vec gbm_predict(const GbmModel& model, const Mat& rows);

enum class AdaBase { Tree, Forest };
enum class AdaLoss { Linear, Square, Exponential };  // only Linear is implemented

struct AdaBoostParams {
  AdaBase base_kind = AdaBase::Tree;
  AdaLoss loss = AdaLoss::Linear;
  TreeParams tree;        // base-tree parameters (both kinds)
  int forest_trees = 10;  // Forest base: trees per machine
  int forest_m = -1;      // Forest base: per-node feature draw
  int max_machines = 50;
  double learning_rate = 1.0;  // exponent scale in the weight update
};

// Boosting for regression by weighted resampling: each round draws a
// weighted bootstrap, fits a machine, scores confidence beta = L/(1-L) from
// the weighted average linear loss, and reweights rows by beta^((1-L_i)*lr).
// Training stops once the average loss reaches 0.5 (the offending machine is
// dropped) or on a perfect machine.
struct AdaBoostR2Model {
  AdaBase base_kind = AdaBase::Tree;
  std::vector<RegressionTree> tree_machines;
  std::vector<RandomForestModel> forest_machines;
  std::vector<double> betas;  // one per stored machine, each < 1

  std::size_t n_machines() const { return betas.size(); }
};

AdaBoostR2Model adaboost_r2_fit(const Mat& X, const Vec& y, const AdaBoostParams& params,
                                uint64_t seed);

// Weighted median under weights ln(1/beta): the smallest machine prediction
// whose cumulative weight reaches half the total.
Vec adaboost_predict(const AdaBoostR2Model& model, const Mat& rows);

enum class Algo { AdbDt, AdbRf, Rf, Bagging, Gbm };

const char* to_string(Algo a);
Algo algo_from_string(const std::string& s);

struct AlgoSpec {
  Algo algo = Algo::AdbRf;
  TreeParams tree;            // tree params (DT base, RF/Bagging/GBM members)
  int n_estimators = 100;     // members (RF/Bagging), stages (GBM), machines (ADB)
  double learning_rate = 1.0; // GBM shrinkage / ADB weight-update scale
  int rf_m = -1;              // feature draw for RF and ADB-RF base forests
  int adb_forest_trees = 10;  // ADB-RF: trees per base forest
};

// One predictor per output column (the RF path is native multi-output).
struct MultiOutputModel {
  AlgoSpec spec;
  int q = 0;
  std::optional<RandomForestModel> native_rf;
  std::vector<BaggingModel> bagging_cols;
  std::vector<GbmModel> gbm_cols;
  std::vector<AdaBoostR2Model> adb_cols;
};

MultiOutputModel multioutput_fit(const Mat& X, const Mat& Y, const AlgoSpec& spec,
                                 uint64_t seed);
Mat multioutput_predict(const MultiOutputModel& model, const Mat& rows);

}  // namespace wingbench
