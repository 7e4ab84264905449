#pragma once

#include "wingbench/clustering.hpp"
#include "wingbench/dimred.hpp"
#include "wingbench/ensembles.hpp"
#include "wingbench/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace wingbench {

struct R2Result {
  Vec per_station;  // NaN where a zero-variance station was excluded
  double mean = 0.0;
  int excluded = 0;  // zero-variance stations whose predictions missed
};

// Per-station R^2 and its mean over stations.  A zero-variance station scores
// 1 when predicted exactly, otherwise it is left out of the mean and counted.
R2Result r2_per_station(const Mat& Y_true, const Mat& Y_pred);

// Relative curve error: sqrt(sum (pred - true)^2 / sum true^2).
double error_rate(const Vec& curve_true, const Vec& curve_pred);

struct EcdfResult {
  std::vector<double> alphas;
  std::vector<double> g;  // G(alpha) = fraction of errors <= alpha
  double p_le_2 = 0.0;    // P(error <= 2%)
  double p_le_10 = 0.0;   // P(error <= 10%)
  double mean_error = 0.0;
};

EcdfResult error_ecdf(const std::vector<double>& errors, const std::vector<double>& alphas);
// Convenience: evaluates the ECDF at the sorted distinct error values.
EcdfResult error_ecdf(const std::vector<double>& errors);

InputCodecKind config_input_codec(int config_id);    // 1-4 raw, 5-8 pca
OutputCodecKind config_output_codec(int config_id);  // cycles raw/pca/poly/poly_pca

// Cross-validated defaults per (algorithm, configuration, cluster).
// Configurations without a tuned column borrow from the tuned configuration
// with the same input codec and reduced outputs; clusters beyond the second
// reuse the second column.
AlgoSpec default_hyperparameters(Algo algo, int config_id, int cluster);

struct PipelineConfig {
  int config_id = 1;
  Algo algo = Algo::AdbRf;
  int n_repeats = 5;
  double split_fraction = 0.8;
  uint64_t seed = 0;
  double pca_threshold = 0.9999;  // input-side PCA retention
  OutputCodecParams codec;
  std::optional<AlgoSpec> hyper_override;  // otherwise Appendix-table defaults

  InputCodecKind input_codec() const { return config_input_codec(config_id); }
  OutputCodecKind output_codec() const { return config_output_codec(config_id); }
};

struct ScoreStat {
  double mean = 0.0;
  double std = 0.0;  // population std; 0 for a single repeat
};

struct VariantEval {
  int mtow_tons = 0;
  ScoreStat r2;
  EcdfResult ecdf;  // row error rates pooled across repeats
};

struct ConfigFragment {
  int config_id = 1;
  int cluster = 0;
  Algo algo = Algo::AdbRf;
  ScoreStat learning;
  ScoreStat test;
  std::vector<VariantEval> validation;
  int n_repeats = 0;  // repeats that completed
  int zero_variance_warnings = 0;
  std::vector<std::string> repeat_errors;
};

struct ExperimentReport {
  std::vector<ConfigFragment> fragments;
};

// Training data with its cluster structure plus the extrapolation variants,
// each already labeled against the training centroids.
struct ClusteredData {
  Dataset train;
  std::vector<int> train_labels;
  int n_clusters = 1;
  std::vector<Dataset> validation;
  std::vector<std::vector<int>> validation_labels;
};

// One fragment per cluster: repeated seeded 80/20 splits, codecs fitted on
// the training split, model fitted on encoded data, predictions decoded back
// to station space before scoring.
std::vector<ConfigFragment> run_config(const ClusteredData& data, const PipelineConfig& cfg);

struct CompareRow {
  int config_id = 1;
  int cluster = 0;
  Algo algo = Algo::AdbRf;
  double validation_mean = 0.0;  // mean over variants of validation means
  double validation_std = 0.0;
  double test_mean = 0.0;
  bool best_in_cluster = false;
  // present when the same cluster/algo ran the raw-output sibling config
  std::optional<bool> output_pca_beat_raw;
};

// Rows ranked per cluster by validation mean (ties broken by lower std).
std::vector<CompareRow> compare_reports(const ExperimentReport& report);

}  // namespace wingbench
