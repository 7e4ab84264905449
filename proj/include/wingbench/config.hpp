#pragma once

#include "wingbench/ensembles.hpp"
#include "wingbench/wing_model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace wingbench {

// Single TOML-style document with [geometry], [dataset], [experiment], and
// [paths] blocks; the exact grammar is documented in the README.
struct WorkbenchConfig {
  WingGeometry geometry;

  // dataset
  std::vector<int> variants = {238, 242, 247, 251};
  std::vector<long long> n_rows = {5000, 5000, 5000, 5000};  // parallel to variants
  std::vector<uint64_t> seeds;  // parallel to variants; empty = `seed` for all
  uint64_t seed = 1;
  double noise_rel = 0.005;

  // experiment
  std::vector<int> configs = {1, 2, 5, 6};
  std::vector<Algo> algos = {Algo::AdbRf, Algo::AdbDt, Algo::Rf, Algo::Bagging, Algo::Gbm};
  int repeats = 5;
  double split_fraction = 0.8;
  double pca_threshold = 0.9999;
  int k = 0;  // fixed cluster count; 0 = choose by elbow scan
  std::vector<int> k_range = {1, 2, 3, 4, 5, 6, 7, 8};

  // paths
  std::string data_dir = "data";
  std::string model_dir = "models";
  std::string report_dir = "reports";

  uint64_t seed_for_variant(std::size_t vi) const {
    return seeds.empty() ? seed : seeds.at(vi);
  }
  void validate() const;  // throws std::invalid_argument
};

WorkbenchConfig parse_workbench_config(const std::string& text);
WorkbenchConfig load_workbench_config(const std::string& path);

// Canonical form: parse(serialize(parse(text))) == parse(text) field-for-field.
std::string serialize_workbench_config(const WorkbenchConfig& cfg);

}  // namespace wingbench
