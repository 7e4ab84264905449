#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace wingbench {

// Row-major throughout: datasets are processed row-wise (one load case per row).
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

inline constexpr int kNumStations = 29;
inline constexpr int kNumFeatures = 25;

enum class CaseKind { Gust, Maneuver };

// One synthetic load-case table: X (n x 25), Y (n x 29) bending moments.
struct Dataset {
  Mat features;              // n x 25
  Mat outputs;               // n x 29
  Vec stations;              // shared spanwise coordinates (m), strictly increasing
  int mtow_tons = 238;       // weight variant label
  std::vector<CaseKind> case_kind;  // per row

  Eigen::Index rows() const { return features.rows(); }
};

const std::array<std::string, kNumFeatures>& feature_names();

}  // namespace wingbench
