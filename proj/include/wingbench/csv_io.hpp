#pragma once

#include "wingbench/types.hpp"
#include "wingbench/wing_model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace wingbench {

// Shortest decimal string that parses back to exactly the same double, so
// file checksums are a meaningful reproducibility check.
std::string format_double(double x);

// Header f01..f25,y01..y29 with an optional trailing `cluster` column.
void write_dataset_csv(const std::string& path, const Dataset& ds,
                       const std::vector<int>* labels = nullptr);

// Reads features/outputs (and the cluster column when present, if `labels`
// is non-null).  Stations and the variant tag come from the metadata sidecar.
Dataset read_dataset_csv(const std::string& path, std::vector<int>* labels = nullptr);

struct DatasetMetadata {
  Vec stations;
  int mtow_tons = 238;
  uint64_t seed = 0;
  WingGeometry geometry;
};

void write_dataset_metadata(const std::string& path, const Dataset& ds, uint64_t seed,
                            const WingGeometry& geometry);
DatasetMetadata read_dataset_metadata(const std::string& path);

}  // namespace wingbench
