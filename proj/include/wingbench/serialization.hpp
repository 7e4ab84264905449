#pragma once

#include "wingbench/clustering.hpp"
#include "wingbench/dimred.hpp"
#include "wingbench/ensembles.hpp"
#include "wingbench/evaluation.hpp"
#include "wingbench/trees.hpp"

#include <string>

namespace wingbench {

// All JSON round-trips are lossless: numeric arrays serialize with shortest
// round-trip decimals.

std::string tree_to_json(const RegressionTree& tree);
RegressionTree tree_from_json(const std::string& text);

std::string output_codec_to_json(const OutputCodec& codec);
OutputCodec output_codec_from_json(const std::string& text);

std::string kmeans_to_json(const KMeansModel& model);
KMeansModel kmeans_from_json(const std::string& text);

// Model bundle directory: manifest.json (algorithm, params, seed, codec
// reference) plus one JSON file per machine.
void save_model_bundle(const MultiOutputModel& model, const std::string& dir, uint64_t seed,
                       const std::string& codec_ref);
MultiOutputModel load_model_bundle(const std::string& dir);

std::string report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const std::string& text);

// report.json + report.csv + one (alpha, G) TSV per validation variant.
void write_report_files(const ExperimentReport& report, const std::string& dir);

// Printable ranking with best-of-cluster and PCA-vs-raw flags.
std::string compare_table_text(const std::vector<CompareRow>& rows);

}  // namespace wingbench
