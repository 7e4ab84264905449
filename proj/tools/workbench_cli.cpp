#include "wingbench/clustering.hpp"
#include "wingbench/config.hpp"
#include "wingbench/csv_io.hpp"
#include "wingbench/evaluation.hpp"
#include "wingbench/rng.hpp"
#include "wingbench/serialization.hpp"
#include "wingbench/wing_model.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace wingbench;

namespace {

constexpr const char* kDataDirEnv = "WINGBENCH_DATA_DIR";

// exit codes: 0 success, 1 usage, 2 data, 3 internal
constexpr int kUsageError = 1;
constexpr int kDataError = 2;
constexpr int kInternalError = 3;

std::string variant_csv(const std::string& data_dir, int mtow) {
  return (fs::path(data_dir) / ("dataset_" + std::to_string(mtow) + "t.csv")).string();
}

std::string variant_meta(const std::string& data_dir, int mtow) {
  return (fs::path(data_dir) / ("dataset_" + std::to_string(mtow) + "t.meta.json")).string();
}

std::string clusters_path(const std::string& data_dir) {
  return (fs::path(data_dir) / "clusters.json").string();
}

struct CommonFlags {
  std::string config_path;
  uint64_t seed = 0;
  bool seed_set = false;
  std::string out;
};

WorkbenchConfig load_config(const CommonFlags& flags) {
  WorkbenchConfig cfg;
  if (!flags.config_path.empty()) cfg = load_workbench_config(flags.config_path);
  if (flags.seed_set) {
    cfg.seed = flags.seed;
    cfg.seeds.clear();
  }
  if (const char* env = std::getenv(kDataDirEnv); env && *env) cfg.data_dir = env;
  cfg.validate();
  return cfg;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cmd_generate(const CommonFlags& flags) {
  WorkbenchConfig cfg = load_config(flags);
  if (!flags.out.empty()) cfg.data_dir = flags.out;
  fs::create_directories(cfg.data_dir);

  for (std::size_t vi = 0; vi < cfg.variants.size(); ++vi) {
    const int mtow = cfg.variants[vi];
    const long long n = cfg.n_rows[vi];
    if (n == 0) {
      std::cout << "variant " << mtow << "t: 0 rows requested, file skipped\n";
      continue;
    }
    const uint64_t seed = cfg.seed_for_variant(vi);
    const Dataset ds = generate_dataset(cfg.geometry, mtow, static_cast<Eigen::Index>(n),
                                        seed, cfg.noise_rel);
    write_dataset_csv(variant_csv(cfg.data_dir, mtow), ds);
    write_dataset_metadata(variant_meta(cfg.data_dir, mtow), ds, seed, cfg.geometry);
    std::cout << "variant " << mtow << "t: " << ds.rows() << " rows, "
              << ds.features.cols() << "+" << ds.outputs.cols() << " columns -> "
              << variant_csv(cfg.data_dir, mtow) << "\n";
  }
  return 0;
}

int cmd_cluster(const CommonFlags& flags, int forced_k) {
  WorkbenchConfig cfg = load_config(flags);
  if (!flags.out.empty()) cfg.data_dir = flags.out;
  if (forced_k > 0) cfg.k = forced_k;

  const int mtow = cfg.variants.at(0);
  Dataset ds = read_dataset_csv(variant_csv(cfg.data_dir, mtow));
  const DatasetMetadata md = read_dataset_metadata(variant_meta(cfg.data_dir, mtow));
  ds.stations = md.stations;
  ds.mtow_tons = md.mtow_tons;

  const auto poly = make_piecewise_poly(ds.stations);
  const ClusterMatrix cm = build_cluster_matrix(ds, poly);

  int k = cfg.k;
  if (k == 0) {
    const ElbowResult elbow = elbow_select(cm.data, cfg.k_range, cfg.seed);
    k = elbow.k;
    std::ostringstream tsv;
    tsv << "k\tdistortion\n";
    for (std::size_t i = 0; i < elbow.k_values.size(); ++i)
      tsv << elbow.k_values[i] << '\t' << format_double(elbow.distortions[i]) << '\n';
    write_text((fs::path(cfg.data_dir) / "elbow.tsv").string(), tsv.str());
    std::cout << "elbow scan over k in [" << cfg.k_range.front() << ", " << cfg.k_range.back()
              << "]: chose k = " << k << "\n";
  } else {
    std::cout << "elbow scan skipped, k fixed at " << k << "\n";
  }

  KMeansModel km = kmeans_fit(cm.data, k, rng::substream_seed(cfg.seed, 0xC1));
  km.mean = cm.mean;
  km.scale = cm.scale;
  write_text(clusters_path(cfg.data_dir), kmeans_to_json(km));
  write_dataset_csv(variant_csv(cfg.data_dir, mtow), ds, &km.labels);

  // 2-component scores of the cluster matrix, for external plotting
  const PcaModel pc2 = pca_fit(cm.data, 1.0, 2);
  const Mat scores = pca_project(pc2, cm.data);
  std::ostringstream tsv;
  tsv << "pc1\tpc2\tcluster\n";
  for (Eigen::Index i = 0; i < scores.rows(); ++i)
    tsv << format_double(scores(i, 0)) << '\t' << format_double(scores(i, 1)) << '\t'
        << km.labels[static_cast<std::size_t>(i)] << '\n';
  write_text((fs::path(cfg.data_dir) / "pc_scores.tsv").string(), tsv.str());

  std::vector<int> sizes(static_cast<std::size_t>(k), 0);
  for (int lab : km.labels) ++sizes[static_cast<std::size_t>(lab)];
  std::cout << "k = " << k << ", distortion = " << format_double(km.distortion)
            << ", cluster sizes:";
  for (int s : sizes) std::cout << ' ' << s;
  std::cout << "\nlabels appended to " << variant_csv(cfg.data_dir, mtow) << "\n";
  return 0;
}

ClusteredData load_clustered_data(const WorkbenchConfig& cfg, KMeansModel& km) {
  ClusteredData data;
  const int train_mtow = cfg.variants.at(0);
  std::vector<int> labels;
  data.train = read_dataset_csv(variant_csv(cfg.data_dir, train_mtow), &labels);
  const DatasetMetadata md = read_dataset_metadata(variant_meta(cfg.data_dir, train_mtow));
  data.train.stations = md.stations;
  data.train.mtow_tons = md.mtow_tons;
  data.train_labels = std::move(labels);

  km = kmeans_from_json(read_text(clusters_path(cfg.data_dir)));
  data.n_clusters = km.k;

  const auto poly = make_piecewise_poly(data.train.stations);
  for (std::size_t vi = 1; vi < cfg.variants.size(); ++vi) {
    const int mtow = cfg.variants[vi];
    if (cfg.n_rows[vi] == 0) continue;
    Dataset ds = read_dataset_csv(variant_csv(cfg.data_dir, mtow));
    const DatasetMetadata vmd = read_dataset_metadata(variant_meta(cfg.data_dir, mtow));
    ds.stations = vmd.stations;
    ds.mtow_tons = vmd.mtow_tons;

    Mat raw(ds.rows(), ds.features.cols() + poly.coeff_len());
    raw.leftCols(ds.features.cols()) = ds.features;
    raw.rightCols(poly.coeff_len()) = piecewise_poly_encode(poly, ds.outputs);
    data.validation_labels.push_back(assign_cluster(km, raw));
    data.validation.push_back(std::move(ds));
  }
  return data;
}

int cmd_run(const CommonFlags& flags, const std::string& configs_csv,
            const std::string& algos_csv, int repeats_flag) {
  WorkbenchConfig cfg = load_config(flags);
  if (!flags.out.empty()) cfg.report_dir = flags.out;
  if (!configs_csv.empty()) {
    cfg.configs.clear();
    std::istringstream ss(configs_csv);
    std::string tok;
    while (std::getline(ss, tok, ','))
      cfg.configs.push_back(std::stoi(tok));
  }
  if (!algos_csv.empty()) {
    cfg.algos.clear();
    std::istringstream ss(algos_csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) cfg.algos.push_back(algo_from_string(tok));
  }
  if (repeats_flag > 0) cfg.repeats = repeats_flag;
  cfg.validate();

  KMeansModel km;
  const ClusteredData data = load_clustered_data(cfg, km);

  ExperimentReport report;
  for (int config_id : cfg.configs) {
    for (std::size_t ai = 0; ai < cfg.algos.size(); ++ai) {
      PipelineConfig pcfg;
      pcfg.config_id = config_id;
      pcfg.algo = cfg.algos[ai];
      pcfg.n_repeats = cfg.repeats;
      pcfg.split_fraction = cfg.split_fraction;
      pcfg.pca_threshold = cfg.pca_threshold;
      pcfg.seed = rng::substream_seed(cfg.seed, static_cast<uint64_t>(config_id),
                                      static_cast<uint64_t>(pcfg.algo));
      std::cout << "running configuration (" << config_id << ") with " << to_string(pcfg.algo)
                << " ...\n";
      auto fragments = run_config(data, pcfg);
      for (auto& f : fragments) {
        for (const auto& err : f.repeat_errors)
          std::cerr << "  [config " << config_id << " cluster " << f.cluster << "] " << err
                    << "\n";
        report.fragments.push_back(std::move(f));
      }
    }
  }

  write_report_files(report, cfg.report_dir);
  std::cout << "\n" << compare_table_text(compare_reports(report));
  std::cout << "report written to " << (fs::path(cfg.report_dir) / "report.json").string()
            << "\n";

  bool any_ok = false;
  for (const auto& f : report.fragments) any_ok = any_ok || f.n_repeats > 0;
  return any_ok ? 0 : kInternalError;
}

int cmd_report(const CommonFlags& flags) {
  WorkbenchConfig cfg = load_config(flags);
  if (!flags.out.empty()) cfg.report_dir = flags.out;
  const auto report =
      report_from_json(read_text((fs::path(cfg.report_dir) / "report.json").string()));
  std::cout << compare_table_text(compare_reports(report));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wing bending-moment extrapolation workbench"};
  app.require_subcommand(1);

  CommonFlags flags;
  int forced_k = 0;
  std::string configs_csv, algos_csv;
  int repeats_flag = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", flags.config_path, "workbench config file");
    cmd->add_option("--seed", flags.seed, "override the base seed")
        ->each([&](const std::string&) { flags.seed_set = true; });
    cmd->add_option("--out", flags.out, "override the output directory");
  };

  auto* gen = app.add_subcommand("generate", "write the synthetic datasets");
  add_common(gen);
  auto* clu = app.add_subcommand("cluster", "label the training variant by k-means");
  add_common(clu);
  clu->add_option("--k", forced_k, "fixed cluster count (skips the elbow scan)");
  auto* run = app.add_subcommand("run", "train/evaluate the requested configurations");
  add_common(run);
  run->add_option("--configs", configs_csv, "comma-separated configuration ids (1-8)");
  run->add_option("--algos", algos_csv, "comma-separated algorithms");
  run->add_option("--repeats", repeats_flag, "number of repeated splits");
  auto* rep = app.add_subcommand("report", "re-print the ranking from a stored report");
  add_common(rep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << e.what() << "\n";
    return kUsageError;
  }

  try {
    if (gen->parsed()) return cmd_generate(flags);
    if (clu->parsed()) return cmd_cluster(flags, forced_k);
    if (run->parsed()) return cmd_run(flags, configs_csv, algos_csv, repeats_flag);
    return cmd_report(flags);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternalError;
  }
}
