#include "wingbench/serialization.hpp"

#include "wingbench/csv_io.hpp"

#include "json.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace wingbench {

namespace {

using nlohmann::json;

json vec_to_json(const Vec& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Vec vec_from_json(const json& j) {
  const auto xs = j.get<std::vector<double>>();
  return Eigen::Map<const Vec>(xs.data(), static_cast<Eigen::Index>(xs.size()));
}

json mat_to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat mat_from_json(const json& j) {
  const auto n = static_cast<Eigen::Index>(j.size());
  if (n == 0) return Mat(0, 0);
  const auto p = static_cast<Eigen::Index>(j.at(0).size());
  Mat m(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = j.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != p)
      throw std::runtime_error("ragged matrix in JSON");
    for (Eigen::Index c = 0; c < p; ++c) m(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

json params_to_json(const TreeParams& p) {
  return {{"min_samples_leaf", p.min_samples_leaf},
          {"min_samples_split", p.min_samples_split},
          {"max_depth", p.max_depth},
          {"impurity", p.impurity == TreeParams::Impurity::Variance ? "variance"
                                                                    : "covariance-trace"},
          {"rng_seed", p.rng_seed},
          {"feature_subset_m", p.feature_subset_m}};
}

TreeParams params_from_json(const json& j) {
  TreeParams p;
  p.min_samples_leaf = j.at("min_samples_leaf").get<int>();
  p.min_samples_split = j.at("min_samples_split").get<int>();
  p.max_depth = j.at("max_depth").get<int>();
  p.impurity = j.at("impurity").get<std::string>() == "variance"
                   ? TreeParams::Impurity::Variance
                   : TreeParams::Impurity::CovarianceTrace;
  p.rng_seed = j.at("rng_seed").get<uint64_t>();
  p.feature_subset_m = j.at("feature_subset_m").get<int>();
  return p;
}

json tree_to_json_obj(const RegressionTree& tree) {
  json nodes = json::array();
  for (const auto& nd : tree.nodes) {
    json values = json::array();
    for (int c = 0; c < tree.q; ++c)
      values.push_back(tree.values[static_cast<std::size_t>(nd.value_offset + c)]);
    nodes.push_back({{"feature", nd.feature},
                     {"threshold", nd.threshold},
                     {"left", nd.left},
                     {"right", nd.right},
                     {"n", nd.sample_count},
                     {"sse", nd.sse},
                     {"value", std::move(values)}});
  }
  return {{"p", tree.p}, {"q", tree.q}, {"params", params_to_json(tree.params)},
          {"nodes", std::move(nodes)}};
}

RegressionTree tree_from_json_obj(const json& j) {
  RegressionTree tree;
  tree.p = j.at("p").get<int>();
  tree.q = j.at("q").get<int>();
  tree.params = params_from_json(j.at("params"));
  const auto& nodes = j.at("nodes");
  tree.nodes.reserve(nodes.size());
  tree.values.reserve(nodes.size() * static_cast<std::size_t>(tree.q));
  for (const auto& nj : nodes) {
    TreeNode nd;
    nd.feature = nj.at("feature").get<int>();
    nd.threshold = nj.at("threshold").get<double>();
    nd.left = nj.at("left").get<int>();
    nd.right = nj.at("right").get<int>();
    nd.sample_count = nj.at("n").get<int>();
    nd.sse = nj.at("sse").get<double>();
    nd.value_offset = static_cast<int>(tree.values.size());
    const auto& vals = nj.at("value");
    if (static_cast<int>(vals.size()) != tree.q)
      throw std::runtime_error("tree JSON: value width mismatch");
    for (const auto& v : vals) tree.values.push_back(v.get<double>());
    tree.nodes.push_back(nd);
  }
  if (tree.nodes.empty()) throw std::runtime_error("tree JSON: no nodes");
  for (const auto& nd : tree.nodes) {
    const int n = static_cast<int>(tree.nodes.size());
    if (nd.feature >= 0 && (nd.left < 0 || nd.left >= n || nd.right < 0 || nd.right >= n))
      throw std::runtime_error("tree JSON: child index out of range");
    if (nd.feature >= tree.p) throw std::runtime_error("tree JSON: feature out of range");
  }
  return tree;
}

json pca_to_json(const PcaModel& m) {
  return {{"mean", vec_to_json(m.mean)},         {"scale", vec_to_json(m.scale)},
          {"components", mat_to_json(m.components)}, {"eigenvalues", vec_to_json(m.eigenvalues)},
          {"retained_r", m.retained_r},          {"explained_ratio", m.explained_ratio}};
}

PcaModel pca_from_json(const json& j) {
  PcaModel m;
  m.mean = vec_from_json(j.at("mean"));
  m.scale = vec_from_json(j.at("scale"));
  m.components = mat_from_json(j.at("components"));
  m.eigenvalues = vec_from_json(j.at("eigenvalues"));
  m.retained_r = j.at("retained_r").get<int>();
  m.explained_ratio = j.at("explained_ratio").get<double>();
  return m;
}

json poly_to_json(const PiecewisePolyModel& m) {
  return {{"split_station_index", m.split_station_index},
          {"degree_inboard", m.degree_inboard},
          {"degree_outboard", m.degree_outboard},
          {"stations", vec_to_json(m.stations)}};
}

PiecewisePolyModel poly_from_json(const json& j) {
  PiecewisePolyModel m;
  m.split_station_index = j.at("split_station_index").get<int>();
  m.degree_inboard = j.at("degree_inboard").get<int>();
  m.degree_outboard = j.at("degree_outboard").get<int>();
  m.stations = vec_from_json(j.at("stations"));
  return m;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("bad JSON: ") + e.what());
  }
}

}  // namespace

std::string tree_to_json(const RegressionTree& tree) { return tree_to_json_obj(tree).dump(); }

RegressionTree tree_from_json(const std::string& text) {
  return tree_from_json_obj(parse(text));
}

std::string output_codec_to_json(const OutputCodec& codec) {
  json j;
  j["kind"] = to_string(codec.kind);
  if (codec.pca) j["pca"] = pca_to_json(*codec.pca);
  if (codec.poly) j["poly"] = poly_to_json(*codec.poly);
  if (codec.coeff_pca) j["coeff_pca"] = pca_to_json(*codec.coeff_pca);
  j["train_recon"] = {{"r2_min", codec.train_recon.r2_min},
                      {"r2_mean", codec.train_recon.r2_mean},
                      {"frac_ge_999", codec.train_recon.frac_ge_999}};
  return j.dump();
}

OutputCodec output_codec_from_json(const std::string& text) {
  const json j = parse(text);
  OutputCodec codec;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "raw")
    codec.kind = OutputCodecKind::Raw;
  else if (kind == "pca")
    codec.kind = OutputCodecKind::PcaOnly;
  else if (kind == "poly")
    codec.kind = OutputCodecKind::PolyOnly;
  else if (kind == "poly_pca")
    codec.kind = OutputCodecKind::PolyThenPca;
  else
    throw std::runtime_error("unknown codec kind '" + kind + "'");
  if (j.contains("pca")) codec.pca = pca_from_json(j.at("pca"));
  if (j.contains("poly")) codec.poly = poly_from_json(j.at("poly"));
  if (j.contains("coeff_pca")) codec.coeff_pca = pca_from_json(j.at("coeff_pca"));
  const auto& tr = j.at("train_recon");
  codec.train_recon.r2_min = tr.at("r2_min").get<double>();
  codec.train_recon.r2_mean = tr.at("r2_mean").get<double>();
  codec.train_recon.frac_ge_999 = tr.at("frac_ge_999").get<double>();
  return codec;
}

std::string kmeans_to_json(const KMeansModel& model) {
  json j;
  j["k"] = model.k;
  j["centroids"] = mat_to_json(model.centroids);
  j["distortion"] = model.distortion;
  j["mean"] = vec_to_json(model.mean);
  j["scale"] = vec_to_json(model.scale);
  j["labels"] = model.labels;
  j["distortion_history"] = model.distortion_history;
  return j.dump();
}

KMeansModel kmeans_from_json(const std::string& text) {
  const json j = parse(text);
  KMeansModel m;
  m.k = j.at("k").get<int>();
  m.centroids = mat_from_json(j.at("centroids"));
  m.distortion = j.at("distortion").get<double>();
  m.mean = vec_from_json(j.at("mean"));
  m.scale = vec_from_json(j.at("scale"));
  m.labels = j.at("labels").get<std::vector<int>>();
  m.distortion_history = j.at("distortion_history").get<std::vector<double>>();
  return m;
}

namespace {

json spec_to_json(const AlgoSpec& spec) {
  return {{"algo", to_string(spec.algo)},
          {"tree", params_to_json(spec.tree)},
          {"n_estimators", spec.n_estimators},
          {"learning_rate", spec.learning_rate},
          {"rf_m", spec.rf_m},
          {"adb_forest_trees", spec.adb_forest_trees}};
}

AlgoSpec spec_from_json(const json& j) {
  AlgoSpec spec;
  spec.algo = algo_from_string(j.at("algo").get<std::string>());
  spec.tree = params_from_json(j.at("tree"));
  spec.n_estimators = j.at("n_estimators").get<int>();
  spec.learning_rate = j.at("learning_rate").get<double>();
  spec.rf_m = j.at("rf_m").get<int>();
  spec.adb_forest_trees = j.at("adb_forest_trees").get<int>();
  return spec;
}

std::string machine_file(int col, int machine) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "col%02d_machine%03d.json", col, machine);
  return buf;
}

json forest_to_json_obj(const RandomForestModel& forest) {
  json trees = json::array();
  for (const auto& t : forest.trees) trees.push_back(tree_to_json_obj(t));
  return {{"m", forest.feature_subset_m}, {"trees", std::move(trees)}};
}

RandomForestModel forest_from_json_obj(const json& j) {
  RandomForestModel forest;
  forest.feature_subset_m = j.at("m").get<int>();
  for (const auto& t : j.at("trees")) forest.trees.push_back(tree_from_json_obj(t));
  return forest;
}

}  // namespace

void save_model_bundle(const MultiOutputModel& model, const std::string& dir, uint64_t seed,
                       const std::string& codec_ref) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  json manifest;
  manifest["algo"] = to_string(model.spec.algo);
  manifest["spec"] = spec_to_json(model.spec);
  manifest["q"] = model.q;
  manifest["seed"] = seed;
  manifest["codec"] = codec_ref;

  json columns = json::array();
  auto write_machine = [&](int col, int m, const json& body) {
    const auto name = machine_file(col, m);
    spit((fs::path(dir) / name).string(), body.dump());
    return name;
  };

  if (model.native_rf) {
    json files = json::array();
    for (std::size_t m = 0; m < model.native_rf->trees.size(); ++m)
      files.push_back(write_machine(0, static_cast<int>(m),
                                    tree_to_json_obj(model.native_rf->trees[m])));
    manifest["native_rf"] = {{"m", model.native_rf->feature_subset_m}, {"files", files}};
  } else {
    for (int c = 0; c < model.q; ++c) {
      json col;
      json files = json::array();
      switch (model.spec.algo) {
        case Algo::Bagging: {
          const auto& bag = model.bagging_cols[static_cast<std::size_t>(c)];
          for (std::size_t m = 0; m < bag.trees.size(); ++m)
            files.push_back(write_machine(c, static_cast<int>(m), tree_to_json_obj(bag.trees[m])));
          break;
        }
        case Algo::Gbm: {
          const auto& gbm = model.gbm_cols[static_cast<std::size_t>(c)];
          col["learning_rate"] = gbm.learning_rate;
          for (std::size_t m = 0; m < gbm.trees.size(); ++m)
            files.push_back(write_machine(c, static_cast<int>(m), tree_to_json_obj(gbm.trees[m])));
          break;
        }
        default: {
          const auto& adb = model.adb_cols[static_cast<std::size_t>(c)];
          col["betas"] = adb.betas;
          col["base"] = adb.base_kind == AdaBase::Forest ? "forest" : "tree";
          for (std::size_t m = 0; m < adb.n_machines(); ++m) {
            const json body = adb.base_kind == AdaBase::Forest
                                  ? forest_to_json_obj(adb.forest_machines[m])
                                  : tree_to_json_obj(adb.tree_machines[m]);
            files.push_back(write_machine(c, static_cast<int>(m), body));
          }
          break;
        }
      }
      col["files"] = std::move(files);
      columns.push_back(std::move(col));
    }
    manifest["columns"] = std::move(columns);
  }
  spit((fs::path(dir) / "manifest.json").string(), manifest.dump(2) + "\n");
}

MultiOutputModel load_model_bundle(const std::string& dir) {
  namespace fs = std::filesystem;
  const json manifest = parse(slurp((fs::path(dir) / "manifest.json").string()));
  MultiOutputModel model;
  model.spec = spec_from_json(manifest.at("spec"));
  model.q = manifest.at("q").get<int>();

  auto read_machine = [&](const json& name) {
    return parse(slurp((fs::path(dir) / name.get<std::string>()).string()));
  };

  if (manifest.contains("native_rf")) {
    RandomForestModel rf;
    rf.feature_subset_m = manifest.at("native_rf").at("m").get<int>();
    for (const auto& f : manifest.at("native_rf").at("files"))
      rf.trees.push_back(tree_from_json_obj(read_machine(f)));
    model.native_rf = std::move(rf);
    return model;
  }
  for (const auto& col : manifest.at("columns")) {
    switch (model.spec.algo) {
      case Algo::Bagging: {
        BaggingModel bag;
        for (const auto& f : col.at("files")) bag.trees.push_back(tree_from_json_obj(read_machine(f)));
        model.bagging_cols.push_back(std::move(bag));
        break;
      }
      case Algo::Gbm: {
        GbmModel gbm;
        gbm.learning_rate = col.at("learning_rate").get<double>();
        for (const auto& f : col.at("files")) gbm.trees.push_back(tree_from_json_obj(read_machine(f)));
        model.gbm_cols.push_back(std::move(gbm));
        break;
      }
      default: {
        AdaBoostR2Model adb;
        adb.base_kind = col.at("base").get<std::string>() == "forest" ? AdaBase::Forest
                                                                      : AdaBase::Tree;
        adb.betas = col.at("betas").get<std::vector<double>>();
        for (const auto& f : col.at("files")) {
          const json body = read_machine(f);
          if (adb.base_kind == AdaBase::Forest)
            adb.forest_machines.push_back(forest_from_json_obj(body));
          else
            adb.tree_machines.push_back(tree_from_json_obj(body));
        }
        model.adb_cols.push_back(std::move(adb));
        break;
      }
    }
  }
  return model;
}

namespace {

json stat_to_json(const ScoreStat& s) { return {{"mean", s.mean}, {"std", s.std}}; }

ScoreStat stat_from_json(const json& j) {
  ScoreStat s;
  s.mean = j.at("mean").get<double>();
  s.std = j.at("std").get<double>();
  return s;
}

json ecdf_to_json(const EcdfResult& e) {
  return {{"alphas", e.alphas}, {"g", e.g},
          {"p_le_2", e.p_le_2}, {"p_le_10", e.p_le_10},
          {"mean_error", e.mean_error}};
}

EcdfResult ecdf_from_json(const json& j) {
  EcdfResult e;
  e.alphas = j.at("alphas").get<std::vector<double>>();
  e.g = j.at("g").get<std::vector<double>>();
  e.p_le_2 = j.at("p_le_2").get<double>();
  e.p_le_10 = j.at("p_le_10").get<double>();
  e.mean_error = j.at("mean_error").get<double>();
  return e;
}

}  // namespace

std::string report_to_json(const ExperimentReport& report) {
  json frags = json::array();
  for (const auto& f : report.fragments) {
    json jf;
    jf["config_id"] = f.config_id;
    jf["cluster"] = f.cluster;
    jf["algo"] = to_string(f.algo);
    jf["learning"] = stat_to_json(f.learning);
    jf["test"] = stat_to_json(f.test);
    for (const auto& v : f.validation) {
      json jv = stat_to_json(v.r2);
      jv["ecdf"] = ecdf_to_json(v.ecdf);
      jf["val" + std::to_string(v.mtow_tons)] = std::move(jv);
    }
    jf["n_repeats"] = f.n_repeats;
    jf["zero_variance_warnings"] = f.zero_variance_warnings;
    jf["repeat_errors"] = f.repeat_errors;
    frags.push_back(std::move(jf));
  }
  return json{{"fragments", std::move(frags)}}.dump(2) + "\n";
}

ExperimentReport report_from_json(const std::string& text) {
  const json j = parse(text);
  ExperimentReport report;
  for (const auto& jf : j.at("fragments")) {
    ConfigFragment f;
    f.config_id = jf.at("config_id").get<int>();
    f.cluster = jf.at("cluster").get<int>();
    f.algo = algo_from_string(jf.at("algo").get<std::string>());
    f.learning = stat_from_json(jf.at("learning"));
    f.test = stat_from_json(jf.at("test"));
    for (auto it = jf.begin(); it != jf.end(); ++it) {
      if (it.key().rfind("val", 0) != 0) continue;
      VariantEval v;
      v.mtow_tons = std::stoi(it.key().substr(3));
      v.r2 = stat_from_json(it.value());
      v.ecdf = ecdf_from_json(it.value().at("ecdf"));
      f.validation.push_back(std::move(v));
    }
    std::sort(f.validation.begin(), f.validation.end(),
              [](const VariantEval& a, const VariantEval& b) { return a.mtow_tons < b.mtow_tons; });
    f.n_repeats = jf.at("n_repeats").get<int>();
    f.zero_variance_warnings = jf.at("zero_variance_warnings").get<int>();
    f.repeat_errors = jf.at("repeat_errors").get<std::vector<std::string>>();
    report.fragments.push_back(std::move(f));
  }
  return report;
}

void write_report_files(const ExperimentReport& report, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  spit((fs::path(dir) / "report.json").string(), report_to_json(report));

  // flat CSV, one row per fragment
  std::vector<int> variants;
  for (const auto& f : report.fragments)
    for (const auto& v : f.validation)
      if (std::find(variants.begin(), variants.end(), v.mtow_tons) == variants.end())
        variants.push_back(v.mtow_tons);
  std::sort(variants.begin(), variants.end());

  std::ostringstream csv;
  csv << "config_id,cluster,algo,n_repeats,learning_mean,learning_std,test_mean,test_std";
  for (int m : variants) {
    const std::string tag = "val" + std::to_string(m);
    csv << ',' << tag << "_mean," << tag << "_std," << tag << "_p_le_2," << tag << "_p_le_10,"
        << tag << "_mean_error";
  }
  csv << '\n';
  for (const auto& f : report.fragments) {
    csv << f.config_id << ',' << f.cluster << ',' << to_string(f.algo) << ',' << f.n_repeats
        << ',' << format_double(f.learning.mean) << ',' << format_double(f.learning.std) << ','
        << format_double(f.test.mean) << ',' << format_double(f.test.std);
    for (int m : variants) {
      const VariantEval* hit = nullptr;
      for (const auto& v : f.validation)
        if (v.mtow_tons == m) hit = &v;
      if (!hit) {
        csv << ",,,,,";
        continue;
      }
      csv << ',' << format_double(hit->r2.mean) << ',' << format_double(hit->r2.std) << ','
          << format_double(hit->ecdf.p_le_2) << ',' << format_double(hit->ecdf.p_le_10) << ','
          << format_double(hit->ecdf.mean_error);
    }
    csv << '\n';
  }
  spit((fs::path(dir) / "report.csv").string(), csv.str());

  for (const auto& f : report.fragments) {
    for (const auto& v : f.validation) {
      if (v.ecdf.alphas.empty()) continue;
      std::ostringstream tsv;
      tsv << "alpha\tG\n";
      for (std::size_t i = 0; i < v.ecdf.alphas.size(); ++i)
        tsv << format_double(v.ecdf.alphas[i]) << '\t' << format_double(v.ecdf.g[i]) << '\n';
      char name[96];
      std::snprintf(name, sizeof(name), "ecdf_config%d_cluster%d_%s_val%d.tsv", f.config_id,
                    f.cluster, to_string(f.algo), v.mtow_tons);
      spit((fs::path(dir) / name).string(), tsv.str());
    }
  }
}

std::string compare_table_text(const std::vector<CompareRow>& rows) {
  std::ostringstream out;
  out << "cluster  config  algo      val_mean   val_std    test_mean  flags\n";
  char line[160];
  for (const auto& r : rows) {
    std::string flags;
    if (r.best_in_cluster) flags += "best ";
    if (r.output_pca_beat_raw)
      flags += *r.output_pca_beat_raw ? "pca>raw" : "pca<=raw";
    std::snprintf(line, sizeof(line), "%-7d  (%d)     %-8s  %9.6f  %9.6f  %9.6f  %s\n",
                  r.cluster, r.config_id, to_string(r.algo), r.validation_mean,
                  r.validation_std, r.test_mean, flags.c_str());
    out << line;
  }
  return out.str();
}

}  // namespace wingbench
