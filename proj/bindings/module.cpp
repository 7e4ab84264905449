#include "wingbench/clustering.hpp"
#include "wingbench/csv_io.hpp"
#include "wingbench/dimred.hpp"
#include "wingbench/ensembles.hpp"
#include "wingbench/evaluation.hpp"
#include "wingbench/trees.hpp"
#include "wingbench/wing_model.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace wingbench;

namespace {

OutputCodecKind codec_kind_from_string(const std::string& s) {
  if (s == "raw") return OutputCodecKind::Raw;
  if (s == "pca") return OutputCodecKind::PcaOnly;
  if (s == "poly") return OutputCodecKind::PolyOnly;
  if (s == "poly_pca") return OutputCodecKind::PolyThenPca;
  throw std::invalid_argument("unknown codec kind '" + s + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "wing bending-moment extrapolation workbench";

  // ---- physics generator ----
  py::class_<WingGeometry>(m, "WingGeometry")
      .def(py::init<>())
      .def_readwrite("span_L", &WingGeometry::span_L)
      .def_readwrite("chord_root_Co", &WingGeometry::chord_root_Co)
      .def_readwrite("chord_tip_Ct", &WingGeometry::chord_tip_Ct)
      .def_readwrite("tank_Lf", &WingGeometry::tank_Lf)
      .def_readwrite("tank_Ctf", &WingGeometry::tank_Ctf)
      .def_readwrite("tank_Cof", &WingGeometry::tank_Cof)
      .def_readwrite("box_height_root", &WingGeometry::box_height_root)
      .def_readwrite("box_height_tip", &WingGeometry::box_height_tip)
      .def_readwrite("sigma_max", &WingGeometry::sigma_max)
      .def_readwrite("rho", &WingGeometry::rho)
      .def_readwrite("cover_weight_fraction", &WingGeometry::cover_weight_fraction)
      .def("validate", &WingGeometry::validate);

  py::class_<Dataset>(m, "Dataset")
      .def(py::init<>())
      .def_readwrite("features", &Dataset::features)
      .def_readwrite("outputs", &Dataset::outputs)
      .def_readwrite("stations", &Dataset::stations)
      .def_readwrite("mtow_tons", &Dataset::mtow_tons);

  m.def("feature_names", [] { return feature_names(); });
  m.def("cosine_stations", &cosine_stations, py::arg("span_L") = WingGeometry{}.span_L);
  m.def(
      "shear_and_moment",
      [](const Vec& Q, const Vec& stations) { return shear_and_moment(Q, stations); },
      py::arg("load_density"), py::arg("stations"));
  m.def(
      "generate_dataset",
      [](int mtow_tons, long long n, uint64_t seed, double noise_rel,
         const WingGeometry& geom) {
        return generate_dataset(geom, mtow_tons, static_cast<Eigen::Index>(n), seed, noise_rel);
      },
      py::arg("mtow_tons"), py::arg("n"), py::arg("seed"), py::arg("noise_rel") = 0.005,
      py::arg("geometry") = WingGeometry{});

  // ---- dimensional reduction ----
  py::class_<PcaModel>(m, "PcaModel")
      .def_readonly("mean", &PcaModel::mean)
      .def_readonly("scale", &PcaModel::scale)
      .def_readonly("components", &PcaModel::components)
      .def_readonly("eigenvalues", &PcaModel::eigenvalues)
      .def_readonly("retained_r", &PcaModel::retained_r)
      .def_readonly("explained_ratio", &PcaModel::explained_ratio);
  m.def("pca_fit", &pca_fit, py::arg("data"), py::arg("variance_threshold") = 0.9999,
        py::arg("fixed_r") = -1);
  m.def("pca_project", &pca_project);
  m.def("pca_reconstruct", &pca_reconstruct);

  py::class_<PiecewisePolyModel>(m, "PiecewisePolyModel")
      .def_readonly("split_station_index", &PiecewisePolyModel::split_station_index)
      .def_readonly("degree_inboard", &PiecewisePolyModel::degree_inboard)
      .def_readonly("degree_outboard", &PiecewisePolyModel::degree_outboard)
      .def_readonly("stations", &PiecewisePolyModel::stations)
      .def("coeff_len", &PiecewisePolyModel::coeff_len);
  m.def("make_piecewise_poly", &make_piecewise_poly, py::arg("stations"),
        py::arg("split_station_index") = 12, py::arg("degree_inboard") = 2,
        py::arg("degree_outboard") = 2);
  m.def("piecewise_poly_fit", &piecewise_poly_fit);
  m.def("piecewise_poly_eval", &piecewise_poly_eval);
  m.def("piecewise_poly_encode", &piecewise_poly_encode);
  m.def("piecewise_poly_decode", &piecewise_poly_decode);

  py::class_<ReconStats>(m, "ReconStats")
      .def_readonly("r2_min", &ReconStats::r2_min)
      .def_readonly("r2_mean", &ReconStats::r2_mean)
      .def_readonly("frac_ge_999", &ReconStats::frac_ge_999);
  py::class_<OutputCodec>(m, "OutputCodec")
      .def_property_readonly("kind", [](const OutputCodec& c) { return to_string(c.kind); })
      .def_readonly("train_recon", &OutputCodec::train_recon)
      .def("encoded_dim", &OutputCodec::encoded_dim);
  m.def(
      "fit_output_codec",
      [](const std::string& kind, const Mat& Y, const Vec& stations, double pca_threshold,
         int poly_pca_r) {
        OutputCodecParams params;
        params.pca_threshold = pca_threshold;
        params.poly_pca_r = poly_pca_r;
        return fit_output_codec(codec_kind_from_string(kind), Y, stations, params);
      },
      py::arg("kind"), py::arg("outputs"), py::arg("stations"),
      py::arg("pca_threshold") = 0.9999, py::arg("poly_pca_r") = 4);
  m.def("codec_encode", &codec_encode);
  m.def("codec_decode", &codec_decode);
  m.def("rowwise_r2", &rowwise_r2);

  // ---- trees and ensembles ----
  py::class_<TreeParams>(m, "TreeParams")
      .def(py::init([](int leaf, int split, int depth) {
             TreeParams p;
             p.min_samples_leaf = leaf;
             p.min_samples_split = split;
             p.max_depth = depth;
             return p;
           }),
           py::arg("min_samples_leaf") = 1, py::arg("min_samples_split") = 2,
           py::arg("max_depth") = -1)
      .def_readwrite("min_samples_leaf", &TreeParams::min_samples_leaf)
      .def_readwrite("min_samples_split", &TreeParams::min_samples_split)
      .def_readwrite("max_depth", &TreeParams::max_depth);
  py::class_<RegressionTree>(m, "RegressionTree")
      .def("n_leaves", &RegressionTree::n_leaves)
      .def_property_readonly("n_nodes",
                             [](const RegressionTree& t) { return t.nodes.size(); });
  m.def("cart_fit", &cart_fit, py::arg("X"), py::arg("Y"), py::arg("params") = TreeParams{});
  m.def("cart_predict", &cart_predict);
  m.def("prune_cost_complexity", &prune_cost_complexity, py::arg("tree"), py::arg("X"),
        py::arg("Y"), py::arg("folds") = 5, py::arg("seed") = 0);

  py::class_<AlgoSpec>(m, "AlgoSpec")
      .def(py::init([](const std::string& algo, int n_estimators, double learning_rate,
                       const TreeParams& tree, int rf_m, int adb_forest_trees) {
             AlgoSpec s;
             s.algo = algo_from_string(algo);
             s.n_estimators = n_estimators;
             s.learning_rate = learning_rate;
             s.tree = tree;
             s.rf_m = rf_m;
             s.adb_forest_trees = adb_forest_trees;
             return s;
           }),
           py::arg("algo"), py::arg("n_estimators") = 100, py::arg("learning_rate") = 1.0,
           py::arg("tree") = TreeParams{}, py::arg("rf_m") = -1,
           py::arg("adb_forest_trees") = 10)
      .def_property_readonly("algo", [](const AlgoSpec& s) { return to_string(s.algo); })
      .def_readwrite("n_estimators", &AlgoSpec::n_estimators)
      .def_readwrite("learning_rate", &AlgoSpec::learning_rate)
      .def_readwrite("tree", &AlgoSpec::tree)
      .def_readwrite("rf_m", &AlgoSpec::rf_m)
      .def_readwrite("adb_forest_trees", &AlgoSpec::adb_forest_trees);
  py::class_<MultiOutputModel>(m, "MultiOutputModel")
      .def_property_readonly("algo",
                             [](const MultiOutputModel& mo) { return to_string(mo.spec.algo); })
      .def_readonly("q", &MultiOutputModel::q)
      .def_property_readonly("feature_importance", [](const MultiOutputModel& mo) {
        if (!mo.native_rf) throw std::invalid_argument("importance requires the rf algorithm");
        return rf_feature_importance(*mo.native_rf);
      });
  m.def("multioutput_fit", &multioutput_fit, py::arg("X"), py::arg("Y"), py::arg("spec"),
        py::arg("seed") = 0);
  m.def("multioutput_predict", &multioutput_predict);
  m.def(
      "default_hyperparameters",
      [](const std::string& algo, int config_id, int cluster) {
        return default_hyperparameters(algo_from_string(algo), config_id, cluster);
      },
      py::arg("algo"), py::arg("config_id"), py::arg("cluster"));

  // ---- clustering ----
  py::class_<KMeansModel>(m, "KMeansModel")
      .def_readonly("k", &KMeansModel::k)
      .def_readonly("centroids", &KMeansModel::centroids)
      .def_readonly("distortion", &KMeansModel::distortion)
      .def_readonly("labels", &KMeansModel::labels)
      .def_readonly("distortion_history", &KMeansModel::distortion_history);
  m.def("kmeans_fit", &kmeans_fit, py::arg("matrix"), py::arg("k"), py::arg("seed") = 0,
        py::arg("max_iter") = 300, py::arg("tol") = 1e-6);
  m.def(
      "elbow_select",
      [](const Mat& matrix, const std::vector<int>& ks, uint64_t seed) {
        const auto res = elbow_select(matrix, ks, seed);
        return py::make_tuple(res.k, res.k_values, res.distortions);
      },
      py::arg("matrix"), py::arg("k_range"), py::arg("seed") = 0);
  m.def("assign_cluster", &assign_cluster);
  m.def(
      "build_cluster_matrix",
      [](const Dataset& ds, const PiecewisePolyModel& poly) {
        const auto cm = build_cluster_matrix(ds, poly);
        return py::make_tuple(cm.data, cm.mean, cm.scale);
      },
      py::arg("dataset"), py::arg("poly"));

  // ---- evaluation ----
  m.def("r2_per_station", [](const Mat& yt, const Mat& yp) {
    const auto r = r2_per_station(yt, yp);
    return py::make_tuple(r.per_station, r.mean, r.excluded);
  });
  m.def("error_rate", &error_rate);
  m.def("error_ecdf", [](const std::vector<double>& errors) {
    const auto e = error_ecdf(errors);
    py::dict d;
    d["alphas"] = e.alphas;
    d["g"] = e.g;
    d["p_le_2"] = e.p_le_2;
    d["p_le_10"] = e.p_le_10;
    d["mean_error"] = e.mean_error;
    return d;
  });
}
