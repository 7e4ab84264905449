#include "doctest.h"

#include "wingbench/evaluation.hpp"
#include "wingbench/wing_model.hpp"

#include <cmath>

using namespace wingbench;
using doctest::Approx;

TEST_CASE("per-station R^2 on a worked example") {
  Mat Yt(3, 1), Yp(3, 1);
  Yt << 0, 2, 4;
  Yp << 1, 2, 3;
  R2Result r = r2_per_station(Yt, Yp);
  REQUIRE(r.per_station.size() == 1);
  CHECK(r.per_station[0] == Approx(0.75).epsilon(1e-12));
  CHECK(r.mean == Approx(0.75).epsilon(1e-12));
  CHECK(r.excluded == 0);
}

TEST_CASE("the mean predictor scores exactly zero") {
  Mat Yt(5, 3);
  Yt << 1, 10, -3, 2, 12, -1, 3, 14, 1, 4, 16, 3, 5, 18, 5;
  Mat Yp(5, 3);
  for (int j = 0; j < 3; ++j) Yp.col(j).setConstant(Yt.col(j).mean());
  R2Result r = r2_per_station(Yt, Yp);
  for (int j = 0; j < 3; ++j) CHECK(r.per_station[j] == Approx(0.0).epsilon(1e-12));
  CHECK(r.mean == Approx(0.0).epsilon(1e-12));
}

TEST_CASE("zero-variance stations: exact hits count as 1, misses are excluded") {
  Mat Yt(4, 2), Yp(4, 2);
  Yt.col(0) << 1, 2, 3, 4;
  Yt.col(1).setConstant(0.0);  // e.g. the free wing tip
  Yp.col(0) << 1, 2, 3, 4;
  Yp.col(1).setConstant(0.0);
  R2Result exact = r2_per_station(Yt, Yp);
  CHECK(exact.per_station[1] == 1.0);
  CHECK(exact.excluded == 0);
  CHECK(exact.mean == Approx(1.0));

  Yp(2, 1) = 0.01;  // now the constant station is missed
  R2Result missed = r2_per_station(Yt, Yp);
  CHECK(std::isnan(missed.per_station[1]));
  CHECK(missed.excluded == 1);
  CHECK(missed.mean == Approx(1.0));  // mean over the remaining station
}

TEST_CASE("curve error rate on a worked example") {
  Vec t(2), p(2);
  t << 3, 4;
  p << 3, 5;
  CHECK(error_rate(t, p) == Approx(0.2).epsilon(1e-12));

  // uniform 10% over-prediction scores exactly 0.1
  Vec y(4);
  y << -2, 7, 1, -5;
  CHECK(error_rate(y, 1.1 * y) == Approx(0.1).epsilon(1e-12));

  Vec zero = Vec::Zero(3);
  CHECK_THROWS_AS(error_rate(zero, y.head(3)), std::invalid_argument);
}

TEST_CASE("error ECDF on a worked example") {
  std::vector<double> errs = {0.01, 0.05, 0.2};
  EcdfResult e = error_ecdf(errs);
  REQUIRE(e.alphas.size() == 3);
  CHECK(e.alphas[0] == 0.01);
  CHECK(e.g[0] == Approx(1.0 / 3.0));
  CHECK(e.g[1] == Approx(2.0 / 3.0));
  CHECK(e.g[2] == Approx(1.0));
  CHECK(e.p_le_2 == Approx(1.0 / 3.0));
  CHECK(e.p_le_10 == Approx(2.0 / 3.0));
  CHECK(e.mean_error == Approx((0.01 + 0.05 + 0.2) / 3.0).epsilon(1e-12));

  EcdfResult at = error_ecdf(errs, {0.02, 0.1, 0.5});
  CHECK(at.g[0] == Approx(1.0 / 3.0));
  CHECK(at.g[1] == Approx(2.0 / 3.0));
  CHECK(at.g[2] == Approx(1.0));

  // duplicates collapse; the curve never decreases and tops out at 1
  EcdfResult dup = error_ecdf({0.1, 0.1, 0.1, 0.3});
  REQUIRE(dup.alphas.size() == 2);
  CHECK(dup.g.front() == Approx(0.75));
  CHECK(dup.g.back() == 1.0);
}

TEST_CASE("configuration grid: input and output codec wiring") {
  for (int id = 1; id <= 4; ++id) CHECK(config_input_codec(id) == InputCodecKind::Raw);
  for (int id = 5; id <= 8; ++id) CHECK(config_input_codec(id) == InputCodecKind::Pca);
  CHECK(config_output_codec(1) == OutputCodecKind::Raw);
  CHECK(config_output_codec(2) == OutputCodecKind::PcaOnly);
  CHECK(config_output_codec(3) == OutputCodecKind::PolyOnly);
  CHECK(config_output_codec(4) == OutputCodecKind::PolyThenPca);
  CHECK(config_output_codec(5) == OutputCodecKind::Raw);
  CHECK(config_output_codec(8) == OutputCodecKind::PolyThenPca);
  CHECK_THROWS_AS(config_input_codec(0), std::invalid_argument);
  CHECK_THROWS_AS(config_output_codec(9), std::invalid_argument);
}

TEST_CASE("tuned hyperparameter table: spot values and the borrowing rules") {
  AlgoSpec rf10 = default_hyperparameters(Algo::Rf, 1, 0);
  CHECK(rf10.algo == Algo::Rf);
  CHECK(rf10.tree.min_samples_leaf == 5);
  CHECK(rf10.tree.min_samples_split == 10);
  CHECK(rf10.n_estimators == 144);

  AlgoSpec rf21 = default_hyperparameters(Algo::Rf, 2, 1);
  CHECK(rf21.tree.min_samples_leaf == 10);
  CHECK(rf21.tree.min_samples_split == 6);
  CHECK(rf21.n_estimators == 161);

  AlgoSpec adbrf = default_hyperparameters(Algo::AdbRf, 2, 0);
  CHECK(adbrf.learning_rate == Approx(0.92));
  CHECK(adbrf.n_estimators == 29);
  CHECK(adbrf.adb_forest_trees == 23);
  CHECK(adbrf.tree.min_samples_leaf == 15);
  CHECK(adbrf.tree.min_samples_split == 17);

  AlgoSpec adbdt = default_hyperparameters(Algo::AdbDt, 1, 0);
  CHECK(adbdt.learning_rate == Approx(1.09));
  CHECK(adbdt.n_estimators == 89);
  CHECK(adbdt.tree.min_samples_leaf == 4);
  CHECK(adbdt.tree.min_samples_split == 9);

  AlgoSpec bag = default_hyperparameters(Algo::Bagging, 5, 0);
  CHECK(bag.n_estimators == 149);
  CHECK(bag.tree.min_samples_leaf == 3);
  CHECK(bag.tree.min_samples_split == 12);

  AlgoSpec gbm = default_hyperparameters(Algo::Gbm, 6, 1);
  CHECK(gbm.tree.max_depth == 14);
  CHECK(gbm.learning_rate == Approx(0.92));
  CHECK(gbm.n_estimators == 65);

  // untuned configurations borrow the tuned column with the same outputs
  auto same = [](const AlgoSpec& a, const AlgoSpec& b) {
    return a.n_estimators == b.n_estimators && a.learning_rate == b.learning_rate &&
           a.tree.min_samples_leaf == b.tree.min_samples_leaf &&
           a.tree.min_samples_split == b.tree.min_samples_split &&
           a.tree.max_depth == b.tree.max_depth && a.adb_forest_trees == b.adb_forest_trees;
  };
  for (Algo a : {Algo::AdbDt, Algo::AdbRf, Algo::Rf, Algo::Bagging, Algo::Gbm}) {
    CHECK(same(default_hyperparameters(a, 3, 0), default_hyperparameters(a, 2, 0)));
    CHECK(same(default_hyperparameters(a, 4, 1), default_hyperparameters(a, 2, 1)));
    CHECK(same(default_hyperparameters(a, 7, 0), default_hyperparameters(a, 6, 0)));
    CHECK(same(default_hyperparameters(a, 8, 1), default_hyperparameters(a, 6, 1)));
    // clusters past the second reuse the second column
    CHECK(same(default_hyperparameters(a, 1, 4), default_hyperparameters(a, 1, 1)));
  }
  CHECK_THROWS_AS(default_hyperparameters(Algo::Rf, 1, -1), std::invalid_argument);
}

namespace {

ClusteredData small_clustered(int n_train, int n_val, uint64_t seed) {
  WingGeometry geom;
  ClusteredData d;
  d.train = generate_dataset(geom, 238, n_train, seed, 0.005);
  d.train_labels.assign(static_cast<std::size_t>(n_train), 0);
  d.n_clusters = 1;
  d.validation.push_back(generate_dataset(geom, 242, n_val, seed + 1, 0.005));
  d.validation_labels.emplace_back(static_cast<std::size_t>(n_val), 0);
  return d;
}

AlgoSpec tiny_forest() {
  AlgoSpec s;
  s.algo = Algo::Rf;
  s.n_estimators = 15;
  s.rf_m = 8;
  s.tree.min_samples_leaf = 3;
  s.tree.min_samples_split = 6;
  return s;
}

}  // namespace

TEST_CASE("pipeline: repeated splits produce a sane, reproducible fragment") {
  ClusteredData d = small_clustered(220, 80, 3);
  PipelineConfig cfg;
  cfg.config_id = 1;
  cfg.algo = Algo::Rf;
  cfg.n_repeats = 2;
  cfg.seed = 17;
  cfg.hyper_override = tiny_forest();

  auto frags = run_config(d, cfg);
  REQUIRE(frags.size() == 1);
  const ConfigFragment& f = frags[0];
  CHECK(f.config_id == 1);
  CHECK(f.cluster == 0);
  CHECK(f.algo == Algo::Rf);
  CHECK(f.n_repeats == 2);
  CHECK(f.repeat_errors.empty());
  CHECK(f.learning.mean > 0.8);  // in-sample forest fit is strong
  CHECK(f.learning.mean <= 1.0 + 1e-12);
  CHECK(f.test.mean <= 1.0 + 1e-12);
  REQUIRE(f.validation.size() == 1);
  CHECK(f.validation[0].mtow_tons == 242);
  CHECK(f.validation[0].r2.mean <= 1.0 + 1e-12);
  const EcdfResult& e = f.validation[0].ecdf;
  REQUIRE(!e.g.empty());
  CHECK(e.g.back() == Approx(1.0));
  for (std::size_t i = 1; i < e.g.size(); ++i) CHECK(e.g[i] >= e.g[i - 1]);

  auto again = run_config(d, cfg);
  CHECK(again[0].test.mean == f.test.mean);
  CHECK(again[0].validation[0].r2.mean == f.validation[0].r2.mean);
  CHECK(again[0].learning.std == f.learning.std);
}

TEST_CASE("pipeline: single repeat has zero spread") {
  ClusteredData d = small_clustered(150, 60, 5);
  PipelineConfig cfg;
  cfg.config_id = 1;
  cfg.algo = Algo::Rf;
  cfg.n_repeats = 1;
  cfg.seed = 4;
  cfg.hyper_override = tiny_forest();
  auto frags = run_config(d, cfg);
  CHECK(frags[0].learning.std == 0.0);
  CHECK(frags[0].test.std == 0.0);
  CHECK(frags[0].validation[0].r2.std == 0.0);
}

TEST_CASE("pipeline: encoded outputs decode back before scoring") {
  ClusteredData d = small_clustered(220, 80, 11);
  for (int id : {2, 3, 5}) {
    PipelineConfig cfg;
    cfg.config_id = id;
    cfg.algo = Algo::Rf;
    cfg.n_repeats = 1;
    cfg.seed = 2;
    cfg.hyper_override = tiny_forest();
    auto frags = run_config(d, cfg);
    REQUIRE(frags.size() == 1);
    INFO("config ", id);
    CHECK(frags[0].repeat_errors.empty());
    // scores live in station space: a strong fit survives the round trip
    CHECK(frags[0].learning.mean > 0.7);
    CHECK(frags[0].learning.mean <= 1.0 + 1e-12);
  }
}

TEST_CASE("pipeline: a cluster with no validation rows reports per-repeat errors") {
  ClusteredData d = small_clustered(200, 40, 9);
  // split the training rows across two clusters, but leave every validation
  // row in cluster 0 so cluster 1 cannot be scored
  d.n_clusters = 2;
  for (std::size_t i = 0; i < d.train_labels.size(); ++i)
    d.train_labels[i] = static_cast<int>(i % 2);
  PipelineConfig cfg;
  cfg.config_id = 1;
  cfg.algo = Algo::Rf;
  cfg.n_repeats = 2;
  cfg.seed = 8;
  cfg.hyper_override = tiny_forest();
  auto frags = run_config(d, cfg);
  REQUIRE(frags.size() == 2);
  CHECK(frags[0].n_repeats == 2);
  CHECK(frags[1].n_repeats == 0);
  CHECK(frags[1].repeat_errors.size() == 2);
}

TEST_CASE("ranking: ordering, best flag, and the output-PCA comparison") {
  auto frag = [](int id, int cluster, Algo a, double val_mean, double val_std) {
    ConfigFragment f;
    f.config_id = id;
    f.cluster = cluster;
    f.algo = a;
    f.n_repeats = 2;
    VariantEval v;
    v.mtow_tons = 242;
    v.r2 = {val_mean, val_std};
    f.validation = {v};
    f.test = {val_mean - 0.01, 0.0};
    return f;
  };
  ExperimentReport rep;
  rep.fragments.push_back(frag(1, 0, Algo::Rf, 0.90, 0.01));
  rep.fragments.push_back(frag(2, 0, Algo::Rf, 0.93, 0.02));
  rep.fragments.push_back(frag(1, 0, Algo::Gbm, 0.80, 0.01));
  rep.fragments.push_back(frag(1, 1, Algo::Rf, 0.85, 0.01));

  auto rows = compare_reports(rep);
  REQUIRE(rows.size() == 4);
  // cluster 0 first, ranked by validation mean
  CHECK(rows[0].cluster == 0);
  CHECK(rows[0].config_id == 2);
  CHECK(rows[0].best_in_cluster);
  CHECK(!rows[1].best_in_cluster);
  CHECK(rows[1].config_id == 1);
  CHECK(rows[2].algo == Algo::Gbm);
  CHECK(rows[3].cluster == 1);
  CHECK(rows[3].best_in_cluster);

  // the PCA-output config carries the comparison against its raw sibling
  REQUIRE(rows[0].output_pca_beat_raw.has_value());
  CHECK(*rows[0].output_pca_beat_raw);
  CHECK(!rows[1].output_pca_beat_raw.has_value());
}
