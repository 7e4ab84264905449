#include "doctest.h"

#include "wingbench/rng.hpp"
#include "wingbench/wing_model.hpp"

#include <cmath>

using namespace wingbench;
using doctest::Approx;

namespace {

Vec uniform_grid(int n, double L) {
  return Vec::LinSpaced(n, 0.0, L);
}

// closed-form root..tip moment for a tip-anchored triangular load
// Q(x) = q0 (L - x)/L  =>  M(x) = q0 (L - x)^3 / (6 L)
double tri_moment(double q0, double L, double x) {
  return q0 * std::pow(L - x, 3) / (6.0 * L);
}

}  // namespace

TEST_CASE("cosine stations: 29 points from root to tip, strictly increasing") {
  const double L = 30.0;
  Vec x = cosine_stations(L);
  REQUIRE(x.size() == kNumStations);
  CHECK(x[0] == Approx(0.0).epsilon(1e-15));
  CHECK(x[kNumStations - 1] == Approx(L).epsilon(1e-12));
  for (int k = 1; k < kNumStations; ++k) CHECK(x[k] > x[k - 1]);
  // spot value: k = 14 -> L (1 - cos(pi/4))
  CHECK(x[14] == Approx(L * (1.0 - std::sqrt(0.5))).epsilon(1e-12));
  // spacing tightens toward the root
  CHECK(x[1] - x[0] < x[kNumStations - 1] - x[kNumStations - 2]);
}

TEST_CASE("constant load: trapezoid integration is exact") {
  const double L = 30.0, q = 1234.5;
  Vec x = uniform_grid(200, L);
  Vec Q = Vec::Constant(200, q);
  auto [V, M] = shear_and_moment(Q, x);
  CHECK(V[199] == 0.0);
  CHECK(M[199] == 0.0);
  for (int i = 0; i < 200; ++i) {
    CHECK(V[i] == Approx(-q * (L - x[i])).epsilon(1e-12));
    CHECK(M[i] == Approx(q * (L - x[i]) * (L - x[i]) / 2.0).epsilon(1e-12));
  }
}

TEST_CASE("triangular load: second-order accuracy against the closed form") {
  const double L = 30.0, q0 = 1000.0;
  auto max_rel_err = [&](int n) {
    Vec x = uniform_grid(n, L);
    Vec Q(n);
    for (int i = 0; i < n; ++i) Q[i] = q0 * (L - x[i]) / L;
    auto [V, M] = shear_and_moment(Q, x);
    (void)V;
    double worst = 0.0;
    const double scale = tri_moment(q0, L, 0.0);
    for (int i = 0; i + 1 < n; ++i)  // skip the tip where M == 0 exactly
      worst = std::max(worst, std::abs(M[i] - tri_moment(q0, L, x[i])) / scale);
    return worst;
  };
  const double e250 = max_rel_err(250);
  const double e500 = max_rel_err(500);
  CHECK(e500 < 1e-5);
  const double order = std::log2(e250 / e500);
  CHECK(order > 1.7);
  CHECK(order < 2.3);
}

TEST_CASE("shear and moment vanish at the free tip for any load") {
  rng::Stream st(3);
  Vec x = cosine_stations(30.0);
  Vec Q(x.size());
  for (Eigen::Index i = 0; i < Q.size(); ++i) Q[i] = st.normal() * 1e4;
  auto [V, M] = shear_and_moment(Q, x);
  CHECK(V[Q.size() - 1] == 0.0);
  CHECK(M[Q.size() - 1] == 0.0);
}

TEST_CASE("shear_and_moment input validation") {
  Vec x = uniform_grid(5, 1.0);
  CHECK_THROWS_AS(shear_and_moment(Vec::Ones(4), x), std::invalid_argument);
  Vec bad = Vec::Ones(5);
  bad[2] = std::nan("");
  CHECK_THROWS_AS(shear_and_moment(bad, x), std::invalid_argument);
}

TEST_CASE("cover weight follows the thickness integral") {
  WingGeometry geom;
  Vec x = cosine_stations(geom.span_L);
  Vec M(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double s = geom.span_L - x[i];
    M[i] = -2.0e6 * s * s / (geom.span_L * geom.span_L);
  }
  CoverWeight cw = thickness_and_cover_weight(M, geom, x);
  REQUIRE(cw.thickness.size() == x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double expect = std::abs(M[i]) / (geom.box_height(x[i]) * geom.chord(x[i]) * geom.sigma_max);
    CHECK(cw.thickness[i] == Approx(expect).epsilon(1e-12));
  }
  CHECK(cw.W_wing_kg == Approx(cw.W_cover_kg / geom.cover_weight_fraction).epsilon(1e-12));
  CHECK(cw.W_cover_kg > 0.0);
}

TEST_CASE("load components: placement, proportionality, converged weight") {
  WingGeometry geom;
  Vec x = cosine_stations(geom.span_L);
  CHECK(break_station_index(geom, x) == 12);

  Mat X = sample_features(238, 1, 42);
  Vec row = X.row(0).transpose();
  LoadComponents lc = load_distributions(geom, row, x);

  const double x_break = geom.span_L - geom.tank_Lf;
  double fuel_total = 0.0;
  for (int t = 0; t < 4; ++t) fuel_total += row[kIdxTankFirst + t];
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] < x_break) {
      CHECK(lc.fuel[i] == 0.0);  // tank is tip-anchored
    } else if (fuel_total > 0.0) {
      CHECK(lc.fuel[i] < 0.0);  // fuel is relief
    }
    CHECK(lc.structure[i] <= 0.0);
  }
  // two-level lift: inboard/outboard density ratio is exactly 1.6
  CHECK(lc.lift[0] / lc.lift[x.size() - 1] == Approx(1.6).epsilon(1e-12));
  // structure load tracks local chord
  double k0 = lc.structure[0] / geom.chord(x[0]);
  double k1 = lc.structure[x.size() - 1] / geom.chord(x[x.size() - 1]);
  CHECK(k0 == Approx(k1).epsilon(1e-12));

  CHECK(lc.struct_weight_kg > 1000.0);
  CHECK(lc.struct_weight_kg < 60000.0);

  // the fixed point actually converged: one more iteration barely moves it
  auto [V, M] = shear_and_moment(lc.total(), x);
  (void)V;
  double W_next = thickness_and_cover_weight(M, geom, x).W_wing_kg;
  CHECK(std::abs(W_next - lc.struct_weight_kg) / lc.struct_weight_kg < 0.02);
}

TEST_CASE("uniform lift override flattens the profile") {
  WingGeometry geom;
  Vec x = cosine_stations(geom.span_L);
  Mat X = sample_features(238, 1, 9);
  LoadComponents lc =
      load_distributions(geom, X.row(0).transpose(), x, LiftShape::Uniform);
  CHECK(lc.lift[0] == Approx(lc.lift[x.size() - 1]).epsilon(1e-12));
}

TEST_CASE("geometry validation rejects nonsense") {
  WingGeometry g;
  g.span_L = -1.0;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  g = WingGeometry{};
  g.chord_tip_Ct = 9.0;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  g = WingGeometry{};
  g.tank_Lf = 31.0;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  g = WingGeometry{};
  g.cover_weight_fraction = 1.0;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
}

TEST_CASE("feature sampler: shape, bounds, determinism, variant effect") {
  Mat A = sample_features(238, 40, 7);
  Mat B = sample_features(238, 40, 7);
  REQUIRE(A.rows() == 40);
  REQUIRE(A.cols() == kNumFeatures);
  CHECK((A - B).cwiseAbs().maxCoeff() == 0.0);

  Mat C = sample_features(238, 40, 8);
  CHECK((A - C).cwiseAbs().maxCoeff() > 0.0);

  // mass ceiling scales with the variant
  Mat base = sample_features(238, 300, 7);
  Mat heavy = sample_features(251, 300, 7);
  CHECK(base.col(kIdxMass).maxCoeff() <= 238000.0);
  CHECK(heavy.col(kIdxMass).maxCoeff() <= 251000.0);
  CHECK(heavy.col(kIdxMass).maxCoeff() > 238000.0);  // heavier variant uses the headroom

  // only mass and outer-tank columns react to the variant
  for (int j = 0; j < kNumFeatures; ++j) {
    double diff = (base.col(j) - heavy.col(j)).cwiseAbs().maxCoeff();
    if (j == kIdxMass || j == kIdxTankFirst)
      CHECK(diff > 0.0);
    else
      CHECK(diff == 0.0);
  }

  // per-(row, column) substreams: a row keeps its values when n changes
  Mat small = sample_features(238, 5, 7);
  CHECK((small - A.topRows(5)).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(sample_features(239, 5, 7), std::invalid_argument);
  CHECK_THROWS_AS(sample_features(238, 0, 7), std::invalid_argument);
}

TEST_CASE("generate_dataset: shapes, determinism, tip moment, noise model") {
  WingGeometry geom;
  Dataset clean = generate_dataset(geom, 238, 50, 123, 0.0);
  REQUIRE(clean.rows() == 50);
  REQUIRE(clean.features.cols() == kNumFeatures);
  REQUIRE(clean.outputs.cols() == kNumStations);
  REQUIRE(clean.stations.size() == kNumStations);
  CHECK(clean.mtow_tons == 238);
  REQUIRE(clean.case_kind.size() == 50);
  for (auto k : clean.case_kind) CHECK(k == CaseKind::Gust);
  CHECK(clean.outputs.allFinite());

  // free tip: the outermost station carries no moment
  CHECK(clean.outputs.col(kNumStations - 1).cwiseAbs().maxCoeff() == 0.0);

  Dataset again = generate_dataset(geom, 238, 50, 123, 0.0);
  CHECK((clean.outputs - again.outputs).cwiseAbs().maxCoeff() == 0.0);
  CHECK((clean.features - again.features).cwiseAbs().maxCoeff() == 0.0);

  // the clean outputs are exactly the physics of the sampled features
  {
    Vec row = clean.features.row(7).transpose();
    LoadComponents lc = load_distributions(geom, row, clean.stations);
    auto [V, M] = shear_and_moment(lc.total(), clean.stations);
    (void)V;
    const double nx = row[kIdxLoadFactorX];
    const double amp = (nx < 0.0 ? 0.35 : -0.25) - 0.8 * nx;
    const int brk = break_station_index(geom, clean.stations);
    for (int k = 0; k < kNumStations; ++k) {
      double expect = M[k] * (k < brk ? 1.0 + amp : 1.0);
      CHECK(clean.outputs(7, k) == Approx(expect).epsilon(1e-12));
    }
  }

  // noise is a small multiplicative perturbation on top of the same physics
  Dataset noisy = generate_dataset(geom, 238, 50, 123, 0.005);
  CHECK((noisy.features - clean.features).cwiseAbs().maxCoeff() == 0.0);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < 50; ++i)
    for (int k = 0; k < kNumStations - 1; ++k) {
      if (clean.outputs(i, k) == 0.0) continue;
      worst = std::max(worst, std::abs(noisy.outputs(i, k) / clean.outputs(i, k) - 1.0));
    }
  CHECK(worst > 0.0);
  CHECK(worst < 0.005 * 6.0);

  CHECK_THROWS_AS(generate_dataset(geom, 238, 5, 1, 0.2), std::invalid_argument);
}

