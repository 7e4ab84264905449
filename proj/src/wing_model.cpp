#include "wingbench/wing_model.hpp"

#include "wingbench/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace wingbench {

const std::array<std::string, kNumFeatures>& feature_names() {
  static const std::array<std::string, kNumFeatures> names = {
      "defl_left_inboard_elevator",
      "stabilizer_setting",
      "defl_spoiler1_left_wing",
      "defl_spoiler2_left_wing",
      "defl_spoiler3_left_wing",
      "defl_spoiler4_left_wing",
      "defl_spoiler5_left_wing",
      "defl_spoiler6_left_wing",
      "defl_all_speed_inner_aileron",
      "defl_low_speed_outer_aileron",
      "lower_part_rudder_deflection",
      "total_ac_mass",
      "mach_number",
      "true_airspeed",
      "altitude",
      "cg_x_location_pct_amc",
      "thrust_calculated",
      "x_load_factor",
      "y_load_factor",
      "z_load_factor",
      "fuel_tank_mass_tank1l",
      "fuel_tank_mass_tank2l",
      "fuel_tank_mass_tank3l",
      "fuel_tank_mass_tank4l",
      "left_inner_engine_thrust",
  };
  return names;
}

void WingGeometry::validate() const {
  auto pos = [](double v, const char* what) {
    if (!(v > 0.0)) throw std::invalid_argument(std::string("WingGeometry: ") + what + " must be > 0");
  };
  pos(span_L, "span_L");
  pos(chord_root_Co, "chord_root_Co");
  pos(chord_tip_Ct, "chord_tip_Ct");
  pos(tank_Lf, "tank_Lf");
  pos(tank_Ctf, "tank_Ctf");
  pos(tank_Cof, "tank_Cof");
  pos(box_height_root, "box_height_root");
  pos(box_height_tip, "box_height_tip");
  pos(sigma_max, "sigma_max");
  pos(rho, "rho");
  if (chord_tip_Ct > chord_root_Co)
    throw std::invalid_argument("WingGeometry: tip chord exceeds root chord");
  if (tank_Lf > span_L)
    throw std::invalid_argument("WingGeometry: tank longer than the span");
  if (!(cover_weight_fraction > 0.0 && cover_weight_fraction < 1.0))
    throw std::invalid_argument("WingGeometry: cover_weight_fraction outside (0,1)");
}

Vec cosine_stations(double span_L) {
  Vec x(kNumStations);
  for (int k = 0; k < kNumStations; ++k)
    x[k] = span_L * (1.0 - std::cos(M_PI * k / 56.0));
  return x;
}

int break_station_index(const WingGeometry& geom, const Vec& stations) {
  const double x_break = geom.span_L - geom.tank_Lf;
  for (int k = 0; k < static_cast<int>(stations.size()); ++k)
    if (stations[k] >= x_break) return k;
  return static_cast<int>(stations.size()) - 1;
}

namespace {

double trapezoid(const Vec& f, const Vec& x) {
  double s = 0.0;
  for (Eigen::Index i = 0; i + 1 < x.size(); ++i)
    s += 0.5 * (f[i] + f[i + 1]) * (x[i + 1] - x[i]);
  return s;
}

}  // namespace

std::pair<Vec, Vec> shear_and_moment(const Vec& Q, const Vec& stations) {
  const Eigen::Index n = stations.size();
  if (n < 2) throw std::invalid_argument("shear_and_moment: need at least 2 stations");
  if (Q.size() != n) throw std::invalid_argument("shear_and_moment: Q/station size mismatch");
  for (Eigen::Index i = 0; i < n; ++i)
    if (!std::isfinite(Q[i])) throw std::invalid_argument("shear_and_moment: non-finite load");
  Vec V(n), M(n);
  V[n - 1] = 0.0;
  M[n - 1] = 0.0;
  for (Eigen::Index i = n - 2; i >= 0; --i) {
    const double dx = stations[i + 1] - stations[i];
    V[i] = V[i + 1] - 0.5 * (Q[i] + Q[i + 1]) * dx;   // V(x) = -int_x^L Q
    M[i] = M[i + 1] - 0.5 * (V[i] + V[i + 1]) * dx;   // M(x) = -int_x^L V
  }
  return {std::move(V), std::move(M)};
}

CoverWeight thickness_and_cover_weight(const Vec& M, const WingGeometry& geom,
                                       const Vec& stations) {
  const Eigen::Index n = stations.size();
  if (M.size() != n) throw std::invalid_argument("thickness_and_cover_weight: size mismatch");
  CoverWeight out;
  out.thickness.resize(n);
  Vec tC(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double h = geom.box_height(stations[i]);
    const double C = geom.chord(stations[i]);
    if (!(h > 0.0) || !(C > 0.0))
      throw std::invalid_argument("thickness_and_cover_weight: degenerate section");
    out.thickness[i] = std::abs(M[i]) / (h * C * geom.sigma_max);
    tC[i] = out.thickness[i] * C;
  }
  out.W_cover_kg = 2.0 * geom.rho * trapezoid(tC, stations);
  out.W_wing_kg = out.W_cover_kg / geom.cover_weight_fraction;
  return out;
}

LoadComponents load_distributions(const WingGeometry& geom, const Vec& features,
                                  const Vec& stations, LiftShape shape) {
  geom.validate();
  if (features.size() != kNumFeatures)
    throw std::invalid_argument("load_distributions: expected 25 features");
  for (int j = 0; j < kNumFeatures; ++j)
    if (!std::isfinite(features[j]))
      throw std::invalid_argument("load_distributions: non-finite feature " + feature_names()[j]);

  const Eigen::Index n = stations.size();
  const double L = geom.span_L;

  // unit-integral spanwise shapes
  Vec lift_shape(n), tank_shape(n), struct_shape(n);
  const double x_break = L - geom.tank_Lf;
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool inboard = stations[i] < x_break;
    lift_shape[i] = (shape == LiftShape::Stepped && inboard) ? 1.6 : 1.0;
    tank_shape[i] = stations[i] >= x_break ? 1.0 : 0.0;
    struct_shape[i] = geom.chord(stations[i]);
  }
  lift_shape /= trapezoid(lift_shape, stations);
  tank_shape /= trapezoid(tank_shape, stations);
  struct_shape /= trapezoid(struct_shape, stations);

  const double mass = features[kIdxMass];
  const double alt = features[kIdxAltitude];
  const double nz = features[kIdxLoadFactorZ];
  double fuel = 0.0;
  for (int t = 0; t < 4; ++t) fuel += features[kIdxTankFirst + t];

  // mild air-density modulation of the lift with altitude
  const double f_alt = 1.0 + 0.05 * (std::exp(-alt / 9000.0) - 1.0);

  LoadComponents lc;
  lc.lift = (mass * kGravity * nz * f_alt) * lift_shape;
  lc.fuel = (-fuel * kGravity) * tank_shape;

  // structural weight fixed point: weight -> moment -> thickness -> weight
  double W = 0.0;
  for (int it = 0; it < 3; ++it) {
    lc.structure = (-W * kGravity) * struct_shape;
    auto [V, M] = shear_and_moment(lc.total(), stations);
    (void)V;
    W = thickness_and_cover_weight(M, geom, stations).W_wing_kg;
  }
  lc.structure = (-W * kGravity) * struct_shape;
  lc.struct_weight_kg = W;
  return lc;
}

namespace {

// One sampled feature column: distribution family, mean, std, bounds.
// Families: G = Gaussian; M2/M3/M4 = equal-weight 2/3/4-component mixtures
// with component offsets chosen so the mixture keeps the listed mean/std.
enum Family { G, M2, M3, M4 };
struct FeatureSpec {
  Family fam;
  double mean, std, lo, hi;
};

constexpr FeatureSpec kFeatureTable[kNumFeatures] = {
    {G, 0.015, 0.034, -0.116, 0.108},       // elevator deflection
    {M2, -0.033, 0.023, -0.093, 0.0033},    // stabilizer setting
    {M2, -0.221, 0.218, -0.436, 0.0},       // spoiler 1
    {M2, -0.266, 0.262, -0.755, 0.230},     // spoiler 2
    {M2, -0.266, 0.262, -0.755, 0.230},     // spoiler 3
    {M2, -0.266, 0.262, -0.755, 0.230},     // spoiler 4
    {M2, -0.266, 0.262, -0.755, 0.230},     // spoiler 5
    {M2, -0.266, 0.262, -0.755, 0.230},     // spoiler 6
    {G, -0.029, 0.086, -0.58, 0.58},        // inner aileron
    {M4, -0.028, 0.053, -0.157, 0.0},       // outer aileron
    {G, 0.0, 0.011, -0.072, 0.072},         // rudder lower part
    {M3, 195738, 35428, 135093, 238000},    // total a/c mass (kg); max scales with mtow
    {M3, 0.716, 0.19, 0.372, 0.93},         // Mach
    {M3, 223, 50, 126, 282},                // true airspeed (m/s)
    {M3, 6270, 4519, 0, 12634},             // altitude (m)
    {M3, 0.297, 0.114, 0.140, 0.42},        // cg x-location
    {M3, 131442, 157160, 0, 415495},        // thrust (N)
    {G, -0.020, 0.107, -0.3, 0.261},        // x load factor
    {G, 0.0, 0.08, -0.306, 0.307},          // y load factor
    {G, 1.024, 0.43, -0.701, 2.643},        // z load factor
    {M3, 392, 1030, 0, 4341},               // tank 1 (kg); mean scales with mtow
    {M3, 13008, 12721, 0, 36295},           // tank 2
    {M3, 1883, 1377, 0, 3087},              // tank 3
    {M3, 945, 1029, 0, 2592},               // tank 4
    {M3, 65721, 78579, 0, 207747},          // inner engine thrust (N)
};

// outer-tank usage grows with the weight variant
double tank1_mean_scale(int mtow_tons) {
  switch (mtow_tons) {
    case 238: return 1.0;
    case 242: return 1.5;
    case 247: return 2.17;
    case 251: return 3.7;
    default: throw std::invalid_argument("unknown mtow variant: " + std::to_string(mtow_tons));
  }
}

double sample_one(rng::Stream& st, const FeatureSpec& fs) {
  double means[4];
  double comp_std;
  int ncomp;
  switch (fs.fam) {
    case G:
      ncomp = 1;
      means[0] = fs.mean;
      comp_std = fs.std;
      break;
    case M2:
      ncomp = 2;
      means[0] = fs.mean - 0.7 * fs.std;
      means[1] = fs.mean + 0.7 * fs.std;
      comp_std = fs.std * std::sqrt(0.51);
      break;
    case M3:
      ncomp = 3;
      means[0] = fs.mean - 0.8 * fs.std;
      means[1] = fs.mean;
      means[2] = fs.mean + 0.8 * fs.std;
      comp_std = fs.std * std::sqrt(1.0 - (2.0 / 3.0) * 0.64);
      break;
    default:  // M4
      ncomp = 4;
      means[0] = fs.mean - 1.05 * fs.std;
      means[1] = fs.mean - 0.35 * fs.std;
      means[2] = fs.mean + 0.35 * fs.std;
      means[3] = fs.mean + 1.05 * fs.std;
      comp_std = fs.std * 0.622;
      break;
  }
  const int c = static_cast<int>(st.index(static_cast<std::size_t>(ncomp)));
  return st.truncated_normal(means[c], comp_std, fs.lo, fs.hi);
}

}  // namespace

Mat sample_features(int mtow_tons, Eigen::Index n, uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_features: n must be >= 1");
  const double t1_scale = tank1_mean_scale(mtow_tons);  // validates mtow too
  Mat X(n, kNumFeatures);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int j = 0; j < kNumFeatures; ++j) {
      FeatureSpec fs = kFeatureTable[j];
      if (j == kIdxMass) fs.hi = mtow_tons * 1000.0;
      if (j == kIdxTankFirst) fs.mean *= t1_scale;
      auto st = rng::substream(seed, static_cast<uint64_t>(i), static_cast<uint64_t>(j));
      X(i, j) = sample_one(st, fs);
    }
  }
  return X;
}

Dataset generate_dataset(const WingGeometry& geom, int mtow_tons, Eigen::Index n,
                         uint64_t seed, double noise_rel, LiftShape shape) {
  geom.validate();
  if (!(noise_rel >= 0.0 && noise_rel <= 0.05))
    throw std::invalid_argument("generate_dataset: noise_rel outside [0, 0.05]");

  Dataset ds;
  ds.stations = cosine_stations(geom.span_L);
  ds.mtow_tons = mtow_tons;
  ds.features = sample_features(mtow_tons, n, seed);
  ds.outputs.resize(n, kNumStations);
  ds.case_kind.assign(static_cast<std::size_t>(n), CaseKind::Gust);

  const int brk = break_station_index(geom, ds.stations);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec row = ds.features.row(i).transpose();
    const auto lc = load_distributions(geom, row, ds.stations, shape);
    auto [V, M] = shear_and_moment(lc.total(), ds.stations);
    (void)V;

    // Gust regime modifier: a multiplicative step on the inboard stations
    // keyed to the X-load-factor sign, so two distinct curve families emerge
    // (root-heavy positive-gust cases vs flatter negative-gust cases).
    const double nx = row[kIdxLoadFactorX];
    const double amp = (nx < 0.0 ? 0.35 : -0.25) - 0.8 * nx;
    for (int k = 0; k < kNumStations; ++k) {
      double y = M[k] * (k < brk ? 1.0 + amp : 1.0);
      ds.outputs(i, k) = y;
    }
    if (noise_rel > 0.0) {
      auto st = rng::substream(seed, static_cast<uint64_t>(i), 1000);
      for (int k = 0; k < kNumStations; ++k)
        ds.outputs(i, k) *= 1.0 + noise_rel * st.normal();
    }
  }
  return ds;
}

}  // namespace wingbench
